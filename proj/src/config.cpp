#include "fracprec/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace fracprec {

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      cur = trim(cur);
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  cur = trim(cur);
  if (!cur.empty()) out.push_back(cur);
  return out;
}

std::vector<double> split_doubles(const std::string& s) {
  std::vector<double> out;
  for (const auto& tok : split_list(s)) out.push_back(std::stod(tok));
  return out;
}

std::vector<int> split_ints(const std::string& s) {
  std::vector<int> out;
  for (const auto& tok : split_list(s)) out.push_back(std::stoi(tok));
  return out;
}

}  // namespace

IniFile IniFile::parse_string(const std::string& text) {
  IniFile ini;
  std::istringstream is(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    auto cut = line.find_first_of("#;");
    if (cut != std::string::npos) line = line.substr(0, cut);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw std::runtime_error("ini line " + std::to_string(lineno) + ": unterminated section");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("ini line " + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw std::runtime_error("ini line " + std::to_string(lineno) + ": empty key");
    std::string full = section.empty() ? key : section + "." + key;
    if (ini.values_.count(full))
      throw std::runtime_error("ini line " + std::to_string(lineno) + ": duplicate key " + full);
    ini.values_[full] = value;
  }
  return ini;
}

IniFile IniFile::parse_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open config file: " + path);
  std::ostringstream buf;
  buf << f.rdbuf();
  return parse_string(buf.str());
}

std::string IniFile::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw std::runtime_error("missing config key: " + key);
  return it->second;
}

std::string IniFile::get(const std::string& key, const std::string& fallback) const {
  auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

ExperimentConfig ExperimentConfig::from_ini(const IniFile& ini) {
  ExperimentConfig cfg;
  const std::string p = "experiment.";
  cfg.problem = ini.get(p + "problem");
  if (cfg.problem != "l2-trace" && cfg.problem != "babuska" && cfg.problem != "darcy-stokes")
    throw std::runtime_error("unknown problem: " + cfg.problem);
  cfg.mesh_family = ini.get(p + "mesh_family", "us");
  if (cfg.mesh_family != "us" && cfg.mesh_family != "uu" && cfg.mesh_family != "nu")
    throw std::runtime_error("unknown mesh family: " + cfg.mesh_family);
  cfg.levels = split_ints(ini.get(p + "levels"));
  if (cfg.levels.empty()) throw std::runtime_error("config: empty level list");
  cfg.pairings = split_list(ini.get(p + "pairing", "p2p1"));
  cfg.bc = ini.get(p + "bc", "");
  cfg.preconds = split_list(ini.get(p + "precond"));
  if (cfg.preconds.empty()) throw std::runtime_error("config: empty precond list");
  if (ini.has(p + "mu")) cfg.mus = split_doubles(ini.get(p + "mu"));
  if (ini.has(p + "K")) cfg.ks = split_doubles(ini.get(p + "K"));
  if (ini.has(p + "alpha")) cfg.alphas = split_doubles(ini.get(p + "alpha"));
  cfg.compute = ini.get(p + "compute", "both");
  if (cfg.compute != "cond" && cfg.compute != "iterations" && cfg.compute != "both")
    throw std::runtime_error("config: compute must be cond, iterations or both");
  cfg.method = ini.get(p + "method", "dense");
  cfg.dense_cap = std::stoi(ini.get(p + "dense_cap", "12000"));
  cfg.max_iterations = std::stoi(ini.get(p + "max_iterations", "1000"));
  cfg.rtol = std::stod(ini.get(p + "rtol", "1e-8"));
  cfg.atol = std::stod(ini.get(p + "atol", "1e-10"));
  cfg.seed = std::stoul(ini.get(p + "seed", "1"));
  std::string timing = ini.get(p + "timing", "false");
  if (timing != "true" && timing != "false")
    throw std::runtime_error("config: timing must be true or false");
  cfg.timing = timing == "true";
  cfg.mesh_dir = ini.get(p + "mesh_dir", "data");
  return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  return from_ini(IniFile::parse_file(path));
}

}  // namespace fracprec
