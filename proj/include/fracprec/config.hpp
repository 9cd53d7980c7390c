#pragma once

#include <map>
#include <string>
#include <vector>

namespace fracprec {

/// Minimal INI reader: [section] headers, key = value lines, '#' or ';'
/// comments. Values keep internal whitespace; keys are section.key.
class IniFile {
public:
  static IniFile parse_file(const std::string& path);
  static IniFile parse_string(const std::string& text);

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  std::string get(const std::string& key) const;
  std::string get(const std::string& key, const std::string& fallback) const;
  const std::map<std::string, std::string>& values() const { return values_; }

private:
  std::map<std::string, std::string> values_;
};

/// One experiment sweep; list-valued fields are space-separated in the INI.
struct ExperimentConfig {
  std::string problem;                 // l2-trace | babuska | darcy-stokes
  std::string mesh_family = "us";      // us | uu | nu
  std::vector<int> levels;
  std::vector<std::string> pairings;   // scalar problems
  std::string bc;                      // scalar problems; empty -> default
  std::vector<std::string> preconds;
  std::vector<double> mus{1.0};
  std::vector<double> ks{1.0};
  std::vector<double> alphas{1.0};
  std::string compute = "both";        // cond | iterations | both
  std::string method = "dense";        // condition-number route
  int dense_cap = 12000;
  int max_iterations = 1000;
  double rtol = 1e-8;
  double atol = 1e-10;
  unsigned long seed = 1;
  bool timing = false;
  std::string mesh_dir = "data";       // fixture directory for uu/nu

  static ExperimentConfig from_ini(const IniFile& ini);
  static ExperimentConfig load(const std::string& path);
};

}  // namespace fracprec
