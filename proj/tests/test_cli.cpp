#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fracprec/config.hpp"
#include "fracprec/report.hpp"
#include "fracprec/runner.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

using namespace fracprec;

namespace {

std::string preset_dir() {
  const char* env = std::getenv("FRACPREC_PRESET_DIR");
  return env ? env : "presets";
}

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  REQUIRE(f.good());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

const char* kTinyConfig =
    "[experiment]\n"
    "problem = l2-trace\n"
    "levels = 1,2\n"
    "pairing = p2p1,p2p0\n"
    "precond = hinv-mass\n"
    "compute = cond\n";

}  // namespace

TEST_CASE("ini parsing: sections, comments, errors") {
  IniFile ini = IniFile::parse_string("# comment\n[a]\nx = 1\ny = two words ; trailing\n[b]\nx=3\n");
  CHECK(ini.get("a.x") == "1");
  CHECK(ini.get("a.y") == "two words");
  CHECK(ini.get("b.x") == "3");
  CHECK(ini.get("b.missing", "fb") == "fb");
  CHECK_THROWS(ini.get("b.missing"));
  CHECK_THROWS(IniFile::parse_string("[a]\nx = 1\nx = 2\n"));
  CHECK_THROWS(IniFile::parse_string("[a\nx = 1\n"));
  CHECK_THROWS(IniFile::parse_string("[a]\njust a line\n"));
  CHECK_THROWS(IniFile::parse_file("no/such/file.ini"));
}

TEST_CASE("experiment config: lists, defaults, validation") {
  ExperimentConfig cfg = ExperimentConfig::from_ini(IniFile::parse_string(kTinyConfig));
  CHECK(cfg.problem == "l2-trace");
  CHECK(cfg.levels == std::vector<int>{1, 2});
  CHECK(cfg.pairings == std::vector<std::string>{"p2p1", "p2p0"});
  CHECK(cfg.mesh_family == "us");
  CHECK(cfg.compute == "cond");
  CHECK(cfg.mus == std::vector<double>{1.0});

  CHECK_THROWS(ExperimentConfig::from_ini(
      IniFile::parse_string("[experiment]\nproblem = stokes\nlevels = 1\nprecond = hinv-mass\n")));
  CHECK_THROWS(ExperimentConfig::from_ini(IniFile::parse_string(
      "[experiment]\nproblem = l2-trace\nlevels = 1\nprecond = hinv-mass\ncompute = fast\n")));
  CHECK_THROWS(ExperimentConfig::from_ini(IniFile::parse_string(
      "[experiment]\nproblem = l2-trace\nlevels = 1\nprecond = hinv-mass\nmesh_family = xx\n")));
}

TEST_CASE("float formatting is shortest round-trip") {
  CHECK(fmt_double(0.1) == "0.1");
  CHECK(fmt_double(1.0) == "1");
  CHECK(fmt_double(-2.5e-8) == "-2.5e-08");
  for (double v : {1.0 / 3.0, 4.631417991263336, 1e-100, 12345.6789}) {
    CHECK(std::stod(fmt_double(v)) == v);
  }
}

TEST_CASE("csv round trip preserves records including empty cells") {
  RunRecord r;
  r.problem = "l2-trace";
  r.mesh_family = "us";
  r.level = 3;
  r.h = 0.125;
  r.pairing = "p2p1";
  r.bc = "none";
  r.precond = "hinv-mass";
  r.dofs_per_field = "81+9";
  r.cond = 4.63;  // iterations/converged left empty
  std::string csv = to_csv({r});
  CHECK(csv.rfind(std::string(kCsvHeader) + "\n", 0) == 0);
  CHECK(csv.find("\r") == std::string::npos);

  write_csv({r}, "rt.csv");
  auto back = read_csv("rt.csv");
  REQUIRE(back.size() == 1);
  CHECK(back[0].problem == r.problem);
  CHECK(back[0].level == 3);
  CHECK(!back[0].iterations.has_value());
  CHECK(!back[0].converged.has_value());
  REQUIRE(back[0].cond.has_value());
  CHECK(*back[0].cond == 4.63);
  std::remove("rt.csv");
}

TEST_CASE("run_experiment: deterministic ordering and byte-identical reruns") {
  ExperimentConfig cfg = ExperimentConfig::from_ini(IniFile::parse_string(kTinyConfig));
  auto recs1 = run_experiment(cfg);
  auto recs2 = run_experiment(cfg);
  REQUIRE(recs1.size() == 4);  // 2 pairings x 2 levels
  CHECK(recs1[0].pairing == "p2p1");
  CHECK(recs1[0].level == 1);
  CHECK(recs1[1].level == 2);
  CHECK(recs1[2].pairing == "p2p0");
  CHECK(to_csv(recs1) == to_csv(recs2));
  for (const auto& r : recs1) {
    CHECK(r.seconds == 0.0);  // timing off by default keeps reruns stable
    REQUIRE(r.cond.has_value());
    CHECK(*r.cond > 1.0);
  }
}

TEST_CASE("dense-cap overflow yields a row with empty spectral cells") {
  ExperimentConfig cfg = ExperimentConfig::from_ini(IniFile::parse_string(kTinyConfig));
  cfg.dense_cap = 10;
  auto recs = run_experiment(cfg);
  REQUIRE(recs.size() == 4);
  for (const auto& r : recs) CHECK(!r.cond.has_value());
}

TEST_CASE("heatmap: error cases name the offender") {
  {
    std::ofstream f("empty.csv");
  }
  bool threw = false;
  try {
    render_heatmap("empty.csv", "cond", "out.svg");
  } catch (const std::exception& e) {
    threw = true;
    CHECK(std::string(e.what()).find("empty.csv") != std::string::npos);
  }
  CHECK(threw);
  {
    std::ofstream f("cols.csv");
    f << "alpha,beta\n1,2\n";
  }
  CHECK_THROWS(render_heatmap("cols.csv", "cond", "out.svg"));
  CHECK_THROWS(render_heatmap("no_such.csv", "cond", "out.svg"));
  std::remove("empty.csv");
  std::remove("cols.csv");
  std::remove("out.svg");
}

TEST_CASE("heatmap renders an svg from run output") {
  ExperimentConfig cfg = ExperimentConfig::from_ini(IniFile::parse_string(kTinyConfig));
  auto recs = run_experiment(cfg);
  write_csv(recs, "hm.csv");
  render_heatmap("hm.csv", "cond", "hm.svg");
  std::string svg = read_file("hm.svg");
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.find("</svg>") != std::string::npos);
  CHECK_THROWS(render_heatmap("hm.csv", "bogus-column", "hm2.svg"));
  std::remove("hm.csv");
  std::remove("hm.svg");
}

TEST_CASE("presets exist and parse") {
  for (std::string name : {"table1", "table2", "table3", "table4", "ds-naive-sweep",
                           "ds-robust-sweep"}) {
    IniFile ini = IniFile::parse_file(preset_dir() + "/" + name + ".ini");
    ExperimentConfig cfg = ExperimentConfig::from_ini(ini);
    CHECK(!cfg.levels.empty());
    CHECK(!cfg.preconds.empty());
  }
  IniFile env = IniFile::parse_file(preset_dir() + "/envelope-all.ini");
  CHECK(env.get("envelope.case") == "all");
}

#ifdef FRACPREC_BIN
TEST_CASE("command line: run, envelope preset, mesh utilities") {
  const std::string bin = FRACPREC_BIN;
  {
    std::ofstream f("cli.ini");
    f << kTinyConfig;
  }
  CHECK(std::system((bin + " run --config cli.ini --out cli.csv").c_str()) == 0);
  auto recs = read_csv("cli.csv");
  CHECK(recs.size() == 4);

  CHECK(std::system((bin + " run --config " + preset_dir() +
                     "/envelope-all.ini --out cli_env.csv > /dev/null")
                        .c_str()) == 0);
  std::string env_csv = read_file("cli_env.csv");
  CHECK(env_csv.rfind("case,param,metric,measured,expected,error\n", 0) == 0);

  CHECK(std::system((bin + " mesh gen -n 2 --out cli.msh > /dev/null").c_str()) == 0);
  CHECK(std::system((bin + " mesh info cli.msh > /dev/null").c_str()) == 0);
  CHECK(std::system((bin + " run --config no_such.ini > /dev/null 2>&1").c_str()) != 0);
  CHECK(std::system((bin + " envelope-verify --case bogus > /dev/null 2>&1").c_str()) != 0);

  std::remove("cli.ini");
  std::remove("cli.csv");
  std::remove("cli_env.csv");
  std::remove("cli.msh");
}
#endif
