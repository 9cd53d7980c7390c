#include "fracprec/config.hpp"
#include "fracprec/report.hpp"
#include "fracprec/runner.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

namespace {

int cmd_mesh_gen(int n, const std::string& out) {
  auto mesh = fracprec::generate_crossed(n, n, {0, 0, 1, 1});
  fracprec::write_mesh(mesh, out);
  std::cout << "wrote " << out << ": " << mesh.vertices.size() << " vertices, "
            << mesh.cells.size() << " cells\n";
  return 0;
}

int cmd_mesh_info(const std::string& path) {
  auto mesh = fracprec::read_mesh(path);
  fracprec::validate(mesh);
  std::cout << "vertices: " << mesh.vertices.size() << "\n"
            << "cells: " << mesh.cells.size() << "\n"
            << "area: " << fracprec::fmt_double(mesh.total_area()) << "\n"
            << "tagged facets: " << mesh.facet_tags.size() << "\n";
  std::map<std::string, int> tag_counts;
  for (const auto& [edge, tag] : mesh.facet_tags) ++tag_counts[tag];
  for (const auto& [tag, count] : tag_counts)
    std::cout << "  " << tag << ": " << count << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  fracprec::apply_thread_env();
  CLI::App app{"Finite element study of interface preconditioners for "
               "trace-coupled saddle-point systems"};
  app.require_subcommand(1);

  std::string config_path, out_path, csv_path, value = "cond", case_name, mesh_path;
  int mesh_n = 4;

  auto* run = app.add_subcommand("run", "Execute a configured experiment sweep");
  run->add_option("--config", config_path, "INI config file")->required();
  run->add_option("--out", out_path, "Output CSV path (default: stdout)");

  auto* heat = app.add_subcommand("heatmap", "Render an SVG report from a run CSV");
  heat->add_option("--csv", csv_path, "Input CSV from `run`")->required();
  heat->add_option("--value", value, "cond or iterations")->required();
  heat->add_option("--out", out_path, "Output SVG path")->required();

  auto* env = app.add_subcommand("envelope-verify", "Interface-envelope exactness checks");
  env->add_option("--case", case_name, "halfplane|disk|square-corner|fe-scaling|all")->required();
  env->add_option("--out", out_path, "Output CSV path (default: stdout)");

  auto* mesh = app.add_subcommand("mesh", "Mesh utilities");
  mesh->require_subcommand(1);
  auto* gen = mesh->add_subcommand("gen", "Generate a crossed unit-square mesh");
  gen->add_option("-n", mesh_n, "Squares per side")->required();
  gen->add_option("--out", out_path, "Output mesh path")->required();
  auto* info = mesh->add_subcommand("info", "Validate and summarize a mesh file");
  info->add_option("path", mesh_path, "Mesh file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      auto ini = fracprec::IniFile::parse_file(config_path);
      std::string csv;
      if (ini.has("envelope.case")) {
        csv = fracprec::verify_to_csv(fracprec::envelope_verify(ini.get("envelope.case")));
      } else {
        auto cfg = fracprec::ExperimentConfig::from_ini(ini);
        csv = fracprec::to_csv(fracprec::run_experiment(cfg));
      }
      if (out_path.empty()) {
        std::cout << csv;
      } else {
        std::ofstream f(out_path, std::ios::binary);
        if (!f) throw std::runtime_error("cannot open output file: " + out_path);
        f << csv;
      }
      return 0;
    }
    if (heat->parsed()) {
      fracprec::render_heatmap(csv_path, value, out_path);
      return 0;
    }
    if (env->parsed()) {
      auto rows = fracprec::envelope_verify(case_name);
      std::string csv = fracprec::verify_to_csv(rows);
      if (out_path.empty()) {
        std::cout << csv;
      } else {
        std::ofstream f(out_path, std::ios::binary);
        if (!f) throw std::runtime_error("cannot open output file: " + out_path);
        f << csv;
      }
      return 0;
    }
    if (gen->parsed()) return cmd_mesh_gen(mesh_n, out_path);
    if (info->parsed()) return cmd_mesh_info(mesh_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
