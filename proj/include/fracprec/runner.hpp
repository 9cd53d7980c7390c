#pragma once

#include "fracprec/config.hpp"
#include "fracprec/problems.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace fracprec {

/// One row of experiment output. Optional fields were not requested by the
/// run's `compute` setting and serialize as empty cells.
struct RunRecord {
  std::string problem;
  std::string mesh_family;
  int level = 0;
  double h = 0;
  std::string pairing;  // empty for the coupled problem
  std::string bc;
  std::string precond;
  double mu = 1, k = 1, alpha = 1;
  std::string dofs_per_field;  // "n1+n2+..."
  std::optional<int> iterations;
  std::optional<bool> converged;
  std::optional<double> cond;
  std::optional<double> lambda_min_abs;
  std::optional<double> lambda_max_abs;
  unsigned long seed = 1;
  double seconds = 0;
};

/// Shortest round-trip decimal formatting (used for every CSV float).
std::string fmt_double(double v);

extern const char* const kCsvHeader;

std::string to_csv(const std::vector<RunRecord>& records);
void write_csv(const std::vector<RunRecord>& records, const std::string& path);
std::vector<RunRecord> read_csv(const std::string& path);

/// Execute a configured sweep. Rows come out in the deterministic nesting
/// pairing -> precond -> level -> mu -> K -> alpha.
std::vector<RunRecord> run_experiment(const ExperimentConfig& cfg);

/// Build the system for one combination (shared with the tests).
BlockSystem build_from_config(const ExperimentConfig& cfg, const std::string& pairing,
                              const std::string& precond, int level, const ParameterSet& params);

/// Cap OpenMP workers from the FRACPREC_THREADS environment variable.
void apply_thread_env();

}  // namespace fracprec
