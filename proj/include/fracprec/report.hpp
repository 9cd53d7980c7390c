#pragma once

#include "fracprec/runner.hpp"

#include <string>
#include <vector>

namespace fracprec {

/// One line of `envelope-verify` output.
struct VerifyRow {
  std::string case_name;
  double param = 0;     // eps or h (0 for fitted-slope rows)
  std::string metric;
  double measured = 0;
  double expected = 0;
  double error = 0;  // |measured - expected| / max(1, |expected|)
};

/// Exactness/convergence checks of the envelope operations. Case is one of
/// halfplane, disk, square-corner, fe-scaling, or all.
std::vector<VerifyRow> envelope_verify(const std::string& case_name);

std::string verify_to_csv(const std::vector<VerifyRow>& rows);

/// Small-multiples SVG: one panel per (mu, K), level on x, value on y (log
/// scale), one polyline per (pairing, precond) series.
void render_heatmap(const std::string& csv_path, const std::string& value_column,
                    const std::string& out_path);

}  // namespace fracprec
