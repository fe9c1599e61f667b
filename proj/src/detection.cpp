#include "gcact/detection.hpp"

namespace gcact {

std::string Diagnostics::to_string() const {
  std::string out;
  auto add = [&out](bool flag, const char* name) {
    if (!flag) return;
    if (!out.empty()) out += '|';
    out += name;
  };
  add(constant_series, "constant-series");
  add(perfect_fit, "perfect-fit");
  add(ill_conditioned, "ill-conditioned");
  add(rank_deficient, "rank-deficient");
  add(invalid_input, "invalid-input");
  return out.empty() ? "none" : out;
}

FitSummary FitSummary::of(const RegressionFit& fit) {
  FitSummary s;
  s.coefficients = fit.coefficients;
  s.rss = fit.rss;
  s.dof_residual = fit.dof_residual;
  s.cols = fit.cols();
  s.condition_warning = fit.condition_warning;
  return s;
}

}  // namespace gcact
