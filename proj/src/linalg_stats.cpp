#include "gcact/linalg_stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gcact/error.hpp"

namespace gcact {

namespace {

// Condition estimate (ratio of extreme |R_ii|) beyond which a fit is flagged.
constexpr double kConditionWarning = 1e10;

// Residual sum, relative to fitted signal energy, treated as rounding noise of an exact fit.
constexpr double kRssRoundingFloor = 1e-24;

bool is_subset(const std::vector<ColumnLabel>& small, const std::vector<ColumnLabel>& large) {
  std::vector<bool> used(large.size(), false);
  for (const auto& label : small) {
    bool found = false;
    for (std::size_t j = 0; j < large.size(); ++j) {
      if (!used[j] && large[j] == label) {
        used[j] = true;
        found = true;
        break;
      }
    }
    if (!found) return false;
  }
  return true;
}

// Continued fraction for I_x(a, b), modified Lentz. Converges fast for x < (a+1)/(a+b+2).
double beta_continued_fraction(double x, double a, double b) {
  constexpr int kMaxIterations = 10000;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIterations; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace

std::string ColumnLabel::to_string() const {
  switch (kind) {
    case ColumnKind::Intercept:
      return "intercept";
    case ColumnKind::LinearTrend:
      return "linear-trend";
    case ColumnKind::StimulusLag:
      return "stimulus-lag-" + std::to_string(lag);
    case ColumnKind::AutoLag:
      return "auto-lag-" + std::to_string(lag);
    case ColumnKind::ConvolvedRegressor:
      return "convolved-regressor";
  }
  return "unknown";
}

void DesignMatrix::add_column(ColumnLabel label, std::span<const double> values) {
  if (values.size() != rows_) {
    throw InvalidParameter("column " + label.to_string() + " has " + std::to_string(values.size()) +
                           " rows, design has " + std::to_string(rows_));
  }
  labels_.push_back(label);
  columns_.emplace_back(values.begin(), values.end());
}

std::span<const double> DesignMatrix::column(std::size_t c) const { return columns_.at(c); }

Eigen::MatrixXd DesignMatrix::to_eigen() const {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(rows_), static_cast<Eigen::Index>(cols()));
  for (std::size_t c = 0; c < cols(); ++c) {
    for (std::size_t r = 0; r < rows_; ++r) x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = columns_[c][r];
  }
  return x;
}

double RegressionFit::coefficient(const ColumnLabel& label) const {
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == label) return coefficients[i];
  }
  throw InvalidParameter("fit has no column " + label.to_string());
}

RegressionFit least_squares(const DesignMatrix& design, std::span<const double> y) {
  const std::size_t rows = design.rows();
  const std::size_t cols = design.cols();
  if (cols == 0) throw InvalidParameter("design matrix has no columns");
  if (y.size() != rows) {
    throw InvalidParameter("response has " + std::to_string(y.size()) + " samples, design has " +
                           std::to_string(rows) + " rows");
  }
  if (rows < cols) {
    throw InvalidParameter("design has fewer observations (" + std::to_string(rows) + ") than regressors (" +
                           std::to_string(cols) + ")");
  }
  const Eigen::MatrixXd x = design.to_eigen();
  if (!x.allFinite()) throw InvalidParameter("design matrix has non-finite entries");
  const Eigen::Map<const Eigen::VectorXd> yv(y.data(), static_cast<Eigen::Index>(rows));
  if (!yv.allFinite()) throw InvalidParameter("response has non-finite entries");

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x.rows(), x.cols());
  qr.setThreshold(static_cast<double>(std::max(rows, cols)) * std::numeric_limits<double>::epsilon());
  qr.compute(x);
  const auto rank = static_cast<std::size_t>(qr.rank());
  if (rank < cols) throw RankDeficient(rank, cols);

  const Eigen::VectorXd beta = qr.solve(yv);
  const Eigen::VectorXd fitted = x * beta;

  RegressionFit fit;
  fit.coefficients.assign(beta.data(), beta.data() + beta.size());
  fit.fitted.assign(fitted.data(), fitted.data() + fitted.size());
  fit.labels = design.labels();
  fit.rows = rows;
  fit.dof_residual = static_cast<long>(rows) - static_cast<long>(cols);
  double rss = 0.0;
  for (std::size_t i = 0; i < rows; ++i) {
    const double e = y[i] - fit.fitted[i];
    rss += e * e;
  }
  fit.rss = rss;

  const auto diag = qr.matrixR().diagonal().cwiseAbs();
  fit.condition_warning = diag.maxCoeff() > kConditionWarning * diag.minCoeff();
  return fit;
}

FTestResult f_test_nested(const RegressionFit& full, const RegressionFit& restricted, std::size_t n_used) {
  if (restricted.cols() >= full.cols() || !is_subset(restricted.labels, full.labels)) {
    throw InvalidParameter("restricted model columns are not a strict subset of the full model's");
  }
  FTestResult out;
  out.d1 = static_cast<long>(full.cols()) - static_cast<long>(restricted.cols());
  out.d2 = static_cast<long>(n_used) - static_cast<long>(full.cols());
  if (out.d1 <= 0 || out.d2 <= 0) {
    throw InvalidParameter("F test needs positive degrees of freedom (d1=" + std::to_string(out.d1) +
                           ", d2=" + std::to_string(out.d2) + ")");
  }
  double signal = 0.0;
  for (double v : full.fitted) signal += v * v;
  const double floor = kRssRoundingFloor * signal;
  if (restricted.rss < full.rss - 1e-9 * restricted.rss - floor) {
    throw InvalidParameter("restricted rss is below full rss: models are not nested");
  }
  if (restricted.rss <= floor) {
    out.perfect_fit = true;
    return out;
  }
  const double gain = std::max(0.0, restricted.rss - full.rss);
  if (gain == 0.0) return out;
  if (full.rss == 0.0 || full.rss <= 1e-20 * restricted.rss) {
    out.perfect_fit = true;
    out.f_stat = std::numeric_limits<double>::infinity();
    out.p_value = 0.0;
    return out;
  }
  out.f_stat = (gain / static_cast<double>(out.d1)) / (full.rss / static_cast<double>(out.d2));
  out.p_value = f_sf(out.f_stat, static_cast<double>(out.d1), static_cast<double>(out.d2));
  return out;
}

double incomplete_beta(double x, double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) throw InvalidParameter("incomplete beta needs a, b > 0");
  if (!(x >= 0.0 && x <= 1.0)) throw InvalidParameter("incomplete beta needs x in [0, 1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double log_front =
      std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(x, a, b) / a;
  return 1.0 - front * beta_continued_fraction(1.0 - x, b, a) / b;
}

double f_cdf(double x, double d1, double d2) {
  if (!(d1 > 0.0) || !(d2 > 0.0)) throw InvalidParameter("F distribution degrees of freedom must be positive");
  if (std::isnan(x) || x < 0.0) throw InvalidParameter("F CDF argument must be >= 0");
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  const double z = d1 * x / (d1 * x + d2);
  // Evaluate through the complement when z is close to 1 so small tails keep precision.
  if (z > 0.5) return 1.0 - incomplete_beta(d2 / (d2 + d1 * x), d2 / 2.0, d1 / 2.0);
  return incomplete_beta(z, d1 / 2.0, d2 / 2.0);
}

double f_sf(double x, double d1, double d2) {
  if (!(d1 > 0.0) || !(d2 > 0.0)) throw InvalidParameter("F distribution degrees of freedom must be positive");
  if (std::isnan(x) || x < 0.0) throw InvalidParameter("F survival argument must be >= 0");
  if (x == 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  return incomplete_beta(d2 / (d2 + d1 * x), d2 / 2.0, d1 / 2.0);
}

}  // namespace gcact
