#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace gcact {

enum class ColumnKind { Intercept, LinearTrend, StimulusLag, AutoLag, ConvolvedRegressor };

/// Semantic tag for one regressor. `lag` is meaningful for the lag kinds only.
struct ColumnLabel {
  ColumnKind kind = ColumnKind::Intercept;
  int lag = 0;

  bool operator==(const ColumnLabel&) const = default;
  std::string to_string() const;
};

/// Column-by-column regression design.
class DesignMatrix {
 public:
  explicit DesignMatrix(std::size_t rows) : rows_(rows) {}

  void add_column(ColumnLabel label, std::span<const double> values);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return labels_.size(); }
  const std::vector<ColumnLabel>& labels() const noexcept { return labels_; }
  std::span<const double> column(std::size_t c) const;
  double at(std::size_t row, std::size_t col) const { return columns_[col][row]; }

  Eigen::MatrixXd to_eigen() const;

 private:
  std::size_t rows_;
  std::vector<ColumnLabel> labels_;
  std::vector<std::vector<double>> columns_;
};

struct RegressionFit {
  std::vector<double> coefficients;
  std::vector<ColumnLabel> labels;
  std::vector<double> fitted;
  double rss = 0.0;
  std::size_t rows = 0;
  long dof_residual = 0;
  bool condition_warning = false;

  std::size_t cols() const noexcept { return coefficients.size(); }
  /// Coefficient for `label`; throws InvalidParameter when absent.
  double coefficient(const ColumnLabel& label) const;
};

/// Least-squares fit by column-pivoted Householder QR. Numerical rank is the
/// number of |R_ii| above max(rows, cols)·eps·max|R_ii|; anything short of
/// full column rank throws RankDeficient.
RegressionFit least_squares(const DesignMatrix& design, std::span<const double> y);

struct FTestResult {
  double f_stat = 0.0;
  double p_value = 1.0;
  long d1 = 0;
  long d2 = 0;
  bool perfect_fit = false;
};

/// Nested-model F test. `restricted`'s columns must be a strict subset of `full`'s.
FTestResult f_test_nested(const RegressionFit& full, const RegressionFit& restricted, std::size_t n_used);

/// Regularized incomplete beta I_x(a, b).
double incomplete_beta(double x, double a, double b);

/// CDF of the F(d1, d2) distribution.
double f_cdf(double x, double d1, double d2);

/// Upper tail 1 - f_cdf, evaluated without cancellation.
double f_sf(double x, double d1, double d2);

struct RankSumResult {
  double u_stat = 0.0;  ///< Mann-Whitney U of sample_a
  double p_value = 1.0;
  bool exact = false;
};

/// Size at which the rank-sum test switches from exact enumeration to the normal approximation.
inline constexpr std::size_t kRankSumExactBelow = 8;

/// Two-sided Wilcoxon-Mann-Whitney test with midranks for ties.
RankSumResult rank_sum_test(std::span<const double> sample_a, std::span<const double> sample_b);

}  // namespace gcact
