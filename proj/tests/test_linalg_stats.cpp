#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "gcact/error.hpp"
#include "gcact/linalg_stats.hpp"
#include "oracles.hpp"
#include "quadrature_oracle.hpp"

using namespace gcact;

namespace {

struct RandomSystem {
  DesignMatrix design{0};
  std::vector<std::vector<double>> rows;
  std::vector<double> y;
};

RandomSystem random_system(std::mt19937_64& rng, std::size_t n, std::size_t k) {
  std::normal_distribution<double> normal(0.0, 1.0);
  RandomSystem sys;
  sys.design = DesignMatrix(n);
  sys.rows.assign(n, std::vector<double>(k));
  for (std::size_t c = 0; c < k; ++c) {
    std::vector<double> col(n);
    for (std::size_t r = 0; r < n; ++r) sys.rows[r][c] = col[r] = normal(rng);
    sys.design.add_column({ColumnKind::StimulusLag, static_cast<int>(c + 1)}, col);
  }
  sys.y.resize(n);
  for (auto& v : sys.y) v = normal(rng);
  return sys;
}

DesignMatrix line_design(std::size_t n) {
  DesignMatrix d(n);
  std::vector<double> ones(n, 1.0);
  std::vector<double> t(n);
  for (std::size_t i = 0; i < n; ++i) t[i] = static_cast<double>(i + 1);
  d.add_column({ColumnKind::Intercept}, ones);
  d.add_column({ColumnKind::LinearTrend}, t);
  return d;
}

double rel_diff(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300}); }

}  // namespace

TEST(LeastSquares, NoiselessLine) {
  const DesignMatrix d = line_design(10);
  std::vector<double> y(10);
  for (std::size_t i = 0; i < 10; ++i) y[i] = 3.0 + 2.0 * static_cast<double>(i + 1);
  const RegressionFit fit = least_squares(d, y);
  EXPECT_NEAR(fit.coefficients[0], 3.0, 1e-12);
  EXPECT_NEAR(fit.coefficients[1], 2.0, 1e-12);
  EXPECT_NEAR(fit.rss, 0.0, 1e-9);
  EXPECT_EQ(fit.dof_residual, 8);
  EXPECT_EQ(fit.coefficient({ColumnKind::LinearTrend}), fit.coefficients[1]);
}

TEST(LeastSquares, ZeroResponse) {
  const DesignMatrix d = line_design(10);
  const std::vector<double> y(10, 0.0);
  const RegressionFit fit = least_squares(d, y);
  for (double c : fit.coefficients) EXPECT_EQ(c, 0.0);
  EXPECT_EQ(fit.rss, 0.0);
}

TEST(LeastSquares, MatchesNormalEquationsOracle) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 50; ++trial) {
    const RandomSystem sys = random_system(rng, 12, 3);
    const RegressionFit fit = least_squares(sys.design, sys.y);
    const auto expected = oracle::normal_equations(sys.rows, sys.y);
    for (std::size_t j = 0; j < 3; ++j) EXPECT_LT(rel_diff(fit.coefficients[j], expected[j]), 1e-6);
    EXPECT_LT(rel_diff(fit.rss, oracle::residual_ss(sys.rows, sys.y, expected)), 1e-6);
  }
}

TEST(LeastSquares, RssMatchesResidualsAndResidualsAreOrthogonal) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    const RandomSystem sys = random_system(rng, 25, 5);
    const RegressionFit fit = least_squares(sys.design, sys.y);
    double rss = 0.0;
    for (std::size_t r = 0; r < 25; ++r) rss += (sys.y[r] - fit.fitted[r]) * (sys.y[r] - fit.fitted[r]);
    EXPECT_LT(rel_diff(fit.rss, rss), 1e-8);

    double xty_norm = 0.0;
    double xte_norm = 0.0;
    for (std::size_t c = 0; c < 5; ++c) {
      double xty = 0.0;
      double xte = 0.0;
      for (std::size_t r = 0; r < 25; ++r) {
        xty += sys.rows[r][c] * sys.y[r];
        xte += sys.rows[r][c] * (sys.y[r] - fit.fitted[r]);
      }
      xty_norm += xty * xty;
      xte_norm += xte * xte;
    }
    EXPECT_LE(std::sqrt(xte_norm), 1e-6 * std::sqrt(xty_norm) + 1e-9);
  }
}

TEST(LeastSquares, ScaleEquivariance) {
  std::mt19937_64 rng(8);
  const RandomSystem sys = random_system(rng, 20, 4);
  const RegressionFit base = least_squares(sys.design, sys.y);
  for (double c : {-3.0, 0.01, 1000.0}) {
    std::vector<double> scaled = sys.y;
    for (auto& v : scaled) v *= c;
    const RegressionFit fit = least_squares(sys.design, scaled);
    for (std::size_t j = 0; j < 4; ++j) EXPECT_NEAR(fit.coefficients[j], c * base.coefficients[j], 1e-10 * std::abs(c));
    for (std::size_t r = 0; r < 20; ++r) EXPECT_NEAR(fit.fitted[r], c * base.fitted[r], 1e-10 * std::abs(c));
    EXPECT_LT(rel_diff(fit.rss, c * c * base.rss), 1e-10);
  }
}

TEST(LeastSquares, AddingAColumnNeverIncreasesRss) {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 50; ++trial) {
    RandomSystem sys = random_system(rng, 15, 2);
    const double before = least_squares(sys.design, sys.y).rss;
    std::vector<double> extra(15);
    for (auto& v : extra) v = normal(rng);
    sys.design.add_column({ColumnKind::AutoLag, 1}, extra);
    EXPECT_LE(least_squares(sys.design, sys.y).rss, before * (1 + 1e-12));
  }
}

TEST(LeastSquares, RankDeficiencyCarriesRank) {
  DesignMatrix d = line_design(10);
  d.add_column({ColumnKind::StimulusLag, 1}, std::vector<double>(10, 0.0));
  try {
    least_squares(d, std::vector<double>(10, 1.0));
    FAIL() << "expected RankDeficient";
  } catch (const RankDeficient& e) {
    EXPECT_EQ(e.rank(), 2u);
    EXPECT_EQ(e.cols(), 3u);
  }
  DesignMatrix dup = line_design(10);
  std::vector<double> twice(10);
  for (std::size_t i = 0; i < 10; ++i) twice[i] = 2.0 * static_cast<double>(i + 1);
  dup.add_column({ColumnKind::AutoLag, 1}, twice);
  EXPECT_THROW(least_squares(dup, std::vector<double>(10, 1.0)), RankDeficient);
}

TEST(LeastSquares, DimensionErrors) {
  const DesignMatrix d = line_design(10);
  EXPECT_THROW(least_squares(d, std::vector<double>(9, 0.0)), InvalidParameter);
  const DesignMatrix wide = line_design(1);
  EXPECT_THROW(least_squares(wide, std::vector<double>(1, 0.0)), InvalidParameter);
  DesignMatrix d2(3);
  EXPECT_THROW(d2.add_column({ColumnKind::Intercept}, std::vector<double>(4, 1.0)), InvalidParameter);
}

TEST(FTest, NoImprovementGivesPOne) {
  RegressionFit full;
  full.labels = {{ColumnKind::Intercept}, {ColumnKind::LinearTrend}, {ColumnKind::ConvolvedRegressor}};
  full.coefficients = {0, 0, 0};
  full.rss = 5.0;
  RegressionFit restricted;
  restricted.labels = {{ColumnKind::Intercept}, {ColumnKind::LinearTrend}};
  restricted.coefficients = {0, 0};
  restricted.rss = 5.0;
  const FTestResult r = f_test_nested(full, restricted, 20);
  EXPECT_EQ(r.f_stat, 0.0);
  EXPECT_EQ(r.p_value, 1.0);
  EXPECT_EQ(r.d1, 1);
  EXPECT_EQ(r.d2, 17);
}

TEST(FTest, KnownTailProbability) {
  // d1 = 1, d2 = 10: build fits whose F statistic is exactly 4.96.
  RegressionFit full;
  full.labels = {{ColumnKind::Intercept}, {ColumnKind::ConvolvedRegressor}};
  full.coefficients = {0, 0};
  full.rss = 10.0;
  RegressionFit restricted;
  restricted.labels = {{ColumnKind::Intercept}};
  restricted.coefficients = {0};
  restricted.rss = 14.96;
  const FTestResult r = f_test_nested(full, restricted, 12);
  EXPECT_NEAR(r.f_stat, 4.96, 1e-12);
  const double oracle_tail = oracle::f_sf_by_quadrature(4.96, 1.0, 10.0);
  EXPECT_NEAR(oracle_tail, 0.0500876505664682, 1e-10);
  EXPECT_NEAR(r.p_value, oracle_tail, 1e-9);
}

TEST(FTest, Preconditions) {
  RegressionFit full;
  full.labels = {{ColumnKind::Intercept}, {ColumnKind::ConvolvedRegressor}};
  full.coefficients = {0, 0};
  full.rss = 1.0;
  RegressionFit other;
  other.labels = {{ColumnKind::LinearTrend}};
  other.coefficients = {0};
  other.rss = 2.0;
  EXPECT_THROW(f_test_nested(full, other, 10), InvalidParameter);
  RegressionFit same = full;
  EXPECT_THROW(f_test_nested(full, same, 10), InvalidParameter);
  RegressionFit restricted;
  restricted.labels = {{ColumnKind::Intercept}};
  restricted.coefficients = {0};
  restricted.rss = 2.0;
  EXPECT_THROW(f_test_nested(full, restricted, 2), InvalidParameter);  // d2 = 0
  restricted.rss = 0.5;
  EXPECT_THROW(f_test_nested(full, restricted, 10), InvalidParameter);  // not nested
}

TEST(FTest, PerfectFit) {
  RegressionFit full;
  full.labels = {{ColumnKind::Intercept}, {ColumnKind::ConvolvedRegressor}};
  full.coefficients = {0, 0};
  full.rss = 0.0;
  RegressionFit restricted;
  restricted.labels = {{ColumnKind::Intercept}};
  restricted.coefficients = {0};
  restricted.rss = 3.0;
  const FTestResult r = f_test_nested(full, restricted, 10);
  EXPECT_TRUE(r.perfect_fit);
  EXPECT_EQ(r.p_value, 0.0);
}

TEST(FTest, BothModelsExactUpToRounding) {
  // y is an exact line: both fits leave only rounding residue, in either order.
  const std::size_t n = 40;
  std::vector<double> ones(n, 1.0), t(n), noise(n), y(n);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal;
  for (std::size_t i = 0; i < n; ++i) {
    t[i] = static_cast<double>(i) * 0.37;
    noise[i] = normal(rng);
    y[i] = 1234.5 + 0.1 * t[i];
  }
  DesignMatrix restricted_design(n);
  restricted_design.add_column({ColumnKind::Intercept}, ones);
  restricted_design.add_column({ColumnKind::LinearTrend}, t);
  DesignMatrix full_design = restricted_design;
  full_design.add_column({ColumnKind::ConvolvedRegressor}, noise);
  const RegressionFit full = least_squares(full_design, y);
  const RegressionFit restricted = least_squares(restricted_design, y);
  const FTestResult r = f_test_nested(full, restricted, n);
  EXPECT_TRUE(r.perfect_fit);
  EXPECT_EQ(r.p_value, 1.0);
  EXPECT_EQ(r.f_stat, 0.0);
}

TEST(FCdf, SpecialValues) {
  EXPECT_EQ(f_cdf(0.0, 3, 7), 0.0);
  EXPECT_EQ(f_cdf(INFINITY, 3, 7), 1.0);
  EXPECT_NEAR(f_cdf(1e12, 3, 7), 1.0, 1e-12);
  EXPECT_THROW(f_cdf(-1.0, 3, 7), InvalidParameter);
  // F(2, 2) has CDF x / (x + 1).
  EXPECT_NEAR(f_cdf(1.0, 2, 2), 0.5, 1e-14);
  for (double x : {0.1, 0.5, 3.0, 17.0}) EXPECT_NEAR(f_cdf(x, 2, 2), x / (x + 1.0), 1e-14);
  EXPECT_NEAR(oracle::f_cdf_by_quadrature(1.0, 2, 2), 0.5, 1e-12);
}

TEST(FCdf, MatchesQuadratureOracle) {
  for (double d1 : {1.0, 2.0, 5.0, 10.0}) {
    for (double d2 : {1.0, 2.0, 5.0, 10.0}) {
      for (double x : {0.05, 0.3, 1.0, 2.5, 8.0}) {
        EXPECT_NEAR(f_cdf(x, d1, d2), oracle::f_cdf_by_quadrature(x, d1, d2), 1e-8)
            << "x=" << x << " d1=" << d1 << " d2=" << d2;
      }
    }
  }
}

TEST(FCdf, MonotoneAndReciprocalSymmetry) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> ux(0.01, 30.0);
  std::uniform_int_distribution<int> ud(1, 40);
  for (int trial = 0; trial < 500; ++trial) {
    const double d1 = ud(rng);
    const double d2 = ud(rng);
    const double x = ux(rng);
    EXPECT_NEAR(f_cdf(x, d1, d2), 1.0 - f_cdf(1.0 / x, d2, d1), 1e-12);
    EXPECT_LE(f_cdf(x, d1, d2), f_cdf(x * 1.01, d1, d2));
    EXPECT_NEAR(f_cdf(x, d1, d2) + f_sf(x, d1, d2), 1.0, 1e-13);
  }
}
