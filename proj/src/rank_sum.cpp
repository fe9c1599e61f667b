#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <vector>

#include "gcact/error.hpp"
#include "gcact/linalg_stats.hpp"

namespace gcact {

namespace {

struct Ranking {
  std::vector<long> doubled_ranks;  // 2 × midrank, always an integer
  double tie_term = 0.0;            // sum over tie groups of (t^3 - t)
};

Ranking rank_pooled(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = a.size() + b.size();
  std::vector<double> pooled;
  pooled.reserve(n);
  pooled.insert(pooled.end(), a.begin(), a.end());
  pooled.insert(pooled.end(), b.begin(), b.end());

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return pooled[i] < pooled[j]; });

  Ranking out;
  out.doubled_ranks.resize(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i + 1;
    while (j < n && pooled[order[j]] == pooled[order[i]]) ++j;
    // Positions i..j-1 (0-based) share midrank ((i+1) + j) / 2.
    const long doubled = static_cast<long>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) out.doubled_ranks[order[k]] = doubled;
    const double t = static_cast<double>(j - i);
    out.tie_term += t * t * t - t;
    i = j;
  }
  return out;
}

// Two-sided exact p for the doubled rank sum of a `k`-subset drawn from `ranks`.
double exact_two_sided(const std::vector<long>& ranks, std::size_t k, long observed) {
  std::vector<long> sorted = ranks;
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  const long max_sum = std::accumulate(sorted.begin(), sorted.begin() + static_cast<long>(k), 0L);
  // counts[j][s]: number of j-subsets of the ranks seen so far whose doubled sum is s.
  std::vector<std::vector<double>> counts(k + 1, std::vector<double>(static_cast<std::size_t>(max_sum) + 1, 0.0));
  counts[0][0] = 1.0;
  for (const long r : ranks) {
    for (std::size_t j = k; j >= 1; --j) {
      auto& dst = counts[j];
      const auto& src = counts[j - 1];
      for (long s = max_sum; s >= r; --s) {
        const double c = src[static_cast<std::size_t>(s - r)];
        if (c != 0.0) dst[static_cast<std::size_t>(s)] += c;
      }
    }
  }
  const auto& dist = counts[k];
  double total = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  for (long s = 0; s <= max_sum; ++s) {
    const double c = dist[static_cast<std::size_t>(s)];
    total += c;
    if (s <= observed) lower += c;
    if (s >= observed) upper += c;
  }
  return std::min(1.0, 2.0 * std::min(lower, upper) / total);
}

}  // namespace

RankSumResult rank_sum_test(std::span<const double> sample_a, std::span<const double> sample_b) {
  if (sample_a.empty() || sample_b.empty()) throw InvalidParameter("rank-sum test needs two nonempty samples");
  for (auto v : sample_a) {
    if (std::isnan(v)) throw InvalidParameter("rank-sum sample contains NaN");
  }
  for (auto v : sample_b) {
    if (std::isnan(v)) throw InvalidParameter("rank-sum sample contains NaN");
  }

  const double na = static_cast<double>(sample_a.size());
  const double nb = static_cast<double>(sample_b.size());
  const double n = na + nb;
  const Ranking ranking = rank_pooled(sample_a, sample_b);

  long doubled_sum_a = 0;
  for (std::size_t i = 0; i < sample_a.size(); ++i) doubled_sum_a += ranking.doubled_ranks[i];

  RankSumResult out;
  out.u_stat = static_cast<double>(doubled_sum_a) / 2.0 - na * (na + 1.0) / 2.0;

  if (std::min(sample_a.size(), sample_b.size()) < kRankSumExactBelow) {
    out.exact = true;
    // Enumerate over the smaller sample; the two-sided p is the same from either side.
    if (sample_a.size() <= sample_b.size()) {
      out.p_value = exact_two_sided(ranking.doubled_ranks, sample_a.size(), doubled_sum_a);
    } else {
      const long total = std::accumulate(ranking.doubled_ranks.begin(), ranking.doubled_ranks.end(), 0L);
      out.p_value = exact_two_sided(ranking.doubled_ranks, sample_b.size(), total - doubled_sum_a);
    }
    return out;
  }

  const double mean_u = na * nb / 2.0;
  const double var_u = na * nb / 12.0 * ((n + 1.0) - ranking.tie_term / (n * (n - 1.0)));
  if (!(var_u > 0.0)) {
    out.p_value = 1.0;
    return out;
  }
  const double z = std::max(0.0, std::abs(out.u_stat - mean_u) - 0.5) / std::sqrt(var_u);
  out.p_value = std::min(1.0, std::erfc(z / std::sqrt(2.0)));
  return out;
}

}  // namespace gcact
