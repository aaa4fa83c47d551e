#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

namespace mlspread::stats {

enum class PMethod : std::uint8_t { Exact, NormalApprox };

struct WilcoxonResult {
  double w_plus = 0.0;
  std::size_t n_effective = 0;
  double p_two_sided = 1.0;
  PMethod method = PMethod::Exact;
};

inline constexpr std::size_t kExactMaxN = 20;

/// Average (mid) ranks of the values, 1-based, ties sharing their mean rank.
inline std::vector<double> average_ranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double mid = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = mid;
    i = j + 1;
  }
  return ranks;
}

/// Two-sided p-value of W+ = w_observed under the sign-flip null, by walking all
/// 2^n sign patterns of the given ranks in Gray-code order.
inline double exact_signed_rank_p(std::span<const double> ranks, double w_observed) {
  const std::size_t n = ranks.size();
  if (n > kExactMaxN) throw std::invalid_argument("exact signed-rank enumeration limited to n <= 20");
  constexpr double tol = 1e-9;
  const std::uint64_t patterns = std::uint64_t{1} << n;
  std::uint64_t at_least = 0;
  std::uint64_t at_most = 0;
  double sum = 0.0;  // W+ of the current pattern; all-negative start
  std::uint64_t gray = 0;
  for (std::uint64_t i = 0; i < patterns; ++i) {
    if (i > 0) {
      const int bit = std::countr_zero(i);
      const std::uint64_t mask = std::uint64_t{1} << bit;
      gray ^= mask;
      sum += (gray & mask) ? ranks[bit] : -ranks[bit];
    }
    if (sum >= w_observed - tol) ++at_least;
    if (sum <= w_observed + tol) ++at_most;
  }
  const double tail = static_cast<double>(std::min(at_least, at_most)) / static_cast<double>(patterns);
  return std::min(1.0, 2.0 * tail);
}

/// Normal approximation with tie-corrected variance and continuity correction.
inline double normal_signed_rank_p(std::span<const double> ranks, double w_observed) {
  const double n = static_cast<double>(ranks.size());
  const double mean = n * (n + 1.0) / 4.0;
  double variance = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0;
  std::vector<double> sorted(ranks.begin(), ranks.end());
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    const double t = static_cast<double>(j - i);
    variance -= (t * t * t - t) / 48.0;
    i = j;
  }
  if (variance <= 0.0) return 1.0;
  const double z = std::max(std::abs(w_observed - mean) - 0.5, 0.0) / std::sqrt(variance);
  const double tail = 0.5 * std::erfc(z / std::sqrt(2.0));
  return std::min(1.0, 2.0 * std::min(tail, 0.5));
}

/// Paired signed-rank test on differences. Zeros are dropped; the exact null is
/// used up to 20 non-zero pairs, the normal approximation beyond.
inline WilcoxonResult wilcoxon_signed_rank(std::span<const double> differences) {
  std::vector<double> nonzero;
  for (double d : differences)
    if (d != 0.0) nonzero.push_back(d);
  if (nonzero.empty()) throw std::invalid_argument("signed-rank test needs at least one non-zero difference");

  std::vector<double> magnitude(nonzero.size());
  std::transform(nonzero.begin(), nonzero.end(), magnitude.begin(), [](double d) { return std::abs(d); });
  const std::vector<double> ranks = average_ranks(magnitude);

  WilcoxonResult r;
  r.n_effective = nonzero.size();
  for (std::size_t i = 0; i < nonzero.size(); ++i)
    if (nonzero[i] > 0.0) r.w_plus += ranks[i];
  if (r.n_effective <= kExactMaxN) {
    r.method = PMethod::Exact;
    r.p_two_sided = exact_signed_rank_p(ranks, r.w_plus);
  } else {
    r.method = PMethod::NormalApprox;
    r.p_two_sided = normal_signed_rank_p(ranks, r.w_plus);
  }
  return r;
}

}  // namespace mlspread::stats
