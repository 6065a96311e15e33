#pragma once

// Closed-form bounds on the buy-and-hold shortfall g_1* - g_n(K) when a
// dominant asset j exists, and the rebalancing horizon they imply.
// Bound values are computed in long double.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "freqlog/elg.hpp"
#include "freqlog/model.hpp"
#include "freqlog/rng.hpp"

namespace freqlog {

enum class BoundKind { baseline, improved };

inline const char* to_string(BoundKind k) {
  return k == BoundKind::baseline ? "baseline" : "improved";
}

struct GapBounds {
  int horizon = 1;
  double k_j = 1.0;
  double lower = 0.0;
  double upper = 0.0;
  BoundKind kind = BoundKind::baseline;
  // max(lower, 0): the shortfall is nonnegative under dominance.
  double tightened_lower = 0.0;
  // improved only: how E[R_{n,j} / K^T R_n] was evaluated.
  Method expectation_method = Method::exact;
  double expectation = 0.0;
  double expectation_std_error = 0.0;
};

namespace detail {

inline void check_kj(double k_j) {
  if (!(k_j > 0.0 && k_j <= 1.0)) {
    throw std::invalid_argument("dominant-asset weight must lie in (0, 1], got " +
                                detail::format_number(k_j));
  }
}

inline void check_horizon(int n) {
  if (n < 1) throw std::invalid_argument("horizon must be >= 1");
}

}  // namespace detail

/// (1/n)(log(1/k_j) + 1 - 1/k_j) <= g_1* - g_n(K) <= (1/n) log(1/k_j).
inline GapBounds buyhold_gap_bounds(double k_j, int n) {
  detail::check_kj(k_j);
  detail::check_horizon(n);
  GapBounds b;
  b.horizon = n;
  b.k_j = k_j;
  b.kind = BoundKind::baseline;
  if (k_j == 1.0) return b;
  const long double kj = k_j;
  const long double log_inv = -std::log(kj);
  b.lower = static_cast<double>((log_inv + 1.0L - 1.0L / kj) / n);
  b.upper = static_cast<double>(log_inv / n);
  b.tightened_lower = std::max(0.0, b.lower);
  return b;
}

/// Weight on the dominant asset when the rest is split evenly:
/// the intended asset gets 1 - eps, each of the other m - 1 gets eps/(m-1).
inline double market_portfolio_weight(std::size_t m, double eps) {
  if (m < 2) throw std::invalid_argument("market portfolio needs m >= 2");
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("eps must lie in (0, 1)");
  return eps / static_cast<double>(m - 1);
}

/// C such that both baseline bounds satisfy |bound| <= C / n.
inline double baseline_decay_constant(double k_j) {
  detail::check_kj(k_j);
  const long double kj = k_j;
  const long double log_inv = -std::log(kj);
  return static_cast<double>(std::max(log_inv, 1.0L / kj - 1.0L - log_inv));
}

struct ExpectationFallback {
  std::uint64_t samples = 100'000;
  std::uint64_t seed = 0;
};

/// E[R_{n,j} / K^T R_n], exact when s^n fits the budget, otherwise Monte
/// Carlo with the same stream layout as elg_mc.
inline ElgEstimate share_ratio_expectation(const ReturnModel& model, const WeightVector& K,
                                           std::size_t j, int n, std::size_t budget,
                                           const ExpectationFallback& fallback = {}) {
  detail::check_weights(model, K);
  detail::check_asset(model, j);
  detail::check_horizon(n);
  if (outcome_count(model.atom_count(), n) <= budget) {
    long double acc = 0.0L;
    for_each_outcome(model, n, budget, [&](double p, std::span<const double> total) {
      acc += p * (total[j] / K.dot(total));
    });
    return {static_cast<double>(acc), Method::exact, n, 0.0, 0, std::nullopt};
  }
  if (fallback.samples < 2) throw std::invalid_argument("need at least 2 samples");
  const std::size_t m = model.asset_count();
  const AtomSampler sample_atom(model.probabilities());
  std::vector<double> total(m);
  long double mean = 0.0L, m2 = 0.0L;
  for (std::uint64_t i = 0; i < fallback.samples; ++i) {
    const CounterStream stream(fallback.seed, i);
    std::fill(total.begin(), total.end(), 1.0);
    for (int t = 0; t < n; ++t) {
      const auto a = model.atom(sample_atom(stream.uniform(static_cast<std::uint64_t>(t))));
      for (std::size_t a_i = 0; a_i < m; ++a_i) total[a_i] *= 1.0 + a[a_i];
    }
    const long double v = total[j] / K.dot(total);
    const long double delta = v - mean;
    mean += delta / static_cast<long double>(i + 1);
    m2 += delta * (v - mean);
  }
  const long double var = m2 / static_cast<long double>(fallback.samples - 1);
  return {static_cast<double>(mean), Method::monte_carlo, n,
          static_cast<double>(std::sqrt(var / fallback.samples)), fallback.samples,
          fallback.seed};
}

/// 0 <= g_1* - g_n(K) <= (1/n)(log(1/K_j) - 1 + K_j E[R_{n,j} / K^T R_n]),
/// valid when j is dominant and high-frequency rebalancing is optimal.
/// Dominance of j is checked here (tolerance 0).
inline GapBounds improved_gap_bounds(const ReturnModel& model, const WeightVector& K,
                                     std::size_t j, int n,
                                     std::size_t budget = kDefaultBudget,
                                     const ExpectationFallback& fallback = {}) {
  detail::check_weights(model, K);
  detail::check_asset(model, j);
  detail::check_horizon(n);
  if (!(K[j] > 0.0)) throw std::invalid_argument("weight on the dominant asset must be > 0");
  if (!find_dominant(model, 0.0).qualifies(j)) {
    throw std::invalid_argument("asset " + std::to_string(j) + " is not dominant");
  }
  const ElgEstimate e = share_ratio_expectation(model, K, j, n, budget, fallback);
  const long double kj = K[j];
  GapBounds b;
  b.horizon = n;
  b.k_j = K[j];
  b.kind = BoundKind::improved;
  b.lower = 0.0;
  b.tightened_lower = 0.0;
  b.upper = static_cast<double>((-std::log(kj) - 1.0L + kj * e.value) / n);
  b.expectation_method = e.method;
  b.expectation = e.value;
  b.expectation_std_error = e.std_error;
  // K_j R_{n,j} <= K^T R_n pointwise, so the expectation term is <= 1.
  const double baseline = static_cast<double>(-std::log(kj) / n);
  if (e.method == Method::exact &&
      b.upper > baseline + 64 * std::numeric_limits<double>::epsilon() * (1.0 + baseline)) {
    throw std::logic_error("improved upper bound exceeds baseline upper bound");
  }
  return b;
}

struct RebalancePlan {
  double epsilon = 0.0;
  double k_j = 0.0;
  std::int64_t n_star = 1;
};

/// Smallest horizon n* = ceil(log(1/k_j) / epsilon) past which the
/// buy-and-hold shortfall is certified <= epsilon. A quotient within a few
/// ulps above an integer is taken as that integer, so epsilon = log(1/k_j)/q
/// computed in double yields n* = q.
inline RebalancePlan rebalance_horizon(double k_j, double epsilon) {
  if (!(k_j > 0.0 && k_j < 1.0)) {
    throw std::invalid_argument("dominant-asset weight must lie in (0, 1), got " +
                                detail::format_number(k_j));
  }
  const double log_inv = -std::log(k_j);
  if (!(epsilon > 0.0 && epsilon < log_inv)) {
    throw std::invalid_argument("epsilon must lie in (0, log(1/k_j)) = (0, " +
                                detail::format_number(log_inv) + ")");
  }
  const double quotient = log_inv / epsilon;
  double n_star = std::ceil(quotient);
  const double below = n_star - 1.0;
  if (below >= 1.0 &&
      quotient - below <= 4.0 * std::numeric_limits<double>::epsilon() * quotient) {
    n_star = below;
  }
  return {epsilon, k_j, std::max<std::int64_t>(1, static_cast<std::int64_t>(n_star))};
}

/// Ratios x_{n+1}/x_n of x_n = (1/n) log(1/k_j) for n = 1..n_max-1.
inline std::vector<double> sublinear_ratio_sequence(double k_j, int n_max) {
  if (!(k_j > 0.0 && k_j <= 1.0)) {
    throw std::invalid_argument("dominant-asset weight must lie in (0, 1)");
  }
  if (k_j == 1.0) throw std::invalid_argument("degenerate bound: k_j = 1 gives x_n = 0");
  if (n_max < 2) throw std::invalid_argument("n_max must be >= 2");
  const long double c = -std::log(static_cast<long double>(k_j));
  std::vector<double> ratios;
  ratios.reserve(static_cast<std::size_t>(n_max - 1));
  for (int n = 1; n < n_max; ++n) {
    const long double x_n = c / n;
    const long double x_next = c / (n + 1);
    ratios.push_back(static_cast<double>(x_next / x_n));
  }
  return ratios;
}

}  // namespace freqlog
