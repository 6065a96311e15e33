#pragma once

// Expected logarithmic growth g_n(K) = (1/n) E[log K^T R_n] of a portfolio
// rebalanced to K every n steps: exact and Monte Carlo evaluation,
// maximization over the simplex, and dominant-asset detection.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "freqlog/model.hpp"
#include "freqlog/rng.hpp"

namespace freqlog {

enum class Method { exact, monte_carlo };

inline const char* to_string(Method m) {
  return m == Method::exact ? "exact" : "monte_carlo";
}

/// g_n(K) in nats per step, with how it was obtained.
struct ElgEstimate {
  double value = 0.0;
  Method method = Method::exact;
  int horizon = 1;
  double std_error = 0.0;
  std::uint64_t sample_count = 0;
  std::optional<std::uint64_t> seed;

  friend bool operator==(const ElgEstimate&, const ElgEstimate&) = default;
};

namespace detail {

inline void check_weights(const ReturnModel& model, const WeightVector& K) {
  if (K.size() != model.asset_count()) {
    throw std::invalid_argument("weight vector has " + std::to_string(K.size()) +
                                " entries, model has " +
                                std::to_string(model.asset_count()) + " assets");
  }
}

inline void check_asset(const ReturnModel& model, std::size_t i) {
  if (i >= model.asset_count()) {
    throw std::out_of_range("asset index " + std::to_string(i) + " out of range");
  }
}

}  // namespace detail

/// Exact g_n(K) over an already enumerated outcome set.
inline double elg_value(const CompoundOutcomeSet& outcomes, const WeightVector& K) {
  long double acc = 0.0L;
  for (std::size_t o = 0; o < outcomes.size(); ++o) {
    acc += outcomes.probability(o) * std::log(K.dot(outcomes.total_return(o)));
  }
  return static_cast<double>(acc / outcomes.horizon());
}

inline ElgEstimate elg_exact(const ReturnModel& model, const WeightVector& K, int n,
                             std::size_t budget = kDefaultBudget) {
  detail::check_weights(model, K);
  long double acc = 0.0L;
  for_each_outcome(model, n, budget, [&](double p, std::span<const double> total) {
    acc += p * std::log(K.dot(total));
  });
  return {static_cast<double>(acc / n), Method::exact, n, 0.0, 0, std::nullopt};
}

/// Inverse-CDF atom sampler driven by external uniforms.
class AtomSampler {
 public:
  explicit AtomSampler(std::span<const double> probabilities) {
    cumulative_.reserve(probabilities.size());
    long double acc = 0.0L;
    for (double p : probabilities) {
      acc += p;
      cumulative_.push_back(static_cast<double>(acc));
    }
    cumulative_.back() = std::numeric_limits<double>::infinity();
  }

  std::size_t operator()(double u) const {
    return static_cast<std::size_t>(
        std::upper_bound(cumulative_.begin(), cumulative_.end(), u) - cumulative_.begin());
  }

 private:
  std::vector<double> cumulative_;
};

/// Monte Carlo g_n(K). Path i uses CounterStream(seed, i) with draw index =
/// step, so the estimate is a pure function of the arguments.
inline ElgEstimate elg_mc(const ReturnModel& model, const WeightVector& K, int n,
                          std::uint64_t samples, std::uint64_t seed) {
  detail::check_weights(model, K);
  if (n < 1) throw std::invalid_argument("horizon must be >= 1");
  if (samples < 2) throw std::invalid_argument("need at least 2 samples");
  const std::size_t m = model.asset_count();
  const AtomSampler sample_atom(model.probabilities());
  std::vector<double> total(m);

  // Welford running moments.
  long double mean = 0.0L, m2 = 0.0L;
  for (std::uint64_t i = 0; i < samples; ++i) {
    const CounterStream stream(seed, i);
    std::fill(total.begin(), total.end(), 1.0);
    for (int t = 0; t < n; ++t) {
      const auto a = model.atom(sample_atom(stream.uniform(static_cast<std::uint64_t>(t))));
      for (std::size_t j = 0; j < m; ++j) total[j] *= 1.0 + a[j];
    }
    const long double v = std::log(K.dot(total)) / n;
    const long double delta = v - mean;
    mean += delta / static_cast<long double>(i + 1);
    m2 += delta * (v - mean);
  }
  const long double var = m2 / static_cast<long double>(samples - 1);
  const double se = static_cast<double>(std::sqrt(var / static_cast<long double>(samples)));
  return {static_cast<double>(mean), Method::monte_carlo, n, se, samples, seed};
}

/// Value and gradient dg_n/dK_i = (1/n) E[R_{n,i} / K^T R_n].
struct ValueAndGradient {
  long double value = 0.0L;
  std::vector<long double> gradient;
};

inline ValueAndGradient elg_value_and_gradient(const CompoundOutcomeSet& outcomes,
                                               std::span<const double> weights) {
  const std::size_t m = outcomes.asset_count();
  ValueAndGradient out{0.0L, std::vector<long double>(m, 0.0L)};
  for (std::size_t o = 0; o < outcomes.size(); ++o) {
    const auto total = outcomes.total_return(o);
    long double wealth = 0.0L;
    for (std::size_t i = 0; i < m; ++i) wealth += static_cast<long double>(weights[i]) * total[i];
    const long double p = outcomes.probability(o);
    out.value += p * std::log(wealth);
    for (std::size_t i = 0; i < m; ++i) out.gradient[i] += p * total[i] / wealth;
  }
  const int n = outcomes.horizon();
  out.value /= n;
  for (auto& g : out.gradient) g /= n;
  return out;
}

struct OptimizeOptions {
  double tol = 1e-10;
  std::int64_t max_iters = 100'000;
  std::size_t budget = kDefaultBudget;
};

struct OptimizationResult {
  WeightVector weights;
  double value = 0.0;
  std::int64_t iterations = 0;
  double gradient_gap = 0.0;
  int horizon = 1;
  bool converged = false;
};

namespace detail {

// argmax over direction derivative phi'(gamma) = sum p d_o / (w_o + gamma d_o)
// on [0, gamma_max]; phi is concave so phi' is decreasing.
inline double line_search(std::span<const double> probs, std::span<const long double> wealth,
                          std::span<const long double> slope, double gamma_max) {
  auto derivative = [&](long double g, long double* second) {
    long double d1 = 0.0L, d2 = 0.0L;
    for (std::size_t o = 0; o < probs.size(); ++o) {
      const long double denom = wealth[o] + g * slope[o];
      const long double q = slope[o] / denom;
      d1 += probs[o] * q;
      d2 -= probs[o] * q * q;
    }
    if (second) *second = d2;
    return d1;
  };
  if (derivative(0.0L, nullptr) <= 0.0L) return 0.0;
  if (derivative(gamma_max, nullptr) >= 0.0L) return gamma_max;

  long double lo = 0.0L, hi = gamma_max, g = 0.5L * gamma_max;
  for (int it = 0; it < 200; ++it) {
    long double d2 = 0.0L;
    const long double d1 = derivative(g, &d2);
    if (d1 == 0.0L) return static_cast<double>(g);
    if (d1 > 0.0L) lo = g; else hi = g;
    long double next = d2 < 0.0L ? g - d1 / d2 : 0.5L * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5L * (lo + hi);
    if (std::fabs(static_cast<double>(next - g)) <=
        4.0 * std::numeric_limits<double>::epsilon() * static_cast<double>(hi)) {
      return static_cast<double>(next);
    }
    g = next;
  }
  return static_cast<double>(g);
}

}  // namespace detail

/// Maximizes an exact outcome set's g_n over the simplex with away-step
/// Frank-Wolfe and exact line search. Stops once the duality gap
/// max_i grad_i - grad.K is <= tol, which bounds g_n* - g_n(K).
inline OptimizationResult optimize_elg(const CompoundOutcomeSet& outcomes,
                                       const OptimizeOptions& opts = {}) {
  if (!(opts.tol > 0.0)) throw std::invalid_argument("tolerance must be > 0");
  if (opts.max_iters < 0) throw std::invalid_argument("max_iters must be >= 0");
  const std::size_t m = outcomes.asset_count();
  const std::size_t count = outcomes.size();

  // Best vertex first; lowest index on ties.
  std::size_t start = 0;
  {
    long double best = -std::numeric_limits<long double>::infinity();
    for (std::size_t i = 0; i < m; ++i) {
      long double v = 0.0L;
      for (std::size_t o = 0; o < count; ++o) {
        v += outcomes.probability(o) * std::log(static_cast<long double>(outcomes.total_return(o)[i]));
      }
      if (v > best) {
        best = v;
        start = i;
      }
    }
  }
  std::vector<double> x(m, 0.0);
  x[start] = 1.0;

  std::vector<long double> wealth(count), slope(count);
  std::int64_t iter = 0;
  double gap = 0.0;
  bool converged = false;
  while (true) {
    const auto vg = elg_value_and_gradient(outcomes, x);
    long double dot = 0.0L;
    for (std::size_t i = 0; i < m; ++i) dot += x[i] * vg.gradient[i];
    std::size_t fw = 0, away = m;
    for (std::size_t i = 1; i < m; ++i) {
      if (vg.gradient[i] > vg.gradient[fw]) fw = i;
    }
    for (std::size_t i = 0; i < m; ++i) {
      if (x[i] > 0.0 && (away == m || vg.gradient[i] < vg.gradient[away])) away = i;
    }
    gap = std::max(0.0, static_cast<double>(vg.gradient[fw] - dot));
    if (gap <= opts.tol) {
      converged = true;
      break;
    }
    if (iter >= opts.max_iters) break;

    const double away_gap = static_cast<double>(dot - vg.gradient[away]);
    const bool toward = gap >= away_gap || x[away] >= 1.0;
    // direction: e_fw - x  or  x - e_away
    double gamma_max = 1.0;
    if (!toward) gamma_max = x[away] / (1.0 - x[away]);
    for (std::size_t o = 0; o < count; ++o) {
      const auto total = outcomes.total_return(o);
      long double w = 0.0L;
      for (std::size_t i = 0; i < m; ++i) w += static_cast<long double>(x[i]) * total[i];
      wealth[o] = w;
      const long double vertex = toward ? total[fw] : total[away];
      slope[o] = toward ? vertex - w : w - vertex;
    }
    const double gamma = detail::line_search(outcomes.probabilities(), wealth, slope, gamma_max);
    ++iter;
    if (!(gamma > 0.0)) break;

    if (toward) {
      if (gamma >= 1.0) {
        std::fill(x.begin(), x.end(), 0.0);
        x[fw] = 1.0;
      } else {
        for (auto& xi : x) xi *= 1.0 - gamma;
        x[fw] += gamma;
      }
    } else {
      for (auto& xi : x) xi *= 1.0 + gamma;
      if (gamma >= gamma_max) {
        x[away] = 0.0;
      } else {
        x[away] -= gamma;
      }
    }
    long double sum = 0.0L;
    for (auto& xi : x) {
      if (xi < 0.0) xi = 0.0;
      sum += xi;
    }
    for (auto& xi : x) xi = static_cast<double>(xi / sum);
  }
  WeightVector weights(x);
  return {weights, elg_value(outcomes, weights), iter, gap, outcomes.horizon(), converged};
}

inline OptimizationResult optimize_elg(const ReturnModel& model, int n,
                                       const OptimizeOptions& opts = {}) {
  return optimize_elg(compound_outcomes(model, n, opts.budget), opts);
}

/// E[(1 + X_i) / (1 + X_j)] over one step; asset j is relatively more
/// attractive than asset i when this is <= 1.
inline double relative_attractiveness(const ReturnModel& model, std::size_t i, std::size_t j) {
  detail::check_asset(model, i);
  detail::check_asset(model, j);
  if (i == j) return 1.0;
  long double acc = 0.0L;
  for (std::size_t k = 0; k < model.atom_count(); ++k) {
    acc += model.probability(k) * ((1.0L + model.ret(k, i)) / (1.0L + model.ret(k, j)));
  }
  return static_cast<double>(acc);
}

struct DominanceReport {
  std::size_t asset_count = 0;
  std::vector<double> ratios;  // row-major: (i, j) = E[(1+X_i)/(1+X_j)]
  std::optional<std::size_t> dominant_index;
  double tolerance = 0.0;

  double ratio(std::size_t i, std::size_t j) const { return ratios[i * asset_count + j]; }

  /// Every other asset's ratio against j is <= 1 + tolerance.
  bool qualifies(std::size_t j) const {
    for (std::size_t i = 0; i < asset_count; ++i) {
      if (i != j && !(ratio(i, j) <= 1.0 + tolerance)) return false;
    }
    return true;
  }
};

inline DominanceReport find_dominant(const ReturnModel& model, double tolerance = 0.0) {
  if (!(tolerance >= 0.0)) throw std::invalid_argument("dominance tolerance must be >= 0");
  const std::size_t m = model.asset_count();
  DominanceReport report{m, std::vector<double>(m * m), std::nullopt, tolerance};
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      report.ratios[i * m + j] = relative_attractiveness(model, i, j);
    }
  }
  for (std::size_t j = 0; j < m; ++j) {
    if (report.qualifies(j)) {
      report.dominant_index = j;
      break;
    }
  }
  return report;
}

/// Buy-and-hold account values V(t) = V0 (1 + K^T X_t) where X_t is the
/// compound return of the first t realized steps.
inline std::vector<double> account_value(double v0, const WeightVector& K,
                                         const std::vector<std::vector<double>>& realized) {
  if (!(v0 > 0.0) || !std::isfinite(v0)) {
    throw std::invalid_argument("initial account value must be > 0");
  }
  const std::size_t m = K.size();
  std::vector<double> total(m, 1.0);
  std::vector<double> trajectory;
  trajectory.reserve(realized.size() + 1);
  trajectory.push_back(v0);
  for (std::size_t t = 0; t < realized.size(); ++t) {
    if (realized[t].size() != m) {
      throw std::invalid_argument("return vector " + std::to_string(t) + " has wrong size");
    }
    for (std::size_t i = 0; i < m; ++i) {
      if (!(realized[t][i] > -1.0)) {
        throw InvariantViolation("return not > -1 at step " + std::to_string(t));
      }
      total[i] *= 1.0 + realized[t][i];
    }
    trajectory.push_back(static_cast<double>(v0 * K.dot(total)));
  }
  return trajectory;
}

}  // namespace freqlog
