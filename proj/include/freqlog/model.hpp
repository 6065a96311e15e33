#pragma once

// Assets, per-step return distributions, portfolio weights and the
// enumeration of n-step compound outcomes.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "freqlog/errors.hpp"

namespace freqlog {

inline constexpr std::size_t kDefaultBudget = 10'000'000;
inline constexpr double kModelProbabilityTolerance = 1e-12;
inline constexpr double kOutcomeProbabilityTolerance = 1e-9;
inline constexpr double kWeightTolerance = 1e-12;

namespace detail {

inline std::string format_number(double v, int digits = 12) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

}  // namespace detail

/// Raw description of a finite-support joint return distribution.
/// `atoms[k][i]` is the one-step net return of asset i in atom k.
struct ModelData {
  std::vector<std::string> asset_names;
  std::vector<std::vector<double>> atoms;
  std::vector<double> probabilities;
  std::optional<std::size_t> riskless_index;
};

/// Throws InvariantViolation naming the first broken invariant.
inline void validate_model(const ModelData& d) {
  const std::size_t m = d.asset_names.size();
  const std::size_t s = d.atoms.size();
  if (m < 2) {
    throw InvariantViolation("need at least 2 assets, got " + std::to_string(m));
  }
  if (s < 1) throw InvariantViolation("need at least 1 atom");
  if (d.probabilities.size() != s) {
    throw InvariantViolation("probability count " +
                             std::to_string(d.probabilities.size()) +
                             " != atom count " + std::to_string(s));
  }
  for (std::size_t k = 0; k < s; ++k) {
    if (d.atoms[k].size() != m) {
      throw InvariantViolation("atom " + std::to_string(k) + " has " +
                               std::to_string(d.atoms[k].size()) +
                               " entries, expected " + std::to_string(m));
    }
    for (std::size_t i = 0; i < m; ++i) {
      const double x = d.atoms[k][i];
      if (!std::isfinite(x)) {
        throw InvariantViolation("return not finite at atom " +
                                 std::to_string(k) + ", asset " +
                                 std::to_string(i));
      }
      if (!(x > -1.0)) {
        throw InvariantViolation("return not > -1 at atom " + std::to_string(k) +
                                 ", asset " + std::to_string(i) + ": " +
                                 detail::format_number(x));
      }
    }
  }
  long double sum = 0.0L;
  for (std::size_t k = 0; k < s; ++k) {
    const double p = d.probabilities[k];
    if (!std::isfinite(p) || p < 0.0) {
      throw InvariantViolation("negative probability at atom " +
                               std::to_string(k) + ": " +
                               detail::format_number(p));
    }
    sum += p;
  }
  if (std::fabs(static_cast<double>(sum - 1.0L)) > kModelProbabilityTolerance) {
    throw InvariantViolation("probability sum " +
                             detail::format_number(static_cast<double>(sum)));
  }
  if (d.riskless_index) {
    const std::size_t j = *d.riskless_index;
    if (j >= m) {
      throw InvariantViolation("riskless index " + std::to_string(j) +
                               " out of range");
    }
    const double r = d.atoms[0][j];
    if (r < 0.0) {
      throw InvariantViolation("riskless rate " + detail::format_number(r) +
                               " is negative");
    }
    for (std::size_t k = 1; k < s; ++k) {
      if (d.atoms[k][j] != r) {
        throw InvariantViolation("riskless column " + std::to_string(j) +
                                 " is not constant (atom " + std::to_string(k) +
                                 ")");
      }
    }
  }
}

/// Immutable, validated joint i.i.d. per-step return distribution.
class ReturnModel {
 public:
  explicit ReturnModel(ModelData data) {
    validate_model(data);
    names_ = std::move(data.asset_names);
    riskless_ = data.riskless_index;
    probs_ = std::move(data.probabilities);
    const std::size_t m = names_.size();
    atoms_.reserve(data.atoms.size() * m);
    for (const auto& row : data.atoms) atoms_.insert(atoms_.end(), row.begin(), row.end());
  }

  std::size_t asset_count() const noexcept { return names_.size(); }
  std::size_t atom_count() const noexcept { return probs_.size(); }

  const std::vector<std::string>& asset_names() const noexcept { return names_; }
  std::optional<std::size_t> riskless_index() const noexcept { return riskless_; }

  std::span<const double> atom(std::size_t k) const {
    return {atoms_.data() + k * asset_count(), asset_count()};
  }
  double ret(std::size_t k, std::size_t i) const { return atoms_[k * asset_count() + i]; }
  double probability(std::size_t k) const { return probs_[k]; }
  std::span<const double> probabilities() const noexcept { return probs_; }

  /// Smallest and largest one-step return of asset i.
  std::pair<double, double> return_range(std::size_t i) const {
    double lo = ret(0, i), hi = lo;
    for (std::size_t k = 1; k < atom_count(); ++k) {
      lo = std::min(lo, ret(k, i));
      hi = std::max(hi, ret(k, i));
    }
    return {lo, hi};
  }

  ModelData data() const {
    ModelData d{names_, {}, probs_, riskless_};
    for (std::size_t k = 0; k < atom_count(); ++k) {
      auto a = atom(k);
      d.atoms.emplace_back(a.begin(), a.end());
    }
    return d;
  }

  friend bool operator==(const ReturnModel&, const ReturnModel&) = default;

 private:
  std::vector<std::string> names_;
  std::vector<double> atoms_;  // row-major, atom x asset
  std::vector<double> probs_;
  std::optional<std::size_t> riskless_;
};

inline void validate_model(const ReturnModel& model) { validate_model(model.data()); }

/// Portfolio weights on the unit simplex.
class WeightVector {
 public:
  explicit WeightVector(std::vector<double> w) : w_(std::move(w)) {
    if (w_.empty()) throw InvariantViolation("empty weight vector");
    long double sum = 0.0L;
    for (std::size_t i = 0; i < w_.size(); ++i) {
      if (!std::isfinite(w_[i]) || w_[i] < 0.0) {
        throw InvariantViolation("weight " + std::to_string(i) + " is negative: " +
                                 detail::format_number(w_[i]));
      }
      sum += w_[i];
    }
    if (std::fabs(static_cast<double>(sum - 1.0L)) > kWeightTolerance) {
      throw InvariantViolation("weights sum to " +
                               detail::format_number(static_cast<double>(sum)));
    }
  }

  static WeightVector unit(std::size_t m, std::size_t j) {
    if (j >= m) {
      throw std::out_of_range("unit weight index " + std::to_string(j) +
                              " out of range for " + std::to_string(m) + " assets");
    }
    std::vector<double> w(m, 0.0);
    w[j] = 1.0;
    return WeightVector(std::move(w));
  }

  std::size_t size() const noexcept { return w_.size(); }
  double operator[](std::size_t i) const { return w_[i]; }
  std::span<const double> values() const noexcept { return w_; }

  template <typename T = long double>
  T dot(std::span<const double> v) const {
    T acc = 0;
    for (std::size_t i = 0; i < w_.size(); ++i) acc += static_cast<T>(w_[i]) * v[i];
    return acc;
  }

  friend bool operator==(const WeightVector&, const WeightVector&) = default;

 private:
  std::vector<double> w_;
};

inline WeightVector unit_weight(std::size_t m, std::size_t j) {
  return WeightVector::unit(m, j);
}

/// Rebalancing every n base intervals of length delta_t seconds.
class FrequencyConfig {
 public:
  FrequencyConfig(double delta_t, std::int64_t n) : delta_t_(delta_t), n_(n) {
    if (!(delta_t > 0.0) || !std::isfinite(delta_t)) {
      throw std::invalid_argument("delta_t must be > 0");
    }
    if (n < 1) throw std::invalid_argument("rebalancing period must be >= 1");
  }

  double delta_t() const noexcept { return delta_t_; }
  std::int64_t period() const noexcept { return n_; }
  double frequency() const noexcept {
    return 1.0 / (static_cast<double>(n_) * delta_t_);
  }

 private:
  double delta_t_;
  std::int64_t n_;
};

/// s^n saturated at uint64 max.
inline std::uint64_t outcome_count(std::size_t s, int n) {
  std::uint64_t count = 1;
  for (int t = 0; t < n; ++t) {
    if (s != 0 && count > std::numeric_limits<std::uint64_t>::max() / s) {
      return std::numeric_limits<std::uint64_t>::max();
    }
    count *= s;
  }
  return count;
}

inline void check_budget(std::size_t s, int n, std::size_t budget) {
  if (n < 1) throw std::invalid_argument("horizon must be >= 1");
  const std::uint64_t count = outcome_count(s, n);
  if (count > budget) {
    const long double exact = std::pow(static_cast<long double>(s), n);
    std::string what = std::to_string(s) + "^" + std::to_string(n) + " = ";
    if (count == std::numeric_limits<std::uint64_t>::max()) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.6Lg", exact);
      what += buf;
    } else {
      what += std::to_string(count);
    }
    what += " outcomes exceeds budget " + std::to_string(budget);
    throw BudgetExceeded(what, exact, budget);
  }
}

/// Visits every length-n atom sequence in lexicographic order of atom
/// indices (first step most significant). The visitor receives the
/// sequence probability and the total-return vector prod_k (1 + X_i(k)).
template <typename Visitor>
void for_each_outcome(const ReturnModel& model, int n, std::size_t budget,
                      Visitor&& visit) {
  const std::size_t s = model.atom_count();
  const std::size_t m = model.asset_count();
  check_budget(s, n, budget);

  const auto un = static_cast<std::size_t>(n);
  std::vector<std::size_t> digit(un, 0);
  // prefix row t holds the product over steps 0..t.
  std::vector<double> prefix(un * m);
  std::vector<double> prefix_prob(un);

  auto fill_from = [&](std::size_t t0) {
    for (std::size_t t = t0; t < un; ++t) {
      const auto a = model.atom(digit[t]);
      const double p = model.probability(digit[t]);
      for (std::size_t i = 0; i < m; ++i) {
        const double prev = t == 0 ? 1.0 : prefix[(t - 1) * m + i];
        prefix[t * m + i] = prev * (1.0 + a[i]);
      }
      prefix_prob[t] = t == 0 ? p : prefix_prob[t - 1] * p;
    }
  };

  fill_from(0);
  const std::span<const double> total(prefix.data() + (un - 1) * m, m);
  while (true) {
    visit(prefix_prob[un - 1], total);
    std::size_t t = un;
    while (t > 0 && digit[t - 1] + 1 == s) {
      digit[t - 1] = 0;
      --t;
    }
    if (t == 0) break;
    ++digit[t - 1];
    fill_from(t - 1);
  }
}

/// Materialized n-step outcome set.
class CompoundOutcomeSet {
 public:
  CompoundOutcomeSet(int horizon, std::size_t asset_count)
      : horizon_(horizon), m_(asset_count) {}

  int horizon() const noexcept { return horizon_; }
  std::size_t asset_count() const noexcept { return m_; }
  std::size_t size() const noexcept { return probs_.size(); }

  double probability(std::size_t o) const { return probs_[o]; }
  std::span<const double> total_return(std::size_t o) const {
    return {totals_.data() + o * m_, m_};
  }
  std::span<const double> probabilities() const noexcept { return probs_; }

  void push_back(double p, std::span<const double> total) {
    probs_.push_back(p);
    totals_.insert(totals_.end(), total.begin(), total.end());
  }
  void reserve(std::size_t count) {
    probs_.reserve(count);
    totals_.reserve(count * m_);
  }

  friend bool operator==(const CompoundOutcomeSet&, const CompoundOutcomeSet&) = default;

 private:
  int horizon_;
  std::size_t m_;
  std::vector<double> probs_;
  std::vector<double> totals_;  // row-major, outcome x asset
};

inline CompoundOutcomeSet compound_outcomes(const ReturnModel& model, int n,
                                            std::size_t budget = kDefaultBudget) {
  CompoundOutcomeSet set(n, model.asset_count());
  check_budget(model.atom_count(), n, budget);
  set.reserve(static_cast<std::size_t>(outcome_count(model.atom_count(), n)));
  for_each_outcome(model, n, budget,
                   [&](double p, std::span<const double> total) { set.push_back(p, total); });
  return set;
}

}  // namespace freqlog
