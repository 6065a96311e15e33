#pragma once

// Numerical probing of high-frequency maximality: is g_n* <= g_1* for
// every rebalancing period n? Each g_n* is certified by the optimizer's
// duality gap, so only differences above 2*tol are reported.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "freqlog/elg.hpp"
#include "freqlog/model.hpp"
#include "freqlog/rng.hpp"

namespace freqlog {

enum class Verdict { consistent, violation_candidate };

inline const char* to_string(Verdict v) {
  return v == Verdict::consistent ? "consistent" : "violation_candidate";
}

struct MaximalityReport {
  std::vector<int> horizons;
  std::vector<double> g_star;
  std::vector<std::vector<double>> optimal_weights;
  double g1_star = 0.0;
  double max_violation = 0.0;
  double certified_tol = 0.0;
  Verdict verdict = Verdict::consistent;
  // horizons where the optimizer hit max_iters before certifying tol
  std::vector<int> unconverged;
};

inline MaximalityReport maximality_scan(const ReturnModel& model, int n_max, double tol = 1e-10,
                                        std::size_t budget = kDefaultBudget,
                                        std::int64_t max_iters = 100'000) {
  if (n_max < 1) throw std::invalid_argument("n_max must be >= 1");
  check_budget(model.atom_count(), n_max, budget);
  MaximalityReport report;
  report.certified_tol = tol;
  report.max_violation = -std::numeric_limits<double>::infinity();
  const OptimizeOptions opts{tol, max_iters, budget};
  for (int n = 1; n <= n_max; ++n) {
    const auto result = optimize_elg(model, n, opts);
    report.horizons.push_back(n);
    report.g_star.push_back(result.value);
    const auto w = result.weights.values();
    report.optimal_weights.emplace_back(w.begin(), w.end());
    if (!result.converged) report.unconverged.push_back(n);
    if (n == 1) report.g1_star = result.value;
    report.max_violation = std::max(report.max_violation, result.value - report.g1_star);
  }
  report.verdict = report.max_violation > 2.0 * tol ? Verdict::violation_candidate
                                                    : Verdict::consistent;
  return report;
}

/// Parameters of the random i.i.d. model generator. Returns are uniform on
/// [-bound, bound]; probabilities are uniform on the simplex.
struct GeneratorSpec {
  std::size_t m_min = 2;
  std::size_t m_max = 3;
  std::size_t s_min = 2;
  std::size_t s_max = 3;
  double bound = 0.8;

  void validate() const {
    if (m_min < 2 || m_max < m_min) throw std::invalid_argument("need 2 <= m_min <= m_max");
    if (s_min < 1 || s_max < s_min) throw std::invalid_argument("need 1 <= s_min <= s_max");
    if (!(bound > 0.0 && bound < 1.0)) {
      throw std::invalid_argument("return bound must lie in (0, 1)");
    }
  }
};

/// Model for one trial; stream = trial index under the master seed.
inline ReturnModel random_model(const GeneratorSpec& spec, std::uint64_t seed,
                                std::uint64_t trial) {
  spec.validate();
  CounterStream rng(seed, trial);
  auto pick = [&](std::size_t lo, std::size_t hi) {
    const auto span = hi - lo + 1;
    return std::min(hi, lo + static_cast<std::size_t>(rng.next() * static_cast<double>(span)));
  };
  const std::size_t m = pick(spec.m_min, spec.m_max);
  const std::size_t s = pick(spec.s_min, spec.s_max);
  ModelData d;
  for (std::size_t i = 0; i < m; ++i) d.asset_names.push_back("a" + std::to_string(i));
  d.atoms.assign(s, std::vector<double>(m));
  for (auto& row : d.atoms) {
    for (auto& x : row) x = spec.bound * (2.0 * rng.next() - 1.0);
  }
  // Flat Dirichlet via normalized exponential spacings.
  std::vector<double> e(s);
  long double total = 0.0L;
  for (auto& v : e) {
    v = -std::log1p(-rng.next());
    total += v;
  }
  d.probabilities.resize(s);
  for (std::size_t k = 0; k < s; ++k) {
    d.probabilities[k] = total > 0.0L ? static_cast<double>(e[k] / total)
                                      : 1.0 / static_cast<double>(s);
  }
  return ReturnModel(std::move(d));
}

struct SearchEntry {
  std::uint64_t seed = 0;
  std::uint64_t trial = 0;
  ReturnModel model;
  MaximalityReport report;
};

/// Runs `trials` random models and returns them ranked by max_violation,
/// largest first (stable on ties, so trial order breaks them). `keep`
/// truncates the list; 0 keeps all.
inline std::vector<SearchEntry> counterexample_search(const GeneratorSpec& spec,
                                                      std::uint64_t trials, int n_max,
                                                      std::uint64_t seed, double tol = 1e-10,
                                                      std::size_t budget = kDefaultBudget,
                                                      std::size_t keep = 0) {
  spec.validate();
  if (n_max < 1) throw std::invalid_argument("n_max must be >= 1");
  check_budget(spec.s_max, n_max, budget);
  std::vector<SearchEntry> entries;
  entries.reserve(trials);
  for (std::uint64_t t = 0; t < trials; ++t) {
    auto model = random_model(spec, seed, t);
    auto report = maximality_scan(model, n_max, tol, budget);
    entries.push_back({seed, t, std::move(model), std::move(report)});
  }
  std::stable_sort(entries.begin(), entries.end(), [](const SearchEntry& a, const SearchEntry& b) {
    return a.report.max_violation > b.report.max_violation;
  });
  if (keep != 0 && entries.size() > keep) entries.erase(entries.begin() + keep, entries.end());
  return entries;
}

}  // namespace freqlog
