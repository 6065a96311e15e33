#pragma once

// Tick-data replay: realized returns, sliding-window dominance ratios,
// the empirical plug-in model and buy-and-hold gap curves.

#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <istream>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "freqlog/bounds.hpp"
#include "freqlog/elg.hpp"
#include "freqlog/errors.hpp"
#include "freqlog/model.hpp"

namespace freqlog {

/// Single-asset price path, timestamps in seconds.
class TickSeries {
 public:
  TickSeries(std::vector<double> timestamps, std::vector<double> prices)
      : timestamps_(std::move(timestamps)), prices_(std::move(prices)) {
    if (timestamps_.size() != prices_.size()) {
      throw InvariantViolation("timestamp and price counts differ");
    }
    for (std::size_t k = 0; k < prices_.size(); ++k) {
      if (!(prices_[k] > 0.0) || !std::isfinite(prices_[k])) {
        throw InvariantViolation("tick " + std::to_string(k) + ": price must be > 0");
      }
      if (k > 0 && timestamps_[k] < timestamps_[k - 1]) {
        throw InvariantViolation("tick " + std::to_string(k) + ": timestamp decreases");
      }
    }
  }

  std::size_t tick_count() const noexcept { return prices_.size(); }
  const std::vector<double>& timestamps() const noexcept { return timestamps_; }
  const std::vector<double>& prices() const noexcept { return prices_; }

 private:
  std::vector<double> timestamps_;
  std::vector<double> prices_;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

inline std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

}  // namespace detail

/// Reads `timestamp,price` rows. A first line whose timestamp field is not
/// numeric is treated as the header. Blank lines are skipped.
inline TickSeries parse_ticks(std::istream& in) {
  std::vector<double> ts, px;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view row = detail::trim(line);
    if (row.empty()) continue;
    const auto comma = row.find(',');
    if (comma == std::string_view::npos) {
      if (line_no == 1) continue;
      throw ParseError("expected 'timestamp,price'", line_no);
    }
    const auto t = detail::parse_double(row.substr(0, comma));
    const auto rest = row.substr(comma + 1);
    if (rest.find(',') != std::string_view::npos) {
      throw ParseError("expected 2 fields", line_no);
    }
    const auto p = detail::parse_double(rest);
    if (!t || !p) {
      if (line_no == 1 && !t) continue;
      throw ParseError("not a number", line_no);
    }
    if (!(*p > 0.0) || !std::isfinite(*p)) {
      throw InvariantViolation("line " + std::to_string(line_no) + ": price must be > 0");
    }
    if (!ts.empty() && *t < ts.back()) {
      throw InvariantViolation("line " + std::to_string(line_no) + ": timestamp decreases");
    }
    ts.push_back(*t);
    px.push_back(*p);
  }
  return TickSeries(std::move(ts), std::move(px));
}

inline TickSeries load_ticks(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open tick file " + path);
  return parse_ticks(in);
}

/// x(k) = (s(k+1) - s(k)) / s(k).
inline std::vector<double> realized_returns(const TickSeries& ticks) {
  if (ticks.tick_count() < 2) throw std::invalid_argument("need at least 2 ticks");
  const auto& s = ticks.prices();
  std::vector<double> x(s.size() - 1);
  for (std::size_t k = 0; k + 1 < s.size(); ++k) x[k] = (s[k + 1] - s[k]) / s[k];
  return x;
}

/// Non-overlapping n-step compound returns; a trailing partial block is dropped.
inline std::vector<double> realized_compound(const std::vector<double>& x, int n) {
  if (n < 1) throw std::invalid_argument("period must be >= 1");
  if (n == 1) return x;
  const auto un = static_cast<std::size_t>(n);
  std::vector<double> chi;
  chi.reserve(x.size() / un);
  for (std::size_t b = 0; (b + 1) * un <= x.size(); ++b) {
    double total = 1.0;
    for (std::size_t k = b * un; k < (b + 1) * un; ++k) total *= 1.0 + x[k];
    chi.push_back(total - 1.0);
  }
  return chi;
}

struct DominanceSeries {
  std::size_t window = 1;
  double r = 0.0;
  std::size_t start_index = 0;
  // entry e corresponds to return index k = start_index + e
  std::vector<double> asset_ratio;
  std::vector<double> cash_ratio;

  double asset_dominant_fraction() const { return fraction([](double a, double) { return a <= 1.0; }); }
  double cash_dominant_fraction() const { return fraction([](double, double c) { return c <= 1.0; }); }
  double neither_fraction() const {
    return fraction([](double a, double c) { return a > 1.0 && c > 1.0; });
  }

 private:
  template <typename Pred>
  double fraction(Pred pred) const {
    if (asset_ratio.empty()) return 0.0;
    std::size_t hits = 0;
    for (std::size_t e = 0; e < asset_ratio.size(); ++e) hits += pred(asset_ratio[e], cash_ratio[e]) ? 1 : 0;
    return static_cast<double>(hits) / static_cast<double>(asset_ratio.size());
  }
};

/// Trailing-window estimates of E[(1+r)/(1+x)] (asset) and E[(1+x)/(1+r)]
/// (cash) over the most recent `window` returns.
inline DominanceSeries sliding_dominance(const std::vector<double>& x, double r,
                                         std::size_t window) {
  if (window < 1) throw std::invalid_argument("window must be >= 1");
  if (x.size() < window) {
    throw std::invalid_argument("series of length " + std::to_string(x.size()) +
                                " is shorter than window " + std::to_string(window));
  }
  if (!(r > -1.0)) throw std::invalid_argument("riskless rate must be > -1");
  DominanceSeries out;
  out.window = window;
  out.r = r;
  out.start_index = window - 1;
  const std::size_t count = x.size() - window + 1;
  out.asset_ratio.reserve(count);
  out.cash_ratio.reserve(count);
  const long double gross_r = 1.0L + r;
  long double asset_sum = 0.0L, cash_sum = 0.0L;
  for (std::size_t k = 0; k < x.size(); ++k) {
    // Drop the oldest term before adding the newest, so a window of one
    // holds exactly the current term.
    if (k >= window) {
      const long double old_x = 1.0L + x[k - window];
      asset_sum -= gross_r / old_x;
      cash_sum -= old_x / gross_r;
    }
    const long double gross_x = 1.0L + x[k];
    asset_sum += gross_r / gross_x;
    cash_sum += gross_x / gross_r;
    if (k + 1 >= window) {
      out.asset_ratio.push_back(static_cast<double>(asset_sum / window));
      out.cash_ratio.push_back(static_cast<double>(cash_sum / window));
    }
  }
  return out;
}

/// Two-asset model: cash at rate r (index 0) and the observed returns as
/// equally likely atoms of the risky asset (index 1).
inline ReturnModel empirical_model(const std::vector<double>& x, double r = 0.0) {
  if (x.empty()) throw std::invalid_argument("empty return series");
  ModelData d;
  d.asset_names = {"cash", "asset"};
  d.riskless_index = 0;
  d.atoms.reserve(x.size());
  for (double xi : x) d.atoms.push_back({r, xi});
  d.probabilities.assign(x.size(), 1.0 / static_cast<double>(x.size()));
  return ReturnModel(std::move(d));
}

struct GapRow {
  int n = 1;
  double k2 = 1.0;
  double g1_star = 0.0;
  double gn = 0.0;
  Method gn_method = Method::exact;
  double gn_std_error = 0.0;
  double gap = 0.0;
  std::optional<double> baseline_lower;
  std::optional<double> baseline_upper;
  std::optional<double> improved_upper;
  Method improved_method = Method::exact;
};

struct GapCurveOptions {
  std::uint64_t samples = 100'000;
  std::uint64_t seed = 0;
  std::size_t budget = kDefaultBudget;
};

/// Gap rows for one weight given a precomputed g_1*. Bound columns are
/// filled only when the risky asset (index 1) is dominant.
inline std::vector<GapRow> empirical_gap_curve(const ReturnModel& model, double g1_star,
                                               const WeightVector& K,
                                               const std::vector<int>& n_grid,
                                               const GapCurveOptions& opts = {}) {
  if (K.size() != 2 || model.asset_count() != 2) {
    throw std::invalid_argument("gap curve needs a two-asset model and weight");
  }
  if (!(K[1] > 0.0)) throw std::invalid_argument("risky weight K_2 must lie in (0, 1]");
  if (n_grid.empty()) throw std::invalid_argument("empty horizon grid");
  const bool risky_dominant = find_dominant(model, 0.0).qualifies(1);
  std::vector<GapRow> rows;
  rows.reserve(n_grid.size());
  for (int n : n_grid) {
    if (n < 1) throw std::invalid_argument("horizon must be >= 1");
    GapRow row;
    row.n = n;
    row.k2 = K[1];
    row.g1_star = g1_star;
    const ElgEstimate est = outcome_count(model.atom_count(), n) <= opts.budget
                                ? elg_exact(model, K, n, opts.budget)
                                : elg_mc(model, K, n, opts.samples, opts.seed);
    row.gn = est.value;
    row.gn_method = est.method;
    row.gn_std_error = est.std_error;
    row.gap = g1_star - est.value;
    if (risky_dominant) {
      const auto base = buyhold_gap_bounds(K[1], n);
      row.baseline_lower = base.lower;
      row.baseline_upper = base.upper;
      const auto improved =
          improved_gap_bounds(model, K, 1, n, opts.budget, {opts.samples, opts.seed});
      row.improved_upper = improved.upper;
      row.improved_method = improved.expectation_method;
    }
    rows.push_back(row);
  }
  return rows;
}

inline std::vector<GapRow> empirical_gap_curve(const std::vector<double>& x, double r,
                                               const WeightVector& K,
                                               const std::vector<int>& n_grid,
                                               const GapCurveOptions& opts = {},
                                               double tol = 1e-10) {
  const ReturnModel model = empirical_model(x, r);
  const auto best = optimize_elg(model, 1, {tol, 100'000, opts.budget});
  return empirical_gap_curve(model, best.value, K, n_grid, opts);
}

}  // namespace freqlog
