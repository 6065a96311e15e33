// freqlog: command-line front end.
//
//   freqlog optimize --model m.json --n 3 --out dir
//   freqlog bounds   --kj 0.5 --n-min 1 --n-max 10 [--epsilon 0.07] --out dir
//   freqlog scan     (--model m.json | --trials 100) --n-max 4 --seed 7 --out dir
//   freqlog backtest --ticks t.csv --k2 0.25,0.5 --n-grid 1,2,5 --window 1000 --out dir
//
// Every run writes <out>/manifest.json next to <out>/result.{csv,json}.
// Exit codes: 0 success, 1 usage/parse, 2 numerical non-convergence,
// 3 invariant violation in inputs, 4 scan found a violation candidate.

#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <openssl/evp.h>

#include <CLI11.hpp>
#include <json.hpp>

#include "freqlog/freqlog.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kNonConvergence = 2,
  kBadInput = 3,
  kViolationCandidate = 4,
};

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr);
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) {
    hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  }
  return hex.str();
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

class Run {
 public:
  Run(std::string command, const std::string& out_dir) : command_(std::move(command)), out_(out_dir) {
    fs::create_directories(out_);
  }

  template <typename T>
  void param(const std::string& name, const T& value) { params_[name] = value; }
  void seed(std::uint64_t s) { seed_ = s; }
  void input(const std::string& path, const std::string& bytes) { digests_[path] = sha256_hex(bytes); }

  void write_text(const std::string& name, const std::string& text) const {
    std::ofstream f(out_ / name, std::ios::binary);
    f << text;
    if (!f) throw std::runtime_error("cannot write " + (out_ / name).string());
  }
  void write_json(const std::string& name, const json& j) const { write_text(name, j.dump(2) + "\n"); }

  void finish() const {
    json m;
    m["command"] = command_;
    m["parameters"] = params_;
    m["seed"] = seed_ ? json(*seed_) : json(nullptr);
    m["tool_version"] = freqlog::kVersion;
    m["input_digests"] = digests_;
    m["started_at"] = started_;
    write_json("manifest.json", m);
  }

 private:
  std::string command_;
  fs::path out_;
  json params_ = json::object();
  std::optional<std::uint64_t> seed_;
  std::map<std::string, std::string> digests_;
  std::string started_ = utc_timestamp();
};

json report_to_json(const freqlog::MaximalityReport& r) {
  json j;
  j["horizons"] = r.horizons;
  j["g_star"] = r.g_star;
  j["optimal_weights"] = r.optimal_weights;
  j["g1_star"] = r.g1_star;
  j["max_violation"] = r.max_violation;
  j["certified_tol"] = r.certified_tol;
  j["verdict"] = freqlog::to_string(r.verdict);
  j["unconverged"] = r.unconverged;
  return j;
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

// ---------------------------------------------------------------- optimize

struct OptimizeArgs {
  std::string model;
  int n = 1;
  double tol = 1e-10;
  std::size_t budget = freqlog::kDefaultBudget;
  std::int64_t max_iters = 100'000;
  std::string out;
};

int cmd_optimize(const OptimizeArgs& a) {
  const std::string text = freqlog::read_file(a.model);
  const auto model = freqlog::parse_model(text);
  Run run("optimize", a.out);
  run.input(a.model, text);
  run.param("model", a.model);
  run.param("n", a.n);
  run.param("tol", a.tol);
  run.param("budget", a.budget);
  run.param("max_iters", a.max_iters);

  const auto r = freqlog::optimize_elg(model, a.n, {a.tol, a.max_iters, a.budget});
  const auto w = r.weights.values();

  json j;
  j["horizon"] = r.horizon;
  j["assets"] = model.asset_names();
  j["weights"] = std::vector<double>(w.begin(), w.end());
  j["value"] = r.value;
  j["iterations"] = r.iterations;
  j["gradient_gap"] = r.gradient_gap;
  j["converged"] = r.converged;
  run.write_json("result.json", j);

  std::vector<std::string> header{"horizon", "value", "gradient_gap", "iterations", "converged"};
  for (const auto& name : model.asset_names()) header.push_back("weight_" + name);
  std::ostringstream csv;
  freqlog::CsvWriter writer(csv, header);
  std::ostringstream row;
  row << r.horizon << ',' << freqlog::format_double(r.value) << ','
      << freqlog::format_double(r.gradient_gap) << ',' << r.iterations << ','
      << (r.converged ? "true" : "false");
  for (double wi : w) row << ',' << freqlog::format_double(wi);
  csv << row.str() << '\n';
  run.write_text("result.csv", csv.str());
  run.finish();

  if (!r.converged) {
    std::cerr << "optimizer stopped after " << r.iterations << " iterations with gap "
              << r.gradient_gap << " > tol " << a.tol << "\n";
    return kNonConvergence;
  }
  return kOk;
}

// ------------------------------------------------------------------ bounds

struct BoundsArgs {
  double kj = 0.5;
  int n_min = 1;
  int n_max = 10;
  std::optional<double> epsilon;
  std::string out;
};

int cmd_bounds(const BoundsArgs& a) {
  if (a.n_min < 1 || a.n_max < a.n_min) {
    throw std::invalid_argument("need 1 <= --n-min <= --n-max");
  }
  // Validate before touching the output directory.
  std::vector<freqlog::GapBounds> rows;
  for (int n = a.n_min; n <= a.n_max; ++n) rows.push_back(freqlog::buyhold_gap_bounds(a.kj, n));
  std::optional<freqlog::RebalancePlan> plan;
  if (a.epsilon) plan = freqlog::rebalance_horizon(a.kj, *a.epsilon);

  Run run("bounds", a.out);
  run.param("kj", a.kj);
  run.param("n_min", a.n_min);
  run.param("n_max", a.n_max);
  run.param("epsilon", optional_json(a.epsilon));

  std::ostringstream csv;
  freqlog::CsvWriter writer(csv, {"n", "k_j", "lower", "upper", "tightened_lower"});
  json j;
  j["rows"] = json::array();
  for (const auto& b : rows) {
    writer.write(b.horizon, b.k_j, b.lower, b.upper, b.tightened_lower);
    j["rows"].push_back({{"n", b.horizon}, {"k_j", b.k_j}, {"lower", b.lower},
                         {"upper", b.upper}, {"tightened_lower", b.tightened_lower}});
  }
  if (plan) {
    j["plan"] = {{"epsilon", plan->epsilon}, {"k_j", plan->k_j}, {"n_star", plan->n_star}};
  }
  run.write_text("result.csv", csv.str());
  run.write_json("result.json", j);
  run.finish();
  return kOk;
}

// -------------------------------------------------------------------- scan

struct ScanArgs {
  std::optional<std::string> model;
  std::uint64_t trials = 100;
  int n_max = 4;
  double tol = 1e-10;
  std::size_t budget = freqlog::kDefaultBudget;
  std::uint64_t seed = 0;
  std::size_t keep = 0;
  freqlog::GeneratorSpec generator;
  std::string out;
};

int cmd_scan(const ScanArgs& a) {
  struct Entry {
    std::optional<std::uint64_t> trial;
    freqlog::ReturnModel model;
    freqlog::MaximalityReport report;
  };
  std::vector<Entry> entries;
  std::string model_text;
  if (a.model) {
    model_text = freqlog::read_file(*a.model);
    auto model = freqlog::parse_model(model_text);
    auto report = freqlog::maximality_scan(model, a.n_max, a.tol, a.budget);
    entries.push_back({std::nullopt, std::move(model), std::move(report)});
  } else {
    for (auto& e : freqlog::counterexample_search(a.generator, a.trials, a.n_max, a.seed, a.tol,
                                                  a.budget, a.keep)) {
      entries.push_back({e.trial, std::move(e.model), std::move(e.report)});
    }
  }

  Run run("scan", a.out);
  if (a.model) {
    run.input(*a.model, model_text);
    run.param("model", *a.model);
  } else {
    run.param("trials", a.trials);
    run.param("m_min", a.generator.m_min);
    run.param("m_max", a.generator.m_max);
    run.param("s_min", a.generator.s_min);
    run.param("s_max", a.generator.s_max);
    run.param("bound", a.generator.bound);
    run.param("keep", a.keep);
  }
  run.param("n_max", a.n_max);
  run.param("tol", a.tol);
  run.param("budget", a.budget);
  run.seed(a.seed);

  std::ostringstream csv;
  freqlog::CsvWriter writer(csv, {"rank", "trial", "max_violation", "g1_star", "verdict",
                                  "unconverged_horizons"});
  json j;
  j["reports"] = json::array();
  std::size_t candidates = 0, unconverged = 0;
  for (std::size_t rank = 0; rank < entries.size(); ++rank) {
    const auto& e = entries[rank];
    const auto& r = e.report;
    writer.write(rank, e.trial ? std::to_string(*e.trial) : std::string(), r.max_violation,
                 r.g1_star, freqlog::to_string(r.verdict), r.unconverged.size());
    json item = report_to_json(r);
    item["rank"] = rank;
    item["trial"] = e.trial ? json(*e.trial) : json(nullptr);
    if (!r.unconverged.empty()) ++unconverged;
    if (r.verdict == freqlog::Verdict::violation_candidate) {
      ++candidates;
      json model = freqlog::model_to_json(e.model);
      model["provenance"] = {{"seed", a.seed},
                             {"trial", item["trial"]},
                             {"tool_version", freqlog::kVersion}};
      item["model"] = model;
      const std::string name =
          "candidate_" + (e.trial ? std::to_string(*e.trial) : std::string("model")) + ".json";
      run.write_json(name, model);
    }
    j["reports"].push_back(item);
  }
  j["violation_candidates"] = candidates;
  j["unconverged_reports"] = unconverged;
  run.write_text("result.csv", csv.str());
  run.write_json("result.json", j);
  run.finish();

  if (unconverged) {
    std::cerr << unconverged << " report(s) hit the iteration limit\n";
    return kNonConvergence;
  }
  if (candidates) {
    std::cerr << candidates << " violation candidate(s) written to " << a.out << "\n";
    return kViolationCandidate;
  }
  return kOk;
}

// ---------------------------------------------------------------- backtest

struct BacktestArgs {
  std::string ticks;
  std::vector<double> k2{0.25, 0.5, 0.75, 0.9};
  std::vector<int> n_grid{1, 2, 5, 10, 20, 50, 100};
  std::size_t window = 1000;
  double r = 0.0;
  std::uint64_t samples = 10'000;
  std::uint64_t seed = 0;
  double tol = 1e-14;
  std::size_t budget = freqlog::kDefaultBudget;
  std::string out;
};

int cmd_backtest(const BacktestArgs& a) {
  for (double k : a.k2) {
    if (!(k > 0.0 && k <= 1.0)) throw std::invalid_argument("--k2 values must lie in (0, 1]");
  }
  const std::string text = freqlog::read_file(a.ticks);
  std::istringstream in(text);
  const auto ticks = freqlog::parse_ticks(in);
  const auto x = freqlog::realized_returns(ticks);
  const auto model = freqlog::empirical_model(x, a.r);
  const auto best = freqlog::optimize_elg(model, 1, {a.tol, 100'000, a.budget});
  const auto dom = freqlog::find_dominant(model, 0.0);
  const auto series = freqlog::sliding_dominance(x, a.r, a.window);
  const freqlog::GapCurveOptions opts{a.samples, a.seed, a.budget};

  Run run("backtest", a.out);
  run.input(a.ticks, text);
  run.param("ticks", a.ticks);
  run.param("k2", a.k2);
  run.param("n_grid", a.n_grid);
  run.param("window", a.window);
  run.param("r", a.r);
  run.param("samples", a.samples);
  run.param("tol", a.tol);
  run.param("budget", a.budget);
  run.seed(a.seed);

  std::ostringstream csv;
  freqlog::CsvWriter writer(csv, {"k2", "n", "g1_star", "gn", "gn_method", "gn_std_error", "gap",
                                  "baseline_lower", "baseline_upper", "improved_upper",
                                  "improved_method"});
  json rows = json::array();
  for (double k : a.k2) {
    const freqlog::WeightVector K({1.0 - k, k});
    for (const auto& row : freqlog::empirical_gap_curve(model, best.value, K, a.n_grid, opts)) {
      const bool bounded = row.improved_upper.has_value();
      const std::string improved_method = bounded ? freqlog::to_string(row.improved_method) : "";
      writer.write(row.k2, row.n, row.g1_star, row.gn, freqlog::to_string(row.gn_method),
                   row.gn_std_error, row.gap, row.baseline_lower, row.baseline_upper,
                   row.improved_upper, improved_method);
      rows.push_back({{"k2", row.k2},
                      {"n", row.n},
                      {"g1_star", row.g1_star},
                      {"gn", row.gn},
                      {"gn_method", freqlog::to_string(row.gn_method)},
                      {"gn_std_error", row.gn_std_error},
                      {"gap", row.gap},
                      {"baseline_lower", optional_json(row.baseline_lower)},
                      {"baseline_upper", optional_json(row.baseline_upper)},
                      {"improved_upper", optional_json(row.improved_upper)},
                      {"improved_method", bounded ? json(improved_method) : json(nullptr)}});
    }
  }
  const auto w = best.weights.values();
  json j;
  j["tick_count"] = ticks.tick_count();
  j["return_count"] = x.size();
  j["g1_star"] = best.value;
  j["g1_weights"] = std::vector<double>(w.begin(), w.end());
  j["g1_converged"] = best.converged;
  j["g1_gradient_gap"] = best.gradient_gap;
  j["ratio_asset"] = dom.ratio(0, 1);
  j["ratio_cash"] = dom.ratio(1, 0);
  j["risky_dominant"] = dom.qualifies(1);
  j["gap_curve"] = rows;
  j["dominance"] = {{"window", series.window},
                    {"r", series.r},
                    {"start_index", series.start_index},
                    {"asset_dominant_fraction", series.asset_dominant_fraction()},
                    {"cash_dominant_fraction", series.cash_dominant_fraction()},
                    {"neither_fraction", series.neither_fraction()}};
  run.write_text("result.csv", csv.str());
  run.write_json("result.json", j);

  std::ostringstream dcsv;
  freqlog::CsvWriter dwriter(dcsv, {"k", "asset_ratio", "cash_ratio"});
  for (std::size_t e = 0; e < series.asset_ratio.size(); ++e) {
    dwriter.write(series.start_index + e, series.asset_ratio[e], series.cash_ratio[e]);
  }
  run.write_text("dominance.csv", dcsv.str());
  run.write_json("dominance.json", {{"window", series.window},
                                    {"r", series.r},
                                    {"start_index", series.start_index},
                                    {"asset_ratio", series.asset_ratio},
                                    {"cash_ratio", series.cash_ratio}});
  run.finish();

  if (!best.converged) {
    std::cerr << "g1* optimization did not reach tol " << a.tol << "\n";
    return kNonConvergence;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Frequency-dependent expected log-growth analysis"};
  app.require_subcommand(1);

  OptimizeArgs opt;
  auto* optimize = app.add_subcommand("optimize", "maximize g_n over the simplex");
  optimize->add_option("--model", opt.model, "model file (JSON)")->required();
  optimize->add_option("--n", opt.n, "rebalancing period")->check(CLI::PositiveNumber);
  optimize->add_option("--tol", opt.tol, "duality-gap tolerance (nats/step)");
  optimize->add_option("--budget", opt.budget, "max enumerated outcomes");
  optimize->add_option("--max-iters", opt.max_iters, "iteration limit");
  optimize->add_option("--out", opt.out, "output directory")->required();

  BoundsArgs bnd;
  auto* bounds = app.add_subcommand("bounds", "buy-and-hold gap bounds and rebalancing horizon");
  bounds->add_option("--kj", bnd.kj, "weight on the dominant asset")->required();
  bounds->add_option("--n-min", bnd.n_min, "first horizon");
  bounds->add_option("--n-max", bnd.n_max, "last horizon");
  bounds->add_option("--epsilon", bnd.epsilon, "gap tolerance for the rebalancing horizon");
  bounds->add_option("--out", bnd.out, "output directory")->required();

  ScanArgs scn;
  std::string scan_model;
  auto* scan = app.add_subcommand("scan", "probe g_n* <= g_1* on a model or random models");
  scan->add_option("--model", scan_model, "model file (JSON); otherwise random models");
  scan->add_option("--trials", scn.trials, "number of random models");
  scan->add_option("--n-max", scn.n_max, "largest horizon")->check(CLI::PositiveNumber);
  scan->add_option("--tol", scn.tol, "optimizer tolerance");
  scan->add_option("--budget", scn.budget, "max enumerated outcomes");
  scan->add_option("--seed", scn.seed, "master seed");
  scan->add_option("--keep", scn.keep, "report only the worst N (0 = all)");
  scan->add_option("--m-min", scn.generator.m_min, "fewest assets");
  scan->add_option("--m-max", scn.generator.m_max, "most assets");
  scan->add_option("--s-min", scn.generator.s_min, "fewest atoms");
  scan->add_option("--s-max", scn.generator.s_max, "most atoms");
  scan->add_option("--bound", scn.generator.bound, "return magnitude bound, < 1");
  scan->add_option("--out", scn.out, "output directory")->required();

  BacktestArgs bt;
  auto* backtest = app.add_subcommand("backtest", "tick replay: dominance series and gap curves");
  backtest->add_option("--ticks", bt.ticks, "tick CSV (timestamp,price)")->required();
  backtest->add_option("--k2", bt.k2, "risky weights")->delimiter(',');
  backtest->add_option("--n-grid", bt.n_grid, "rebalancing periods")->delimiter(',');
  backtest->add_option("--window", bt.window, "sliding window length M")->check(CLI::PositiveNumber);
  backtest->add_option("--r", bt.r, "riskless rate per tick");
  backtest->add_option("--samples", bt.samples, "Monte Carlo samples when enumeration is too large");
  backtest->add_option("--seed", bt.seed, "Monte Carlo seed");
  backtest->add_option("--tol", bt.tol, "optimizer tolerance for g_1*");
  backtest->add_option("--budget", bt.budget, "max enumerated outcomes");
  backtest->add_option("--out", bt.out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*optimize) return cmd_optimize(opt);
    if (*bounds) return cmd_bounds(bnd);
    if (*scan) {
      if (!scan_model.empty()) scn.model = scan_model;
      return cmd_scan(scn);
    }
    if (*backtest) return cmd_backtest(bt);
  } catch (const freqlog::InvariantViolation& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kBadInput;
  } catch (const freqlog::ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kUsage;
  } catch (const freqlog::BudgetExceeded& e) {
    std::cerr << e.what() << "; raise --budget or lower the horizon\n";
    return kUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}
