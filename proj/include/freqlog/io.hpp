#pragma once

// Model files (JSON) and table serialization.
//
// Model file:
//   { "assets": ["cash", "asset"],
//     "atoms":  [[0.0, 0.2], [0.0, -0.1]],   // row = atom, column = asset
//     "probs":  [0.5, 0.5],
//     "riskless": 0 }                         // optional
// Unknown keys (e.g. a "provenance" block) are ignored.

#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <type_traits>
#include <vector>

#include <json.hpp>

#include "freqlog/errors.hpp"
#include "freqlog/model.hpp"

namespace freqlog {

inline constexpr const char* kVersion = "0.1.0";

/// 17 significant digits: every double round-trips through text.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline ReturnModel model_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ParseError("model file must be a JSON object");
  for (const char* key : {"assets", "atoms", "probs"}) {
    if (!j.contains(key)) throw ParseError(std::string("model file lacks '") + key + "'");
  }
  ModelData d;
  try {
    d.asset_names = j.at("assets").get<std::vector<std::string>>();
    d.atoms = j.at("atoms").get<std::vector<std::vector<double>>>();
    d.probabilities = j.at("probs").get<std::vector<double>>();
    if (j.contains("riskless") && !j.at("riskless").is_null()) {
      const auto& r = j.at("riskless");
      if (!r.is_number_integer() || r.get<long long>() < 0) {
        throw ParseError("'riskless' must be a nonnegative integer index");
      }
      d.riskless_index = r.get<std::size_t>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad model field: ") + e.what());
  }
  return ReturnModel(std::move(d));
}

inline nlohmann::json model_to_json(const ReturnModel& model) {
  const ModelData d = model.data();
  nlohmann::json j;
  j["assets"] = d.asset_names;
  j["atoms"] = d.atoms;
  j["probs"] = d.probabilities;
  if (d.riskless_index) j["riskless"] = *d.riskless_index;
  return j;
}

inline ReturnModel parse_model(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("malformed model file: ") + e.what());
  }
  return model_from_json(j);
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline ReturnModel load_model(const std::string& path) { return parse_model(read_file(path)); }

/// Minimal CSV writer: fixed header, doubles at 17 significant digits,
/// absent values as empty cells.
class CsvWriter {
 public:
  CsvWriter(std::ostream& out, const std::vector<std::string>& header) : out_(out) {
    row(header);
  }

  template <typename... Cells>
  void write(const Cells&... cells) {
    bool first = true;
    ((emit(cells, first)), ...);
    out_ << '\n';
  }

 private:
  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
    out_ << '\n';
  }
  void sep(bool& first) {
    if (!first) out_ << ',';
    first = false;
  }
  void emit(double v, bool& first) { sep(first); out_ << format_double(v); }
  void emit(const std::optional<double>& v, bool& first) {
    sep(first);
    if (v) out_ << format_double(*v);
  }
  void emit(const std::string& v, bool& first) { sep(first); out_ << v; }
  void emit(const char* v, bool& first) { sep(first); out_ << v; }
  template <typename Int>
    requires std::is_integral_v<Int>
  void emit(Int v, bool& first) { sep(first); out_ << v; }

  std::ostream& out_;
};

}  // namespace freqlog
