#pragma once

// CSV and JSON serialization. Numbers are written in the shortest form that
// parses back to the same double.

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "hardedge/ensemble.hpp"
#include "hardedge/errors.hpp"
#include "hardedge/process.hpp"
#include "hardedge/verify.hpp"

namespace hardedge {

inline constexpr int kSchemaVersion = 1;

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shortest round-trip decimal; "inf", "-inf", "nan" for non-finite values.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw IoError("cannot parse number '" + s + "'");
  }
  return v;
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cell += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        cell += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      out.push_back(cell);
      cell.clear();
    } else if (ch != '\r') {
      cell += ch;
    }
  }
  out.push_back(cell);
  return out;
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) {
    if (ch == '"') q += '"';
    q += ch;
  }
  return q + '"';
}

inline nlohmann::json number_or_null(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return nullptr;
  return v > 0 ? "inf" : "-inf";
}

inline double number_from_json(const nlohmann::json& j) {
  if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
  if (j.is_string()) return parse_double(j.get<std::string>());
  return j.get<double>();
}

}  // namespace detail

inline nlohmann::json params_to_json(const EnsembleParams& p) {
  return {{"alpha", p.alpha()}, {"b", p.b()}, {"rho", p.rho()}, {"n", p.n()}};
}

inline EnsembleParams params_from_json(const nlohmann::json& j) {
  return EnsembleParams(j.at("alpha").get<double>(), j.at("b").get<double>(), j.at("rho").get<double>(),
                        j.at("n").get<std::int64_t>());
}

// ---------------------------------------------------------------- configurations

/// "# alpha=..,b=..,rho=..,n=..,seed=..,replicate=.." then "j,u" rows. Several
/// configurations may follow each other in one stream.
inline void write_configuration_csv(std::ostream& os, const RadialConfiguration& cfg,
                                    std::uint64_t replicate = 0) {
  const auto& p = cfg.params;
  os << "# alpha=" << format_double(p.alpha()) << ",b=" << format_double(p.b())
     << ",rho=" << format_double(p.rho()) << ",n=" << p.n() << ",seed=" << cfg.seed
     << ",replicate=" << replicate << "\n";
  os << "j,u\n";
  for (std::size_t i = 0; i < cfg.u.size(); ++i) os << (i + 1) << ',' << format_double(cfg.u[i]) << "\n";
}

inline RadialConfiguration read_configuration_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("# ", 0) != 0) throw IoError("configuration CSV: missing header comment");
  double alpha = NAN, b = NAN, rho = NAN;
  std::int64_t n = -1;
  std::uint64_t seed = 0;
  for (const auto& kv : detail::split_csv_line(line.substr(2))) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw IoError("configuration CSV: bad header field '" + kv + "'");
    const std::string key = kv.substr(0, eq), value = kv.substr(eq + 1);
    if (key == "alpha") alpha = parse_double(value);
    else if (key == "b") b = parse_double(value);
    else if (key == "rho") rho = parse_double(value);
    else if (key == "n") n = std::stoll(value);
    else if (key == "seed") seed = std::stoull(value);
  }
  RadialConfiguration cfg{{}, EnsembleParams(alpha, b, rho, n), seed};
  if (!std::getline(is, line) || line != "j,u") throw IoError("configuration CSV: expected 'j,u' header");
  while (is.peek() != '#' && std::getline(is, line)) {
    if (line.empty()) continue;
    const auto cells = detail::split_csv_line(line);
    if (cells.size() != 2) throw IoError("configuration CSV: expected 2 columns");
    if (std::stoll(cells[0]) != static_cast<std::int64_t>(cfg.u.size()) + 1) {
      throw IoError("configuration CSV: particle indices must run 1..n");
    }
    cfg.u.push_back(parse_double(cells[1]));
  }
  if (static_cast<std::int64_t>(cfg.u.size()) != n) throw IoError("configuration CSV: row count differs from n");
  return cfg;
}

inline std::vector<RadialConfiguration> read_configurations_csv(std::istream& is) {
  std::vector<RadialConfiguration> out;
  while (is.peek() == '#') out.push_back(read_configuration_csv(is));
  if (out.empty()) throw IoError("configuration CSV: no configurations found");
  return out;
}

inline nlohmann::json configuration_to_json(const RadialConfiguration& cfg) {
  return {{"schema_version", kSchemaVersion}, {"params", params_to_json(cfg.params)}, {"seed", cfg.seed}, {"u", cfg.u}};
}

inline RadialConfiguration configuration_from_json(const nlohmann::json& j) {
  RadialConfiguration cfg{j.at("u").get<std::vector<double>>(), params_from_json(j.at("params")),
                          j.at("seed").get<std::uint64_t>()};
  if (static_cast<std::int64_t>(cfg.u.size()) != cfg.params.n()) throw IoError("configuration JSON: length differs from n");
  return cfg;
}

// ---------------------------------------------------------------- step processes

inline void write_step_process_csv(std::ostream& os, const StepProcess& s) {
  os << "location,increment,cumulative\n";
  for (std::size_t i = 0; i < s.locations().size(); ++i) {
    os << format_double(s.locations()[i]) << ',' << format_double(s.increments()[i]) << ','
       << format_double(s.cumulative()[i]) << "\n";
  }
}

// ---------------------------------------------------------------- generic tables

/// Column-named numeric table (limit-law tables, kernels).
struct NumericTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

inline void write_table_csv(std::ostream& os, const NumericTable& t) {
  for (std::size_t c = 0; c < t.columns.size(); ++c) os << (c ? "," : "") << detail::csv_field(t.columns[c]);
  os << "\n";
  for (const auto& row : t.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) os << (c ? "," : "") << format_double(row[c]);
    os << "\n";
  }
}

inline NumericTable read_table_csv(std::istream& is) {
  NumericTable t;
  std::string line;
  if (!std::getline(is, line)) throw IoError("table CSV: empty input");
  t.columns = detail::split_csv_line(line);
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto cells = detail::split_csv_line(line);
    if (cells.size() != t.columns.size()) throw IoError("table CSV: ragged row");
    std::vector<double> row;
    for (const auto& c : cells) row.push_back(parse_double(c));
    t.rows.push_back(std::move(row));
  }
  return t;
}

inline nlohmann::json table_to_json(const NumericTable& t) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : t.rows) {
    nlohmann::json r = nlohmann::json::array();
    for (double v : row) r.push_back(detail::number_or_null(v));
    rows.push_back(r);
  }
  return {{"schema_version", kSchemaVersion}, {"columns", t.columns}, {"rows", rows}};
}

inline NumericTable table_from_json(const nlohmann::json& j) {
  NumericTable t;
  t.columns = j.at("columns").get<std::vector<std::string>>();
  for (const auto& r : j.at("rows")) {
    std::vector<double> row;
    for (const auto& v : r) row.push_back(detail::number_from_json(v));
    t.rows.push_back(std::move(row));
  }
  return t;
}

// ---------------------------------------------------------------- reports

/// Resolved campaign configuration. The worker count is left out: it does not
/// change results and would break byte-identical reruns across worker counts.
inline nlohmann::json experiment_config_to_json(const ExperimentConfig& c) {
  nlohmann::json grid = nlohmann::json::array(), levels = nlohmann::json::array(),
                 cross = nlohmann::json::array();
  for (double v : c.grid) grid.push_back(detail::number_or_null(v));
  for (double v : c.levels) levels.push_back(detail::number_or_null(v));
  for (double v : c.cross_times) cross.push_back(detail::number_or_null(v));
  return {{"campaign", to_string(c.kind)},
          {"params", params_to_json(c.params)},
          {"phi", c.phi_spec.empty() ? c.phi.name : c.phi_spec},
          {"grid", grid},
          {"levels", levels},
          {"cross_times", cross},
          {"replicates", c.replicates},
          {"seed", c.seed},
          {"n_ladder", c.n_ladder},
          {"delta", c.delta},
          {"horizon", c.horizon},
          {"z_threshold", c.z_threshold},
          {"threshold", c.threshold},
          {"slope_max", c.slope_max},
          {"empirical_centering", c.empirical_centering},
          {"discriminate_covariance_form", c.discriminate_covariance_form},
          {"moment_indices", c.moment_indices}};
}

/// Full report. Wall time is only included on request (it differs between runs).
inline nlohmann::json report_to_json(const ExperimentReport& r, bool include_wall_time = false) {
  nlohmann::json records = nlohmann::json::array();
  for (const auto& rec : r.records) {
    records.push_back({{"quantity", rec.quantity},
                       {"x1", detail::number_or_null(rec.x1)},
                       {"x2", detail::number_or_null(rec.x2)},
                       {"empirical", detail::number_or_null(rec.empirical)},
                       {"target", detail::number_or_null(rec.target)},
                       {"se", detail::number_or_null(rec.se)},
                       {"z", detail::number_or_null(rec.z)},
                       {"checked", rec.checked}});
  }
  nlohmann::json table = nlohmann::json::array();
  for (const auto& row : r.table) {
    table.push_back({{"quantity", row.quantity},
                     {"x1", detail::number_or_null(row.x1)},
                     {"x2", detail::number_or_null(row.x2)},
                     {"value", detail::number_or_null(row.value)}});
  }
  nlohmann::json assertions = nlohmann::json::array();
  for (const auto& a : r.assertions) {
    assertions.push_back({{"name", a.name}, {"passed", a.passed}, {"detail", a.detail}});
  }
  nlohmann::json j = {{"schema_version", kSchemaVersion},
                      {"config", experiment_config_to_json(r.config)},
                      {"passed", r.passed()},
                      {"assertions", assertions},
                      {"records", records},
                      {"table", table}};
  if (include_wall_time) j["wall_seconds"] = r.wall_seconds;
  return j;
}

/// Per-grid-point CSV: records first, then table rows (empirical/target/se/z empty).
inline void write_report_csv(std::ostream& os, const ExperimentReport& r) {
  os << "# " << experiment_config_to_json(r.config).dump() << "\n";
  os << "kind,quantity,x1,x2,empirical,target,se,z,checked,value\n";
  for (const auto& rec : r.records) {
    os << "record," << detail::csv_field(rec.quantity) << ',' << format_double(rec.x1) << ','
       << format_double(rec.x2) << ',' << format_double(rec.empirical) << ',' << format_double(rec.target)
       << ',' << format_double(rec.se) << ',' << format_double(rec.z) << ',' << (rec.checked ? 1 : 0)
       << ",\n";
  }
  for (const auto& row : r.table) {
    os << "table," << detail::csv_field(row.quantity) << ',' << format_double(row.x1) << ','
       << format_double(row.x2) << ",,,,,," << format_double(row.value) << "\n";
  }
}

/// Structural check of a report JSON document; returns an empty string when valid.
inline std::string validate_report_json(const nlohmann::json& j) {
  if (!j.is_object()) return "report must be an object";
  if (!j.contains("schema_version") || j["schema_version"] != kSchemaVersion) return "schema_version must be 1";
  for (const char* key : {"config", "assertions", "records", "table"}) {
    if (!j.contains(key)) return std::string("missing key '") + key + "'";
  }
  if (!j.contains("passed") || !j["passed"].is_boolean()) return "'passed' must be a boolean";
  for (const auto& rec : j["records"]) {
    for (const char* key : {"quantity", "x1", "x2", "empirical", "target", "se", "z", "checked"}) {
      if (!rec.contains(key)) return std::string("record missing '") + key + "'";
    }
    if (!rec["se"].is_number() || rec["se"].get<double>() < 0.0) return "record se must be a non-negative number";
    if (!rec["z"].is_number()) return "record z must be finite";
  }
  for (const auto& a : j["assertions"]) {
    if (!a.contains("name") || !a.contains("passed") || !a["passed"].is_boolean()) return "bad assertion entry";
  }
  return {};
}

}  // namespace hardedge
