// hardedge: sample configurations, tabulate limit laws, run verification campaigns.
//
// Exit status: 0 success, 1 a campaign assertion failed, 2 invalid
// configuration, 3 numerical or I/O failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "hardedge/hardedge.hpp"

namespace {

using namespace hardedge;

constexpr int kExitAssertion = 1;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct Options {
  double alpha = 0.0;
  double b = 1.0;
  double rho = 0.5;
  std::int64_t n = 100;
  std::string phi = "one";
  std::string grid;
  std::string levels;
  std::string cross_times;
  std::string ladder;
  std::int64_t replicates = 0;
  std::uint64_t seed = 20261015;
  std::string out;
  std::string format = "json";
  int threads = 1;
  std::string campaign = "clt";
  double delta = NAN;
  double horizon = NAN;
  double threshold = NAN;
  double z_threshold = 5.0;
  double slope_max = -0.8;
  bool empirical_centering = false;
  bool discriminate = false;
  bool wall_time = false;
};

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  return out;
}

double parse_number(const std::string& token, const std::string& what) {
  try {
    return parse_double(token);
  } catch (const IoError&) {
    throw PreconditionError(what + ": cannot parse '" + token + "'");
  }
}

/// Explicit list "0.5,1,2,inf", or linspace(a,b,k) / logspace(a,b,k) with
/// endpoints given as values. A token ending in 'L' is a multiple of `big_l`.
std::vector<double> parse_grid(const std::string& spec, const std::string& what,
                               std::optional<double> big_l = std::nullopt) {
  const std::string s = trim(spec);
  if (s.empty()) return {};
  for (const char* fn : {"linspace", "logspace"}) {
    const std::string prefix = std::string(fn) + "(";
    if (s.rfind(prefix, 0) == 0) {
      if (s.back() != ')') throw PreconditionError(what + ": missing ')' in '" + s + "'");
      const auto args = split(s.substr(prefix.size(), s.size() - prefix.size() - 1), ',');
      if (args.size() != 3) throw PreconditionError(what + ": " + fn + " takes (start, stop, count)");
      const double a = parse_number(args[0], what);
      const double b = parse_number(args[1], what);
      const double k = parse_number(args[2], what);
      if (!(k >= 1.0) || k != std::floor(k)) throw PreconditionError(what + ": count must be a positive integer");
      const bool log = std::string(fn) == "logspace";
      if (log && !(a > 0.0 && b > 0.0)) throw PreconditionError(what + ": logspace endpoints must be positive");
      std::vector<double> out;
      const int count = static_cast<int>(k);
      for (int i = 0; i < count; ++i) {
        const double f = count == 1 ? 0.0 : static_cast<double>(i) / (count - 1);
        out.push_back(log ? std::exp(std::log(a) + f * (std::log(b) - std::log(a))) : a + f * (b - a));
      }
      return out;
    }
  }
  std::vector<double> out;
  for (const auto& token : split(s, ',')) {
    if (!token.empty() && token.back() == 'L') {
      if (!big_l) throw PreconditionError(what + ": 'L' multiples are only allowed for levels");
      out.push_back(parse_number(trim(token.substr(0, token.size() - 1)), what) * *big_l);
    } else {
      out.push_back(parse_number(token, what));
    }
  }
  return out;
}

std::vector<std::int64_t> parse_ladder(const std::string& spec) {
  std::vector<std::int64_t> out;
  for (double v : parse_grid(spec, "--ladder")) {
    if (!(v >= 1.0) || v != std::floor(v)) throw PreconditionError("--ladder: entries must be positive integers");
    out.push_back(static_cast<std::int64_t>(v));
  }
  return out;
}

TestFunction read_phi_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw PreconditionError("--phi table: cannot open '" + path + "'");
  std::vector<double> xs, ys;
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto cells = split(line, ',');
    if (cells.size() != 2) throw PreconditionError("--phi table: rows must be 'x,y'");
    try {
      xs.push_back(parse_double(cells[0]));
      ys.push_back(parse_double(cells[1]));
    } catch (const IoError&) {
      if (xs.empty()) continue;  // header row
      throw PreconditionError("--phi table: bad row '" + line + "'");
    }
  }
  return phi_table(xs, ys);
}

/// one | exp_decay(λ) | rational | table:<path>
TestFunction parse_phi(const std::string& spec) {
  const std::string s = trim(spec);
  if (s == "one") return phi_one();
  if (s == "rational") return phi_rational();
  if (s.rfind("exp_decay(", 0) == 0 && s.back() == ')') {
    return phi_exp_decay(parse_number(s.substr(10, s.size() - 11), "--phi"));
  }
  if (s.rfind("table:", 0) == 0) return read_phi_table(s.substr(6));
  throw PreconditionError("--phi: expected one | exp_decay(<rate>) | rational | table:<file>, got '" + s + "'");
}

EnsembleParams make_params(const Options& o) { return EnsembleParams(o.alpha, o.b, o.rho, o.n); }

void require_format(const Options& o) {
  if (o.format != "csv" && o.format != "json") throw PreconditionError("--format must be csv or json");
}

std::ofstream open_output(const std::string& path) {
  if (path.empty()) throw PreconditionError("--out is required");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  return out;
}

std::string sibling_path(const std::string& path, const std::string& suffix) {
  std::filesystem::path p(path);
  return (p.parent_path() / (p.stem().string() + suffix + p.extension().string())).string();
}

int cmd_sample(const Options& o) {
  require_format(o);
  const auto params = make_params(o);
  const std::int64_t count = o.replicates > 0 ? o.replicates : 1;
  const ConfigurationSampler sampler(params);
  auto out = open_output(o.out);
  if (o.format == "csv") {
    for (std::int64_t r = 0; r < count; ++r) {
      write_configuration_csv(out, sampler.sample(o.seed, static_cast<std::uint64_t>(r)), static_cast<std::uint64_t>(r));
    }
  } else {
    nlohmann::json configs = nlohmann::json::array();
    for (std::int64_t r = 0; r < count; ++r) {
      auto j = configuration_to_json(sampler.sample(o.seed, static_cast<std::uint64_t>(r)));
      j["replicate"] = r;
      configs.push_back(std::move(j));
    }
    out << nlohmann::json{{"schema_version", kSchemaVersion}, {"configurations", configs}}.dump(1) << "\n";
  }
  if (!out) throw IoError("write to '" + o.out + "' failed");
  std::cerr << "wrote " << count << " configuration(s) of n=" << params.n() << " to " << o.out << "\n";
  return 0;
}

int cmd_limit(const Options& o) {
  require_format(o);
  const auto params = make_params(o);
  const TestFunction phi = parse_phi(o.phi);
  const LimitLaw law(params, phi);
  const auto grid = parse_grid(o.grid, "--grid");
  if (grid.empty()) throw PreconditionError("--grid must contain at least one time");
  for (double t : grid) {
    if (!(t >= 0.0)) throw DomainError("--grid: time " + format_double(t) + " is negative");
  }
  NumericTable times{{"t1", "t2", "m1_t1", "m2_t1", "m12", "cov_G", "L"}, {}};
  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (std::size_t j = i; j < grid.size(); ++j) {
      try {
        times.rows.push_back({grid[i], grid[j], law.m1(grid[i]), law.m2(grid[i]), law.m12(grid[i], grid[j]),
                              law.cov_G(grid[i], grid[j]), law.big_L()});
      } catch (const std::exception& e) {
        throw DomainError("at grid point (" + format_double(grid[i]) + ", " + format_double(grid[j]) +
                          "): " + e.what());
      }
    }
  }
  std::optional<NumericTable> levels_table;
  const auto levels = parse_grid(o.levels, "--levels", law.big_L());
  if (!levels.empty()) {
    if (!phi.positive) throw PreconditionError("--levels needs a positive phi");
    NumericTable t{{"h1", "h2", "tau_h1", "tau_prime_h1", "cov_Q"}, {}};
    for (std::size_t i = 0; i < levels.size(); ++i) {
      for (std::size_t j = i; j < levels.size(); ++j) {
        try {
          t.rows.push_back({levels[i], levels[j], law.tau(levels[i]), law.tau_prime(levels[i]),
                            law.cov_Q(levels[i], levels[j])});
        } catch (const DomainError& e) {
          throw DomainError("at level " + format_double(levels[i]) + ": " + e.what());
        }
      }
    }
    levels_table = std::move(t);
  }
  auto out = open_output(o.out);
  if (o.format == "csv") {
    write_table_csv(out, times);
    if (levels_table) {
      const auto path = sibling_path(o.out, "_levels");
      auto lout = open_output(path);
      write_table_csv(lout, *levels_table);
    }
  } else {
    nlohmann::json j{{"schema_version", kSchemaVersion},
                     {"params", params_to_json(params)},
                     {"phi", o.phi},
                     {"kappa", params.kappa()},
                     {"L", law.big_L()},
                     {"times", table_to_json(times)}};
    if (levels_table) j["levels"] = table_to_json(*levels_table);
    out << j.dump(1) << "\n";
  }
  if (!out) throw IoError("write to '" + o.out + "' failed");
  return 0;
}

ExperimentConfig resolve_verify_config(const Options& o) {
  ExperimentConfig c;
  const auto kind = parse_campaign(o.campaign);
  if (!kind) throw PreconditionError("--campaign must be one of clt, hitting, escape, centering_rate, tv_decay, moments");
  c.kind = *kind;
  c.params = make_params(o);
  c.phi = parse_phi(o.phi);
  c.phi_spec = trim(o.phi);
  const std::string check = check_test_function(c.phi);
  if (!check.empty()) throw PreconditionError("--phi: " + check);
  c.seed = o.seed;
  c.threads = std::max(1, o.threads);
  c.z_threshold = o.z_threshold;
  c.slope_max = o.slope_max;
  c.empirical_centering = o.empirical_centering;
  c.discriminate_covariance_form = o.discriminate;
  c.grid = parse_grid(o.grid, "--grid");
  c.cross_times = parse_grid(o.cross_times, "--cross-times");
  c.n_ladder = parse_ladder(o.ladder);
  c.replicates = o.replicates > 0 ? o.replicates : 1000;
  switch (c.kind) {
    case CampaignKind::clt:
    case CampaignKind::moments:
      if (c.grid.empty()) c.grid = {0.5, 1.0, 2.0, 4.0};
      break;
    case CampaignKind::hitting: {
      const LimitLaw law(c.params, c.phi);
      c.levels = parse_grid(o.levels, "--levels", law.big_L());
      if (c.levels.empty()) c.levels = {0.1 * law.big_L(), 0.3 * law.big_L(), 0.5 * law.big_L()};
      c.horizon = 50.0;
      if (c.n_ladder.empty()) c.n_ladder = {100, 400};
      break;
    }
    case CampaignKind::escape:
      if (c.n_ladder.empty()) c.n_ladder = {100, 400, 1600};
      c.delta = 0.2;
      c.horizon = 10.0;
      c.threshold = 1e-3;
      break;
    case CampaignKind::centering_rate:
      if (c.grid.empty()) c.grid = {0.25, 0.5, 1.0, 2.0, 4.0, 8.0};
      if (c.n_ladder.empty()) c.n_ladder = {50, 100, 200, 400, 800};
      break;
    case CampaignKind::tv_decay:
      if (c.n_ladder.empty()) c.n_ladder = {100, 1000, 10000};
      c.delta = 0.1;
      c.threshold = 0.05;
      break;
  }
  if (!std::isnan(o.delta)) c.delta = o.delta;
  if (!std::isnan(o.horizon)) c.horizon = o.horizon;
  if (!std::isnan(o.threshold)) c.threshold = o.threshold;
  if (c.replicates < 2) throw PreconditionError("--replicates must be >= 2");
  return c;
}

int cmd_verify(const Options& o) {
  require_format(o);
  const auto config = resolve_verify_config(o);
  if (o.out.empty()) throw PreconditionError("--out is required");
  const auto report = run_campaign(config);
  auto out = open_output(o.out);
  if (o.format == "json") {
    out << report_to_json(report, o.wall_time).dump(1) << "\n";
  } else {
    write_report_csv(out, report);
  }
  if (!out) throw IoError("write to '" + o.out + "' failed");
  for (const auto& a : report.assertions) {
    std::cout << (a.passed ? "PASS " : "FAIL ") << a.name << (a.detail.empty() ? "" : "  [" + a.detail + "]")
              << "\n";
  }
  std::cerr << "campaign " << to_string(config.kind) << " finished in " << report.wall_seconds << " s\n";
  return report.passed() ? 0 : kExitAssertion;
}

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("--alpha", o.alpha, "alpha > -1")->capture_default_str();
  cmd->add_option("--b", o.b, "b > 0")->capture_default_str();
  cmd->add_option("--rho", o.rho, "hard wall radius, 0 < rho < b^(-1/(2b))")->capture_default_str();
  cmd->add_option("--n", o.n, "number of particles")->capture_default_str();
  cmd->add_option("--seed", o.seed, "master seed")->capture_default_str();
  cmd->add_option("--out", o.out, "output path")->required();
  cmd->add_option("--format", o.format, "csv or json")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sample and analyse radial particle configurations near a hard wall"};
  app.require_subcommand(1);
  Options o;

  auto* sample = app.add_subcommand("sample", "draw radial configurations");
  add_common(sample, o);
  sample->add_option("--replicates", o.replicates, "number of configurations (default 1)");

  auto* limit = app.add_subcommand("limit", "tabulate m1, cov_G and, for positive phi, tau, tau', cov_Q");
  add_common(limit, o);
  limit->add_option("--phi", o.phi, "one | exp_decay(<rate>) | rational | table:<file>")->capture_default_str();
  limit->add_option("--grid", o.grid, "times: list, linspace(a,b,k) or logspace(a,b,k)");
  limit->add_option("--levels", o.levels, "levels; 'L' suffix means a multiple of L = m1(inf)");

  auto* verify = app.add_subcommand("verify", "run a Monte Carlo verification campaign");
  add_common(verify, o);
  verify->add_option("--campaign", o.campaign, "clt | hitting | escape | centering_rate | tv_decay | moments")
      ->capture_default_str();
  verify->add_option("--phi", o.phi, "one | exp_decay(<rate>) | rational | table:<file>")->capture_default_str();
  verify->add_option("--grid", o.grid, "time grid");
  verify->add_option("--levels", o.levels, "level grid (hitting)");
  verify->add_option("--cross-times", o.cross_times, "times for the hitting cross-covariance");
  verify->add_option("--ladder", o.ladder, "n ladder, e.g. 100,400,1600");
  verify->add_option("--replicates", o.replicates, "Monte Carlo replicates (default 1000)");
  verify->add_option("--threads", o.threads, "worker threads (results do not depend on it)")->capture_default_str();
  verify->add_option("--delta", o.delta, "theta margin for escape / tv_decay");
  verify->add_option("--horizon", o.horizon, "time horizon T (escape) or Q_n(L) horizon (hitting)");
  verify->add_option("--threshold", o.threshold, "final-value threshold (escape, tv_decay)");
  verify->add_option("--z-threshold", o.z_threshold, "|z| acceptance threshold")->capture_default_str();
  verify->add_option("--slope-max", o.slope_max, "largest accepted fitted exponent (centering_rate)")
      ->capture_default_str();
  verify->add_flag("--empirical-centering", o.empirical_centering, "center by the replicate mean");
  verify->add_flag("--discriminate", o.discriminate, "also reject the m1-based variance form (clt)");
  verify->add_flag("--wall-time", o.wall_time, "include wall time in the JSON report");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (sample->parsed()) return cmd_sample(o);
    if (limit->parsed()) return cmd_limit(o);
    return cmd_verify(o);
  } catch (const PreconditionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}
