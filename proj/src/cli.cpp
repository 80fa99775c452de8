#include "sigdet/cli.hpp"

#include <CLI11.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <cmath>
#include <fmt/format.h>
#include <fstream>
#include <nlohmann/json.hpp>
#include <optional>
#include <sstream>

#include "sigdet/asymptotics.hpp"
#include "sigdet/detection.hpp"
#include "sigdet/errors.hpp"
#include "sigdet/extremal_solver.hpp"
#include "sigdet/monte_carlo.hpp"

#ifndef SIGDET_VERSION
#define SIGDET_VERSION "0.0.0"
#endif

namespace sigdet::cli {
namespace {

constexpr std::size_t kMaxListedSupport = 1000;

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

double parse_real(std::string_view text, const std::string& field) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
    throw ConfigError(field, "expected a real number, got '" + t + "'");
  }
  return v;
}

std::int64_t parse_integer(std::string_view text, const std::string& field) {
  const std::string t = trim(text);
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
    throw ConfigError(field, "expected an integer, got '" + t + "'");
  }
  return v;
}

const std::string& require(const ConfigMap& c, const std::string& key) {
  const auto it = c.find(key);
  if (it == c.end() || trim(it->second).empty()) throw ConfigError(key, "missing required value");
  return it->second;
}

bool has_value(const ConfigMap& c, const std::string& key) {
  const auto it = c.find(key);
  return it != c.end() && !trim(it->second).empty();
}

std::string real(double x) { return fmt::format("{:.17g}", x); }

std::string csv_row(const std::vector<std::string>& cells) {
  std::string line;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) line += ',';
    line += cells[i];
  }
  return line + '\n';
}

struct Provenance {
  std::string command;
  std::string hash;
  std::optional<std::uint64_t> seed;
  std::int64_t multiplicity = 1;
};

constexpr const char* kMultiplicityConvention =
    "each support index carries m independent coordinates; m=1 counts one orthant, "
    "m=2^d counts all sign orthants";

std::string csv_provenance(const Provenance& p) {
  std::string s;
  s += fmt::format("# sigdet {} {}\n", version(), p.command);
  s += fmt::format("# config_hash: {}\n", p.hash);
  s += fmt::format("# seed: {}\n", p.seed ? std::to_string(*p.seed) : "none");
  s += fmt::format("# multiplicity: {} ({})\n", p.multiplicity, kMultiplicityConvention);
  s += "# partitions: 1\n";
  return s;
}

nlohmann::ordered_json json_provenance(const Provenance& p) {
  nlohmann::ordered_json j;
  j["command"] = p.command;
  j["config_hash"] = p.hash;
  j["seed"] = p.seed ? nlohmann::ordered_json(*p.seed) : nlohmann::ordered_json(nullptr);
  j["version"] = std::string(version());
  j["multiplicity"] = p.multiplicity;
  j["multiplicity_convention"] = kMultiplicityConvention;
  j["partitions"] = 1;
  return j;
}

std::optional<std::uint64_t> seed_of(const ConfigMap& c) {
  if (!has_value(c, "experiment.seed")) return std::nullopt;
  const std::int64_t s = parse_integer(c.at("experiment.seed"), "experiment.seed");
  if (s < 0) throw ConfigError("experiment.seed", "must be nonnegative");
  return static_cast<std::uint64_t>(s);
}

// Signals a missing or unreadable config file.
struct MissingConfig : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CommonOptions {
  std::string config_path;
  std::string output_path;
  std::vector<std::string> overrides;
};

ConfigMap effective_config(const CommonOptions& opts, bool config_required) {
  ConfigMap c = schema_defaults();
  if (!opts.config_path.empty()) {
    try {
      for (auto& [k, v] : load_config(opts.config_path)) c[k] = v;
    } catch (const std::ios_base::failure&) {
      throw MissingConfig("cannot open config file '" + opts.config_path + "'");
    }
  } else if (config_required) {
    throw MissingConfig("no config file given (use --config)");
  }
  apply_overrides(c, opts.overrides);
  return c;
}

nlohmann::ordered_json problem_json(const ProblemConfig& p) {
  return {{"dimension", p.dimension},
          {"epsilon", p.epsilon},
          {"alpha", p.alpha},
          {"multiplicity", p.orthant_multiplicity},
          {"support_cap", p.support_cap},
          {"spectrum", {{"kind", std::string(to_string(p.spectrum.kind))},
                        {"degrees", p.spectrum.degrees}}},
          {"smoothness", {{"shape", std::string(to_string(p.smoothness.shape))},
                          {"exponents", p.smoothness.exponents}}}};
}

std::string run_solve(const ConfigMap& c) {
  const ValidatedConfig config = validate_config(problem_from(c));
  const double big_r = parse_real(require(c, "experiment.ellipsoid_radius"),
                                  "experiment.ellipsoid_radius");
  ExtremalSolution sol;
  if (has_value(c, "experiment.radius")) {
    const auto radii = parse_list(c.at("experiment.radius"), "experiment.radius");
    if (radii.size() != 1) throw ConfigError("experiment.radius", "solve takes one radius");
    sol = solve_extremal(config, radii.front(), big_r);
  } else if (has_value(c, "experiment.target_u")) {
    const auto us = parse_list(c.at("experiment.target_u"), "experiment.target_u");
    if (us.size() != 1) throw ConfigError("experiment.target_u", "solve takes one target");
    if (big_r != 1.0) {
      throw ConfigError("experiment.ellipsoid_radius", "target_u solves assume R = 1");
    }
    sol = solve_for_u(config, us.front());
  } else {
    throw ConfigError("experiment.radius", "give a radius or a target_u");
  }
  const FilterWeights w = filter_weights(sol);
  const ConstraintResiduals res = constraint_residuals(sol);

  nlohmann::ordered_json j;
  j["schema"] = "sigdet.solve/1";
  j["provenance"] = json_provenance({"solve", config_hash(c), seed_of(c), config->orthant_multiplicity});
  j["problem"] = problem_json(config.get());
  j["radius"] = sol.radius;
  j["ellipsoid_radius"] = sol.ellipsoid_radius;
  j["lagrange_a"] = sol.lagrange_a;
  j["z0_squared"] = sol.z0_squared;
  j["u"] = sol.u;
  j["J"] = {{"j0", sol.j.j0}, {"j1", sol.j.j1}, {"j2", sol.j.j2}};
  j["support_size"] = sol.support.size();
  j["residuals"] = {{"radius", res.radius_relative},
                    {"ellipsoid", res.ellipsoid_relative},
                    {"u", res.u_relative}};
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < sol.support.size() && i < kMaxListedSupport; ++i) {
    const auto& p = sol.support[i];
    std::vector<std::int32_t> idx(p.index.coords().begin(), p.index.coords().end());
    rows.push_back({{"index", idx},
                    {"b", p.b},
                    {"a_squared", p.a_squared},
                    {"theta_star_squared", p.theta_star_squared},
                    {"weight", w.weights[i]}});
  }
  j["support_listed"] = rows.size();
  j["support"] = std::move(rows);
  return j.dump(2) + '\n';
}

RateRegime regime_from(const ConfigMap& c) {
  RateRegime r;
  r.kind = parse_regime_kind(trim(require(c, "rates.regime")));
  r.t = parse_list(require(c, "spectrum.degrees"), "spectrum.degrees");
  r.s = parse_list(require(c, "smoothness.exponents"), "smoothness.exponents");
  return r;
}

std::string run_rates(const ConfigMap& c) {
  const RateRegime regime = regime_from(c);
  const std::vector<double> eps = has_value(c, "rates.epsilons")
                                      ? parse_list(c.at("rates.epsilons"), "rates.epsilons")
                                      : default_sweep_epsilons();
  const double target = parse_real(require(c, "rates.target_u"), "rates.target_u");
  const std::int64_t m = parse_integer(require(c, "problem.multiplicity"), "problem.multiplicity");
  const RateSweep sweep = rate_sweep(regime, eps, target, m);

  std::string s = csv_provenance({"rates", config_hash(c), std::nullopt, m});
  s += fmt::format("# regime: {}\n", to_string(regime.kind));
  s += csv_row({"epsilon", "feasible", "r_solved", "r_star", "u", "support_size", "fitted_slope",
                "predicted_exponent"});
  for (const auto& p : sweep.points) {
    s += csv_row({real(p.epsilon), p.feasible ? "1" : "0", real(p.r_solved), real(p.r_star),
                  real(p.u), std::to_string(p.support_size), real(sweep.fitted_slope),
                  real(sweep.predicted_exponent)});
  }
  return s;
}

std::string run_simulate(const ConfigMap& c) {
  ExperimentPlan plan;
  plan.config = problem_from(c);
  validate_config(plan.config);
  const std::int64_t reps = parse_integer(require(c, "experiment.replications"),
                                          "experiment.replications");
  if (reps <= 0) throw ConfigError("experiment.replications", "must be positive");
  plan.replications = static_cast<std::size_t>(reps);
  plan.seed = seed_of(c).value_or(0);
  const std::string rule = trim(require(c, "experiment.threshold"));
  if (rule == "quantile") {
    plan.threshold_rule = ThresholdRule::QuantileAlpha;
  } else if (rule == "consistency") {
    plan.threshold_rule = ThresholdRule::ConsistencyCU;
  } else {
    throw ConfigError("experiment.threshold", "expected 'quantile' or 'consistency'");
  }
  plan.c = parse_real(require(c, "experiment.c"), "experiment.c");
  const std::int64_t threads = parse_integer(require(c, "experiment.threads"), "experiment.threads");
  if (threads < 0) throw ConfigError("experiment.threads", "must be nonnegative");
  plan.threads = static_cast<unsigned>(threads);

  std::vector<double> values;
  if (has_value(c, "experiment.radius")) {
    plan.alternative = AlternativeSpec::Radius;
    values = parse_list(c.at("experiment.radius"), "experiment.radius");
  } else if (has_value(c, "experiment.target_u")) {
    plan.alternative = AlternativeSpec::TargetU;
    values = parse_list(c.at("experiment.target_u"), "experiment.target_u");
  } else {
    throw ConfigError("experiment.radius", "give a radius or a target_u");
  }

  std::string s = csv_provenance({"simulate", config_hash(c), plan.seed,
                                  plan.config.orthant_multiplicity});
  s += fmt::format("# threshold_rule: {}\n", rule);
  s += csv_row({"alpha", "radius", "u", "threshold", "type1", "type2", "predicted_type2",
                "type1_se", "type2_se", "replications", "support_size", "seed"});
  for (double v : values) {
    plan.value = v;
    const ErrorEstimates e = estimate_errors(plan);
    s += csv_row({real(e.alpha), real(e.radius), real(e.u_value), real(e.threshold),
                  real(e.type1_rate), real(e.type2_rate), real(e.predicted_type2),
                  real(e.type1_se), real(e.type2_se), std::to_string(e.replications),
                  std::to_string(e.support_size), std::to_string(e.seed)});
  }
  return s;
}

struct VerifyOptions {
  std::string lemma;
  double R = 0.0;
  std::vector<double> t, s, u;
  bool doubling = false;
};

std::string run_verify(const ConfigMap& c, VerifyOptions v) {
  if (v.t.empty() && has_value(c, "spectrum.degrees")) {
    v.t = parse_list(c.at("spectrum.degrees"), "spectrum.degrees");
  }
  if (v.s.empty() && has_value(c, "smoothness.exponents")) {
    v.s = parse_list(c.at("smoothness.exponents"), "smoothness.exponents");
  }
  std::string out = csv_provenance({"verify", config_hash(c), std::nullopt, 1});
  out += fmt::format("# lemma: {}\n", v.lemma);
  out += csv_row({"quantity", "R", "exact", "asymptotic", "ratio", "residual"});
  auto row = [&](const std::string& name, const std::string& r, const RatioCheck& k) {
    out += csv_row({name, r, real(k.exact), real(k.asymptotic), real(k.ratio),
                    real(std::abs(k.ratio - 1.0))});
  };
  std::vector<double> radii{v.R};
  if (v.doubling) radii.push_back(2.0 * v.R);

  if (v.lemma == "J") {
    if (!(v.R > 0.0)) throw InvalidArgument("--R is required and must be positive");
    for (double R : radii) {
      const JLemmaCheck k = verify_J_lemmas(v.t, v.s, R);
      row("J0", real(R), k.j0);
      row("J1", real(R), k.j1);
      row("J2", real(R), k.j2);
    }
  } else if (v.lemma == "1") {
    if (!(v.R > 0.0)) throw InvalidArgument("--R is required and must be positive");
    for (double R : radii) row("S", real(R), verify_lemma1(v.u, v.s, R));
  } else if (v.lemma == "constants") {
    const SobolevConstants k = sobolev_constants(v.t, v.s, true);
    // exact: Liouville closed form; asymptotic column carries the quadrature value.
    auto crow = [&](const std::string& name, double closed, double residual) {
      const double oracle = std::isnan(residual) ? residual : closed - residual;
      out += csv_row({name, "", real(closed), real(oracle), real(closed / oracle),
                      real(residual)});
    };
    crow("C0", k.c0, k.residual_c0);
    crow("C1", k.c1, k.residual_c1);
    crow("C2", k.c2, k.residual_c2);
  } else {
    throw InvalidArgument("--lemma must be one of J, 1, constants");
  }
  return out;
}

}  // namespace

const ConfigMap& schema_defaults() {
  static const ConfigMap defaults = {
      {"problem.dimension", "1"},
      {"problem.epsilon", "0.1"},
      {"problem.alpha", "0.05"},
      {"problem.multiplicity", "1"},
      {"problem.support_cap", std::to_string(kDefaultSupportCap)},
      {"spectrum.kind", "mild"},
      {"spectrum.degrees", ""},
      {"smoothness.shape", "sobolev_sum"},
      {"smoothness.exponents", ""},
      {"experiment.radius", ""},
      {"experiment.target_u", ""},
      {"experiment.ellipsoid_radius", "1"},
      {"experiment.replications", "10000"},
      {"experiment.seed", "0"},
      {"experiment.threshold", "quantile"},
      {"experiment.c", "0.5"},
      {"experiment.threads", "0"},
      {"rates.regime", ""},
      {"rates.target_u", "1"},
      {"rates.epsilons", ""},
  };
  return defaults;
}

ConfigMap load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::ios_base::failure("cannot open config file '" + path + "'");
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError("config", std::string("malformed INI: ") + e.message() + " at line " +
                                    std::to_string(e.line()));
  }
  ConfigMap out;
  const ConfigMap& known = schema_defaults();
  for (const auto& [section, body] : tree) {
    if (body.empty()) throw ConfigError(section, "key outside any section");
    for (const auto& [key, node] : body) {
      const std::string full = section + "." + key;
      if (!known.count(full)) throw ConfigError(full, "unknown config key");
      out[full] = node.get_value<std::string>();
    }
  }
  return out;
}

void apply_overrides(ConfigMap& config, const std::vector<std::string>& overrides) {
  const ConfigMap& known = schema_defaults();
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos) throw ConfigError(o, "override must look like section.key=value");
    const std::string key = trim(std::string_view(o).substr(0, eq));
    if (!known.count(key)) throw ConfigError(key, "override names an unknown config key");
    config[key] = trim(std::string_view(o).substr(eq + 1));
  }
}

std::vector<double> parse_list(std::string_view text, const std::string& field) {
  std::string norm(text);
  for (char& ch : norm) {
    if (ch == ',') ch = ' ';
  }
  std::istringstream in(norm);
  std::vector<double> out;
  std::string tok;
  while (in >> tok) out.push_back(parse_real(tok, field));
  return out;
}

ProblemConfig problem_from(const ConfigMap& config) {
  ConfigMap c = schema_defaults();
  for (const auto& [k, v] : config) c[k] = v;
  ProblemConfig p;
  const std::int64_t d = parse_integer(require(c, "problem.dimension"), "problem.dimension");
  if (d < 1) throw ConfigError("problem.dimension", "must be positive");
  p.dimension = static_cast<std::size_t>(d);
  p.epsilon = parse_real(require(c, "problem.epsilon"), "problem.epsilon");
  p.alpha = parse_real(require(c, "problem.alpha"), "problem.alpha");
  p.orthant_multiplicity = parse_integer(require(c, "problem.multiplicity"), "problem.multiplicity");
  p.support_cap = parse_integer(require(c, "problem.support_cap"), "problem.support_cap");
  try {
    p.spectrum.kind = parse_spectrum_kind(trim(require(c, "spectrum.kind")));
  } catch (const ConfigError&) {
    throw;
  } catch (const InvalidArgument& e) {
    throw ConfigError("spectrum.kind", e.what());
  }
  p.spectrum.degrees = parse_list(require(c, "spectrum.degrees"), "spectrum.degrees");
  try {
    p.smoothness.shape = parse_smoothness_shape(trim(require(c, "smoothness.shape")));
  } catch (const ConfigError&) {
    throw;
  } catch (const InvalidArgument& e) {
    throw ConfigError("smoothness.shape", e.what());
  }
  p.smoothness.exponents = parse_list(require(c, "smoothness.exponents"), "smoothness.exponents");
  return p;
}

std::string config_hash(const ConfigMap& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& [k, v] : config) {
    const std::string value = trim(v);
    if (value.empty()) continue;
    for (char ch : k + "=" + value + "\n") {
      h ^= static_cast<unsigned char>(ch);
      h *= 0x100000001b3ULL;
    }
  }
  return fmt::format("{:016x}", h);
}

std::string_view version() { return SIGDET_VERSION; }

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Minimax signal detection in sequence-space inverse problems", "sigdet"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(version()));

  CommonOptions common;
  auto add_common = [&](CLI::App* sub, bool config_required) {
    auto* opt = sub->add_option("--config", common.config_path, "INI config file");
    if (config_required) opt->required();
    sub->add_option("--output", common.output_path, "write results here instead of stdout");
    sub->add_option("--set", common.overrides, "override, e.g. problem.epsilon=0.05");
  };

  std::optional<std::string> radius, target_u;  // comma-separated lists for simulate
  std::optional<double> ellipsoid_radius, c_value;
  std::optional<std::int64_t> seed, replications;
  std::optional<std::string> threshold;

  auto* solve = app.add_subcommand("solve", "solve the extremal problem, JSON output");
  add_common(solve, true);
  solve->add_option("--radius", radius, "separation radius r");
  solve->add_option("--target-u", target_u, "solve for the radius giving this u");
  solve->add_option("--ellipsoid-radius", ellipsoid_radius, "ellipsoid radius R");

  auto* rates = app.add_subcommand("rates", "rate-exponent sweep, CSV output");
  add_common(rates, true);
  rates->add_option("--target-u", target_u, "u level solved at each epsilon");

  auto* simulate = app.add_subcommand("simulate", "Monte Carlo error estimates, CSV output");
  add_common(simulate, true);
  simulate->add_option("--radius", radius, "separation radius r");
  simulate->add_option("--target-u", target_u, "solve for the radius giving this u");
  simulate->add_option("--replications", replications, "replications per arm");
  simulate->add_option("--seed", seed, "64-bit seed");
  simulate->add_option("--threshold", threshold, "quantile or consistency")
      ->check(CLI::IsMember({"quantile", "consistency"}));
  simulate->add_option("--c", c_value, "threshold constant for the consistency rule");

  VerifyOptions verify_opts;
  auto* verify = app.add_subcommand("verify", "lemma and constant checks, CSV output");
  add_common(verify, false);
  verify->add_option("--lemma", verify_opts.lemma, "J, 1 or constants")
      ->required()
      ->check(CLI::IsMember({"J", "1", "constants"}));
  verify->add_option("--R", verify_opts.R, "lattice radius R");
  verify->add_option("--t", verify_opts.t, "degrees t (comma separated)")->delimiter(',');
  verify->add_option("--s", verify_opts.s, "exponents s (comma separated)")->delimiter(',');
  verify->add_option("--u", verify_opts.u, "exponents u for the lattice sum (comma separated)")
      ->delimiter(',');
  verify->add_flag("--doubling", verify_opts.doubling, "also report R doubled");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::CallForVersion&) {
    out << version() << '\n';
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "sigdet: " << e.what() << '\n';
    return kUsage;
  }

  try {
    std::vector<std::string> flag_overrides;
    auto push = [&](const char* key, const std::string& value) {
      flag_overrides.push_back(std::string(key) + "=" + value);
    };
    if (radius) {
      push("experiment.radius", *radius);
      push("experiment.target_u", "");
    }
    if (target_u) {
      push(*rates ? "rates.target_u" : "experiment.target_u", *target_u);
      if (!*rates) push("experiment.radius", "");
    }
    if (radius && target_u) throw InvalidArgument("--radius and --target-u are exclusive");
    if (ellipsoid_radius) push("experiment.ellipsoid_radius", real(*ellipsoid_radius));
    if (seed) push("experiment.seed", std::to_string(*seed));
    if (replications) push("experiment.replications", std::to_string(*replications));
    if (threshold) push("experiment.threshold", *threshold);
    if (c_value) push("experiment.c", real(*c_value));

    ConfigMap config = effective_config(common, !*verify);
    apply_overrides(config, flag_overrides);

    std::string result;
    if (*solve) {
      result = run_solve(config);
    } else if (*rates) {
      result = run_rates(config);
    } else if (*simulate) {
      result = run_simulate(config);
    } else {
      result = run_verify(config, verify_opts);
    }

    if (common.output_path.empty()) {
      out << result;
    } else {
      std::ofstream file(common.output_path, std::ios::binary | std::ios::trunc);
      if (!file) throw InvalidArgument("cannot open output file '" + common.output_path + "'");
      file << result;
      if (!file.flush()) throw InvalidArgument("failed writing '" + common.output_path + "'");
    }
    return kOk;
  } catch (const MissingConfig& e) {
    err << "sigdet: " << e.what() << '\n';
    return kMissingConfig;
  } catch (const InvalidArgument& e) {
    err << "sigdet: invalid configuration: " << e.what() << '\n';
    return kInvalidConfig;
  } catch (const ResourceLimitError& e) {
    err << "sigdet: resource limit: " << e.what() << '\n';
    return kResourceLimit;
  } catch (const DomainError& e) {
    err << "sigdet: " << e.what() << '\n';
    return kSolverFailure;
  } catch (const NumericalFailure& e) {
    err << "sigdet: numerical failure: " << e.what() << '\n';
    return kSolverFailure;
  } catch (const std::exception& e) {
    err << "sigdet: " << e.what() << '\n';
    return kSolverFailure;
  }
}

}  // namespace sigdet::cli
