#include "eemc/config.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "eemc/csv.hpp"
#include "eemc/errors.hpp"

namespace eemc {

namespace {

const std::set<std::string> kKnownKeys = {
    "target",        "covariance",         "exact_sampler", "energies",     "finite_move_prob",
    "temperatures",  "theta",              "thetas",        "proposal_scale", "ir_refresh_scale",
    "kernel",        "kernels",            "iterations",    "replications", "seed",
    "burn_in",       "jobs",               "output",        "include_initial_state",
    "drift_lambda",  "kappa",              "function",      "oracle_replications",
    "oracle_steps"};

std::string where(const YAML::Node& node, const std::string& key) {
  return "key '" + key + "' (line " + std::to_string(node.Mark().line + 1) + ")";
}

template <class T>
T get(const YAML::Node& node, const std::string& key) {
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError("invalid value for " + where(node, key));
  }
}

std::vector<double> scalar_or_list(const YAML::Node& node, const std::string& key) {
  if (node.IsScalar()) return {get<double>(node, key)};
  return get<std::vector<double>>(node, key);
}

}  // namespace

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

RunConfig parse_config(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError("parse error at line " + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }
  if (!root.IsMap()) throw ConfigError("configuration must be a mapping of keys to values");

  RunConfig c;
  c.digest = fnv1a_hex(text);
  for (auto it = root.begin(); it != root.end(); ++it) {
    const std::string key = it->first.as<std::string>();
    const YAML::Node& v = it->second;
    if (!kKnownKeys.count(key))
      throw ConfigError("unknown key '" + key + "' (line " + std::to_string(it->first.Mark().line + 1) +
                        ")");
    if (key == "target") c.target_kind = get<std::string>(v, key);
    else if (key == "covariance") c.covariance = get<std::vector<std::vector<double>>>(v, key);
    else if (key == "exact_sampler") c.exact_sampler = get<bool>(v, key);
    else if (key == "energies") c.energies = get<std::vector<double>>(v, key);
    else if (key == "finite_move_prob") c.finite_move_prob = get<double>(v, key);
    else if (key == "temperatures") c.temperatures = get<std::vector<double>>(v, key);
    else if (key == "theta" || key == "thetas") c.thetas = scalar_or_list(v, key);
    else if (key == "proposal_scale") c.proposal_scale = get<double>(v, key);
    else if (key == "ir_refresh_scale") c.ir_refresh_scale = get<double>(v, key);
    else if (key == "kernel") c.kernel = get<std::string>(v, key);
    else if (key == "kernels") c.kernels = get<std::vector<std::string>>(v, key);
    else if (key == "iterations") c.iterations = get<std::size_t>(v, key);
    else if (key == "replications") c.replications = get<std::size_t>(v, key);
    else if (key == "seed") c.seed = get<std::uint64_t>(v, key);
    else if (key == "burn_in") c.burn_in = get<std::size_t>(v, key);
    else if (key == "jobs") c.jobs = get<std::size_t>(v, key);
    else if (key == "output") c.output = get<std::string>(v, key);
    else if (key == "include_initial_state") c.include_initial_state = get<bool>(v, key);
    else if (key == "drift_lambda") c.drift_lambda = scalar_or_list(v, key);
    else if (key == "kappa") c.kappa = scalar_or_list(v, key);
    else if (key == "function") c.function = get<std::vector<double>>(v, key);
    else if (key == "oracle_replications") c.oracle_replications = get<std::size_t>(v, key);
    else if (key == "oracle_steps") c.oracle_steps = get<std::size_t>(v, key);
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read configuration file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

ValidationReport validate_config(const RunConfig& c) {
  ValidationReport rep;
  auto error = [&](std::string msg) { rep.errors.push_back(std::move(msg)); };

  if (c.target_kind == "gaussian") {
    if (c.covariance.empty()) error("gaussian target needs 'covariance'");
  } else if (c.target_kind == "finite") {
    if (c.energies.empty()) error("finite target needs a non-empty 'energies' list");
    if (!(c.finite_move_prob > 0.0 && c.finite_move_prob <= 1.0))
      error("finite_move_prob must lie in (0, 1]");
  } else {
    error("target must be 'gaussian' or 'finite', got '" + c.target_kind + "'");
  }
  if (rep.ok()) {
    try {
      make_target(c);
    } catch (const Error& e) {
      error(e.what());
    }
  }

  const auto& t = c.temperatures;
  if (t.empty()) error("'temperatures' must list at least one temperature");
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!(t[i] > 0.0)) error("temperature t_" + std::to_string(i) + " must be positive");
    if (i > 0 && !(t[i - 1] > t[i]))
      error("temperatures must be strictly decreasing: t_" + std::to_string(i - 1) + " = " +
            format_real(t[i - 1]) + " >= t_" + std::to_string(i) + " = " + format_real(t[i]) +
            " fails");
  }
  if (!t.empty() && t.back() != 1.0) error("the last temperature must be exactly 1");

  std::vector<double> thetas = c.thetas;
  const std::size_t adaptive = t.empty() ? 0 : t.size() - 1;
  if (adaptive == 0) thetas.clear();
  if (thetas.size() == 1 && adaptive > 1) thetas.assign(adaptive, thetas.front());
  if (thetas.size() != adaptive)
    error("expected " + std::to_string(adaptive) + " theta values, got " + std::to_string(thetas.size()));
  for (std::size_t i = 0; i < thetas.size(); ++i)
    if (!(thetas[i] > 0.0 && thetas[i] <= 1.0))
      error("theta_" + std::to_string(i + 1) + " = " + format_real(thetas[i]) +
            " is outside (0, 1]");

  if (!(c.proposal_scale > 0.0)) error("proposal_scale must be positive");
  if (c.ir_refresh_scale && !(*c.ir_refresh_scale > 0.0)) error("ir_refresh_scale must be positive");
  try {
    parse_sampler_kind(c.kernel);
  } catch (const Error& e) {
    error(e.what());
  }
  for (const std::string& k : c.kernels) {
    try {
      parse_sampler_kind(k);
    } catch (const Error& e) {
      error(e.what());
    }
  }
  if (c.iterations < 1) error("iterations must be at least 1");
  if (c.burn_in >= c.iterations) error("burn_in must be smaller than iterations");
  if (c.replications < 1) error("replications must be at least 1");
  if (c.jobs < 1) error("jobs must be at least 1");
  if (c.target_kind == "finite" && !c.function.empty() && c.function.size() != c.energies.size())
    error("'function' must have one value per state");

  // Drift-condition bounds on theta; sufficient, not necessary, so warnings only.
  if (!c.drift_lambda.empty() || !c.kappa.empty()) {
    auto per_level = [&](const std::vector<double>& v, const char* name) {
      std::vector<double> out = v;
      if (out.size() == 1 && adaptive > 1) out.assign(adaptive, out.front());
      if (out.size() != adaptive)
        error(std::string("'") + name + "' needs one value per adaptive level or a single value");
      return out;
    };
    std::vector<double> lambda = per_level(c.drift_lambda, "drift_lambda");
    std::vector<double> kappa = per_level(c.kappa, "kappa");
    if (rep.ok()) {
      for (std::size_t l = 1; l <= adaptive; ++l) {
        try {
          double b = theta_lower_bound(lambda[l - 1], kappa[l - 1], t[l], t[l - 1]);
          bool ok = thetas[l - 1] > b;
          rep.bounds.push_back({l, thetas[l - 1], b, ok});
          if (!ok)
            rep.warnings.push_back("theta_" + std::to_string(l) + " = " + format_real(thetas[l - 1]) +
                                   " does not exceed the drift lower bound " + format_real(b));
        } catch (const Error& e) {
          error("level " + std::to_string(l) + ": " + e.what());
        }
      }
    }
  }
  return rep;
}

EnergyTarget make_target(const RunConfig& c) {
  if (c.target_kind == "finite") return EnergyTarget::finite(c.energies);
  if (c.target_kind != "gaussian") throw ConfigError("unknown target kind '" + c.target_kind + "'");
  const std::size_t d = c.covariance.size();
  Eigen::MatrixXd cov(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < d; ++i) {
    if (c.covariance[i].size() != d) throw ConfigError("covariance must be a square matrix");
    for (std::size_t j = 0; j < d; ++j)
      cov(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = c.covariance[i][j];
  }
  EnergyTarget t = EnergyTarget::gaussian(cov);
  return c.exact_sampler ? t : t.without_exact_sampler();
}

LadderConfig make_ladder(const RunConfig& c) {
  ValidationReport rep = validate_config(c);
  if (!rep.ok()) throw ConfigError(rep.errors.front());
  std::vector<double> thetas = c.thetas;
  thetas.resize(std::min(thetas.size(), c.temperatures.size() - 1));
  if (thetas.size() == 1) thetas.assign(c.temperatures.size() - 1, thetas[0]);
  LadderConfig lc = make_ladder_config(make_target(c), TemperatureLadder(c.temperatures, thetas),
                                       c.proposal_scale, c.finite_move_prob);
  lc.include_initial_state = c.include_initial_state;
  if (c.ir_refresh_scale && !lc.target.is_finite()) {
    const double s = *c.ir_refresh_scale;
    const int d = lc.target.dimension();
    for (const KernelConfig& k : lc.kernels)
      lc.refresh_kernels.push_back(
          KernelConfig::random_walk(s * s * Eigen::MatrixXd::Identity(d, d), k.theta()));
  }
  return lc;
}

}  // namespace eemc
