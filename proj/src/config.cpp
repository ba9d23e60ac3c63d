#include "acps/config.hpp"

#include "acps/io.hpp"

#include <json.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace acps {

namespace {

using nlohmann::json;

std::string kind_name(const json &j) {
  switch (j.type()) {
  case json::value_t::null:
    return "null";
  case json::value_t::boolean:
    return "a boolean";
  case json::value_t::string:
    return "a string";
  case json::value_t::array:
    return "an array";
  case json::value_t::object:
    return "an object";
  default:
    return "a number";
  }
}

/// Collects schema violations while reading typed values.
class Reader {
public:
  explicit Reader(std::vector<std::string> &errs) : errs_(errs) {}

  void error(const std::string &where, const std::string &msg) { errs_.push_back(where + ": " + msg); }

  bool object(const json &j, const std::string &where) {
    if (j.is_object())
      return true;
    error(where, "expected an object, found " + kind_name(j));
    return false;
  }

  void allowed_keys(const json &j, const std::string &where, const std::set<std::string> &keys) {
    for (const auto &[k, v] : j.items())
      if (!keys.contains(k))
        error(where, "unknown key '" + k + "'");
  }

  bool has(const json &j, const std::string &key) const { return j.is_object() && j.contains(key); }

  std::optional<long long> integer(const json &j, const std::string &key, const std::string &where) {
    if (!has(j, key))
      return std::nullopt;
    const auto &v = j.at(key);
    if (!v.is_number_integer()) {
      error(where + "." + key, "expected an integer, found " + kind_name(v));
      return std::nullopt;
    }
    return v.get<long long>();
  }

  std::optional<double> number(const json &j, const std::string &key, const std::string &where) {
    if (!has(j, key))
      return std::nullopt;
    const auto &v = j.at(key);
    if (!v.is_number()) {
      error(where + "." + key, "expected a number, found " + kind_name(v));
      return std::nullopt;
    }
    return v.get<double>();
  }

  std::optional<bool> boolean(const json &j, const std::string &key, const std::string &where) {
    if (!has(j, key))
      return std::nullopt;
    const auto &v = j.at(key);
    if (!v.is_boolean()) {
      error(where + "." + key, "expected true or false, found " + kind_name(v));
      return std::nullopt;
    }
    return v.get<bool>();
  }

  std::optional<std::string> string(const json &j, const std::string &key, const std::string &where) {
    if (!has(j, key))
      return std::nullopt;
    const auto &v = j.at(key);
    if (!v.is_string()) {
      error(where + "." + key, "expected a string, found " + kind_name(v));
      return std::nullopt;
    }
    return v.get<std::string>();
  }

  /// A number or an array of numbers.
  std::optional<std::vector<double>> numbers(const json &j, const std::string &key, const std::string &where) {
    if (!has(j, key))
      return std::nullopt;
    const auto &v = j.at(key);
    if (v.is_number())
      return std::vector<double>{v.get<double>()};
    if (v.is_array()) {
      std::vector<double> out;
      for (const auto &x : v) {
        if (!x.is_number()) {
          error(where + "." + key, "expected numbers, found " + kind_name(x));
          return std::nullopt;
        }
        out.push_back(x.get<double>());
      }
      return out;
    }
    error(where + "." + key, "expected a number or an array of numbers, found " + kind_name(v));
    return std::nullopt;
  }

  /// An integer or an array of integers.
  std::optional<std::vector<int>> integers(const json &j, const std::string &key, const std::string &where,
                                           bool scalar_is_order) {
    if (!has(j, key))
      return std::nullopt;
    const auto &v = j.at(key);
    if (v.is_number_integer()) {
      const int n = v.get<int>();
      if (!scalar_is_order)
        return std::vector<int>{n};
      if (n < 0) {
        error(where + "." + key, "lag order must be non-negative");
        return std::nullopt;
      }
      std::vector<int> out(n);
      for (int i = 0; i < n; ++i)
        out[i] = i + 1;
      return out;
    }
    if (v.is_array()) {
      std::vector<int> out;
      for (const auto &x : v) {
        if (!x.is_number_integer()) {
          error(where + "." + key, "expected integers, found " + kind_name(x));
          return std::nullopt;
        }
        out.push_back(x.get<int>());
      }
      return out;
    }
    error(where + "." + key, "expected an integer or an array of integers, found " + kind_name(v));
    return std::nullopt;
  }

  template <class F>
  void guarded(const std::string &where, F &&f) {
    try {
      f();
    } catch (const std::exception &e) {
      error(where, e.what());
    }
  }

private:
  std::vector<std::string> &errs_;
};

void read_mcmc(Reader &r, const json &j, const std::string &where, McmcConfig &mcmc) {
  if (!r.object(j, where))
    return;
  r.allowed_keys(j, where, {"burn", "keep"});
  if (auto v = r.integer(j, "burn", where))
    mcmc.burn = static_cast<int>(*v);
  if (auto v = r.integer(j, "keep", where))
    mcmc.keep = static_cast<int>(*v);
}

std::optional<NigPrior> read_prior(Reader &r, const json &j, const std::string &where, int k) {
  if (!r.object(j, where))
    return std::nullopt;
  r.allowed_keys(j, where, {"coeff_mean", "coeff_var", "sigma_shape", "sigma_rate"});
  NigPrior p = NigPrior::weak(std::max(k, 1));
  bool ok = true;
  if (auto v = r.numbers(j, "coeff_mean", where)) {
    if (v->size() == 1)
      p.coeff_mean = Eigen::VectorXd::Constant(k, (*v)[0]);
    else if (static_cast<int>(v->size()) == k)
      p.coeff_mean = Eigen::Map<const Eigen::VectorXd>(v->data(), k);
    else {
      r.error(where + ".coeff_mean", "expected 1 or " + std::to_string(k) + " values");
      ok = false;
    }
  }
  if (auto v = r.numbers(j, "coeff_var", where)) {
    if (v->size() == 1)
      p.coeff_cov = Eigen::MatrixXd::Identity(k, k) * (*v)[0];
    else if (static_cast<int>(v->size()) == k)
      p.coeff_cov = Eigen::Map<const Eigen::VectorXd>(v->data(), k).asDiagonal();
    else {
      r.error(where + ".coeff_var", "expected 1 or " + std::to_string(k) + " values");
      ok = false;
    }
  }
  if (auto v = r.number(j, "sigma_shape", where))
    p.sigma_shape = *v;
  if (auto v = r.number(j, "sigma_rate", where))
    p.sigma_rate = *v;
  if (!ok)
    return std::nullopt;
  r.guarded(where, [&] { p.validate(k); });
  return p;
}

ArSpec read_ar_spec(Reader &r, const json &j, const std::string &where) {
  ArSpec ar;
  if (auto v = r.integers(j, "lags", where, true))
    ar.lags = *v;
  if (auto v = r.boolean(j, "intercept", where))
    ar.intercept = *v;
  return ar;
}

std::optional<ModelSpec> read_model(Reader &r, const json &j, const std::string &where, const McmcConfig &mcmc) {
  if (!r.object(j, where))
    return std::nullopt;
  ModelSpec m;
  m.mcmc = mcmc;
  const auto id = r.string(j, "id", where);
  if (!id)
    r.error(where, "missing 'id'");
  else
    m.id = *id;
  const auto kind = r.string(j, "kind", where);
  if (!kind) {
    r.error(where, "missing 'kind' (ar, msar or tvpar)");
    return std::nullopt;
  }
  const std::string here = id ? "model '" + *id + "'" : where;
  try {
    m.kind = parse_model_kind(*kind);
  } catch (const std::exception &e) {
    r.error(here, e.what());
    return std::nullopt;
  }
  if (r.has(j, "mcmc"))
    read_mcmc(r, j.at("mcmc"), here + ".mcmc", m.mcmc);

  switch (m.kind) {
  case ModelKind::Ar:
    r.allowed_keys(j, here, {"id", "kind", "mcmc", "lags", "intercept", "prior"});
    m.ar = read_ar_spec(r, j, here);
    if (r.has(j, "prior"))
      m.prior = read_prior(r, j.at("prior"), here + ".prior", m.ar.n_coeffs());
    break;
  case ModelKind::MsAr:
    r.allowed_keys(j, here, {"id", "kind", "mcmc", "lags", "intercept", "regimes", "transition_prior", "prior"});
    m.msar.ar = read_ar_spec(r, j, here);
    if (auto v = r.integer(j, "regimes", here))
      m.msar.regimes = static_cast<int>(*v);
    if (r.has(j, "transition_prior")) {
      const auto &tp = j.at("transition_prior");
      bool ok = tp.is_array();
      std::vector<std::vector<double>> rows;
      if (ok)
        for (const auto &row : tp) {
          if (!row.is_array()) {
            ok = false;
            break;
          }
          std::vector<double> vals;
          for (const auto &x : row) {
            if (!x.is_number()) {
              ok = false;
              break;
            }
            vals.push_back(x.get<double>());
          }
          rows.push_back(std::move(vals));
        }
      if (ok)
        m.msar.transition_prior = std::move(rows);
      else
        r.error(here + ".transition_prior", "expected an array of rows of numbers");
    }
    if (r.has(j, "prior"))
      m.prior = read_prior(r, j.at("prior"), here + ".prior", m.msar.ar.n_coeffs());
    break;
  case ModelKind::TvpAr: {
    r.allowed_keys(j, here,
                   {"id", "kind", "mcmc", "lags", "state_mean", "state_var", "a_prior_var", "omega_dof",
                    "omega_scale", "sigma_shape", "sigma_rate"});
    if (auto v = r.integer(j, "lags", here))
      m.tvp.lags = static_cast<int>(*v);
    const int k = m.tvp.dim();
    if (auto v = r.numbers(j, "state_mean", here)) {
      if (v->size() == 1)
        m.tvp.state_mean = Eigen::VectorXd::Constant(k, (*v)[0]);
      else if (static_cast<int>(v->size()) == k)
        m.tvp.state_mean = Eigen::Map<const Eigen::VectorXd>(v->data(), k);
      else
        r.error(here + ".state_mean", "expected 1 or " + std::to_string(k) + " values");
    }
    if (auto v = r.number(j, "state_var", here))
      m.tvp.state_cov = Eigen::MatrixXd::Identity(k, k) * *v;
    if (auto v = r.number(j, "a_prior_var", here))
      m.tvp.a_prior_var = *v;
    if (auto v = r.number(j, "omega_dof", here))
      m.tvp.omega_dof = *v;
    if (auto v = r.number(j, "omega_scale", here))
      m.tvp.omega_scale = *v;
    if (auto v = r.number(j, "sigma_shape", here))
      m.tvp.sigma_shape = *v;
    if (auto v = r.number(j, "sigma_rate", here))
      m.tvp.sigma_rate = *v;
    break;
  }
  }
  return m;
}

void read_scores(Reader &r, const json &j, std::vector<ScoreSpec> &out) {
  if (!j.is_array()) {
    r.error("scores", "expected an array, found " + kind_name(j));
    return;
  }
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string where = "scores[" + std::to_string(i) + "]";
    const auto &s = j[i];
    if (!r.object(s, where))
      continue;
    r.allowed_keys(s, where, {"family", "c", "weighting", "scheme"});
    ScoreSpec base;
    const auto family = r.string(s, "family", where);
    if (!family) {
      r.error(where, "missing 'family' (acps or crps)");
      continue;
    }
    try {
      base.family = parse_family(*family);
      if (auto w = r.string(s, "weighting", where))
        base.weighting = parse_weighting(*w);
      if (auto sc = r.string(s, "scheme", where))
        base.scheme = parse_scheme(*sc);
    } catch (const std::exception &e) {
      r.error(where, e.what());
      continue;
    }
    if (base.family == ScoreFamily::Crps) {
      if (r.has(s, "c"))
        r.error(where, "'c' does not apply to the crps family");
      out.push_back(base);
      continue;
    }
    std::vector<double> cs = default_c_values();
    if (auto v = r.numbers(s, "c", where))
      cs = *v;
    for (double c : cs) {
      if (!(c > 0.0 && c < 1.0)) {
        r.error(where + ".c", "asymmetry level " + format_number(c) + " is outside (0,1)");
        continue;
      }
      ScoreSpec spec = base;
      spec.c = c;
      out.push_back(spec);
    }
  }
}

} // namespace

BacktestConfig parse_backtest_config(const std::string &json_text) {
  json root;
  try {
    root = json::parse(json_text, nullptr, true, true);
  } catch (const json::parse_error &e) {
    throw ConfigError({std::string("configuration is not valid JSON: ") + e.what()});
  }
  std::vector<std::string> errs;
  Reader r(errs);
  BacktestConfig cfg;
  if (!r.object(root, "config"))
    throw ConfigError(errs);
  r.allowed_keys(root, "config",
                 {"window", "horizons", "benchmark", "draws", "seed", "vintages", "nodes_per_side", "grid", "mcmc",
                  "scores", "models"});

  if (auto v = r.integer(root, "window", "config"))
    cfg.window = static_cast<int>(*v);
  else if (!r.has(root, "window"))
    r.error("config", "missing 'window'");
  if (auto v = r.integers(root, "horizons", "config", false))
    cfg.horizons = *v;
  if (auto v = r.string(root, "benchmark", "config"))
    cfg.benchmark = *v;
  else if (!r.has(root, "benchmark"))
    r.error("config", "missing 'benchmark'");
  if (auto v = r.integer(root, "draws", "config"))
    cfg.draws = static_cast<int>(*v);
  if (auto v = r.integer(root, "seed", "config")) {
    if (*v < 0)
      r.error("config.seed", "seed must be non-negative");
    else
      cfg.seed = static_cast<std::uint64_t>(*v);
  }
  if (auto v = r.integer(root, "vintages", "config"))
    cfg.vintages = static_cast<int>(*v);
  if (auto v = r.integer(root, "nodes_per_side", "config"))
    cfg.nodes_per_side = static_cast<int>(*v);
  if (r.has(root, "grid")) {
    const auto &g = root.at("grid");
    if (r.object(g, "config.grid")) {
      r.allowed_keys(g, "config.grid", {"u_min", "u_max"});
      const auto lo = r.number(g, "u_min", "config.grid");
      const auto hi = r.number(g, "u_max", "config.grid");
      if (!lo || !hi)
        r.error("config.grid", "both 'u_min' and 'u_max' are required");
      else
        cfg.fixed_grid = QuadratureGrid{*lo, *hi, cfg.nodes_per_side};
    }
  }
  McmcConfig mcmc;
  if (r.has(root, "mcmc"))
    read_mcmc(r, root.at("mcmc"), "config.mcmc", mcmc);

  if (r.has(root, "scores")) {
    read_scores(r, root.at("scores"), cfg.score_specs);
  } else {
    cfg.score_specs.push_back(ScoreSpec::crps());
    for (double c : default_c_values())
      cfg.score_specs.push_back(ScoreSpec::acps(c));
  }

  if (!r.has(root, "models")) {
    r.error("config", "missing 'models'");
  } else if (!root.at("models").is_array()) {
    r.error("config.models", "expected an array, found " + kind_name(root.at("models")));
  } else {
    const auto &models = root.at("models");
    for (std::size_t i = 0; i < models.size(); ++i)
      if (auto m = read_model(r, models[i], "models[" + std::to_string(i) + "]", mcmc))
        cfg.models.push_back(std::move(*m));
  }

  // Series-independent checks; a nominal length keeps the window checks quiet.
  for (auto &e : cfg.validation_errors(std::size_t{1} << 40))
    if (std::find(errs.begin(), errs.end(), e) == errs.end())
      errs.push_back(std::move(e));
  if (!errs.empty())
    throw ConfigError(std::move(errs));
  return cfg;
}

BacktestConfig load_backtest_config(const std::string &path) {
  std::ifstream in(path);
  if (!in)
    throw InputError("cannot open configuration '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_backtest_config(ss.str());
}

} // namespace acps
