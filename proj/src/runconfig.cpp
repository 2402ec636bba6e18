#include "mep/runconfig.hpp"

#include <set>

#include <json.hpp>

namespace mep::cli {

using nlohmann::json;

namespace {

void check_keys(const json& obj, const std::string& path, const std::set<std::string>& allowed) {
  if (!obj.is_object()) throw ConfigError(path + ": expected an object");
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.count(it.key())) throw ConfigError(path + "." + it.key() + ": unknown key");
}

template <typename T>
T get_as(const json& obj, const std::string& path, const std::string& key, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(path + "." + key + ": type mismatch");
  }
}

void parse_pursuit(const json& j, pursuit::PursuitConfig& p) {
  const std::string path = "pursuit";
  check_keys(j, path,
             {"max_components", "steps_per_component", "mc_batch", "learn_rate", "adapt_beta1",
              "adapt_beta2", "adapt_eps", "lambda_schedule", "alpha_method", "alpha_clip",
              "alpha_sgd_steps", "alpha_learn_rate", "elbo_eval_samples", "stop_tol"});
  p.max_components = get_as<std::size_t>(j, path, "max_components", p.max_components);
  p.steps_per_component = get_as<std::size_t>(j, path, "steps_per_component", p.steps_per_component);
  p.mc_batch = get_as<std::size_t>(j, path, "mc_batch", p.mc_batch);
  p.learn_rate = get_as<double>(j, path, "learn_rate", p.learn_rate);
  p.adapt_beta1 = get_as<double>(j, path, "adapt_beta1", p.adapt_beta1);
  p.adapt_beta2 = get_as<double>(j, path, "adapt_beta2", p.adapt_beta2);
  p.adapt_eps = get_as<double>(j, path, "adapt_eps", p.adapt_eps);
  p.lambda_schedule = get_as<Vec>(j, path, "lambda_schedule", p.lambda_schedule);
  if (j.contains("alpha_method")) {
    const std::string m = get_as<std::string>(j, path, "alpha_method", "closed_form");
    if (m == "closed_form")
      p.alpha_method = pursuit::AlphaMethod::closed_form;
    else if (m == "projected_sgd")
      p.alpha_method = pursuit::AlphaMethod::projected_sgd;
    else
      throw ConfigError("pursuit.alpha_method: must be closed_form or projected_sgd");
  }
  p.alpha_clip = get_as<double>(j, path, "alpha_clip", p.alpha_clip);
  p.alpha_sgd_steps = get_as<std::size_t>(j, path, "alpha_sgd_steps", p.alpha_sgd_steps);
  p.alpha_learn_rate = get_as<double>(j, path, "alpha_learn_rate", p.alpha_learn_rate);
  p.elbo_eval_samples = get_as<std::size_t>(j, path, "elbo_eval_samples", p.elbo_eval_samples);
  p.stop_tol = get_as<double>(j, path, "stop_tol", p.stop_tol);
  if (!(p.alpha_clip > 0.0 && p.alpha_clip < 0.5))
    throw ConfigError("pursuit.alpha_clip: alpha_clip must lie in (0, 0.5)");
  try {
    p.validate();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("pursuit: ") + e.what());
  }
}

TargetSpec parse_target(const json& j) {
  check_keys(j, "target", {"name", "parameters"});
  TargetSpec t;
  if (!j.contains("name")) throw ConfigError("target.name: missing");
  t.name = get_as<std::string>(j, "target", "name", "");
  const json params = j.contains("parameters") ? j.at("parameters") : json::object();
  const std::string path = "target.parameters";
  if (t.name == "gaussian_mixture") {
    check_keys(params, path, {"means", "vars", "weights"});
    t.means = get_as<std::vector<Vec>>(params, path, "means", {});
    t.vars = get_as<std::vector<Vec>>(params, path, "vars", {});
    t.weights = get_as<Vec>(params, path, "weights", {});
  } else if (t.name == "std_normal") {
    check_keys(params, path, {"dim"});
    t.dim = get_as<int>(params, path, "dim", 1);
  } else if (t.name == "gauss2" || t.name == "two_mode") {
    check_keys(params, path, {"separation"});
    t.separation = get_as<double>(params, path, "separation", 3.0);
  } else if (t.name == "banana") {
    check_keys(params, path, {"curvature", "scale"});
    t.curvature = get_as<double>(params, path, "curvature", 1.0);
    t.scale = get_as<double>(params, path, "scale", 1.0);
  } else {
    throw ConfigError("target.name: unregistered target \"" + t.name + "\"");
  }
  return t;
}

DiagnosticsConfig parse_diagnostics(const json& j) {
  const std::string path = "diagnostics";
  check_keys(j, path, {"lambda_list", "box", "resolution", "taylor_alphas"});
  DiagnosticsConfig d;
  d.lambda_list = get_as<Vec>(j, path, "lambda_list", d.lambda_list);
  d.resolution = get_as<std::size_t>(j, path, "resolution", d.resolution);
  d.taylor_alphas = get_as<Vec>(j, path, "taylor_alphas", d.taylor_alphas);
  if (j.contains("box")) {
    auto rows = get_as<std::vector<Vec>>(j, path, "box", {});
    Box box;
    for (const auto& r : rows) {
      if (r.size() != 2 || !(r[0] < r[1]))
        throw ConfigError("diagnostics.box: each entry must be [lo, hi] with lo < hi");
      box.bounds.push_back({r[0], r[1]});
    }
    d.box = box;
  }
  if (d.resolution < 101) throw ConfigError("diagnostics.resolution: must be >= 101");
  return d;
}

ContinualConfig parse_continual(const json& j) {
  const std::string path = "continual";
  check_keys(j, path,
             {"data_dir", "class_pairs", "pca_dim", "ensemble_n", "synthetic_train_per_class",
              "synthetic_test_per_class", "synthetic_noise_std", "baseline_steps",
              "baseline_learn_rate"});
  ContinualConfig c;
  if (j.contains("data_dir")) c.data_dir = get_as<std::string>(j, path, "data_dir", "");
  c.class_pairs = get_as<std::vector<std::vector<int>>>(j, path, "class_pairs", c.class_pairs);
  c.pca_dim = get_as<std::size_t>(j, path, "pca_dim", c.pca_dim);
  c.ensemble_n = get_as<std::size_t>(j, path, "ensemble_n", c.ensemble_n);
  c.synthetic_train_per_class =
      get_as<std::size_t>(j, path, "synthetic_train_per_class", c.synthetic_train_per_class);
  c.synthetic_test_per_class =
      get_as<std::size_t>(j, path, "synthetic_test_per_class", c.synthetic_test_per_class);
  c.synthetic_noise_std = get_as<double>(j, path, "synthetic_noise_std", c.synthetic_noise_std);
  c.baseline_steps = get_as<std::size_t>(j, path, "baseline_steps", c.baseline_steps);
  c.baseline_learn_rate = get_as<double>(j, path, "baseline_learn_rate", c.baseline_learn_rate);
  if (c.ensemble_n < 1) throw ConfigError("continual.ensemble_n: must be >= 1");
  return c;
}

}  // namespace

RunConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  check_keys(j, "config", {"target", "pursuit", "diagnostics", "continual", "output_dir", "seed"});
  RunConfig cfg;
  if (j.contains("target")) cfg.target = parse_target(j.at("target"));
  if (j.contains("pursuit")) parse_pursuit(j.at("pursuit"), cfg.pursuit);
  if (j.contains("diagnostics")) cfg.diagnostics = parse_diagnostics(j.at("diagnostics"));
  if (j.contains("continual")) cfg.continual = parse_continual(j.at("continual"));
  cfg.output_dir = get_as<std::string>(j, "config", "output_dir", cfg.output_dir);
  cfg.seed = get_as<std::uint64_t>(j, "config", "seed", cfg.seed);
  cfg.pursuit.seed = cfg.seed;
  return cfg;
}

std::string serialize_config(const RunConfig& cfg) {
  json j;
  if (cfg.target) {
    json t;
    t["name"] = cfg.target->name;
    json p = json::object();
    if (cfg.target->name == "gaussian_mixture") {
      p["means"] = cfg.target->means;
      p["vars"] = cfg.target->vars;
      p["weights"] = cfg.target->weights;
    } else if (cfg.target->name == "std_normal") {
      p["dim"] = cfg.target->dim;
    } else if (cfg.target->name == "gauss2" || cfg.target->name == "two_mode") {
      p["separation"] = cfg.target->separation;
    } else if (cfg.target->name == "banana") {
      p["curvature"] = cfg.target->curvature;
      p["scale"] = cfg.target->scale;
    }
    t["parameters"] = p;
    j["target"] = t;
  }
  const auto& pc = cfg.pursuit;
  j["pursuit"] = {{"max_components", pc.max_components},
                  {"steps_per_component", pc.steps_per_component},
                  {"mc_batch", pc.mc_batch},
                  {"learn_rate", pc.learn_rate},
                  {"adapt_beta1", pc.adapt_beta1},
                  {"adapt_beta2", pc.adapt_beta2},
                  {"adapt_eps", pc.adapt_eps},
                  {"lambda_schedule", pc.lambda_schedule},
                  {"alpha_method", pc.alpha_method == pursuit::AlphaMethod::closed_form
                                       ? "closed_form"
                                       : "projected_sgd"},
                  {"alpha_clip", pc.alpha_clip},
                  {"alpha_sgd_steps", pc.alpha_sgd_steps},
                  {"alpha_learn_rate", pc.alpha_learn_rate},
                  {"elbo_eval_samples", pc.elbo_eval_samples},
                  {"stop_tol", pc.stop_tol}};
  json d;
  d["lambda_list"] = cfg.diagnostics.lambda_list;
  d["resolution"] = cfg.diagnostics.resolution;
  d["taylor_alphas"] = cfg.diagnostics.taylor_alphas;
  if (cfg.diagnostics.box) {
    json rows = json::array();
    for (const auto& b : cfg.diagnostics.box->bounds) rows.push_back(Vec{b[0], b[1]});
    d["box"] = rows;
  }
  j["diagnostics"] = d;
  json c;
  if (cfg.continual.data_dir) c["data_dir"] = *cfg.continual.data_dir;
  c["class_pairs"] = cfg.continual.class_pairs;
  c["pca_dim"] = cfg.continual.pca_dim;
  c["ensemble_n"] = cfg.continual.ensemble_n;
  c["synthetic_train_per_class"] = cfg.continual.synthetic_train_per_class;
  c["synthetic_test_per_class"] = cfg.continual.synthetic_test_per_class;
  c["synthetic_noise_std"] = cfg.continual.synthetic_noise_std;
  c["baseline_steps"] = cfg.continual.baseline_steps;
  c["baseline_learn_rate"] = cfg.continual.baseline_learn_rate;
  j["continual"] = c;
  j["output_dir"] = cfg.output_dir;
  j["seed"] = cfg.seed;
  return j.dump(2);
}

targets::TargetModel build_target(const TargetSpec& spec) {
  try {
    if (spec.name == "gaussian_mixture")
      return targets::make_gaussian_mixture_target(spec.means, spec.vars, spec.weights);
    if (spec.name == "std_normal") {
      if (spec.dim < 1) throw ConfigError("target.parameters.dim: must be >= 1");
      const std::size_t d = static_cast<std::size_t>(spec.dim);
      return targets::make_gaussian_mixture_target({Vec(d, 0.0)}, {Vec(d, 1.0)}, {1.0});
    }
    if (spec.name == "gauss2" || spec.name == "two_mode")
      return targets::make_gaussian_mixture_target({{-spec.separation}, {spec.separation}},
                                                   {{1.0}, {1.0}}, {0.5, 0.5});
    if (spec.name == "banana") return targets::make_banana_target(spec.curvature, spec.scale);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError("target.parameters: " + std::string(e.what()));
  }
  throw ConfigError("target.name: unregistered target \"" + spec.name + "\"");
}

}  // namespace mep::cli
