#include "mppi/config.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace mppi {

namespace {

using nlohmann::json;

[[noreturn]] void config_error(const std::string& msg) {
  throw std::invalid_argument("config error: " + msg);
}

void require_keys(const json& obj, const std::set<std::string>& allowed,
                  const std::string& context) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (allowed.find(it.key()) == allowed.end()) {
      config_error("unknown key '" + it.key() + "' in " + context);
    }
  }
}

Eigen::VectorXd vector_from(const json& j, const std::string& context) {
  if (j.is_number()) {
    Eigen::VectorXd v(1);
    v[0] = j.get<double>();
    return v;
  }
  if (!j.is_array() || j.empty()) {
    config_error(context + " must be a number or a non-empty array");
  }
  Eigen::VectorXd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    v[static_cast<int>(i)] = j[i].get<double>();
  }
  return v;
}

NoiseSpecd noise_from(const json& j, const std::string& context) {
  Eigen::VectorXd sigma = vector_from(j, context);
  if (sigma.size() == 1) {
    // a scalar sigma means isotropic noise over both action dimensions
    sigma = Eigen::Vector2d::Constant(sigma[0]);
  }
  return NoiseSpecd(sigma);
}

ActionBoundsd bounds_from(const json& j, const std::string& context) {
  require_keys(j, {"lower", "upper"}, context);
  if (!j.contains("lower") || !j.contains("upper")) {
    config_error(context + " needs both 'lower' and 'upper'");
  }
  return ActionBoundsd(vector_from(j["lower"], context + ".lower"),
                       vector_from(j["upper"], context + ".upper"));
}

TaskSpec task_from(const json& j) {
  require_keys(j,
               {"kind", "label", "goal_x", "max_steps", "dt", "bounds", "weights",
                "landing_speed"},
               "task");
  if (!j.contains("kind")) {
    config_error("each task needs a 'kind'");
  }
  TaskSpec spec = default_task_spec(task_kind_from_string(j["kind"].get<std::string>()));
  if (j.contains("label")) spec.label = j["label"].get<std::string>();
  if (j.contains("goal_x")) spec.goal_x = j["goal_x"].get<double>();
  if (j.contains("max_steps")) spec.max_steps = j["max_steps"].get<int>();
  if (j.contains("dt")) spec.dt = j["dt"].get<double>();
  if (j.contains("bounds")) spec.bounds = bounds_from(j["bounds"], "task.bounds");
  if (j.contains("landing_speed")) spec.landing_speed = j["landing_speed"].get<double>();
  if (j.contains("weights")) {
    const auto& w = j["weights"];
    require_keys(w, {"goal", "clearance", "control", "z_margin", "terminal"},
                 "task.weights");
    if (w.contains("goal")) spec.weights.goal = w["goal"].get<double>();
    if (w.contains("clearance")) spec.weights.clearance = w["clearance"].get<double>();
    if (w.contains("control")) spec.weights.control = w["control"].get<double>();
    if (w.contains("z_margin")) spec.weights.z_margin = w["z_margin"].get<double>();
    if (w.contains("terminal")) spec.weights.terminal = w["terminal"].get<double>();
  }
  return spec;
}

const std::set<std::string> kMethodKeys = {
    "label",          "sampler",           "k",
    "sigma",          "lambda",            "horizon",
    "rollouts",       "spline_boundary",   "nominal_preserving",
    "knot_space_update", "iterations_per_step", "threads",
    "bounds"};

void apply_method_keys(const json& j, MppiConfig& cfg, const std::string& context) {
  require_keys(j, kMethodKeys, context);
  if (j.contains("sampler")) {
    cfg.sampler.kind = sampler_kind_from_string(j["sampler"].get<std::string>());
  }
  if (j.contains("k")) cfg.sampler.knot_count = j["k"].get<int>();
  if (j.contains("sigma")) cfg.sampler.noise = noise_from(j["sigma"], context + ".sigma");
  if (j.contains("lambda")) cfg.temperature = j["lambda"].get<double>();
  if (j.contains("horizon")) cfg.horizon = j["horizon"].get<int>();
  if (j.contains("rollouts")) cfg.rollouts = j["rollouts"].get<int>();
  if (j.contains("spline_boundary")) {
    const std::string b = j["spline_boundary"].get<std::string>();
    if (b == "natural") {
      cfg.sampler.spline_boundary = SplineBoundary::kNatural;
    } else if (b == "clamped") {
      cfg.sampler.spline_boundary = SplineBoundary::kClampedZeroSlope;
    } else {
      config_error("spline_boundary must be 'natural' or 'clamped', got '" + b + "'");
    }
  }
  if (j.contains("nominal_preserving")) {
    cfg.sampler.nominal_preserving = j["nominal_preserving"].get<bool>();
  }
  if (j.contains("knot_space_update")) {
    cfg.knot_space_update = j["knot_space_update"].get<bool>();
  }
  if (j.contains("iterations_per_step")) {
    cfg.iterations_per_step = j["iterations_per_step"].get<int>();
  }
  if (j.contains("threads")) cfg.threads = j["threads"].get<int>();
  if (j.contains("bounds")) cfg.bounds = bounds_from(j["bounds"], context + ".bounds");
}

}  // namespace

SamplerKind sampler_kind_from_string(const std::string& name) {
  if (name == "normal") return SamplerKind::kIidGaussian;
  if (name == "cubic-spline") return SamplerKind::kCubicSpline;
  if (name == "bezier") return SamplerKind::kBezier;
  if (name == "linear-interp") return SamplerKind::kLinearInterp;
  throw std::invalid_argument("unknown sampler '" + name +
                              "' (valid: normal, cubic-spline, bezier, linear-interp)");
}

std::string to_string(SamplerKind kind) {
  switch (kind) {
    case SamplerKind::kIidGaussian:
      return "normal";
    case SamplerKind::kCubicSpline:
      return "cubic-spline";
    case SamplerKind::kBezier:
      return "bezier";
    case SamplerKind::kLinearInterp:
      return "linear-interp";
  }
  return "unknown";
}

TaskKind task_kind_from_string(const std::string& name) {
  if (name == "flat") return TaskKind::kFlat;
  if (name == "stairs") return TaskKind::kStairs;
  if (name == "big-box") return TaskKind::kBigBox;
  throw std::invalid_argument("unknown task '" + name +
                              "' (valid: flat, stairs, big-box)");
}

NoiseSpecd default_noise_spec() { return NoiseSpecd(Eigen::Vector2d(1.0, 0.4)); }

ExperimentConfig parse_experiment_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text, nullptr, /*allow_exceptions=*/true,
                       /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    config_error(e.what());
  }
  require_keys(root,
               {"trials_per_cell", "base_seed", "seeds", "output", "defaults", "tasks",
                "methods"},
               "top level");

  ExperimentConfig cfg;
  if (root.contains("trials_per_cell")) {
    cfg.trials_per_cell = root["trials_per_cell"].get<int>();
    if (cfg.trials_per_cell < 1) config_error("trials_per_cell must be at least 1");
  }
  if (root.contains("base_seed")) cfg.base_seed = root["base_seed"].get<std::uint64_t>();
  if (root.contains("seeds")) {
    for (const auto& s : root["seeds"]) cfg.seeds.push_back(s.get<std::uint64_t>());
  }
  if (root.contains("output")) cfg.output_path = root["output"].get<std::string>();

  MppiConfig defaults;
  defaults.sampler.noise = default_noise_spec();
  if (root.contains("defaults")) {
    apply_method_keys(root["defaults"], defaults, "defaults");
  }

  if (!root.contains("tasks") || !root["tasks"].is_array() || root["tasks"].empty()) {
    config_error("'tasks' must be a non-empty array");
  }
  for (const auto& t : root["tasks"]) {
    cfg.tasks.push_back(task_from(t));
  }

  if (!root.contains("methods") || !root["methods"].is_array() ||
      root["methods"].empty()) {
    config_error("'methods' must be a non-empty array");
  }
  std::set<std::string> labels;
  for (const auto& mj : root["methods"]) {
    MethodSpec method;
    method.config = defaults;
    apply_method_keys(mj, method.config, "method");
    method.label = mj.contains("label") ? mj["label"].get<std::string>()
                                        : to_string(method.config.sampler.kind);
    if (!labels.insert(method.label).second) {
      config_error("duplicate method label '" + method.label + "'");
    }
    cfg.methods.push_back(std::move(method));
  }
  return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) {
    throw std::invalid_argument("config error: cannot read '" + path + "'");
  }
  std::ostringstream buffer;
  buffer << is.rdbuf();
  return parse_experiment_config(buffer.str());
}

}  // namespace mppi
