#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mppi/bench.hpp"
#include "mppi/config.hpp"
#include "mppi/svg.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct CommonFlags {
  std::string task = "flat";
  std::string sampler;
  int k = 0;
  int rollouts = 0;
  int horizon = 0;
  double lambda = 0.0;
  std::string sigma;
  std::uint64_t seed = 0;
  int trials = 0;
  int max_steps = 0;
  std::string config_path;
  std::string out;
};

Eigen::VectorXd parse_sigma(const std::string& text) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t pos = 0;
    values.push_back(std::stod(item, &pos));
    if (pos != item.size()) {
      throw std::invalid_argument("bad --sigma entry '" + item + "'");
    }
  }
  if (values.empty()) {
    throw std::invalid_argument("--sigma needs at least one value");
  }
  Eigen::VectorXd v(static_cast<int>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) v[static_cast<int>(i)] = values[i];
  return v;
}

// MPPI_THREADS caps rollout parallelism for every subcommand; 0 means auto.
int threads_from_env() {
  const char* env = std::getenv("MPPI_THREADS");
  if (env == nullptr || *env == '\0') return 0;
  return std::max(0, std::atoi(env));
}

void add_common_options(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--task", flags.task, "Task: flat, stairs, or big-box");
  cmd->add_option("--sampler", flags.sampler,
                  "Sampler: normal, cubic-spline, bezier, or linear-interp");
  cmd->add_option("--k", flags.k, "Knots / control points / waypoints");
  cmd->add_option("--rollouts", flags.rollouts, "Rollouts per MPPI iteration");
  cmd->add_option("--horizon", flags.horizon, "Planning horizon (steps)");
  cmd->add_option("--lambda", flags.lambda, "Softmax temperature");
  cmd->add_option("--sigma", flags.sigma,
                  "Noise std dev: single value or comma-separated per dimension");
  cmd->add_option("--seed", flags.seed, "Base RNG seed");
  cmd->add_option("--trials", flags.trials, "Trials per (task, method) cell");
  cmd->add_option("--max-steps", flags.max_steps, "Per-trial step cap");
  cmd->add_option("--config", flags.config_path, "Experiment config file (JSON)");
  cmd->add_option("--out", flags.out, "Output path prefix / directory");
}

// Flag > config-file > built-in default.
void apply_flag_overrides(const CLI::App* cmd, const CommonFlags& flags,
                          mppi::ExperimentConfig& config) {
  if (cmd->count("--sampler") > 0 || cmd->count("--k") > 0) {
    for (auto& method : config.methods) {
      if (cmd->count("--sampler") > 0) {
        method.config.sampler.kind = mppi::sampler_kind_from_string(flags.sampler);
      }
      if (cmd->count("--k") > 0) method.config.sampler.knot_count = flags.k;
    }
  }
  for (auto& method : config.methods) {
    if (cmd->count("--rollouts") > 0) method.config.rollouts = flags.rollouts;
    if (cmd->count("--horizon") > 0) method.config.horizon = flags.horizon;
    if (cmd->count("--lambda") > 0) method.config.temperature = flags.lambda;
    if (cmd->count("--sigma") > 0) {
      Eigen::VectorXd sigma = parse_sigma(flags.sigma);
      if (sigma.size() == 1) sigma = Eigen::Vector2d::Constant(sigma[0]);
      method.config.sampler.noise = mppi::NoiseSpecd(sigma);
    }
    method.config.threads = threads_from_env();
  }
  if (cmd->count("--task") > 0) {
    const auto kind = mppi::task_kind_from_string(flags.task);
    std::vector<mppi::TaskSpec> kept;
    for (const auto& t : config.tasks) {
      if (t.kind == kind) kept.push_back(t);
    }
    if (kept.empty()) kept.push_back(mppi::default_task_spec(kind));
    config.tasks = kept;
  }
  if (cmd->count("--max-steps") > 0) {
    for (auto& t : config.tasks) t.max_steps = flags.max_steps;
  }
  if (cmd->count("--trials") > 0) config.trials_per_cell = flags.trials;
  if (cmd->count("--seed") > 0) {
    config.base_seed = flags.seed;
    config.seeds.clear();
  }
  if (cmd->count("--out") > 0) config.output_path = flags.out;
}

mppi::ExperimentConfig base_config(const CommonFlags& flags, bool single_method) {
  mppi::ExperimentConfig config;
  if (!flags.config_path.empty()) {
    config = mppi::load_experiment_config(flags.config_path);
  } else {
    config.tasks = {mppi::default_task_spec(mppi::TaskKind::kFlat)};
    mppi::MethodSpec method;
    method.config.sampler.kind = mppi::SamplerKind::kCubicSpline;
    method.config.sampler.knot_count = 4;
    method.config.sampler.noise = mppi::default_noise_spec();
    method.label = "CubicSpline-k4";
    config.methods = {method};
  }
  if (single_method && config.methods.size() > 1) {
    config.methods.resize(1);
  }
  return config;
}

int cmd_run(const CLI::App* cmd, const CommonFlags& flags) {
  auto config = base_config(flags, /*single_method=*/true);
  config.trials_per_cell = 1;
  apply_flag_overrides(cmd, flags, config);
  if (cmd->count("--sampler") > 0 || flags.config_path.empty()) {
    // the label tracks what actually runs
    auto& method = config.methods[0];
    std::ostringstream label;
    label << mppi::to_string(method.config.sampler.kind);
    if (method.config.sampler.kind != mppi::SamplerKind::kIidGaussian) {
      label << "-k" << method.config.sampler.knot_count;
    }
    method.label = label.str();
  }

  mppi::TrialRecord record = mppi::run_trial(config.tasks[0], config.methods[0].config,
                                             config.base_seed);
  record.method = config.methods[0].label;
  std::cout << mppi::kTrialsCsvHeader << '\n' << mppi::trial_csv_row(record) << '\n';
  return kExitOk;
}

int cmd_bench(const CLI::App* cmd, const CommonFlags& flags) {
  if (flags.config_path.empty()) {
    throw std::invalid_argument("bench requires --config <file>");
  }
  auto config = base_config(flags, /*single_method=*/false);
  apply_flag_overrides(cmd, flags, config);

  const auto records = mppi::run_experiment(config, &std::cerr);
  const auto summaries = mppi::aggregate(records);
  mppi::write_csv(summaries, records, config.output_path, &config);
  std::cout << mppi::format_summary_table(summaries);
  std::cerr << "wrote " << config.output_path << ".trials.csv and "
            << config.output_path << ".summary.csv\n";
  return kExitOk;
}

int cmd_plot(const std::string& summary_path, const std::string& out_dir) {
  const auto rows = mppi::read_summary_csv(summary_path);
  const auto files = mppi::write_summary_charts(rows, out_dir.empty() ? "." : out_dir);
  for (const auto& f : files) {
    std::cout << f << '\n';
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sampling-based MPPI control benchmark"};
  app.require_subcommand(1);

  CommonFlags run_flags;
  CLI::App* run = app.add_subcommand("run", "Run a single trial and print its CSV row");
  add_common_options(run, run_flags);

  CommonFlags bench_flags;
  CLI::App* bench =
      app.add_subcommand("bench", "Run a full experiment grid and write CSV files");
  add_common_options(bench, bench_flags);

  std::string summary_path;
  std::string plot_out;
  CLI::App* plot =
      app.add_subcommand("plot", "Render per-task SVG charts from a summary CSV");
  plot->add_option("summary", summary_path, "Path to a .summary.csv file")->required();
  plot->add_option("--out", plot_out, "Output directory for SVG files");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);  // prints help, exit 0
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (run->parsed()) return cmd_run(run, run_flags);
    if (bench->parsed()) return cmd_bench(bench, bench_flags);
    if (plot->parsed()) return cmd_plot(summary_path, plot_out);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}
