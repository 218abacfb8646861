#include "mppi/bench.hpp"

#include "mppi/config.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace mppi {

namespace {

std::string fmt_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

struct Welford {
  // plain sums are enough at these magnitudes
  std::int64_t n = 0;
  double sum = 0.0;
  double sumsq = 0.0;

  void add(double x) {
    ++n;
    sum += x;
    sumsq += x * x;
  }
  void add_moments(std::int64_t count, double mean, double sample_std) {
    n += count;
    sum += mean * count;
    sumsq += (count - 1) * sample_std * sample_std + count * mean * mean;
  }
  double mean() const { return n > 0 ? sum / n : 0.0; }
  double sample_std() const {
    if (n < 2) return 0.0;
    const double var = (sumsq - sum * sum / n) / (n - 1);
    return var > 0.0 ? std::sqrt(var) : 0.0;
  }
};

}  // namespace

MppiConfig resolve_method_config(const MppiConfig& method, const TaskSpec& task) {
  MppiConfig cfg = method;
  if (cfg.bounds.empty()) {
    cfg.bounds = task.bounds.empty() ? default_task_spec(task.kind).bounds : task.bounds;
  }
  return cfg;
}

TrialRecord run_trial(const TaskSpec& task, const MppiConfig& method, std::uint64_t seed,
                      ThreadPool* pool) {
  const Environment env(task);
  const MppiConfig cfg = resolve_method_config(method, env.spec());

  std::unique_ptr<ThreadPool> local_pool;
  if (pool == nullptr) {
    local_pool = std::make_unique<ThreadPool>(cfg.threads);
    pool = local_pool.get();
  }

  const int m = cfg.bounds.size();
  Eigen::VectorXd hover = Eigen::VectorXd::Zero(m);
  hover.tail<1>()[0] = kGravity;
  ControlTrajectoryd nominal =
      clip(ControlTrajectoryd(MatrixXd(hover.transpose().replicate(cfg.horizon, 1))),
           cfg.bounds);

  NormalStream rng(seed);
  EnvState state = env.initial_state();

  TrialRecord record;
  record.task = env.spec().label;
  record.seed = seed;
  Welford iter_ms;

  const int max_steps = env.spec().max_steps;
  for (int step = 0; step < max_steps; ++step) {
    Eigen::VectorXd executed;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      StepResult res = control_step(cfg, env, state, nominal, rng, pool);
      executed = res.executed_control;
      nominal = std::move(res.next_nominal);
    } catch (const NoViableRollout&) {
      executed = nominal.values.row(0).transpose();
      ++record.no_viable_events;
    }
    iter_ms.add(std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                          t0)
                    .count());
    ++record.iterations;

    state = env.step(state, executed);
    if (state.status == EnvStatus::kSuccess) {
      record.success = true;
      record.steps = state.step_count;
      break;
    }
    if (state.status == EnvStatus::kCrashed) {
      break;
    }
  }
  if (!record.success) {
    record.steps = max_steps;
  }
  record.mean_iter_ms = iter_ms.mean();
  record.std_iter_ms = iter_ms.sample_std();
  return record;
}

std::vector<TrialRecord> run_experiment(const ExperimentConfig& config,
                                        std::ostream* progress) {
  if (config.tasks.empty() || config.methods.empty() || config.trials_per_cell < 1) {
    throw std::invalid_argument("experiment needs tasks, methods, and at least one trial");
  }
  std::vector<TrialRecord> records;
  records.reserve(config.tasks.size() * config.methods.size() * config.trials_per_cell);
  for (const auto& task : config.tasks) {
    for (const auto& method : config.methods) {
      for (int trial = 0; trial < config.trials_per_cell; ++trial) {
        const std::uint64_t seed = trial < static_cast<int>(config.seeds.size())
                                       ? config.seeds[trial]
                                       : config.base_seed + trial;
        TrialRecord rec;
        try {
          rec = run_trial(task, method.config, seed);
        } catch (const std::exception& e) {
          // one broken cell must not take down the rest of the grid
          rec.task = task.label.empty() ? to_string(task.kind) : task.label;
          rec.success = false;
          rec.steps = task.max_steps;
          if (progress != nullptr) {
            *progress << rec.task << " / " << method.label << " / trial " << trial
                      << ": error: " << e.what() << '\n';
          }
        }
        rec.method = method.label;
        rec.trial = trial;
        rec.seed = seed;
        records.push_back(std::move(rec));
        if (progress != nullptr) {
          const auto& r = records.back();
          *progress << r.task << " / " << r.method << " / trial " << trial << ": "
                    << (r.success ? "success" : "failure") << " in " << r.steps
                    << " steps (" << fmt_real(r.mean_iter_ms) << " ms/iter)\n";
        }
      }
    }
  }
  return records;
}

std::vector<CellSummary> aggregate(const std::vector<TrialRecord>& records) {
  if (records.empty()) {
    throw std::invalid_argument("cannot aggregate an empty record list");
  }
  std::vector<CellSummary> cells;
  std::map<std::pair<std::string, std::string>, std::size_t> index;
  struct CellAccum {
    int trials = 0;
    int successes = 0;
    Welford steps;
    Welford time;
  };
  std::vector<CellAccum> accums;
  for (const auto& rec : records) {
    const auto key = std::make_pair(rec.task, rec.method);
    auto it = index.find(key);
    if (it == index.end()) {
      it = index.emplace(key, cells.size()).first;
      cells.push_back(CellSummary{rec.task, rec.method, 0, 0, 0, 0, 0});
      accums.emplace_back();
    }
    auto& acc = accums[it->second];
    ++acc.trials;
    acc.successes += rec.success ? 1 : 0;
    acc.steps.add(static_cast<double>(rec.steps));
    if (rec.iterations > 0) {
      acc.time.add_moments(rec.iterations, rec.mean_iter_ms, rec.std_iter_ms);
    }
  }
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const auto& acc = accums[i];
    cells[i].success_pct = 100.0 * acc.successes / acc.trials;
    cells[i].steps_mean = acc.steps.mean();
    cells[i].steps_std = acc.steps.sample_std();
    cells[i].time_mean_ms = acc.time.mean();
    cells[i].time_std_ms = acc.time.sample_std();
  }
  return cells;
}

const char* const kTrialsCsvHeader =
    "task,method,trial,seed,success,steps,mean_iter_ms,std_iter_ms";
const char* const kSummaryCsvHeader =
    "task,method,success_pct,steps_mean,steps_std,time_mean_ms,time_std_ms";

std::string trial_csv_row(const TrialRecord& r) {
  std::ostringstream os;
  os << r.task << ',' << r.method << ',' << r.trial << ',' << r.seed << ','
     << (r.success ? 1 : 0) << ',' << r.steps << ',' << fmt_real(r.mean_iter_ms) << ','
     << fmt_real(r.std_iter_ms);
  return os.str();
}

namespace {

std::ofstream open_for_write(const std::string& path) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(p.parent_path(), ec);
  }
  std::ofstream os(p);
  if (!os) {
    throw std::runtime_error("cannot open '" + path + "' for writing");
  }
  return os;
}

}  // namespace

namespace {

std::string bounds_comment(const ActionBoundsd& bounds) {
  if (bounds.empty()) return "per-task";
  std::ostringstream os;
  os << "[";
  for (int j = 0; j < bounds.size(); ++j) {
    os << (j ? "," : "") << fmt_real(bounds.lower[j]);
  }
  os << "]..[";
  for (int j = 0; j < bounds.size(); ++j) {
    os << (j ? "," : "") << fmt_real(bounds.upper[j]);
  }
  os << "]";
  return os.str();
}

void write_provenance(std::ostream& os, const ExperimentConfig& config) {
  for (const auto& task : config.tasks) {
    const Environment env(task);  // resolves defaulted fields
    const auto& spec = env.spec();
    const auto& w = spec.weights;
    os << "# task " << spec.label << ": goal_x=" << fmt_real(spec.goal_x)
       << " max_steps=" << spec.max_steps << " dt=" << fmt_real(spec.dt)
       << " bounds=" << bounds_comment(spec.bounds) << " weights{goal=" << fmt_real(w.goal)
       << " clearance=" << fmt_real(w.clearance) << " control=" << fmt_real(w.control)
       << " z_margin=" << fmt_real(w.z_margin) << " terminal=" << fmt_real(w.terminal)
       << "} landing_speed=" << fmt_real(spec.landing_speed) << '\n';
  }
  for (const auto& method : config.methods) {
    const auto& cfg = method.config;
    os << "# method " << method.label << ": sampler=" << to_string(cfg.sampler.kind);
    if (cfg.sampler.kind != SamplerKind::kIidGaussian) {
      os << " k=" << cfg.sampler.knot_count;
    }
    os << " rollouts=" << cfg.rollouts << " horizon=" << cfg.horizon
       << " lambda=" << fmt_real(cfg.temperature) << " sigma=[";
    for (int j = 0; j < cfg.sampler.noise.sigma.size(); ++j) {
      os << (j ? "," : "") << fmt_real(cfg.sampler.noise.sigma[j]);
    }
    os << "] bounds=" << bounds_comment(cfg.bounds) << '\n';
  }
}

}  // namespace

void write_csv(const std::vector<CellSummary>& summaries,
               const std::vector<TrialRecord>& records, const std::string& path,
               const ExperimentConfig* provenance) {
  if (summaries.empty() || records.empty()) {
    throw std::invalid_argument("refusing to write empty benchmark CSVs");
  }
  {
    auto os = open_for_write(path + ".trials.csv");
    os << "# steps of failed trials are recorded at the task's max_steps cap\n";
    if (provenance != nullptr) write_provenance(os, *provenance);
    os << kTrialsCsvHeader << '\n';
    for (const auto& r : records) {
      os << trial_csv_row(r) << '\n';
    }
    if (!os) {
      throw std::runtime_error("write failed for '" + path + ".trials.csv'");
    }
  }
  {
    auto os = open_for_write(path + ".summary.csv");
    os << "# steps statistics include failed trials at the max_steps cap\n";
    os << kSummaryCsvHeader << '\n';
    for (const auto& c : summaries) {
      os << c.task << ',' << c.method << ',' << fmt_real(c.success_pct) << ','
         << fmt_real(c.steps_mean) << ',' << fmt_real(c.steps_std) << ','
         << fmt_real(c.time_mean_ms) << ',' << fmt_real(c.time_std_ms) << '\n';
    }
    if (!os) {
      throw std::runtime_error("write failed for '" + path + ".summary.csv'");
    }
  }
}

std::string format_summary_table(const std::vector<CellSummary>& summaries) {
  std::ostringstream os;
  std::string current_task;
  for (const auto& c : summaries) {
    if (c.task != current_task) {
      current_task = c.task;
      os << "Task: " << current_task << '\n';
      char header[128];
      std::snprintf(header, sizeof(header), "  %-20s %12s %22s %22s\n", "Method",
                    "Success (%)", "Steps to Goal", "Time (ms)");
      os << header;
    }
    char line[160];
    const std::string steps = fmt_real(c.steps_mean) + " +/- " + fmt_real(c.steps_std);
    const std::string time = fmt_real(c.time_mean_ms) + " +/- " + fmt_real(c.time_std_ms);
    std::snprintf(line, sizeof(line), "  %-20s %12.1f %22s %22s\n", c.method.c_str(),
                  c.success_pct, steps.c_str(), time.c_str());
    os << line;
  }
  return os.str();
}

}  // namespace mppi
