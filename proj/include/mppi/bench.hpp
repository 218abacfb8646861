#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "mppi/controller.hpp"
#include "mppi/env.hpp"

namespace mppi {

struct MethodSpec {
  std::string label;
  MppiConfig config;
};

struct ExperimentConfig {
  std::vector<TaskSpec> tasks;
  std::vector<MethodSpec> methods;
  int trials_per_cell = 5;
  std::uint64_t base_seed = 1000;
  // Optional explicit seeds; trial t uses seeds[t] when provided and
  // base_seed + t otherwise, so every method sees identical initial
  // conditions per trial index.
  std::vector<std::uint64_t> seeds;
  std::string output_path = "bench";
};

/// Outcome of a single trial. Failed trials (crash or step cap) record
/// steps = max_steps. The iteration count and controller-fallback count are
/// carried for aggregation but are not part of the CSV schema.
struct TrialRecord {
  std::string task;
  std::string method;
  int trial = 0;
  std::uint64_t seed = 0;
  bool success = false;
  int steps = 0;
  double mean_iter_ms = 0.0;
  double std_iter_ms = 0.0;
  int iterations = 0;
  int no_viable_events = 0;
};

struct CellSummary {
  std::string task;
  std::string method;
  double success_pct = 0.0;
  double steps_mean = 0.0;
  double steps_std = 0.0;
  double time_mean_ms = 0.0;
  double time_std_ms = 0.0;
};

/// Runs one receding-horizon trial: the nominal starts at the
/// gravity-compensating hover, and control_step executes until success,
/// crash, or the step cap. Wall time is measured around each full
/// control_step. If the controller reports no viable rollout, the trial
/// continues with the unmodified nominal and the event is counted.
TrialRecord run_trial(const TaskSpec& task, const MppiConfig& method, std::uint64_t seed,
                      ThreadPool* pool = nullptr);

/// Runs every (task, method, trial) cell sequentially in configuration
/// order. Per-cell progress lines go to `progress` when given.
std::vector<TrialRecord> run_experiment(const ExperimentConfig& config,
                                        std::ostream* progress = nullptr);

/// Per-(task, method) summaries in first-appearance order. Steps statistics
/// include failed trials at their cap; time statistics pool the iterations
/// of all trials; std is the sample standard deviation (n-1), zero for a
/// single observation.
std::vector<CellSummary> aggregate(const std::vector<TrialRecord>& records);

/// Writes `<path>.trials.csv` and `<path>.summary.csv` (6 significant digits
/// for reals, exact integers). Parent directories are created. Rows keep
/// input order. Wall-time columns are the only nondeterministic fields.
/// When the experiment configuration is supplied, task geometry, cost
/// weights, and method settings are recorded as leading comment lines.
void write_csv(const std::vector<CellSummary>& summaries,
               const std::vector<TrialRecord>& records, const std::string& path,
               const ExperimentConfig* provenance = nullptr);

extern const char* const kTrialsCsvHeader;
extern const char* const kSummaryCsvHeader;

std::string trial_csv_row(const TrialRecord& record);

/// Plain-text table, one block per task with Success (%), Steps to Goal and
/// Time (ms) columns.
std::string format_summary_table(const std::vector<CellSummary>& summaries);

/// Effective per-cell controller configuration: a method that does not pin
/// its own bounds inherits the task's.
MppiConfig resolve_method_config(const MppiConfig& method, const TaskSpec& task);

}  // namespace mppi
