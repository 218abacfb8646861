#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "mppi/bench.hpp"
#include "mppi/config.hpp"
#include "mppi/svg.hpp"

using namespace mppi;

namespace {

TrialRecord record(const std::string& task, const std::string& method, int trial,
                   bool success, int steps, int iterations = 10, double mean_ms = 1.0,
                   double std_ms = 0.1) {
  TrialRecord r;
  r.task = task;
  r.method = method;
  r.trial = trial;
  r.seed = 1000 + trial;
  r.success = success;
  r.steps = steps;
  r.iterations = iterations;
  r.mean_iter_ms = mean_ms;
  r.std_iter_ms = std_ms;
  return r;
}

MppiConfig quick_method(SamplerKind kind) {
  MppiConfig cfg;
  cfg.horizon = 16;
  cfg.rollouts = 16;
  cfg.temperature = 3.0;
  cfg.sampler.kind = kind;
  cfg.sampler.knot_count = 4;
  cfg.sampler.noise = default_noise_spec();
  cfg.threads = 1;
  return cfg;
}

std::string slurp(const std::string& path) {
  std::ifstream is(path);
  REQUIRE(is.good());
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

std::filesystem::path scratch_dir() {
  auto dir = std::filesystem::temp_directory_path() / "mppi_bench_test";
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("aggregate computes the table conventions") {
  std::vector<TrialRecord> records;
  // 3 of 5 successes, like a 60% table row
  records.push_back(record("flat", "Normal", 0, true, 1200));
  records.push_back(record("flat", "Normal", 1, false, 4000));
  records.push_back(record("flat", "Normal", 2, true, 900));
  records.push_back(record("flat", "Normal", 3, false, 4000));
  records.push_back(record("flat", "Normal", 4, true, 1500));
  // total failure row: every trial at the cap
  for (int t = 0; t < 5; ++t) {
    records.push_back(record("stairs", "Normal", t, false, 4000));
  }

  auto cells = aggregate(records);
  REQUIRE(cells.size() == 2);
  CHECK(cells[0].task == "flat");
  CHECK(cells[0].success_pct == 60.0);
  CHECK(cells[0].steps_mean == doctest::Approx((1200 + 4000 + 900 + 4000 + 1500) / 5.0));

  CHECK(cells[1].task == "stairs");
  CHECK(cells[1].success_pct == 0.0);
  CHECK(cells[1].steps_mean == 4000.0);
  CHECK(cells[1].steps_std == 0.0);

  auto single = aggregate({record("flat", "X", 0, true, 100)});
  CHECK(single[0].steps_std == 0.0);
  CHECK(single[0].time_std_ms >= 0.0);

  CHECK_THROWS_AS(aggregate({}), std::invalid_argument);
}

TEST_CASE("aggregate is invariant to trial order and monotone in failures") {
  std::vector<TrialRecord> records;
  for (int t = 0; t < 6; ++t) {
    records.push_back(record("flat", "M", t, t % 2 == 0, t % 2 == 0 ? 100 + t : 4000));
  }
  auto cells = aggregate(records);
  auto shuffled = records;
  std::mt19937_64 rng(1);
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  auto cells2 = aggregate(shuffled);
  CHECK(cells[0].success_pct == cells2[0].success_pct);
  CHECK(cells[0].steps_mean == cells2[0].steps_mean);

  // flipping a failure into a faster success lowers the mean
  auto improved = records;
  improved[1].success = true;
  improved[1].steps = 150;
  CHECK(aggregate(improved)[0].steps_mean < cells[0].steps_mean);
}

TEST_CASE("aggregate pools iteration times across trials") {
  std::vector<TrialRecord> records;
  records.push_back(record("flat", "M", 0, true, 10, /*iterations=*/10, /*mean=*/2.0,
                           /*std=*/0.0));
  records.push_back(record("flat", "M", 1, true, 30, /*iterations=*/30, /*mean=*/4.0,
                           /*std=*/0.0));
  auto cells = aggregate(records);
  // pooled mean weights by iteration count: (10*2 + 30*4) / 40
  CHECK(cells[0].time_mean_ms == doctest::Approx(3.5).epsilon(1e-12));
  CHECK(cells[0].time_std_ms > 0.0);  // spread between the two trial means
}

TEST_CASE("run_trial is reproducible for a fixed seed") {
  TaskSpec task = default_task_spec(TaskKind::kFlat);
  task.max_steps = 120;
  const auto cfg = quick_method(SamplerKind::kCubicSpline);
  auto a = run_trial(task, cfg, 4242);
  auto b = run_trial(task, cfg, 4242);
  CHECK(a.success == b.success);
  CHECK(a.steps == b.steps);
  CHECK(a.iterations == b.iterations);
  CHECK(a.seed == b.seed);
  // wall-time fields are explicitly not compared
}

TEST_CASE("run_trial on the flat task succeeds with the default spline method") {
  TaskSpec task = default_task_spec(TaskKind::kFlat);
  MppiConfig cfg = quick_method(SamplerKind::kCubicSpline);
  cfg.horizon = 40;
  cfg.rollouts = 64;
  int successes = 0;
  for (std::uint64_t seed : {1000, 1001, 1002}) {
    auto rec = run_trial(task, cfg, seed);
    successes += rec.success ? 1 : 0;
    CHECK(rec.steps <= task.max_steps);
  }
  CHECK(successes == 3);
}

TEST_CASE("trial CSV rows render integers exactly") {
  auto r = record("flat", "CubicSpline-k4", 2, true, 58, 58, 0.2143567, 0.0431);
  r.seed = 42;
  CHECK(trial_csv_row(r) == "flat,CubicSpline-k4,2,42,1,58,0.214357,0.0431");
}

TEST_CASE("write_csv emits both files and round-trips integer fields") {
  std::vector<TrialRecord> records = {record("flat", "A", 0, true, 58),
                                      record("flat", "A", 1, false, 4000),
                                      record("flat", "B", 0, true, 61)};
  auto cells = aggregate(records);
  const auto dir = scratch_dir();
  const std::string prefix = (dir / "roundtrip").string();
  write_csv(cells, records, prefix);

  const std::string trials = slurp(prefix + ".trials.csv");
  std::istringstream is(trials);
  std::string line;
  std::getline(is, line);
  CHECK(line[0] == '#');
  std::getline(is, line);
  CHECK(line == kTrialsCsvHeader);
  int row = 0;
  while (std::getline(is, line)) {
    std::istringstream fields(line);
    std::string task, method, trial, seed, success, steps;
    std::getline(fields, task, ',');
    std::getline(fields, method, ',');
    std::getline(fields, trial, ',');
    std::getline(fields, seed, ',');
    std::getline(fields, success, ',');
    std::getline(fields, steps, ',');
    CHECK(task == records[row].task);
    CHECK(method == records[row].method);
    CHECK(std::stoi(trial) == records[row].trial);
    CHECK(std::stoull(seed) == records[row].seed);
    CHECK((std::stoi(success) == 1) == records[row].success);
    CHECK(std::stoi(steps) == records[row].steps);
    ++row;
  }
  CHECK(row == 3);

  // summary parses back through the plot reader
  auto parsed = read_summary_csv(prefix + ".summary.csv");
  REQUIRE(parsed.size() == cells.size());
  CHECK(parsed[0].task == cells[0].task);
  CHECK(parsed[0].success_pct == cells[0].success_pct);

  CHECK_THROWS_AS(write_csv({}, records, prefix), std::invalid_argument);
  CHECK_THROWS_AS(write_csv(cells, {}, prefix), std::invalid_argument);
}

TEST_CASE("summary table formats one block per task") {
  std::vector<CellSummary> cells = {{"flat", "Normal", 60.0, 1358.0, 571.8, 40.05, 13.23},
                                    {"flat", "CubicSpline-k4", 100.0, 444.0, 30.2, 40.07, 8.7},
                                    {"stairs", "Normal", 0.0, 4000.0, 0.0, 25.08, 5.79}};
  const std::string table = format_summary_table(cells);
  CHECK(table.find("Task: flat") != std::string::npos);
  CHECK(table.find("Task: stairs") != std::string::npos);
  CHECK(table.find("CubicSpline-k4") != std::string::npos);
  CHECK(table.find("1358 +/- 571.8") != std::string::npos);
  CHECK(table.find("Steps to Goal") != std::string::npos);
}

TEST_CASE("run_experiment walks the grid in config order") {
  ExperimentConfig config;
  TaskSpec flat = default_task_spec(TaskKind::kFlat);
  flat.max_steps = 40;  // keep it quick; success not required here
  config.tasks = {flat};
  config.methods = {{"A", quick_method(SamplerKind::kLinearInterp)},
                    {"B", quick_method(SamplerKind::kIidGaussian)}};
  config.trials_per_cell = 2;
  config.base_seed = 7;
  auto records = run_experiment(config);
  REQUIRE(records.size() == 4);
  CHECK(records[0].method == "A");
  CHECK(records[0].trial == 0);
  CHECK(records[0].seed == 7);
  CHECK(records[1].seed == 8);
  CHECK(records[2].method == "B");
  CHECK(records[2].seed == 7);  // same trial seeds across methods

  ExperimentConfig empty;
  CHECK_THROWS_AS(run_experiment(empty), std::invalid_argument);
}

namespace {

// strips the two wall-time columns, which are the only nondeterministic part
std::string mask_time_columns(const std::string& csv) {
  std::istringstream is(csv);
  std::ostringstream os;
  std::string line;
  while (std::getline(is, line)) {
    if (!line.empty() && line[0] != '#') {
      int commas = 0;
      for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == ',' && ++commas == 6) {
          line = line.substr(0, i);
          break;
        }
      }
    }
    os << line << '\n';
  }
  return os.str();
}

ExperimentConfig golden_experiment(const std::string& output) {
  ExperimentConfig config;
  TaskSpec flat = default_task_spec(TaskKind::kFlat);
  flat.max_steps = 120;
  config.tasks = {flat};
  config.methods = {{"Normal", quick_method(SamplerKind::kIidGaussian)},
                    {"Spline", quick_method(SamplerKind::kCubicSpline)}};
  config.trials_per_cell = 2;
  config.base_seed = 900;
  config.output_path = output;
  return config;
}

}  // namespace

TEST_CASE("fixed-seed benchmark matches the golden trials CSV") {
  // the golden pins this platform's std::normal_distribution draw sequence;
  // regenerate it when switching C++ standard libraries
  const auto dir = scratch_dir();
  const std::string prefix = (dir / "golden_run").string();
  const auto config = golden_experiment(prefix);
  const auto records = run_experiment(config);
  write_csv(aggregate(records), records, prefix);
  const std::string masked = mask_time_columns(slurp(prefix + ".trials.csv"));
  const std::string golden =
      slurp(std::string(TEST_GOLDEN_DIR) + "/bench_fixed_seed.trials.masked.csv");
  CHECK(masked == golden);
}

TEST_CASE("explicit seed lists take precedence over the base seed") {
  ExperimentConfig config;
  TaskSpec flat = default_task_spec(TaskKind::kFlat);
  flat.max_steps = 10;
  config.tasks = {flat};
  config.methods = {{"A", quick_method(SamplerKind::kIidGaussian)}};
  config.trials_per_cell = 2;
  config.base_seed = 7;
  config.seeds = {1234, 5678};
  auto records = run_experiment(config);
  CHECK(records[0].seed == 1234);
  CHECK(records[1].seed == 5678);
}
