#include "mppi/controller.hpp"

#include <chrono>
#include <memory>
#include <vector>

namespace mppi {

CostBreakdown trajectory_cost(const Environment& env, const EnvState& x0,
                              const ControlTrajectoryd& traj, RolloutStats* stats) {
  if (x0.status != EnvStatus::kRunning) {
    throw std::invalid_argument("rollouts must start from a running state");
  }
  const int horizon = traj.horizon();
  CostBreakdown cost;
  EnvState state = x0;
  for (int t = 0; t < horizon; ++t) {
    const auto control = traj.values.row(t).transpose();
    cost.running_total += env.running_cost(state, control);
    state = env.step(state, control);
    const bool finite = state.position.allFinite() && state.velocity.allFinite();
    if (!finite || state.status == EnvStatus::kCrashed) {
      cost.running_total += env.crash_penalty(horizon - t - 1);
      if (stats != nullptr) {
        stats->crashed = true;
        stats->nan_event = !finite;
      }
      cost.total = cost.running_total;
      return cost;
    }
    if (state.status == EnvStatus::kSuccess) {
      break;
    }
  }
  cost.terminal = env.terminal_cost(state);
  cost.total = cost.running_total + cost.terminal;
  return cost;
}

namespace {

ControlTrajectoryd knot_space_updated(const MppiConfig& config,
                                      const ControlTrajectoryd& nominal,
                                      const SampleBatchd& batch,
                                      const WeightVector& weights) {
  KnotSetd knots = extract_knots(nominal, batch.knot_indices);
  MatrixXd values = knots.values;
  for (int k = 0; k < batch.size(); ++k) {
    values += weights[k] * batch.knot_noise[k];
  }
  KnotSetd updated(batch.knot_indices, std::move(values));
  ControlTrajectoryd dense;
  switch (config.sampler.kind) {
    case SamplerKind::kCubicSpline:
      dense = reconstruct_cubic_spline(updated, nominal.horizon(),
                                       config.sampler.spline_boundary);
      break;
    case SamplerKind::kBezier:
      dense = reconstruct_bezier(updated, nominal.horizon());
      break;
    case SamplerKind::kLinearInterp:
      dense = reconstruct_linear(updated, nominal.horizon());
      break;
    case SamplerKind::kIidGaussian:
      throw std::invalid_argument("knot-space update requires a structured sampler");
  }
  return clip(dense, config.bounds);
}

}  // namespace

StepResult control_step(const MppiConfig& config, const Environment& env,
                        const EnvState& state, const ControlTrajectoryd& nominal,
                        NormalStream& rng, ThreadPool* pool) {
  if (nominal.horizon() != config.horizon) {
    throw std::invalid_argument("nominal horizon does not match the configuration");
  }
  if (config.rollouts < 1 || config.iterations_per_step < 1) {
    throw std::invalid_argument("need at least one rollout and one iteration per step");
  }
  if (state.status != EnvStatus::kRunning) {
    // fail on the calling thread, not inside the rollout workers
    throw std::invalid_argument("control_step needs a running state");
  }
  const auto t_start = std::chrono::steady_clock::now();
  const int n = config.rollouts;

  std::unique_ptr<ThreadPool> local_pool;
  if (pool == nullptr) {
    local_pool = std::make_unique<ThreadPool>(config.threads);
    pool = local_pool.get();
  }

  StepResult result;
  ControlTrajectoryd current = nominal;
  for (int iter = 0; iter < config.iterations_per_step; ++iter) {
    SampleBatchd batch = generate_batch(config.sampler, current, config.bounds, n, rng);

    Eigen::VectorXd totals(n);
    std::vector<RolloutStats> stats(n);
    pool->parallel_for(n, [&](int k) {
      totals[k] = trajectory_cost(env, state, batch.trajectories[k], &stats[k]).total;
    });

    const WeightVector weights = importance_weights<double>(totals, config.temperature);
    if (config.knot_space_update && config.sampler.kind != SamplerKind::kIidGaussian) {
      current = knot_space_updated(config, current, batch, weights);
    } else {
      current = update_nominal(current, batch, weights, config.bounds);
    }

    auto& diag = result.diagnostics;
    const double baseline = config.baseline_subtraction ? totals.minCoeff() : 0.0;
    diag.min_cost = totals.minCoeff() - baseline;
    diag.mean_cost = totals.mean() - baseline;
    diag.effective_sample_size = effective_sample_size(weights);
    diag.crashed_rollouts = 0;
    diag.nan_rollouts = 0;
    for (const auto& s : stats) {
      diag.crashed_rollouts += s.crashed ? 1 : 0;
      diag.nan_rollouts += s.nan_event ? 1 : 0;
    }
  }

  result.executed_control = current.values.row(0).transpose();
  result.next_nominal = shift_horizon(current, HorizonFill::kRepeatLast);
  result.diagnostics.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t_start)
          .count();
  return result;
}

}  // namespace mppi
