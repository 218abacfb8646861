#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>

#include "mppi/env.hpp"
#include "mppi/parallel.hpp"
#include "mppi/samplers.hpp"
#include "mppi/trajectory.hpp"

namespace mppi {

struct MppiConfig {
  int horizon = 40;
  int rollouts = 64;
  double temperature = 3.0;
  SamplerConfigd sampler;
  ActionBoundsd bounds;
  // The softmax always subtracts the minimum cost (required for numerical
  // stability and mathematically a no-op); this flag only selects whether
  // diagnostics report shifted or raw costs.
  bool baseline_subtraction = false;
  int iterations_per_step = 1;
  // Update the nominal in knot space instead of dense perturbation space
  // (structured samplers only). Experimental; off by default.
  bool knot_space_update = false;
  int threads = 0;  // rollout-evaluation parallelism; 0 = auto
};

/// Cost of one rollout, split into its accumulated running part and the
/// terminal part. A crashed rollout carries the (finite) crash penalty in
/// running_total, so total is never infinite or NaN.
struct CostBreakdown {
  double running_total = 0.0;
  double terminal = 0.0;
  double total = 0.0;
};

using WeightVector = Eigen::VectorXd;

struct RolloutStats {
  bool crashed = false;
  bool nan_event = false;
};

struct StepDiagnostics {
  double min_cost = 0.0;
  double mean_cost = 0.0;
  double effective_sample_size = 0.0;
  double wall_ms = 0.0;
  int crashed_rollouts = 0;
  int nan_rollouts = 0;
};

struct StepResult {
  Eigen::VectorXd executed_control;
  ControlTrajectoryd next_nominal;
  StepDiagnostics diagnostics;
};

/// Thrown when no rollout has finite cost, so importance weights are
/// undefined. The caller falls back to executing the unmodified nominal.
class NoViableRollout : public std::runtime_error {
 public:
  NoViableRollout() : std::runtime_error("no viable rollout: every sampled cost is infinite") {}
};

/// Softmax weights over rollout costs:
///   w_k = exp(-(S_k - S_min)/lambda) / sum_j exp(-(S_j - S_min)/lambda).
/// Subtracting the minimum leaves the weights mathematically unchanged while
/// preventing underflow. +infinity costs get weight zero.
template <typename Scalar>
VectorX<Scalar> importance_weights(const VectorX<Scalar>& costs, Scalar temperature) {
  if (costs.size() < 1) {
    throw std::invalid_argument("importance weights need at least one cost");
  }
  if (!(temperature > Scalar(0))) {
    throw std::invalid_argument("temperature must be strictly positive");
  }
  Scalar min_cost = std::numeric_limits<Scalar>::infinity();
  for (int k = 0; k < costs.size(); ++k) {
    if (std::isnan(costs[k])) {
      throw std::invalid_argument("rollout costs must not be NaN");
    }
    min_cost = std::min(min_cost, costs[k]);
  }
  if (!std::isfinite(min_cost)) {
    throw NoViableRollout();
  }
  VectorX<Scalar> w(costs.size());
  for (int k = 0; k < costs.size(); ++k) {
    w[k] = std::isfinite(costs[k]) ? std::exp(-(costs[k] - min_cost) / temperature)
                                   : Scalar(0);
  }
  w /= w.sum();
  return w;
}

/// Adds the cost-weighted average of the dense perturbations to the nominal,
/// then clips to the bounds. Accumulation runs in rollout order so results
/// are independent of how the costs were evaluated.
template <typename Scalar>
ControlTrajectory<Scalar> update_nominal(const ControlTrajectory<Scalar>& nominal,
                                         const SampleBatch<Scalar>& batch,
                                         const VectorX<Scalar>& weights,
                                         const ActionBounds<Scalar>& bounds) {
  if (batch.size() != weights.size()) {
    throw std::invalid_argument("batch size does not match weight count");
  }
  MatrixX<Scalar> updated = nominal.values;
  for (int k = 0; k < batch.size(); ++k) {
    updated += weights[k] * batch.perturbations[k];
  }
  return clip(ControlTrajectory<Scalar>(std::move(updated)), bounds);
}

/// 1 / sum w_k^2; equals the rollout count for uniform weights and 1 for a
/// one-hot weight vector.
inline double effective_sample_size(const WeightVector& weights) {
  return 1.0 / weights.squaredNorm();
}

/// Accumulates running cost over the horizon and adds the terminal cost.
/// A rollout that crashes (or produces a non-finite state) at step t stops
/// there; its remaining running cost is replaced by the environment's finite
/// crash penalty. A rollout that reaches success stops accruing cost.
CostBreakdown trajectory_cost(const Environment& env, const EnvState& x0,
                              const ControlTrajectoryd& traj,
                              RolloutStats* stats = nullptr);

/// One full MPPI iteration: sample a batch around the nominal, cost all
/// rollouts, reweight, update the nominal, and hand back the first row as
/// the control to execute plus the shifted nominal for the next step.
/// All noise is drawn from `rng` up front on the calling thread; only the
/// rollout cost evaluations run on the pool.
StepResult control_step(const MppiConfig& config, const Environment& env,
                        const EnvState& state, const ControlTrajectoryd& nominal,
                        NormalStream& rng, ThreadPool* pool = nullptr);

}  // namespace mppi
