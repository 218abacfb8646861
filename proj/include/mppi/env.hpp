#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "mppi/trajectory.hpp"
#include "mppi/types.hpp"

namespace mppi {

enum class EnvStatus { kRunning, kSuccess, kCrashed };

/// Planar point-mass state. Terminal statuses absorb: a success or crashed
/// state is never stepped again.
struct EnvState {
  Eigen::Vector2d position = Eigen::Vector2d::Zero();  // x, z [m]
  Eigen::Vector2d velocity = Eigen::Vector2d::Zero();  // xdot, zdot [m/s]
  int step_count = 0;
  EnvStatus status = EnvStatus::kRunning;
};

struct TerrainSegment {
  double x_start;
  double height;
};

/// Piecewise-constant ground profile z = h(x). h is right-continuous: the
/// height at x is the height of the last segment starting at or before x.
class Terrain {
 public:
  Terrain();  // flat ground at height 0
  explicit Terrain(std::vector<TerrainSegment> segments);

  double height_at(double x) const;
  double max_height() const;
  const std::vector<TerrainSegment>& segments() const { return segments_; }

  /// Two-column (x, h) table for plotting, with doubled rows at each step
  /// edge so a line plot draws the profile faithfully.
  void write_table(std::ostream& os, double x_end) const;

 private:
  std::vector<TerrainSegment> segments_;
};

enum class TaskKind { kFlat, kStairs, kBigBox };

std::string to_string(TaskKind kind);

/// Quadratic running-cost weights; see Environment::running_cost.
struct CostWeights {
  double goal = 1.0;
  double clearance = 10.0;
  double control = 1e-3;
  double z_margin = 0.05;   // [m] clearance buffer above the terrain
  double terminal = 100.0;  // weight on the terminal goal-distance term
};

struct TaskSpec {
  TaskKind kind = TaskKind::kFlat;
  std::string label;  // CSV/task label; defaults to the kind name
  double goal_x = 1.0;
  int max_steps = 4000;
  double dt = 0.02;
  ActionBoundsd bounds;
  CostWeights weights;
  double landing_speed = 1.0;  // [m/s] max |zdot| at the goal for success
};

/// Task defaults mirroring the benchmark suite: a 1 m dash on flat ground, a
/// 4-riser staircase over 3.3 m, and a 0.4 m box blocking a 1 m dash. Thrust
/// bounds leave little margin over gravity, so climbing demands sustained,
/// coherent vertical control.
TaskSpec default_task_spec(TaskKind kind);

/// Thrust-controlled planar point mass over a terrain profile.
/// Dynamics are semi-implicit Euler with unit mass and gravity on zdot:
///   v' = v + dt * (u + [0, -g]),  p' = p + dt * v'.
/// The state crashes when it penetrates the terrain (z < h(x)) and succeeds
/// when x reaches the goal with |zdot| at most the landing threshold.
class Environment {
 public:
  explicit Environment(TaskSpec spec);

  const TaskSpec& spec() const { return spec_; }
  const Terrain& terrain() const { return terrain_; }

  /// Start state: at rest, x = 0, hovering one clearance margin above ground.
  EnvState initial_state() const;

  /// The control that exactly balances gravity.
  Eigen::Vector2d hover_control() const;

  /// One dynamics step plus the crash/success predicates.
  EnvState step(const EnvState& state, Eigen::Ref<const Eigen::VectorXd> control) const;

  /// w_goal*(goal - x)+^2 + w_clear*max(0, h(x) + margin - z)^2 + w_ctrl*|u|^2
  double running_cost(const EnvState& state,
                      Eigen::Ref<const Eigen::VectorXd> control) const;

  /// W_term*(goal - x)+^2
  double terminal_cost(const EnvState& state) const;

  /// Finite cost sentinel substituted for the remaining running cost of a
  /// rollout that crashed with `remaining_steps` to go.
  double crash_penalty(int remaining_steps) const;

  /// Upper estimate of the per-step running cost, used to scale the crash
  /// penalty with the remaining step count.
  double max_running_cost_estimate() const;

 private:
  TaskSpec spec_;
  Terrain terrain_;
  double max_running_cost_;
};

inline constexpr double kGravity = 9.81;  // [m/s^2]

}  // namespace mppi
