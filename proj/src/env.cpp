#include "mppi/env.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace mppi {

Terrain::Terrain() : segments_{{0.0, 0.0}} {}

Terrain::Terrain(std::vector<TerrainSegment> segments) : segments_(std::move(segments)) {
  if (segments_.empty()) {
    throw std::invalid_argument("terrain needs at least one segment");
  }
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    if (segments_[i].height < 0.0) {
      throw std::invalid_argument("terrain heights must be non-negative");
    }
    if (i > 0 && !(segments_[i - 1].x_start < segments_[i].x_start)) {
      throw std::invalid_argument("terrain segments must be sorted and non-overlapping");
    }
  }
}

double Terrain::height_at(double x) const {
  double h = segments_.front().height;
  for (const auto& seg : segments_) {
    if (x >= seg.x_start) {
      h = seg.height;
    } else {
      break;
    }
  }
  return h;
}

double Terrain::max_height() const {
  double h = 0.0;
  for (const auto& seg : segments_) h = std::max(h, seg.height);
  return h;
}

void Terrain::write_table(std::ostream& os, double x_end) const {
  char buf[64];
  auto row = [&](double x, double h) {
    std::snprintf(buf, sizeof(buf), "%.6g %.6g\n", x, h);
    os << buf;
  };
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    row(segments_[i].x_start, segments_[i].height);
    const double next = (i + 1 < segments_.size()) ? segments_[i + 1].x_start : x_end;
    if (next > segments_[i].x_start) {
      row(next, segments_[i].height);
    }
  }
}

std::string to_string(TaskKind kind) {
  switch (kind) {
    case TaskKind::kFlat:
      return "flat";
    case TaskKind::kStairs:
      return "stairs";
    case TaskKind::kBigBox:
      return "big-box";
  }
  return "unknown";
}

TaskSpec default_task_spec(TaskKind kind) {
  TaskSpec spec;
  spec.kind = kind;
  spec.label = to_string(kind);
  Eigen::Vector2d lower(-1.5, 0.0);
  Eigen::Vector2d upper(1.5, 10.1);
  switch (kind) {
    case TaskKind::kFlat:
      spec.goal_x = 1.0;
      break;
    case TaskKind::kStairs:
      spec.goal_x = 3.3;
      break;
    case TaskKind::kBigBox:
      spec.goal_x = 1.0;
      upper[1] = 10.05;  // tighter climb margin over the box
      break;
  }
  spec.bounds = ActionBoundsd(lower, upper);
  return spec;
}

namespace {

Terrain terrain_for(const TaskSpec& spec) {
  switch (spec.kind) {
    case TaskKind::kFlat:
      return Terrain();
    case TaskKind::kStairs: {
      // 4 risers of 0.15 m every 0.8 m
      std::vector<TerrainSegment> segs;
      for (int i = 0; i <= 4; ++i) {
        segs.push_back({0.8 * i, 0.15 * i});
      }
      return Terrain(std::move(segs));
    }
    case TaskKind::kBigBox:
      return Terrain({{0.0, 0.0}, {0.4, 0.4}, {0.6, 0.0}});
  }
  throw std::invalid_argument("unknown task kind");
}

}  // namespace

Environment::Environment(TaskSpec spec) : spec_(std::move(spec)), terrain_(terrain_for(spec_)) {
  if (!(spec_.goal_x > 0.0) || spec_.max_steps <= 0 || !(spec_.dt > 0.0)) {
    throw std::invalid_argument("task spec needs goal_x > 0, max_steps > 0, dt > 0");
  }
  if (spec_.bounds.empty()) {
    spec_.bounds = default_task_spec(spec_.kind).bounds;
  }
  if (spec_.bounds.size() != 2) {
    throw std::invalid_argument("planar point-mass tasks need 2-dimensional bounds");
  }
  if (spec_.label.empty()) {
    spec_.label = to_string(spec_.kind);
  }
  const Eigen::Vector2d umax =
      spec_.bounds.lower.cwiseAbs().cwiseMax(spec_.bounds.upper.cwiseAbs());
  const auto& w = spec_.weights;
  max_running_cost_ = w.goal * spec_.goal_x * spec_.goal_x +
                      w.clearance * std::pow(terrain_.max_height() + w.z_margin, 2) +
                      w.control * umax.squaredNorm();
}

EnvState Environment::initial_state() const {
  EnvState s;
  s.position = Eigen::Vector2d(0.0, spec_.weights.z_margin);
  return s;
}

Eigen::Vector2d Environment::hover_control() const { return {0.0, kGravity}; }

EnvState Environment::step(const EnvState& state,
                           Eigen::Ref<const Eigen::VectorXd> control) const {
  if (state.status != EnvStatus::kRunning) {
    throw std::invalid_argument("cannot step a terminal environment state");
  }
  if (control.size() != 2 || !control.allFinite()) {
    throw std::invalid_argument("control must be a finite 2-vector");
  }
  EnvState next;
  next.velocity = state.velocity + spec_.dt * (control.head<2>() + Eigen::Vector2d(0.0, -kGravity));
  next.position = state.position + spec_.dt * next.velocity;
  next.step_count = state.step_count + 1;
  next.status = EnvStatus::kRunning;
  if (next.position[1] < terrain_.height_at(next.position[0])) {
    next.status = EnvStatus::kCrashed;
  } else if (next.position[0] >= spec_.goal_x &&
             std::abs(next.velocity[1]) <= spec_.landing_speed) {
    next.status = EnvStatus::kSuccess;
  }
  return next;
}

double Environment::running_cost(const EnvState& state,
                                 Eigen::Ref<const Eigen::VectorXd> control) const {
  if (state.status != EnvStatus::kRunning) {
    throw std::invalid_argument("running cost is defined for running states only");
  }
  const auto& w = spec_.weights;
  const double dx = std::max(spec_.goal_x - state.position[0], 0.0);
  const double deficit = std::max(
      terrain_.height_at(state.position[0]) + w.z_margin - state.position[1], 0.0);
  return w.goal * dx * dx + w.clearance * deficit * deficit +
         w.control * control.squaredNorm();
}

double Environment::terminal_cost(const EnvState& state) const {
  const double dx = std::max(spec_.goal_x - state.position[0], 0.0);
  return spec_.weights.terminal * dx * dx;
}

double Environment::crash_penalty(int remaining_steps) const {
  return 1e6 + remaining_steps * max_running_cost_;
}

double Environment::max_running_cost_estimate() const { return max_running_cost_; }

}  // namespace mppi
