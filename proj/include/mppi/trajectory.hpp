#pragma once

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "mppi/types.hpp"

namespace mppi {

namespace detail {

template <typename Derived>
void require_finite(const Eigen::MatrixBase<Derived>& m, const char* what) {
  if (!m.allFinite()) {
    std::ostringstream os;
    os << what << " contains a non-finite entry";
    throw std::invalid_argument(os.str());
  }
}

}  // namespace detail

/// Dense control sequence over the planning horizon, one row per time step,
/// one column per action dimension.
template <typename Scalar>
struct ControlTrajectory {
  MatrixX<Scalar> values;

  ControlTrajectory() = default;

  explicit ControlTrajectory(MatrixX<Scalar> v) : values(std::move(v)) {
    if (values.rows() < 2 || values.cols() < 1) {
      std::ostringstream os;
      os << "control trajectory must be at least 2x1, got " << values.rows() << "x"
         << values.cols();
      throw std::invalid_argument(os.str());
    }
    detail::require_finite(values, "control trajectory");
  }

  int horizon() const { return static_cast<int>(values.rows()); }
  int action_dim() const { return static_cast<int>(values.cols()); }
};

/// Element-wise actuator limits, one pair per action dimension.
template <typename Scalar>
struct ActionBounds {
  VectorX<Scalar> lower;
  VectorX<Scalar> upper;

  ActionBounds() = default;

  ActionBounds(VectorX<Scalar> lo, VectorX<Scalar> hi)
      : lower(std::move(lo)), upper(std::move(hi)) {
    if (lower.size() != upper.size() || lower.size() < 1) {
      throw std::invalid_argument("action bounds must have matching nonzero sizes");
    }
    detail::require_finite(lower, "lower bound");
    detail::require_finite(upper, "upper bound");
    if (((upper - lower).array() <= Scalar(0)).any()) {
      throw std::invalid_argument("each lower bound must be strictly below its upper bound");
    }
  }

  int size() const { return static_cast<int>(lower.size()); }
  bool empty() const { return lower.size() == 0; }
};

/// Finite-difference smoothness diagnostics of a dense trajectory.
template <typename Scalar>
struct SmoothnessReport {
  Scalar max_first_diff{};
  Scalar max_second_diff{};
  Scalar mean_abs_second_diff{};
};

enum class HorizonFill { kRepeatLast, kZero };

/// Clips every entry to its dimension's bounds; interior entries are
/// returned bit-for-bit unchanged.
template <typename Scalar>
ControlTrajectory<Scalar> clip(const ControlTrajectory<Scalar>& traj,
                               const ActionBounds<Scalar>& bounds) {
  if (traj.action_dim() != bounds.size()) {
    std::ostringstream os;
    os << "trajectory has " << traj.action_dim() << " action dimensions but bounds have "
       << bounds.size();
    throw std::invalid_argument(os.str());
  }
  const int h = traj.horizon();
  MatrixX<Scalar> out = traj.values.cwiseMax(bounds.lower.transpose().replicate(h, 1))
                            .cwiseMin(bounds.upper.transpose().replicate(h, 1));
  return ControlTrajectory<Scalar>(std::move(out));
}

/// Drops the first row and fills the freed final row, the receding-horizon
/// warm start after the first control has been executed.
template <typename Scalar>
ControlTrajectory<Scalar> shift_horizon(const ControlTrajectory<Scalar>& traj,
                                        HorizonFill fill = HorizonFill::kRepeatLast) {
  const int h = traj.horizon();
  MatrixX<Scalar> out(h, traj.action_dim());
  out.topRows(h - 1) = traj.values.bottomRows(h - 1);
  switch (fill) {
    case HorizonFill::kRepeatLast:
      out.row(h - 1) = traj.values.row(h - 1);
      break;
    case HorizonFill::kZero:
      out.row(h - 1).setZero();
      break;
  }
  return ControlTrajectory<Scalar>(std::move(out));
}

/// First- and second-difference statistics along time, over all dimensions.
/// Requires H >= 3 so at least one second difference exists.
template <typename Scalar>
SmoothnessReport<Scalar> smoothness_report(const ControlTrajectory<Scalar>& traj) {
  const int h = traj.horizon();
  if (h < 3) {
    throw std::invalid_argument("smoothness report needs a horizon of at least 3 steps");
  }
  const auto& u = traj.values;
  MatrixX<Scalar> d1 = u.bottomRows(h - 1) - u.topRows(h - 1);
  MatrixX<Scalar> d2 =
      u.bottomRows(h - 2) - Scalar(2) * u.middleRows(1, h - 2) + u.topRows(h - 2);
  SmoothnessReport<Scalar> report;
  report.max_first_diff = d1.cwiseAbs().maxCoeff();
  report.max_second_diff = d2.cwiseAbs().maxCoeff();
  report.mean_abs_second_diff = d2.cwiseAbs().mean();
  return report;
}

using ControlTrajectoryd = ControlTrajectory<double>;
using ActionBoundsd = ActionBounds<double>;
using SmoothnessReportd = SmoothnessReport<double>;

}  // namespace mppi
