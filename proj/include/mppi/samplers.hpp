#pragma once

#include <optional>
#include <sstream>
#include <stdexcept>
#include <utility>
#include <vector>

#include "mppi/trajectory.hpp"
#include "mppi/types.hpp"

namespace mppi {

/// Per-action-dimension standard deviation of the injected Gaussian noise.
template <typename Scalar>
struct NoiseSpec {
  VectorX<Scalar> sigma;

  NoiseSpec() = default;

  explicit NoiseSpec(VectorX<Scalar> s) : sigma(std::move(s)) {
    if (sigma.size() < 1) {
      throw std::invalid_argument("noise spec needs at least one dimension");
    }
    detail::require_finite(sigma, "noise sigma");
    if ((sigma.array() <= Scalar(0)).any()) {
      throw std::invalid_argument("noise sigma entries must be strictly positive");
    }
  }

  int size() const { return static_cast<int>(sigma.size()); }
};

/// Reduced parameter block of a structured sampler: K horizon indices
/// (strictly increasing, spanning [0, H-1]) and the K x m values attached to
/// them. Knots, Bezier control points and waypoints all share this layout.
template <typename Scalar>
struct KnotSet {
  IndexVector indices;
  MatrixX<Scalar> values;

  KnotSet() = default;

  KnotSet(IndexVector idx, MatrixX<Scalar> vals)
      : indices(std::move(idx)), values(std::move(vals)) {
    if (indices.size() != values.rows()) {
      throw std::invalid_argument("knot index count must match value row count");
    }
    if (indices.size() < 2) {
      throw std::invalid_argument("a knot set needs at least two knots");
    }
    for (int i = 0; i + 1 < indices.size(); ++i) {
      if (indices[i] >= indices[i + 1]) {
        throw std::invalid_argument("knot indices must be strictly increasing");
      }
    }
    if (indices[0] != 0) {
      throw std::invalid_argument("first knot index must be 0");
    }
    detail::require_finite(values, "knot values");
  }

  int count() const { return static_cast<int>(indices.size()); }
  int action_dim() const { return static_cast<int>(values.cols()); }
};

enum class SamplerKind { kIidGaussian, kCubicSpline, kBezier, kLinearInterp };

enum class SplineBoundary { kNatural, kClampedZeroSlope };

template <typename Scalar>
struct SamplerConfig {
  SamplerKind kind = SamplerKind::kIidGaussian;
  int knot_count = 4;  // ignored for iid
  NoiseSpec<Scalar> noise;
  SplineBoundary spline_boundary = SplineBoundary::kNatural;
  // When set, rollout 0 is the unperturbed nominal (its draws are consumed
  // and discarded so the stream advances identically either way).
  bool nominal_preserving = false;
};

/// N perturbed dense trajectories plus the dense perturbations they were
/// built from. Perturbations are measured before clipping, so
/// trajectories[k] == clip(nominal + perturbations[k]) entry-wise.
template <typename Scalar>
struct SampleBatch {
  std::vector<ControlTrajectory<Scalar>> trajectories;
  std::vector<MatrixX<Scalar>> perturbations;
  // Structured kinds also record the knot-space noise per rollout
  // (empty for iid); used by the optional knot-space update rule.
  IndexVector knot_indices;
  std::vector<MatrixX<Scalar>> knot_noise;

  int size() const { return static_cast<int>(trajectories.size()); }
};

/// K indices spread uniformly over [0, H-1]: index_k = round((k(H-1))/(K-1))
/// with round-half-away-from-zero, computed exactly in integers.
inline IndexVector uniform_knot_indices(int horizon, int knot_count) {
  if (knot_count < 2) {
    throw std::invalid_argument("need at least two knots");
  }
  if (knot_count > horizon) {
    std::ostringstream os;
    os << "knot count " << knot_count << " exceeds horizon " << horizon
       << " (indices would collide)";
    throw std::invalid_argument(os.str());
  }
  IndexVector idx(knot_count);
  const std::int64_t span = horizon - 1;
  const std::int64_t gaps = knot_count - 1;
  for (int k = 0; k < knot_count; ++k) {
    idx[k] = static_cast<int>((2 * k * span + gaps) / (2 * gaps));
  }
  return idx;
}

/// Bernstein basis polynomial B_i^n(tau) = C(n,i) tau^i (1-tau)^(n-i).
/// The binomial coefficient is built multiplicatively so no intermediate
/// overflows for the degrees used here (n <= 32 is exact).
template <typename Scalar>
Scalar bernstein_basis(int degree, int index, Scalar tau) {
  if (index < 0 || index > degree) {
    throw std::invalid_argument("bernstein index out of range");
  }
  if (!(tau >= Scalar(0) && tau <= Scalar(1))) {
    throw std::invalid_argument("bernstein parameter must lie in [0, 1]");
  }
  double coeff = 1.0;
  for (int j = 1; j <= index; ++j) {
    coeff *= static_cast<double>(degree - index + j);
    coeff /= static_cast<double>(j);
  }
  using std::pow;
  return static_cast<Scalar>(coeff) * pow(tau, Scalar(index)) *
         pow(Scalar(1) - tau, Scalar(degree - index));
}

/// One-dimensional interpolating cubic spline with a choice of boundary
/// condition, kept continuous so tests can probe between integer steps.
/// Natural: zero second derivative at both ends (reproduces straight lines).
/// ClampedZeroSlope: zero first derivative at both ends.
template <typename Scalar>
class CubicSpline1D {
 public:
  CubicSpline1D(VectorX<Scalar> x, VectorX<Scalar> y,
                SplineBoundary boundary = SplineBoundary::kNatural)
      : x_(std::move(x)), y_(std::move(y)) {
    const int n = static_cast<int>(x_.size());
    if (n < 2 || y_.size() != n) {
      throw std::invalid_argument("spline needs at least two matching (x, y) pairs");
    }
    for (int i = 0; i + 1 < n; ++i) {
      if (!(x_[i] < x_[i + 1])) {
        throw std::invalid_argument("spline abscissae must be strictly increasing");
      }
    }
    m_ = solve_second_derivatives(boundary);
  }

  /// Spline value at t; t is clamped to the knot span.
  Scalar operator()(Scalar t) const {
    const int n = static_cast<int>(x_.size());
    if (t <= x_[0]) t = x_[0];
    if (t >= x_[n - 1]) t = x_[n - 1];
    int seg = segment_of(t);
    const Scalar h = x_[seg + 1] - x_[seg];
    const Scalar a = (x_[seg + 1] - t) / h;
    const Scalar b = (t - x_[seg]) / h;
    return a * y_[seg] + b * y_[seg + 1] +
           ((a * a * a - a) * m_[seg] + (b * b * b - b) * m_[seg + 1]) * (h * h) /
               Scalar(6);
  }

  const VectorX<Scalar>& second_derivatives() const { return m_; }

 private:
  int segment_of(Scalar t) const {
    // knot counts are small here; a linear scan beats binary search
    int seg = 0;
    while (seg + 2 < static_cast<int>(x_.size()) && t >= x_[seg + 1]) ++seg;
    return seg;
  }

  VectorX<Scalar> solve_second_derivatives(SplineBoundary boundary) const {
    const int n = static_cast<int>(x_.size());
    VectorX<Scalar> diag(n), lower(n), upper(n), rhs(n);
    for (int i = 1; i + 1 < n; ++i) {
      const Scalar h0 = x_[i] - x_[i - 1];
      const Scalar h1 = x_[i + 1] - x_[i];
      lower[i] = h0 / Scalar(6);
      diag[i] = (h0 + h1) / Scalar(3);
      upper[i] = h1 / Scalar(6);
      rhs[i] = (y_[i + 1] - y_[i]) / h1 - (y_[i] - y_[i - 1]) / h0;
    }
    if (boundary == SplineBoundary::kNatural) {
      diag[0] = Scalar(1);
      upper[0] = Scalar(0);
      rhs[0] = Scalar(0);
      diag[n - 1] = Scalar(1);
      lower[n - 1] = Scalar(0);
      rhs[n - 1] = Scalar(0);
    } else {  // clamped, zero slope at both ends
      const Scalar h0 = x_[1] - x_[0];
      diag[0] = h0 / Scalar(3);
      upper[0] = h0 / Scalar(6);
      rhs[0] = (y_[1] - y_[0]) / h0;
      const Scalar h1 = x_[n - 1] - x_[n - 2];
      lower[n - 1] = h1 / Scalar(6);
      diag[n - 1] = h1 / Scalar(3);
      rhs[n - 1] = -(y_[n - 1] - y_[n - 2]) / h1;
    }
    // Thomas solve
    VectorX<Scalar> m(n);
    for (int i = 1; i < n; ++i) {
      const Scalar w = lower[i] / diag[i - 1];
      diag[i] -= w * upper[i - 1];
      rhs[i] -= w * rhs[i - 1];
    }
    m[n - 1] = rhs[n - 1] / diag[n - 1];
    for (int i = n - 2; i >= 0; --i) {
      m[i] = (rhs[i] - upper[i] * m[i + 1]) / diag[i];
    }
    return m;
  }

  VectorX<Scalar> x_;
  VectorX<Scalar> y_;
  VectorX<Scalar> m_;  // second derivatives at the knots
};

namespace detail {

inline void require_spans_horizon(const IndexVector& indices, int horizon,
                                  const char* what) {
  if (indices[indices.size() - 1] != horizon - 1) {
    std::ostringstream os;
    os << what << " indices must end at the final horizon step " << horizon - 1
       << ", got " << indices[indices.size() - 1];
    throw std::invalid_argument(os.str());
  }
}

}  // namespace detail

/// Dense trajectory through the knots via per-dimension cubic splines,
/// evaluated at the integer horizon steps.
template <typename Scalar>
ControlTrajectory<Scalar> reconstruct_cubic_spline(
    const KnotSet<Scalar>& knots, int horizon,
    SplineBoundary boundary = SplineBoundary::kNatural) {
  detail::require_spans_horizon(knots.indices, horizon, "spline knot");
  const int m = knots.action_dim();
  VectorX<Scalar> x = knots.indices.template cast<Scalar>();
  MatrixX<Scalar> out(horizon, m);
  for (int j = 0; j < m; ++j) {
    CubicSpline1D<Scalar> spline(x, knots.values.col(j), boundary);
    for (int t = 0; t < horizon; ++t) {
      out(t, j) = spline(Scalar(t));
    }
  }
  return ControlTrajectory<Scalar>(std::move(out));
}

/// Dense trajectory as a Bezier curve of degree K-1 with the knot values as
/// control points, sampled at tau = t/(H-1). Endpoints match the first and
/// last control points exactly; interior control points are not interpolated.
template <typename Scalar>
ControlTrajectory<Scalar> reconstruct_bezier(const KnotSet<Scalar>& points, int horizon) {
  if (horizon < 2) {
    throw std::invalid_argument("bezier reconstruction needs a horizon of at least 2");
  }
  const int k = points.count();
  const int degree = k - 1;
  MatrixX<Scalar> out(horizon, points.action_dim());
  VectorX<Scalar> basis(k);
  for (int t = 0; t < horizon; ++t) {
    const Scalar tau = Scalar(t) / Scalar(horizon - 1);
    for (int i = 0; i < k; ++i) {
      basis[i] = bernstein_basis(degree, i, tau);
    }
    out.row(t) = basis.transpose() * points.values;
  }
  return ControlTrajectory<Scalar>(std::move(out));
}

/// Dense trajectory by straight-line interpolation between consecutive
/// waypoints, evaluated at the integer horizon steps.
template <typename Scalar>
ControlTrajectory<Scalar> reconstruct_linear(const KnotSet<Scalar>& waypoints,
                                             int horizon) {
  detail::require_spans_horizon(waypoints.indices, horizon, "waypoint");
  const int m = waypoints.action_dim();
  MatrixX<Scalar> out(horizon, m);
  int seg = 0;
  for (int t = 0; t < horizon; ++t) {
    while (t > waypoints.indices[seg + 1]) ++seg;
    const int t0 = waypoints.indices[seg];
    const int t1 = waypoints.indices[seg + 1];
    if (t == t0) {
      out.row(t) = waypoints.values.row(seg);
    } else if (t == t1) {
      out.row(t) = waypoints.values.row(seg + 1);
    } else {
      const Scalar alpha = Scalar(t - t0) / Scalar(t1 - t0);
      out.row(t) = (Scalar(1) - alpha) * waypoints.values.row(seg) +
                   alpha * waypoints.values.row(seg + 1);
    }
  }
  return ControlTrajectory<Scalar>(std::move(out));
}

/// Rows of the nominal trajectory at the given horizon indices.
template <typename Scalar>
KnotSet<Scalar> extract_knots(const ControlTrajectory<Scalar>& nominal,
                              const IndexVector& indices) {
  MatrixX<Scalar> vals(indices.size(), nominal.action_dim());
  for (int i = 0; i < indices.size(); ++i) {
    if (indices[i] < 0 || indices[i] >= nominal.horizon()) {
      throw std::invalid_argument("knot index outside the nominal horizon");
    }
    vals.row(i) = nominal.values.row(indices[i]);
  }
  return KnotSet<Scalar>(indices, std::move(vals));
}

/// Adds Gaussian noise (per-dimension sigma) to every knot value. Draws are
/// consumed knot-major (knot outer, dimension inner); indices are untouched.
template <typename Scalar>
KnotSet<Scalar> perturb_knots(const KnotSet<Scalar>& knots, const NoiseSpec<Scalar>& noise,
                              NormalStream& rng) {
  if (noise.size() != knots.action_dim()) {
    std::ostringstream os;
    os << "noise has " << noise.size() << " dimensions but knots have "
       << knots.action_dim();
    throw std::invalid_argument(os.str());
  }
  MatrixX<Scalar> vals = knots.values;
  for (int i = 0; i < knots.count(); ++i) {
    for (int j = 0; j < knots.action_dim(); ++j) {
      vals(i, j) += noise.sigma[j] * static_cast<Scalar>(rng.next());
    }
  }
  return KnotSet<Scalar>(knots.indices, std::move(vals));
}

/// Independent Gaussian perturbation of every trajectory entry. Draws are
/// consumed rollout-major (rollout outer, time middle, dimension inner).
template <typename Scalar>
SampleBatch<Scalar> sample_iid(const ControlTrajectory<Scalar>& nominal,
                               const NoiseSpec<Scalar>& noise, int count, NormalStream& rng,
                               const ActionBounds<Scalar>* bounds = nullptr) {
  if (count < 1) {
    throw std::invalid_argument("rollout count must be at least 1");
  }
  if (noise.size() != nominal.action_dim()) {
    throw std::invalid_argument("noise dimension does not match the nominal trajectory");
  }
  const int h = nominal.horizon();
  const int m = nominal.action_dim();
  SampleBatch<Scalar> batch;
  batch.trajectories.reserve(count);
  batch.perturbations.reserve(count);
  for (int k = 0; k < count; ++k) {
    MatrixX<Scalar> eps(h, m);
    for (int t = 0; t < h; ++t) {
      for (int j = 0; j < m; ++j) {
        eps(t, j) = noise.sigma[j] * static_cast<Scalar>(rng.next());
      }
    }
    ControlTrajectory<Scalar> traj(nominal.values + eps);
    if (bounds != nullptr) {
      traj = clip(traj, *bounds);
    }
    batch.trajectories.push_back(std::move(traj));
    batch.perturbations.push_back(std::move(eps));
  }
  return batch;
}

/// Samples one batch with the configured strategy. Structured kinds perturb
/// the nominal's knots, reconstruct densely, and report the dense pre-clip
/// difference to the nominal as the perturbation, so the weighted update is
/// identical for every kind. All noise comes from the single stream in a
/// fixed order, so a seed fully determines the batch.
template <typename Scalar>
SampleBatch<Scalar> generate_batch(const SamplerConfig<Scalar>& config,
                                   const ControlTrajectory<Scalar>& nominal,
                                   const ActionBounds<Scalar>& bounds, int count,
                                   NormalStream& rng) {
  if (count < 1) {
    throw std::invalid_argument("rollout count must be at least 1");
  }
  if (config.kind == SamplerKind::kIidGaussian) {
    SampleBatch<Scalar> batch = sample_iid(nominal, config.noise, count, rng, &bounds);
    if (config.nominal_preserving) {
      batch.perturbations[0].setZero();
      batch.trajectories[0] = clip(nominal, bounds);
    }
    return batch;
  }

  if (config.knot_count < 2) {
    throw std::invalid_argument("structured samplers need at least two knots");
  }
  const int h = nominal.horizon();
  const IndexVector indices = uniform_knot_indices(h, config.knot_count);
  const KnotSet<Scalar> nominal_knots = extract_knots(nominal, indices);

  SampleBatch<Scalar> batch;
  batch.knot_indices = indices;
  batch.trajectories.reserve(count);
  batch.perturbations.reserve(count);
  batch.knot_noise.reserve(count);
  for (int k = 0; k < count; ++k) {
    KnotSet<Scalar> perturbed = perturb_knots(nominal_knots, config.noise, rng);
    if (k == 0 && config.nominal_preserving) {
      // The draws above are discarded so the stream advances identically
      // whether or not this option is on.
      batch.perturbations.emplace_back(MatrixX<Scalar>::Zero(h, nominal.action_dim()));
      batch.trajectories.push_back(clip(nominal, bounds));
      batch.knot_noise.emplace_back(
          MatrixX<Scalar>::Zero(nominal_knots.count(), nominal.action_dim()));
      continue;
    }
    ControlTrajectory<Scalar> dense;
    switch (config.kind) {
      case SamplerKind::kCubicSpline:
        dense = reconstruct_cubic_spline(perturbed, h, config.spline_boundary);
        break;
      case SamplerKind::kBezier:
        dense = reconstruct_bezier(perturbed, h);
        break;
      case SamplerKind::kLinearInterp:
        dense = reconstruct_linear(perturbed, h);
        break;
      case SamplerKind::kIidGaussian:
        break;  // handled above
    }
    batch.perturbations.emplace_back(dense.values - nominal.values);
    batch.trajectories.push_back(clip(dense, bounds));
    batch.knot_noise.emplace_back(perturbed.values - nominal_knots.values);
  }
  return batch;
}

using NoiseSpecd = NoiseSpec<double>;
using KnotSetd = KnotSet<double>;
using SamplerConfigd = SamplerConfig<double>;
using SampleBatchd = SampleBatch<double>;

}  // namespace mppi
