#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>

namespace mppi {

// Dense trajectory storage is time-major (row = time step), so rollout
// evaluation streams rows sequentially.
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using MatrixXd = MatrixX<double>;
using IndexVector = Eigen::VectorXi;

/// Seeded stream of standard-normal draws. One call to next() is one draw;
/// the running draw count backs the sampling-dimension accounting tests.
class NormalStream {
 public:
  explicit NormalStream(std::uint64_t seed) : engine_(seed) {}

  double next() {
    ++count_;
    return dist_(engine_);
  }

  std::uint64_t draw_count() const { return count_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> dist_{0.0, 1.0};
  std::uint64_t count_ = 0;
};

}  // namespace mppi
