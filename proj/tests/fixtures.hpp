#ifndef TRUNCFILTER_TEST_FIXTURES_HPP
#define TRUNCFILTER_TEST_FIXTURES_HPP

#include <functional>
#include <vector>

#include <doctest.h>

#include "truncfilter/filter.hpp"

namespace fixtures {

using namespace truncfilter;

// Runs fn and returns the ErrorCode it throws.
inline ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an exception");
  return ErrorCode::InvalidArgument;
}

inline Eigen::Matrix3d k3() {
  Eigen::Matrix3d K;
  K << .5, .2, .1,
       .3, .5, .3,
       .2, .3, .6;
  return K;
}

inline GridPtr grid3() { return make_grid_1d(0.0, 3.0, 3); }

inline KernelMatrix kernel3() { return normalize_kernel(grid3(), k3()); }

inline GridMeasure measure(GridPtr g, std::vector<double> w) {
  return GridMeasure(std::move(g), Eigen::Map<Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size())));
}

inline GridFunction function(GridPtr g, std::vector<double> v) {
  return GridFunction(std::move(g), Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())));
}

// Fixed kernel, explicit potentials g_1..g_T.
class MatrixSystem final : public FilterSystem {
 public:
  MatrixSystem(GridPtr g, Eigen::MatrixXd K, std::vector<GridFunction> pots)
      : grid_(std::move(g)), K_(std::move(K)), pots_(std::move(pots)) {}
  const GridPtr& grid() const override { return grid_; }
  int horizon() const override { return static_cast<int>(pots_.size()); }
  Eigen::VectorXd propagate(int, const Eigen::VectorXd& w) const override { return K_ * w; }
  Eigen::MatrixXd dense_kernel(int) const override { return K_; }
  const GridFunction& potential(int t) const override { return pots_.at(static_cast<std::size_t>(t - 1)); }

 private:
  GridPtr grid_;
  Eigen::MatrixXd K_;
  std::vector<GridFunction> pots_;
};

inline MatrixSystem system3() {
  const GridPtr g = grid3();
  return MatrixSystem(g, k3(), {function(g, {1, 2, 4}), function(g, {2, 1, 1})});
}

// Additive model with identity dynamics and standard normal noise, for overriding.
inline AdditiveModel plain_model() { return lingauss({1.0, 1.0, 1.0, 1.0, 1.0, 0.0}); }

}  // namespace fixtures

#endif
