#include "truncfilter/filter.hpp"

#include <cmath>

namespace truncfilter {

GridModel::GridModel(StateSpaceModel model, GridPtr grid, ObservationRecord obs, std::size_t kernel_cache_bytes)
    : model_(std::move(model)), grid_(std::move(grid)), obs_(std::move(obs)) {
  const int T = obs_.horizon();
  if (model_.time_homogeneous) {
    kernels_.push_back(std::make_shared<const KernelMatrix>(kernel_matrix(model_, 1, grid_)));
  } else {
    const auto n = static_cast<std::size_t>(grid_->size());
    if (n * n * sizeof(double) * static_cast<std::size_t>(T) <= kernel_cache_bytes) {
      for (int t = 1; t <= T; ++t) {
        kernels_.push_back(std::make_shared<const KernelMatrix>(kernel_matrix(model_, t, grid_)));
      }
    }
  }
  potentials_.reserve(static_cast<std::size_t>(T));
  for (int t = 1; t <= T; ++t) potentials_.push_back(model_.potential_at(t, obs_.y(t), grid_));
}

std::shared_ptr<const KernelMatrix> GridModel::kernel(int t) const {
  if (t < 1 || t > horizon()) throw Error(ErrorCode::InvalidArgument, "kernel: t out of range");
  if (model_.time_homogeneous) return kernels_.front();
  if (!kernels_.empty()) return kernels_[static_cast<std::size_t>(t - 1)];
  return std::make_shared<const KernelMatrix>(kernel_matrix(model_, t, grid_));
}

Eigen::VectorXd GridModel::propagate(int t, const Eigen::VectorXd& w) const { return kernel(t)->matrix * w; }

const GridFunction& GridModel::potential(int t) const {
  if (t < 1 || t > horizon()) throw Error(ErrorCode::InvalidArgument, "potential: t out of range");
  return potentials_[static_cast<std::size_t>(t - 1)];
}

// ---------------------------------------------------------------------------

GridMeasure predict(const GridMeasure& mu, const KernelMatrix& K) {
  require_same_grid(mu.grid(), *K.grid, "predict");
  return GridMeasure(mu.grid_ptr(), K.matrix * mu.weights()).normalize();
}

UpdateResult update(const GridMeasure& xi, const GridFunction& g) {
  require_same_grid(xi.grid(), g.grid(), "update");
  if (!g.nonnegative()) throw Error(ErrorCode::InvalidArgument, "update: potential must be nonnegative");
  Eigen::VectorXd w = g.values().cwiseProduct(xi.weights());
  const double z = w.sum();
  if (!(z > 0.0)) throw ZeroLikelihoodError(0, "(g, xi) = 0: the potential misses the predictive support");
  w /= z;
  return {GridMeasure(xi.grid_ptr(), std::move(w)), z};
}

UpdateResult pu_step(const GridMeasure& mu, const KernelMatrix& K, const GridFunction& g) {
  return update(predict(mu, K), g);
}

namespace {

struct Step {
  GridMeasure xi;
  UpdateResult post;
  double predicted_mass;
};

Step step(const FilterSystem& sys, int t, const GridMeasure& mu) {
  require_same_grid(mu.grid(), *sys.grid(), "pu_step");
  GridMeasure raw(sys.grid(), sys.propagate(t, mu.weights()));
  const double mass = raw.mass();
  GridMeasure xi = raw.normalize();
  try {
    UpdateResult post = update(xi, sys.potential(t));
    return {std::move(xi), std::move(post), mass};
  } catch (const ZeroLikelihoodError&) {
    throw ZeroLikelihoodError(t, "(g_t, xi_t) = 0: the potential misses the predictive support");
  }
}

}  // namespace

UpdateResult pu_step(const FilterSystem& sys, int t, const GridMeasure& mu) { return step(sys, t, mu).post; }

const GridMeasure& FilterTrajectory::pi(int t) const {
  if (streaming) {
    if (t != horizon()) throw Error(ErrorCode::InvalidArgument, "streaming trajectory keeps only the final pi");
    return pis.back();
  }
  return pis.at(static_cast<std::size_t>(t));
}

const GridMeasure& FilterTrajectory::xi(int t) const {
  if (streaming) {
    if (t != horizon()) throw Error(ErrorCode::InvalidArgument, "streaming trajectory keeps only the final xi");
    return xis.back();
  }
  return xis.at(static_cast<std::size_t>(t - 1));
}

FilterTrajectory run_filter(const FilterSystem& sys, const GridMeasure& prior, const FilterOptions& opts) {
  require_same_grid(prior.grid(), *sys.grid(), "run_filter");
  const int T = sys.horizon();
  FilterTrajectory tr;
  tr.grid = sys.grid();
  const auto stored = 2 * static_cast<std::size_t>(T + 1) * static_cast<std::size_t>(prior.size());
  tr.streaming = stored > opts.max_stored_values;

  GridMeasure pi = prior.normalize();
  auto record = [&tr](const GridMeasure& p) {
    tr.boundary_mass.push_back(p.boundary_mass());
    tr.means.push_back(p.mean());
    tr.vars.push_back(p.variance());
  };
  record(pi);
  tr.pis.push_back(pi);
  for (int t = 1; t <= T; ++t) {
    Step s = step(sys, t, pi);
    if (std::abs(s.predicted_mass - 1.0) > 1e-10) tr.renormalizations.push_back({t, s.predicted_mass});
    pi = std::move(s.post.pi);
    tr.zs.push_back(s.post.z);
    record(pi);
    if (tr.streaming) {
      tr.pis.assign(1, pi);
      tr.xis.assign(1, std::move(s.xi));
    } else {
      tr.pis.push_back(pi);
      tr.xis.push_back(std::move(s.xi));
    }
  }
  return tr;
}

FilterTrajectory run_filter(const StateSpaceModel& model, const ObservationRecord& obs, const GridMeasure& prior,
                            GridPtr grid) {
  return run_filter(GridModel(model, std::move(grid), obs), prior);
}

GridMeasure compose_pu(const FilterSystem& sys, int k, int t, const GridMeasure& mu) {
  if (!(k < t)) throw Error(ErrorCode::InvalidArgument, "compose_pu: need k < t");
  GridMeasure out = mu;
  for (int m = k + 1; m <= t; ++m) out = pu_step(sys, m, out).pi;
  return out;
}

}  // namespace truncfilter
