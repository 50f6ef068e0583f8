#ifndef TRUNCFILTER_FILTER_HPP
#define TRUNCFILTER_FILTER_HPP

#include <memory>
#include <vector>

#include "truncfilter/grid.hpp"
#include "truncfilter/ssm.hpp"

namespace truncfilter {

/// A model bound to a grid and one observation record: kernels kappa_t and
/// potentials g_t for t = 1..horizon().
class FilterSystem {
 public:
  virtual ~FilterSystem() = default;

  virtual const GridPtr& grid() const = 0;
  virtual int horizon() const = 0;
  /// K_t w for a weight vector w (mass is preserved).
  virtual Eigen::VectorXd propagate(int t, const Eigen::VectorXd& w) const = 0;
  /// Dense column-stochastic K_t.
  virtual Eigen::MatrixXd dense_kernel(int t) const = 0;
  virtual const GridFunction& potential(int t) const = 0;
};

/// The base model S = (pi_0, kappa_t, g_t) on a grid. Time-homogeneous models
/// share one kernel matrix; otherwise kernels are cached when they fit in
/// `kernel_cache_bytes` and rebuilt on demand when they do not.
class GridModel final : public FilterSystem {
 public:
  GridModel(StateSpaceModel model, GridPtr grid, ObservationRecord obs,
            std::size_t kernel_cache_bytes = std::size_t{1} << 28);

  const GridPtr& grid() const override { return grid_; }
  int horizon() const override { return obs_.horizon(); }
  Eigen::VectorXd propagate(int t, const Eigen::VectorXd& w) const override;
  Eigen::MatrixXd dense_kernel(int t) const override { return kernel(t)->matrix; }
  const GridFunction& potential(int t) const override;

  std::shared_ptr<const KernelMatrix> kernel(int t) const;
  const StateSpaceModel& model() const { return model_; }
  const ObservationRecord& observations() const { return obs_; }
  GridMeasure prior() const { return model_.prior_on(grid_); }

 private:
  StateSpaceModel model_;
  GridPtr grid_;
  ObservationRecord obs_;
  std::vector<std::shared_ptr<const KernelMatrix>> kernels_;  // empty when built on demand
  std::vector<GridFunction> potentials_;
};

// ---------------------------------------------------------------------------
// P, U and PU operators

/// xi = K mu, renormalised.
GridMeasure predict(const GridMeasure& mu, const KernelMatrix& K);

struct UpdateResult {
  GridMeasure pi;
  double z;  // (g, xi)
};

/// Bayes update. Throws ZeroLikelihoodError (step 0) when (g, xi) = 0.
UpdateResult update(const GridMeasure& xi, const GridFunction& g);

UpdateResult pu_step(const GridMeasure& mu, const KernelMatrix& K, const GridFunction& g);
/// One PU step of a bound system at time t.
UpdateResult pu_step(const FilterSystem& sys, int t, const GridMeasure& mu);

// ---------------------------------------------------------------------------
// Trajectories

struct RenormalizationEvent {
  int t;
  double factor;  // predicted mass before renormalisation
};

struct FilterOptions {
  /// Trajectories whose measures would exceed this many stored doubles keep
  /// only the final pi and xi.
  std::size_t max_stored_values = std::size_t{1} << 26;
};

struct FilterTrajectory {
  GridPtr grid;
  std::vector<GridMeasure> pis;  // pis[t], t = 0..T (only the last when streaming)
  std::vector<GridMeasure> xis;  // xis[t-1] = xi_t (only the last when streaming)
  std::vector<double> zs;        // zs[t-1] = Z_t
  std::vector<double> boundary_mass;  // t = 0..T
  std::vector<Point> means;           // t = 0..T
  std::vector<Point> vars;            // t = 0..T
  std::vector<RenormalizationEvent> renormalizations;
  bool streaming = false;

  int horizon() const { return static_cast<int>(zs.size()); }
  const GridMeasure& pi(int t) const;
  const GridMeasure& xi(int t) const;
  double z(int t) const { return zs.at(static_cast<std::size_t>(t - 1)); }
};

/// pi_0 = prior, then T PU steps. A vanishing normaliser raises
/// ZeroLikelihoodError carrying the offending t.
FilterTrajectory run_filter(const FilterSystem& sys, const GridMeasure& prior, const FilterOptions& opts = {});
/// Convenience overload building a GridModel.
FilterTrajectory run_filter(const StateSpaceModel& model, const ObservationRecord& obs,
                            const GridMeasure& prior, GridPtr grid);

/// Phi_{t|k}(mu): PU steps k+1..t.
GridMeasure compose_pu(const FilterSystem& sys, int k, int t, const GridMeasure& mu);

}  // namespace truncfilter

#endif
