#ifndef TRUNCFILTER_SSM_HPP
#define TRUNCFILTER_SSM_HPP

#include <cstdint>
#include <functional>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "truncfilter/grid.hpp"
#include "truncfilter/random.hpp"

namespace truncfilter {

using PointMap = std::function<Point(int t, const Point&)>;
using PointDensity = std::function<double(const Point&)>;
using PointSampler = std::function<Point(Rng&)>;

/// Generic state space model (pi_0, k_t, g_t).
///
/// `transition_density(t, x, x_prev)` is the density of X_t = x given
/// X_{t-1} = x_prev with respect to Lebesgue measure; `likelihood(t, y, x)` is
/// g_t(y | x). Both must be pure.
struct StateSpaceModel {
  std::string name;
  int state_dim = 1;
  int obs_dim = 1;
  PointDensity prior_pdf;
  std::function<double(int t, const Point& x, const Point& x_prev)> transition_density;
  std::function<double(int t, const Point& y, const Point& x)> likelihood;
  /// k_t does not depend on t, so one kernel matrix serves every step.
  bool time_homogeneous = true;

  GridMeasure prior_on(GridPtr grid) const { return discretize_density(prior_pdf, std::move(grid)); }
  /// g_t(y | .) on the grid.
  GridFunction potential_at(int t, const Point& y, GridPtr grid) const;
};

/// X_t = a_t(X_{t-1}) + U_t,  Y_t = b_t(X_t) + V_t.
struct AdditiveModel {
  std::string name;
  int state_dim = 1;
  int obs_dim = 1;
  PointMap transition;   // a_t
  PointMap observation;  // b_t
  PointDensity state_noise_pdf;  // p^u
  PointSampler state_noise_sampler;
  PointDensity obs_noise_pdf;  // p^v
  PointSampler obs_noise_sampler;
  PointDensity prior_pdf;
  PointSampler prior_sampler;
  bool time_homogeneous = true;

  /// Declared bounds, checked by the MA.* probes.
  double lipschitz_bound = 1.0;        // L_a
  double noise_upper_bound = 1.0;      // C_u
  std::function<double(double)> envelope;          // s_t (taken time independent)
  std::function<double(double)> envelope_inverse;  // s_t^{-1}

  /// Kernel density pu(x - a_t(x')) and likelihood pv(y - b_t(x)); the
  /// proportionality constant of g is taken to be one.
  StateSpaceModel as_state_space_model() const;
};

struct LinGaussParams {
  double a = 0.9, b = 1.0, su = 0.7, sv = 0.7, s0 = 1.0, mu0 = 0.0;
};

struct ObservationRecord {
  std::vector<Point> ys;  // ys[t-1] = y_t, t = 1..T
  std::vector<Point> xs;  // xs[t] = x_t, t = 0..T (empty when unknown)
  std::uint64_t seed = 0;

  int horizon() const { return static_cast<int>(ys.size()); }
  const Point& y(int t) const { return ys.at(static_cast<std::size_t>(t - 1)); }
  /// FNV-1a over the raw bytes of the observations.
  std::uint64_t hash() const;
};

/// Forward simulation; a pure function of (model, horizon, seed).
ObservationRecord simulate(const AdditiveModel& model, int horizon, std::uint64_t seed);

/// Observation-independent column-normalised transition matrix on a grid.
/// M(i, j) ~ k_t(c_i | c_j) vol, column j is the source cell.
struct KernelMatrix {
  GridPtr grid;
  Eigen::MatrixXd matrix;
  /// 1 - (raw column sum) before renormalisation: transition mass that left the grid.
  Eigen::VectorXd lost_mass;

  int size() const { return static_cast<int>(matrix.rows()); }
  double density(int dest, int src) const { return matrix(dest, src) / grid->cell_volume(); }
};

KernelMatrix kernel_matrix(const StateSpaceModel& model, int t, GridPtr grid);
/// Same normalisation applied to a pre-evaluated raw matrix (raw(i,j) = k(c_i|c_j) vol).
KernelMatrix normalize_kernel(GridPtr grid, Eigen::MatrixXd raw);

// ---------------------------------------------------------------------------
// Model zoo

AdditiveModel lingauss(const LinGaussParams& p, int dim = 1);
/// X_t = X_{t-1} + U_t, Y_t = |X_t| + V_t; predictive densities are bimodal.
AdditiveModel absobs(double su, double sv, double s0);
/// x_t = x/2 + 25x/(1+x^2) + 8 cos(1.2 t) + u,  y = x^2/20 + v.
AdditiveModel stochgrowth(double su = std::sqrt(10.0), double sv = 1.0, double s0 = std::sqrt(5.0));

struct ModelSpec {
  std::string id;
  std::vector<double> args;
  AdditiveModel model;
  std::optional<LinGaussParams> lingauss;
};

/// Parses `lingauss(a,b,su,sv,s0,mu0)`, `absobs(su,sv,s0)`, `stochgrowth`,
/// with trailing arguments optional. Throws ErrorCode::Config.
ModelSpec parse_model(const std::string& text);

// ---------------------------------------------------------------------------
// Assumption probes. All are grid sweeps that certify only the probed region.

struct LipschitzReport {
  double estimate = 0.0;
  double declared = 0.0;
  bool violated = false;
};
LipschitzReport check_ma1_lipschitz(const AdditiveModel& model, const StateGrid& grid, int T);

struct EnvelopeReport {
  double worst_ratio = 0.0;
  bool pass = false;
  int witness_t = 0;
  Point witness_x = Point::Zero();
  Point witness_x_prev = Point::Zero();
  std::string caveat;
};
EnvelopeReport check_ma2_envelope(const AdditiveModel& model, const StateGrid& grid, int T);
/// Radial sweep of pu(z e_0) / s(|z|) for |z| in [0, r_max].
EnvelopeReport probe_envelope_radial(const PointDensity& pu, const std::function<double(double)>& s,
                                     double r_max, int probes);

struct UpperBoundReport {
  double sup = 0.0;
  double declared = 0.0;
  bool pass = false;
};
UpperBoundReport check_ma3_upper(const AdditiveModel& model, const StateGrid& grid, int T);

struct Prop1Report {
  double lipschitz_y = 0.0;  // L1
  double lipschitz_x = 0.0;  // L2
  double m_hat = 0.0;        // inf_x sup_y g
  bool c3_checked = false;
  double c3_min_ball_mass = 0.0;
  double c3_threshold = 0.0;
  bool c3_pass = false;
};
/// `predictives` are xi_t measures used for (c3); pass an empty span to skip it.
Prop1Report check_prop1_conditions(const StateSpaceModel& model, const StateGrid& grid,
                                   const StateGrid& obs_grid, int T,
                                   std::span<const GridMeasure> predictives = {},
                                   double eps0 = 0.1, double c_dx = 0.0);

/// Density of N(mean, sd^2) in one dimension.
double normal_pdf(double x, double mean, double sd);

}  // namespace truncfilter

#endif
