#ifndef TRUNCFILTER_COMPACTS_HPP
#define TRUNCFILTER_COMPACTS_HPP

#include <functional>
#include <vector>

#include "truncfilter/truncation.hpp"

namespace truncfilter {

/// Balls B(l_t, M r_t), t = 0..T, with the centre condition
/// ||l_t - a_t(l_{t-1})|| < M L r_t checked for t >= 1 (CenterDriftError).
/// `r` must be strictly increasing.
CompactSeq ball_sequence(const AdditiveModel& model, const std::vector<Point>& centers, double M,
                         const std::vector<double>& r, double L, GridPtr grid);

/// Largest ||l_t - a_t(l_{t-1})|| / r_t over t = 1..T.
double max_center_drift(const AdditiveModel& model, const std::vector<Point>& centers, const std::vector<double>& r);

struct GrowthTrace {
  std::vector<double> ratio;  // index t-1: s^{-1}(1/t) / r_t
  bool diverging = false;
};

/// Finite trace of s^{-1}(1/t) / r_t, t = 1..T. `diverging` when the trace is
/// nondecreasing over the last half of the horizon and ends strictly higher.
GrowthTrace check_growth_condition(const std::function<double(double)>& s_inverse,
                                   const std::function<double(int)>& r, int T);

struct CoverShape {
  enum Kind { Ball, Union } kind = Ball;
  int n = 1;  // number of balls for Union
};

/// Smallest radius k * cell_width (k = 0, 1, ...) such that the union of balls
/// at `centers` holds mass > 1 - eps/2 under mu. Returns k; throws
/// CannotCover if no radius works.
int minimal_cover_steps(const GridMeasure& mu, const std::vector<Point>& centers, double eps);

/// Local maxima of the weights (>= every neighbour, > 0), heaviest first, at most n.
std::vector<Point> density_modes(const GridMeasure& mu, int n);

/// For t >= 1 the smallest mask of the requested shape with pi_t(C_t) > 1 - eps/2;
/// ball centres are the filter mean, union centres the heaviest modes. C_0 is
/// the whole grid.
CompactSeq adaptive_compacts(const FilterTrajectory& traj, double eps, CoverShape shape = {});

/// Reshaped kernels for t <= T_switch, base kernels afterwards; truncated potentials everywhere.
TruncatedModel finite_horizon_model(std::shared_ptr<const GridModel> base, const FilterTrajectory& base_traj,
                                    CompactSeq compacts, int T_switch);

/// Radius M' r_t at t in {t_n, t_n + 1}, adaptive radius R_t (mass > 1 - eps/2)
/// elsewhere; every centre is the filter mean.
CompactSeq good_pair_compacts(const FilterTrajectory& traj, const std::vector<int>& good_pairs, double M_prime,
                              const std::function<double(int)>& r, double eps);

/// Smallest M with min_{t <= T} pi_t(B(l_t, M r_t)) > 1 - delta, where M r_t
/// is a whole number of cell widths at the worst t.
double minimal_ball_multiplier(const FilterTrajectory& traj, const std::vector<Point>& centers,
                               const std::vector<double>& r, int T, double delta);

}  // namespace truncfilter

#endif
