#ifndef TRUNCFILTER_NORMCONST_HPP
#define TRUNCFILTER_NORMCONST_HPP

#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <numbers>
#include <vector>

#include "truncfilter/filter.hpp"

namespace truncfilter {

struct KalmanParams {
  double a = 0.9, b = 1.0;
  double su2 = 0.49, sv2 = 0.49;  // variances
  double s02 = 1.0, mu0 = 0.0;

  static KalmanParams from(const LinGaussParams& p) {
    return {p.a, p.b, p.su * p.su, p.sv * p.sv, p.s0 * p.s0, p.mu0};
  }
};

struct KalmanState {
  double pred_mean = 0.0;      // x_{t|t-1}
  double pred_var = 0.0;       // sigma^2_{t|t-1}
  double pred_obs_var = 0.0;   // b^2 sigma^2_{t|t-1} + sigma_v^2
  double filt_mean = 0.0;      // x_{t|t}
  double filt_var = 0.0;       // sigma^2_{t|t}
  double obs_density = 0.0;    // N(y_t; b x_{t|t-1}, pred_obs_var)
};

/// states[t], t = 0..T; states[0] carries the prior in filt_mean / filt_var.
/// With no observations (`ys` empty) only the variance columns are meaningful
/// and `T` steps are produced.
std::vector<KalmanState> kalman_recursion(const KalmanParams& p, const std::vector<double>& ys);
std::vector<KalmanState> kalman_variances(const KalmanParams& p, int T);

/// Scalar observations y_1..y_T of a record.
std::vector<double> scalar_observations(const ObservationRecord& obs);

/// Observation grid of `n` cells spanning +-half_width around `center`.
GridPtr observation_grid(double center, double half_width, int n);

/// p_t(y_j) = sum_i g(y_j | x_i) xi[i].
GridFunction predictive_obs_pdf(const StateSpaceModel& model, int t, const GridMeasure& xi, GridPtr y_grid);

/// sum_j p(y_j)^2 dy.
double cond_second_moment(const GridFunction& p);

/// 1 / (2 sqrt(pi s2)), the expected normaliser of a Gaussian predictive.
inline double expected_normalizer(double pred_obs_var) {
  return 1.0 / (2.0 * std::sqrt(std::numbers::pi * pred_obs_var));
}

/// min_t expected_normalizer(pred_obs_var_t), t = 1..T.
double gamma_floor(const std::vector<KalmanState>& states);

struct NormalizerMonteCarlo {
  std::vector<double> mean;       // index t-1
  std::vector<double> std_error;  // index t-1
  std::vector<std::vector<double>> samples;  // [replicate][t-1]
  double gamma = 0.0;             // min_t mean
};

/// Z_t over `replicates` independent simulated records, each filtered on `grid`.
/// Replicate r uses seed stream r of `seed`.
NormalizerMonteCarlo normalizer_monte_carlo(const AdditiveModel& model, GridPtr grid, int T, int replicates,
                                            std::uint64_t seed);

struct GoodPairReport {
  double gamma = 0.0;
  std::vector<int> pairs;
  double fraction = 0.0;
  double eps2 = 0.0;  // gamma^2 / (4 ||g||^2)
  double g_sup = 0.0;
};

/// t is a good pair when Z_t > gamma/2 and Z_{t+1} > gamma/2 (t = 1..T-1).
GoodPairReport detect_good_pairs(const std::vector<double>& zs, double gamma, double g_sup = 0.0);

struct Lemma3Report {
  std::vector<double> frequency;  // index t-1
  std::vector<double> std_error;
  double bound = 0.0;             // gamma / (2 ||g||)
  bool degenerate = false;        // bound >= 1/2
  bool pass = false;
  int worst_t = 0;
};

/// Empirical P(Z_t > gamma/2); pass iff every frequency exceeds bound - 3 SE.
Lemma3Report check_lemma3_frequency(const NormalizerMonteCarlo& mc, double gamma, double g_sup);

/// Rows (t, Z_t, E_Z_closed, gamma, is_good_pair).
void write_normconst_csv(std::ostream& os, const std::vector<double>& zs, const std::vector<double>& closed,
                         const GoodPairReport& pairs);

}  // namespace truncfilter

#endif
