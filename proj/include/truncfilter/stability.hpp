#ifndef TRUNCFILTER_STABILITY_HPP
#define TRUNCFILTER_STABILITY_HPP

#include <iosfwd>
#include <optional>
#include <vector>

#include "truncfilter/truncation.hpp"

namespace truncfilter {

/// Grids above this size are refused by the exact Dobrushin computations.
inline constexpr int kExactCellLimit = 64;

/// min / max of the kernel density over (i in C_cur, j in C_prev).
/// Throws DegenerateRatio when the max is 0.
double epsilon_ratio(const Eigen::MatrixXd& K, const CellMask& C_prev, const CellMask& C_cur);
inline double epsilon_ratio(const KernelMatrix& K, const CellMask& C_prev, const CellMask& C_cur) {
  return epsilon_ratio(K.matrix, C_prev, C_cur);
}

struct StabilityReport {
  std::vector<double> eps;           // index t-1
  std::vector<double> partial_sums;  // sum_{k <= t} eps_k
  std::vector<double> beta_bound;    // exp(-partial_sums)
  std::vector<double> tv_curve;      // optional, index t-1
  /// inf of the kernel density over C_t x C_{t-1} and whether it exceeds 1/t.
  std::vector<double> inf_density;
  std::vector<bool> exceeds_inverse_t;
  std::optional<std::vector<double>> beta_exact;  // beta(kappa_{t|0}), small grids only
};

/// eps_t from the system's own kernels (reshaped ones for truncated models)
/// over C_{t-1} x C_t, for t = 1..T.
StabilityReport stability_series(const FilterSystem& sys, const CompactSeq& compacts, int T);

/// Rows (t, eps_t, partial_sum, beta_bound, tv_alpha_beta).
void write_stability_csv(std::ostream& os, const StabilityReport& rep);

struct CompositeKernel {
  Eigen::MatrixXd raw;       // W = G_t K_t ... G_{k+1} K_{k+1}
  Eigen::VectorXd g;         // g_{t|k}: column sums of W
  Eigen::MatrixXd kappa;     // columns of W normalised (zero columns left at 0)
  std::vector<int> zero_columns;
};

/// Dense chain products for the composite kernel kappa_{t|k} and the
/// predictive likelihood g_{t|k}; truncation enters through the system's potentials.
CompositeKernel composite_kernel(const FilterSystem& sys, int k, int t);
GridFunction predictive_likelihood(const FilterSystem& sys, int k, int t);

struct DobrushinResult {
  double beta = 0.0;
  double alpha = 1.0;
  int j = -1, j2 = -1;  // maximising source pair
};

/// beta = max over source pairs in S of half the L1 distance between columns.
/// Columns listed in `excluded` are skipped.
DobrushinResult dobrushin_beta(const Eigen::MatrixXd& K, const CellMask& S, const std::vector<int>& excluded = {});

/// sigma_{t|k+1}(i|j) proportional to g_{t|k+1}(i) g_{k+1}(i) K_{k+1}(i, j).
CompositeKernel sigma_kernel(const FilterSystem& sys, int k, int t);

struct ChainStep {
  int t = 0;
  double beta_kappa = 0.0;         // beta(kappa_{t|0}) over the whole grid
  double sigma_product = 0.0;      // prod_k beta(sigma_{t|k+1}) on C_k
  double eps_product = 0.0;        // prod_k (1 - eps_{k+1})
  double min_alpha_gap = 0.0;      // min_k alpha(sigma_{t|k+1}) - eps_{k+1}
  double tv_phi = 0.0;             // D_tv(Phi_{t|0}(a), Phi_{t|0}(b))
  double tv_upsilon = 0.0;         // D_tv(Upsilon_{t|0}(a), Upsilon_{t|0}(b))
  int zero_columns = 0;
};

struct ChainReport {
  std::vector<ChainStep> steps;
  double worst_chain_slack = 0.0;  // min over t of the contraction-chain slacks
  double worst_tv_slack = 0.0;     // min over t of beta tv_upsilon - tv_phi
  bool pass(double tol = 1e-9) const { return worst_chain_slack >= -tol && worst_tv_slack >= -tol; }
};

/// Dense verification of the contraction chain for t = 1..T on a small grid.
/// C_0 is taken as the whole grid. Throws ResourceGuard above kExactCellLimit cells.
ChainReport verify_appendix_a_chain(const FilterSystem& sys, const CompactSeq& compacts, int T,
                                        const GridMeasure& alpha, const GridMeasure& beta);

/// D_tv between the filters started from two priors, index t-1.
std::vector<double> empirical_forgetting(const FilterSystem& sys, const GridMeasure& alpha, const GridMeasure& beta);

/// max over t in `times` of ||mean_t - a_t(mean_{t-1})||.
double max_center_drift_at(const AdditiveModel& model, const FilterTrajectory& traj, const std::vector<int>& times);

}  // namespace truncfilter

#endif
