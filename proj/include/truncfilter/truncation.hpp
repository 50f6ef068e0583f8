#ifndef TRUNCFILTER_TRUNCATION_HPP
#define TRUNCFILTER_TRUNCATION_HPP

#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "truncfilter/filter.hpp"

namespace truncfilter {

/// Ball parameters of one mask: union of B(center_i, radius).
struct BallSpec {
  std::vector<Point> centers;
  double radius = 0.0;
};

/// Compact subsets C_0..C_T as grid masks, optionally with their ball description.
struct CompactSeq {
  GridPtr grid;
  std::vector<CellMask> masks;  // masks[t], t = 0..T
  std::string shape = "mask";   // "full", "ball", "union", "mask"
  std::vector<BallSpec> balls;  // empty, or one per t

  int horizon() const { return static_cast<int>(masks.size()) - 1; }
  const CellMask& mask(int t) const { return masks.at(static_cast<std::size_t>(t)); }

  static CompactSeq full(GridPtr grid, int T);
};

/// Cells whose centre lies in the closed ball (with 1e-9 cell-width slack).
CellMask ball_mask(const StateGrid& grid, const Point& center, double radius);
CellMask union_mask(const StateGrid& grid, const std::vector<Point>& centers, double radius);

/// Rows (t, shape, center_x, center_y, radius, mass_inside); one row per ball.
/// mass_inside is pi_t(C_t) when `traj` is given, nan otherwise.
void write_compacts_csv(std::ostream& os, const CompactSeq& seq, const FilterTrajectory* traj = nullptr);

/// g^c = 1_C g.
GridFunction truncate_potential(const GridFunction& g, const CellMask& C);

/// rho = K (1_{not C_prev} pi_prev).
GridMeasure rho_measure(const KernelMatrix& K, const GridMeasure& pi_prev, const CellMask& C_prev);

/// pi_prev(C_prev) K + rho 1^T as a dense kernel.
KernelMatrix reshape_kernel(const KernelMatrix& K, const GridMeasure& pi_prev, const CellMask& C_prev);

/// S^c = (pi_0, reshaped kappa_t, 1_{C_t} g_t), bound to the base model's
/// observation record. The reshaped kernel is held as the scalar
/// pi_{t-1}(C_{t-1}), the base kernel and the vector rho_t. Kernels for
/// t > reshape_until are the base kernels.
class TruncatedModel final : public FilterSystem {
 public:
  TruncatedModel(std::shared_ptr<const GridModel> base, const FilterTrajectory& base_traj, CompactSeq compacts,
                 int reshape_until);

  const GridPtr& grid() const override { return base_->grid(); }
  int horizon() const override { return base_->horizon(); }
  Eigen::VectorXd propagate(int t, const Eigen::VectorXd& w) const override;
  Eigen::MatrixXd dense_kernel(int t) const override;
  const GridFunction& potential(int t) const override;

  bool reshaped(int t) const { return t >= 2 && t <= reshape_until_; }
  /// pi_{t-1}(C_{t-1}) for reshaped steps, 1 otherwise.
  double inside_mass(int t) const { return inside_.at(static_cast<std::size_t>(t)); }
  const Eigen::VectorXd& rho(int t) const { return rho_.at(static_cast<std::size_t>(t)); }
  const CompactSeq& compacts() const { return compacts_; }
  const GridModel& base() const { return *base_; }
  const std::shared_ptr<const GridModel>& base_ptr() const { return base_; }
  int reshape_until() const { return reshape_until_; }

 private:
  std::shared_ptr<const GridModel> base_;
  CompactSeq compacts_;
  int reshape_until_;
  std::vector<double> inside_;        // index t
  std::vector<Eigen::VectorXd> rho_;  // index t
  std::vector<GridFunction> potentials_;
};

/// Runs the base filter from its own prior and builds S^c with reshaping at every t.
TruncatedModel build_truncated_model(std::shared_ptr<const GridModel> base, CompactSeq compacts);
TruncatedModel build_truncated_model(std::shared_ptr<const GridModel> base, const FilterTrajectory& base_traj,
                                     CompactSeq compacts);

FilterTrajectory run_truncated_filter(const TruncatedModel& tm, const GridMeasure& prior);

/// 1, sign(x), clip(x, -1, 1), cos(x), exp(-x^2) in the first coordinate.
std::vector<GridFunction> lemma_test_functions(const GridPtr& grid);

struct Lemma1Report {
  std::vector<double> r1;  // index t-1: max over f
  std::vector<double> r2;
  std::vector<int> skipped;  // t with pi_t(C_t) = 0
  double max_r1 = 0.0;
  double max_r2 = 0.0;
  bool pass(double tol = 1e-10) const { return max_r1 <= tol && max_r2 <= tol; }
};

/// r1 = |(1_C f, xi_t) - (1_C f, xi^c_t)|, r2 = |(1_C f, pi_t) - (f, pi^c_t) pi_t(C_t)|.
Lemma1Report check_lemma1(const FilterTrajectory& base, const FilterTrajectory& trunc, const CompactSeq& compacts,
                          const std::vector<GridFunction>& fs);

struct Lemma2Report {
  bool hypothesis_ok = false;
  double max_outside = 0.0;  // max_t pi_t(not C_t)
  int violating_t = 0;       // first t with pi_t(not C_t) >= eps/2
  std::vector<double> outside;  // index t-1
  std::vector<double> err;      // index t-1: max_f |(f,pi_t) - (f,pi^c_t)| / ||f||
  double worst_error = 0.0;     // max_t err
  bool bound_checked = false;
  bool bound_ok = false;
};

Lemma2Report check_lemma2(const FilterTrajectory& base, const FilterTrajectory& trunc, const CompactSeq& compacts,
                          double eps, const std::vector<GridFunction>& fs);

}  // namespace truncfilter

#endif
