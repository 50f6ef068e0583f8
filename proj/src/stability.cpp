#include "truncfilter/stability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "truncfilter/csv.hpp"
#include "truncfilter/metrics.hpp"
#include "truncfilter/parallel.hpp"

namespace truncfilter {

namespace {

struct MinMax {
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
};

MinMax block_range(const Eigen::MatrixXd& K, const CellMask& C_prev, const CellMask& C_cur) {
  MinMax r;
  const std::vector<int> rows = C_cur.members();
  for (int j : C_prev.members()) {
    for (int i : rows) {
      const double v = K(i, j);
      r.lo = std::min(r.lo, v);
      r.hi = std::max(r.hi, v);
    }
  }
  return r;
}

}  // namespace

double epsilon_ratio(const Eigen::MatrixXd& K, const CellMask& C_prev, const CellMask& C_cur) {
  if (C_prev.size() != K.cols() || C_cur.size() != K.rows()) throw Error(ErrorCode::GridMismatch, "epsilon_ratio");
  if (C_prev.empty() || C_cur.empty()) throw Error(ErrorCode::InvalidArgument, "epsilon_ratio: empty compact");
  const MinMax r = block_range(K, C_prev, C_cur);
  if (!(r.hi > 0.0)) throw Error(ErrorCode::DegenerateRatio, "kernel density vanishes on C_prev x C_cur");
  return r.lo / r.hi;
}

StabilityReport stability_series(const FilterSystem& sys, const CompactSeq& compacts, int T) {
  if (compacts.horizon() < T || sys.horizon() < T) throw Error(ErrorCode::InvalidArgument, "stability_series: T");
  StabilityReport rep;
  const double vol = sys.grid()->cell_volume();
  double sum = 0.0;
  for (int t = 1; t <= T; ++t) {
    const Eigen::MatrixXd K = sys.dense_kernel(t);
    const CellMask& prev = compacts.mask(t - 1);
    const CellMask& cur = compacts.mask(t);
    const MinMax r = block_range(K, prev, cur);
    const double eps = r.hi > 0.0 ? r.lo / r.hi : 0.0;
    sum += eps;
    rep.eps.push_back(eps);
    rep.partial_sums.push_back(sum);
    rep.beta_bound.push_back(std::exp(-sum));
    rep.inf_density.push_back(r.lo / vol);
    rep.exceeds_inverse_t.push_back(r.lo / vol > 1.0 / t);
  }
  return rep;
}

void write_stability_csv(std::ostream& os, const StabilityReport& rep) {
  csv::row(os, {"t", "eps_t", "partial_sum", "beta_bound", "tv_alpha_beta"});
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t i = 0; i < rep.eps.size(); ++i) {
    const double tv = i < rep.tv_curve.size() ? rep.tv_curve[i] : nan;
    csv::row(os, {csv::num(static_cast<int>(i + 1)), csv::num(rep.eps[i]), csv::num(rep.partial_sums[i]),
                  csv::num(rep.beta_bound[i]), csv::num(tv)});
  }
}

namespace {

CompositeKernel finish(Eigen::MatrixXd W) {
  CompositeKernel c;
  c.g = W.colwise().sum().transpose();
  c.kappa = W;
  for (int j = 0; j < W.cols(); ++j) {
    if (c.g[j] > 0.0) {
      c.kappa.col(j) /= c.g[j];
    } else {
      c.kappa.col(j).setZero();
      c.zero_columns.push_back(j);
    }
  }
  c.raw = std::move(W);
  return c;
}

void require_steps(const FilterSystem& sys, int k, int t) {
  if (k < 0 || !(k < t) || t > sys.horizon()) throw Error(ErrorCode::InvalidArgument, "need 0 <= k < t <= horizon");
}

}  // namespace

CompositeKernel composite_kernel(const FilterSystem& sys, int k, int t) {
  require_steps(sys, k, t);
  Eigen::MatrixXd W = sys.potential(k + 1).values().asDiagonal() * sys.dense_kernel(k + 1);
  for (int m = k + 2; m <= t; ++m) W = sys.potential(m).values().asDiagonal() * (sys.dense_kernel(m) * W);
  return finish(std::move(W));
}

GridFunction predictive_likelihood(const FilterSystem& sys, int k, int t) {
  require_steps(sys, k, t);
  // Row vector chain 1^T G_t K_t ... G_{k+1} K_{k+1}.
  Eigen::RowVectorXd v = Eigen::RowVectorXd::Ones(sys.grid()->size());
  for (int m = t; m > k; --m) v = v.cwiseProduct(sys.potential(m).values().transpose()) * sys.dense_kernel(m);
  return GridFunction(sys.grid(), v.transpose());
}

CompositeKernel sigma_kernel(const FilterSystem& sys, int k, int t) {
  require_steps(sys, k, t);
  Eigen::VectorXd h = sys.potential(k + 1).values();
  if (k + 1 < t) h = h.cwiseProduct(predictive_likelihood(sys, k + 1, t).values());
  return finish(h.asDiagonal() * sys.dense_kernel(k + 1));
}

DobrushinResult dobrushin_beta(const Eigen::MatrixXd& K, const CellMask& S, const std::vector<int>& excluded) {
  if (S.size() != K.cols()) throw Error(ErrorCode::GridMismatch, "dobrushin_beta: mask size");
  std::vector<int> cols;
  for (int j : S.members()) {
    if (std::find(excluded.begin(), excluded.end(), j) == excluded.end()) cols.push_back(j);
  }
  std::vector<DobrushinResult> best(cols.size());
  parallel_for(cols.size(), [&](std::size_t a) {
    DobrushinResult& r = best[a];
    for (std::size_t b = a + 1; b < cols.size(); ++b) {
      const double d = 0.5 * (K.col(cols[a]) - K.col(cols[b])).cwiseAbs().sum();
      if (d > r.beta) {
        r.beta = d;
        r.j = cols[a];
        r.j2 = cols[b];
      }
    }
  });
  DobrushinResult out;
  for (const DobrushinResult& r : best) {
    if (r.beta > out.beta) out = r;
  }
  out.beta = std::min(out.beta, 1.0);
  out.alpha = 1.0 - out.beta;
  return out;
}

ChainReport verify_appendix_a_chain(const FilterSystem& sys, const CompactSeq& compacts, int T,
                                        const GridMeasure& alpha, const GridMeasure& beta) {
  const int n = sys.grid()->size();
  if (n > kExactCellLimit) {
    throw Error(ErrorCode::ResourceGuard, "exact Dobrushin chain limited to " + std::to_string(kExactCellLimit) +
                                              " cells, grid has " + std::to_string(n));
  }
  if (T > sys.horizon() || compacts.horizon() < T) throw Error(ErrorCode::InvalidArgument, "verify: T");

  ChainReport rep;
  rep.worst_chain_slack = std::numeric_limits<double>::infinity();
  rep.worst_tv_slack = std::numeric_limits<double>::infinity();
  const CellMask whole = CellMask::full(n);
  for (int t = 1; t <= T; ++t) {
    ChainStep s;
    s.t = t;
    const CompositeKernel kappa = composite_kernel(sys, 0, t);
    s.zero_columns = static_cast<int>(kappa.zero_columns.size());
    s.beta_kappa = dobrushin_beta(kappa.kappa, whole, kappa.zero_columns).beta;

    // Backward sweep: v holds g_{t|m} while visiting step m.
    s.sigma_product = 1.0;
    s.eps_product = 1.0;
    s.min_alpha_gap = std::numeric_limits<double>::infinity();
    Eigen::VectorXd v = Eigen::VectorXd::Ones(n);
    for (int m = t; m >= 1; --m) {
      const Eigen::MatrixXd K = sys.dense_kernel(m);
      const Eigen::VectorXd h = v.cwiseProduct(sys.potential(m).values());
      const CompositeKernel sigma = finish(h.asDiagonal() * K);
      const CellMask& source = m == 1 ? whole : compacts.mask(m - 1);
      const DobrushinResult d = dobrushin_beta(sigma.kappa, source, sigma.zero_columns);
      const double eps = epsilon_ratio(K, source, compacts.mask(m));
      s.sigma_product *= d.beta;
      s.eps_product *= 1.0 - eps;
      s.min_alpha_gap = std::min(s.min_alpha_gap, d.alpha - eps);
      s.zero_columns += static_cast<int>(sigma.zero_columns.size());
      v = sigma.g;
    }

    const GridMeasure pa = compose_pu(sys, 0, t, alpha);
    const GridMeasure pb = compose_pu(sys, 0, t, beta);
    s.tv_phi = tv_distance(pa, pb);
    const Eigen::VectorXd ua = kappa.g.cwiseProduct(alpha.weights());
    const Eigen::VectorXd ub = kappa.g.cwiseProduct(beta.weights());
    s.tv_upsilon = 0.5 * (ua / ua.sum() - ub / ub.sum()).cwiseAbs().sum();

    const double chain = std::min({s.sigma_product - s.beta_kappa, s.eps_product - s.sigma_product, s.min_alpha_gap});
    rep.worst_chain_slack = std::min(rep.worst_chain_slack, chain);
    rep.worst_tv_slack = std::min(rep.worst_tv_slack, s.beta_kappa * s.tv_upsilon - s.tv_phi);
    rep.steps.push_back(s);
  }
  return rep;
}

std::vector<double> empirical_forgetting(const FilterSystem& sys, const GridMeasure& alpha, const GridMeasure& beta) {
  require_same_grid(alpha.grid(), beta.grid(), "empirical_forgetting");
  const FilterTrajectory a = run_filter(sys, alpha);
  const FilterTrajectory b = run_filter(sys, beta);
  std::vector<double> tv;
  for (int t = 1; t <= sys.horizon(); ++t) tv.push_back(tv_distance(a.pi(t), b.pi(t)));
  return tv;
}

double max_center_drift_at(const AdditiveModel& model, const FilterTrajectory& traj, const std::vector<int>& times) {
  double worst = 0.0;
  for (int t : times) {
    if (t < 1 || t > traj.horizon()) continue;
    const auto i = static_cast<std::size_t>(t);
    worst = std::max(worst, (traj.means[i] - model.transition(t, traj.means[i - 1])).norm());
  }
  return worst;
}

}  // namespace truncfilter
