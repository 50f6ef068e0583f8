#include "truncfilter/truncation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "truncfilter/csv.hpp"

namespace truncfilter {

CompactSeq CompactSeq::full(GridPtr grid, int T) {
  CompactSeq seq;
  seq.masks.assign(static_cast<std::size_t>(T + 1), CellMask::full(grid->size()));
  seq.grid = std::move(grid);
  seq.shape = "full";
  return seq;
}

CellMask ball_mask(const StateGrid& grid, const Point& center, double radius) {
  const double limit = radius + 1e-9 * grid.cell_width();
  CellMask m(grid.size());
  for (int i = 0; i < grid.size(); ++i) m.set(i, (grid.center(i) - center).norm() <= limit);
  return m;
}

CellMask union_mask(const StateGrid& grid, const std::vector<Point>& centers, double radius) {
  CellMask m(grid.size());
  for (const Point& c : centers) {
    const CellMask b = ball_mask(grid, c, radius);
    for (int i = 0; i < grid.size(); ++i) {
      if (b[i]) m.set(i);
    }
  }
  return m;
}

void write_compacts_csv(std::ostream& os, const CompactSeq& seq, const FilterTrajectory* traj) {
  csv::row(os, {"t", "shape", "center_x", "center_y", "radius", "cells", "mass_inside"});
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (int t = 0; t <= seq.horizon(); ++t) {
    const CellMask& m = seq.mask(t);
    const double mass = traj && !traj->streaming ? traj->pi(t).mass_in(m) : nan;
    const std::string cells = std::to_string(m.count());
    if (seq.balls.empty() || seq.balls[static_cast<std::size_t>(t)].centers.empty()) {
      csv::row(os, {csv::num(t), seq.shape, "nan", "nan", "nan", cells, csv::num(mass)});
      continue;
    }
    const BallSpec& b = seq.balls[static_cast<std::size_t>(t)];
    for (const Point& c : b.centers) {
      csv::row(os, {csv::num(t), seq.shape, csv::num(c[0]), csv::num(c[1]), csv::num(b.radius), cells,
                    csv::num(mass)});
    }
  }
}

GridFunction truncate_potential(const GridFunction& g, const CellMask& C) {
  if (C.size() != g.grid().size()) throw Error(ErrorCode::GridMismatch, "truncate_potential: mask size");
  return GridFunction(g.grid_ptr(), g.values().cwiseProduct(C.indicator()));
}

GridMeasure rho_measure(const KernelMatrix& K, const GridMeasure& pi_prev, const CellMask& C_prev) {
  require_same_grid(*K.grid, pi_prev.grid(), "rho_measure");
  if (C_prev.size() != pi_prev.size()) throw Error(ErrorCode::GridMismatch, "rho_measure: mask size");
  const Eigen::VectorXd outside = pi_prev.weights().cwiseProduct(C_prev.complement().indicator());
  return GridMeasure(pi_prev.grid_ptr(), K.matrix * outside);
}

KernelMatrix reshape_kernel(const KernelMatrix& K, const GridMeasure& pi_prev, const CellMask& C_prev) {
  const GridMeasure rho = rho_measure(K, pi_prev, C_prev);
  const double inside = pi_prev.mass_in(C_prev);
  KernelMatrix out;
  out.grid = K.grid;
  out.matrix = inside * K.matrix;
  out.matrix.colwise() += rho.weights();
  out.lost_mass = Eigen::VectorXd::Zero(K.size());
  return out;
}

// ---------------------------------------------------------------------------

TruncatedModel::TruncatedModel(std::shared_ptr<const GridModel> base, const FilterTrajectory& base_traj,
                               CompactSeq compacts, int reshape_until)
    : base_(std::move(base)), compacts_(std::move(compacts)), reshape_until_(reshape_until) {
  const int T = base_->horizon();
  if (compacts_.horizon() < T) throw Error(ErrorCode::InvalidArgument, "compact sequence shorter than the horizon");
  if (reshape_until_ < 0 || reshape_until_ > T) {
    throw Error(ErrorCode::InvalidArgument, "reshape_until must lie in [0, horizon]");
  }
  for (const CellMask& m : compacts_.masks) {
    if (m.size() != base_->grid()->size()) throw Error(ErrorCode::GridMismatch, "compact mask size");
    if (m.empty()) throw Error(ErrorCode::InvalidArgument, "compact masks must be nonempty");
  }
  if (base_traj.streaming && reshape_until_ >= 2) {
    throw Error(ErrorCode::InvalidArgument, "reshaped kernels need the full base trajectory");
  }
  const int n = base_->grid()->size();
  inside_.assign(static_cast<std::size_t>(T + 1), 1.0);
  rho_.assign(static_cast<std::size_t>(T + 1), Eigen::VectorXd::Zero(n));
  for (int t = 2; t <= reshape_until_; ++t) {
    const GridMeasure& prev = base_traj.pi(t - 1);
    const CellMask& C = compacts_.mask(t - 1);
    if (C.all()) continue;
    inside_[static_cast<std::size_t>(t)] = prev.mass_in(C);
    rho_[static_cast<std::size_t>(t)] = base_->propagate(t, prev.weights().cwiseProduct(C.complement().indicator()));
  }
  potentials_.reserve(static_cast<std::size_t>(T));
  for (int t = 1; t <= T; ++t) potentials_.push_back(truncate_potential(base_->potential(t), compacts_.mask(t)));
}

Eigen::VectorXd TruncatedModel::propagate(int t, const Eigen::VectorXd& w) const {
  if (!reshaped(t)) return base_->propagate(t, w);
  return inside_mass(t) * base_->propagate(t, w) + rho(t) * w.sum();
}

Eigen::MatrixXd TruncatedModel::dense_kernel(int t) const {
  Eigen::MatrixXd K = base_->dense_kernel(t);
  if (!reshaped(t)) return K;
  K *= inside_mass(t);
  K.colwise() += rho(t);
  return K;
}

const GridFunction& TruncatedModel::potential(int t) const {
  if (t < 1 || t > horizon()) throw Error(ErrorCode::InvalidArgument, "potential: t out of range");
  return potentials_[static_cast<std::size_t>(t - 1)];
}

TruncatedModel build_truncated_model(std::shared_ptr<const GridModel> base, const FilterTrajectory& base_traj,
                                     CompactSeq compacts) {
  const int T = base->horizon();
  return TruncatedModel(std::move(base), base_traj, std::move(compacts), T);
}

TruncatedModel build_truncated_model(std::shared_ptr<const GridModel> base, CompactSeq compacts) {
  const FilterTrajectory traj = run_filter(*base, base->prior());
  return build_truncated_model(std::move(base), traj, std::move(compacts));
}

FilterTrajectory run_truncated_filter(const TruncatedModel& tm, const GridMeasure& prior) {
  return run_filter(tm, prior);
}

std::vector<GridFunction> lemma_test_functions(const GridPtr& grid) {
  std::vector<GridFunction> fs;
  fs.push_back(GridFunction::constant(grid, 1.0));
  fs.push_back(GridFunction::from(grid, [](const Point& x) { return x[0] > 0 ? 1.0 : (x[0] < 0 ? -1.0 : 0.0); }));
  fs.push_back(GridFunction::from(grid, [](const Point& x) { return std::clamp(x[0], -1.0, 1.0); }));
  fs.push_back(GridFunction::from(grid, [](const Point& x) { return std::cos(x[0]); }));
  fs.push_back(GridFunction::from(grid, [](const Point& x) { return std::exp(-x[0] * x[0]); }));
  return fs;
}

namespace {

void require_comparable(const FilterTrajectory& base, const FilterTrajectory& trunc, const CompactSeq& c) {
  if (base.streaming || trunc.streaming) throw Error(ErrorCode::InvalidArgument, "identity checks need full trajectories");
  require_same_grid(*base.grid, *trunc.grid, "identity check");
  if (base.horizon() != trunc.horizon()) throw Error(ErrorCode::InvalidArgument, "trajectory horizons differ");
  if (c.horizon() < base.horizon()) throw Error(ErrorCode::InvalidArgument, "compact sequence too short");
}

}  // namespace

Lemma1Report check_lemma1(const FilterTrajectory& base, const FilterTrajectory& trunc, const CompactSeq& compacts,
                          const std::vector<GridFunction>& fs) {
  require_comparable(base, trunc, compacts);
  Lemma1Report rep;
  for (int t = 1; t <= base.horizon(); ++t) {
    const CellMask& C = compacts.mask(t);
    const Eigen::VectorXd ind = C.indicator();
    const double inside = base.pi(t).mass_in(C);
    double r1 = 0.0, r2 = 0.0;
    for (const GridFunction& f : fs) {
      const Eigen::VectorXd cf = f.values().cwiseProduct(ind);
      r1 = std::max(r1, std::abs(cf.dot(base.xi(t).weights()) - cf.dot(trunc.xi(t).weights())));
      if (inside > 0.0) {
        r2 = std::max(r2, std::abs(cf.dot(base.pi(t).weights()) - integrate(f, trunc.pi(t)) * inside));
      }
    }
    if (!(inside > 0.0)) rep.skipped.push_back(t);
    rep.r1.push_back(r1);
    rep.r2.push_back(r2);
    rep.max_r1 = std::max(rep.max_r1, r1);
    rep.max_r2 = std::max(rep.max_r2, r2);
  }
  return rep;
}

Lemma2Report check_lemma2(const FilterTrajectory& base, const FilterTrajectory& trunc, const CompactSeq& compacts,
                          double eps, const std::vector<GridFunction>& fs) {
  require_comparable(base, trunc, compacts);
  Lemma2Report rep;
  rep.hypothesis_ok = true;
  for (int t = 1; t <= base.horizon(); ++t) {
    const double out = base.pi(t).mass_in(compacts.mask(t).complement());
    rep.outside.push_back(out);
    rep.max_outside = std::max(rep.max_outside, out);
    if (!(out < eps / 2) && rep.hypothesis_ok) {
      rep.hypothesis_ok = false;
      rep.violating_t = t;
    }
    double err = 0.0;
    for (const GridFunction& f : fs) {
      const double scale = f.sup_norm();
      if (!(scale > 0.0)) continue;
      err = std::max(err, std::abs(integrate(f, base.pi(t)) - integrate(f, trunc.pi(t))) / scale);
    }
    rep.err.push_back(err);
    rep.worst_error = std::max(rep.worst_error, err);
  }
  rep.bound_checked = rep.hypothesis_ok;
  rep.bound_ok = rep.hypothesis_ok && rep.worst_error < eps;
  return rep;
}

}  // namespace truncfilter
