#include "truncfilter/compacts.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace truncfilter {

double max_center_drift(const AdditiveModel& model, const std::vector<Point>& centers, const std::vector<double>& r) {
  double worst = 0.0;
  for (std::size_t t = 1; t < centers.size(); ++t) {
    const double d = (centers[t] - model.transition(static_cast<int>(t), centers[t - 1])).norm();
    worst = std::max(worst, d / r.at(t));
  }
  return worst;
}

CompactSeq ball_sequence(const AdditiveModel& model, const std::vector<Point>& centers, double M,
                         const std::vector<double>& r, double L, GridPtr grid) {
  if (centers.empty() || centers.size() != r.size()) {
    throw Error(ErrorCode::InvalidArgument, "ball_sequence: need one centre and one radius per t");
  }
  for (std::size_t t = 1; t < r.size(); ++t) {
    if (!(r[t] > r[t - 1])) throw Error(ErrorCode::InvalidArgument, "ball_sequence: radii must strictly increase");
  }
  CompactSeq seq;
  seq.shape = "ball";
  for (std::size_t t = 0; t < centers.size(); ++t) {
    if (t >= 1) {
      const double drift = (centers[t] - model.transition(static_cast<int>(t), centers[t - 1])).norm();
      const double allowed = M * L * r[t];
      if (!(drift < allowed)) throw CenterDriftError(static_cast<int>(t), drift, allowed);
    }
    CellMask m = ball_mask(*grid, centers[t], M * r[t]);
    if (m.empty()) {
      throw Error(ErrorCode::CannotCover, "ball at t=" + std::to_string(t) + " contains no cell centre");
    }
    seq.masks.push_back(std::move(m));
    seq.balls.push_back({{centers[t]}, M * r[t]});
  }
  seq.grid = std::move(grid);
  return seq;
}

GrowthTrace check_growth_condition(const std::function<double(double)>& s_inverse,
                                   const std::function<double(int)>& r, int T) {
  GrowthTrace g;
  for (int t = 1; t <= T; ++t) g.ratio.push_back(s_inverse(1.0 / t) / r(t));
  if (T >= 4) {
    const std::size_t half = static_cast<std::size_t>(T / 2);
    bool nondecreasing = true;
    for (std::size_t i = half; i < g.ratio.size(); ++i) {
      if (g.ratio[i] < g.ratio[i - 1] * (1.0 - 1e-12)) nondecreasing = false;
    }
    g.diverging = nondecreasing && g.ratio.back() > g.ratio[half - 1] * (1.0 + 1e-9);
  }
  return g;
}

int minimal_cover_steps(const GridMeasure& mu, const std::vector<Point>& centers, double eps) {
  if (centers.empty()) throw Error(ErrorCode::InvalidArgument, "cover needs at least one centre");
  const StateGrid& grid = mu.grid();
  const double w = grid.cell_width();
  const double threshold = 1.0 - eps / 2;

  std::vector<int> steps(static_cast<std::size_t>(grid.size()));
  int kmax = 0;
  for (int i = 0; i < grid.size(); ++i) {
    double d = std::numeric_limits<double>::infinity();
    for (const Point& c : centers) d = std::min(d, (grid.center(i) - c).norm());
    const int k = std::max(0, static_cast<int>(std::ceil(d / w - 1e-9)));
    steps[static_cast<std::size_t>(i)] = k;
    kmax = std::max(kmax, k);
  }
  std::vector<double> mass(static_cast<std::size_t>(kmax) + 2, 0.0);
  std::vector<int> count(static_cast<std::size_t>(kmax) + 2, 0);
  for (int i = 0; i < grid.size(); ++i) {
    mass[static_cast<std::size_t>(steps[static_cast<std::size_t>(i)])] += mu[i];
    count[static_cast<std::size_t>(steps[static_cast<std::size_t>(i)])] += 1;
  }
  double cum = 0.0;
  int cells = 0;
  int k = -1;
  for (int j = 0; j <= kmax; ++j) {
    cum += mass[static_cast<std::size_t>(j)];
    cells += count[static_cast<std::size_t>(j)];
    if (cells > 0 && cum > threshold) {
      k = j;
      break;
    }
  }
  // The bucket sums and the mask sums can round differently; settle on the mask.
  auto ok = [&](int s) {
    const CellMask m = union_mask(grid, centers, s * w);
    return !m.empty() && mu.mass_in(m) > threshold;
  };
  if (k < 0) k = kmax;
  while (k <= kmax + 1 && !ok(k)) ++k;
  if (k > kmax + 1) throw Error(ErrorCode::CannotCover, "no radius reaches the requested mass");
  while (k > 0 && ok(k - 1)) --k;
  return k;
}

std::vector<Point> density_modes(const GridMeasure& mu, int n) {
  const StateGrid& grid = mu.grid();
  std::vector<int> modes;
  for (int i = 0; i < grid.size(); ++i) {
    if (!(mu[i] > 0.0)) continue;
    bool peak = true;
    for (int j : grid.neighbours(i)) {
      // plateaus keep only their lowest-index cell
      if (mu[j] > mu[i] || (mu[j] == mu[i] && j < i)) peak = false;
    }
    if (peak) modes.push_back(i);
  }
  std::stable_sort(modes.begin(), modes.end(), [&](int a, int b) { return mu[a] > mu[b]; });
  if (static_cast<int>(modes.size()) > n) modes.resize(static_cast<std::size_t>(n));
  std::vector<Point> out;
  for (int i : modes) out.push_back(grid.center(i));
  return out;
}

namespace {

BallSpec adaptive_ball(const GridMeasure& pi, double eps, const CoverShape& shape) {
  BallSpec b;
  if (shape.kind == CoverShape::Union) {
    b.centers = density_modes(pi, shape.n);
  } else {
    b.centers = {pi.mean()};
  }
  b.radius = minimal_cover_steps(pi, b.centers, eps) * pi.grid().cell_width();
  return b;
}

}  // namespace

CompactSeq adaptive_compacts(const FilterTrajectory& traj, double eps, CoverShape shape) {
  if (traj.streaming) throw Error(ErrorCode::InvalidArgument, "adaptive_compacts needs a full trajectory");
  CompactSeq seq;
  seq.grid = traj.grid;
  seq.shape = shape.kind == CoverShape::Union ? "union" : "ball";
  seq.masks.push_back(CellMask::full(traj.grid->size()));
  seq.balls.emplace_back();
  for (int t = 1; t <= traj.horizon(); ++t) {
    BallSpec b = adaptive_ball(traj.pi(t), eps, shape);
    seq.masks.push_back(union_mask(*traj.grid, b.centers, b.radius));
    seq.balls.push_back(std::move(b));
  }
  return seq;
}

TruncatedModel finite_horizon_model(std::shared_ptr<const GridModel> base, const FilterTrajectory& base_traj,
                                    CompactSeq compacts, int T_switch) {
  return TruncatedModel(std::move(base), base_traj, std::move(compacts), T_switch);
}

CompactSeq good_pair_compacts(const FilterTrajectory& traj, const std::vector<int>& good_pairs, double M_prime,
                              const std::function<double(int)>& r, double eps) {
  if (traj.streaming) throw Error(ErrorCode::InvalidArgument, "good_pair_compacts needs a full trajectory");
  std::set<int> fixed;
  for (int t : good_pairs) {
    fixed.insert(t);
    fixed.insert(t + 1);
  }
  CompactSeq seq;
  seq.grid = traj.grid;
  seq.shape = "ball";
  seq.masks.push_back(CellMask::full(traj.grid->size()));
  seq.balls.emplace_back();
  for (int t = 1; t <= traj.horizon(); ++t) {
    BallSpec b;
    if (fixed.contains(t)) {
      b.centers = {traj.pi(t).mean()};
      b.radius = M_prime * r(t);
    } else {
      b = adaptive_ball(traj.pi(t), eps, {});
    }
    CellMask m = ball_mask(*traj.grid, b.centers.front(), b.radius);
    if (m.empty()) throw Error(ErrorCode::CannotCover, "ball at t=" + std::to_string(t) + " contains no cell centre");
    seq.masks.push_back(std::move(m));
    seq.balls.push_back(std::move(b));
  }
  return seq;
}

double minimal_ball_multiplier(const FilterTrajectory& traj, const std::vector<Point>& centers,
                               const std::vector<double>& r, int T, double delta) {
  double M = 0.0;
  const double w = traj.grid->cell_width();
  for (int t = 0; t <= T; ++t) {
    const auto i = static_cast<std::size_t>(t);
    const int k = minimal_cover_steps(traj.pi(t), {centers.at(i)}, 2.0 * delta);
    M = std::max(M, k * w / r.at(i));
  }
  return M;
}

}  // namespace truncfilter
