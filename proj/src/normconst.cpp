#include "truncfilter/normconst.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <set>

#include "truncfilter/csv.hpp"
#include "truncfilter/parallel.hpp"

namespace truncfilter {

namespace {

// Neumaier-compensated running sum.
struct CompensatedSum {
  double sum = 0.0, carry = 0.0;
  void add(double v) {
    const double t = sum + v;
    carry += std::abs(sum) >= std::abs(v) ? (sum - t) + v : (v - t) + sum;
    sum = t;
  }
  double value() const { return sum + carry; }
};

}  // namespace

std::vector<KalmanState> kalman_recursion(const KalmanParams& p, const std::vector<double>& ys) {
  if (!(p.su2 > 0.0) || !(p.sv2 > 0.0) || !(p.s02 > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "kalman_recursion: variances must be positive");
  }
  std::vector<KalmanState> out;
  out.reserve(ys.size() + 1);
  KalmanState s0;
  s0.filt_mean = p.mu0;
  s0.filt_var = p.s02;
  out.push_back(s0);
  for (double y : ys) {
    const KalmanState& prev = out.back();
    KalmanState s;
    s.pred_mean = p.a * prev.filt_mean;
    s.pred_var = p.a * p.a * prev.filt_var + p.su2;
    s.pred_obs_var = p.b * p.b * s.pred_var + p.sv2;
    const double gain = s.pred_var * p.b / s.pred_obs_var;
    const double innov = y - p.b * s.pred_mean;
    s.filt_mean = s.pred_mean + gain * innov;
    s.filt_var = s.pred_var * p.sv2 / s.pred_obs_var;
    s.obs_density = normal_pdf(y, p.b * s.pred_mean, std::sqrt(s.pred_obs_var));
    out.push_back(s);
  }
  return out;
}

std::vector<KalmanState> kalman_variances(const KalmanParams& p, int T) {
  return kalman_recursion(p, std::vector<double>(static_cast<std::size_t>(std::max(T, 0)), 0.0));
}

std::vector<double> scalar_observations(const ObservationRecord& obs) {
  std::vector<double> ys;
  for (const Point& y : obs.ys) ys.push_back(y[0]);
  return ys;
}

GridPtr observation_grid(double center, double half_width, int n) {
  return make_grid_1d(center - half_width, center + half_width, n);
}

GridFunction predictive_obs_pdf(const StateSpaceModel& model, int t, const GridMeasure& xi, GridPtr y_grid) {
  const StateGrid& xg = xi.grid();
  Eigen::VectorXd p(y_grid->size());
  for (int j = 0; j < y_grid->size(); ++j) {
    const Point& y = y_grid->center(j);
    double s = 0.0;
    for (int i = 0; i < xg.size(); ++i) {
      if (xi[i] > 0.0) s += model.likelihood(t, y, xg.center(i)) * xi[i];
    }
    p[j] = s;
  }
  return GridFunction(std::move(y_grid), std::move(p));
}

double cond_second_moment(const GridFunction& p) { return p.values().squaredNorm() * p.grid().cell_volume(); }

double gamma_floor(const std::vector<KalmanState>& states) {
  double g = std::numeric_limits<double>::infinity();
  for (std::size_t t = 1; t < states.size(); ++t) g = std::min(g, expected_normalizer(states[t].pred_obs_var));
  return g;
}

NormalizerMonteCarlo normalizer_monte_carlo(const AdditiveModel& model, GridPtr grid, int T, int replicates,
                                            std::uint64_t seed) {
  if (replicates < 2 || T < 1) throw Error(ErrorCode::InvalidArgument, "normalizer_monte_carlo: need T >= 1, R >= 2");
  const StateSpaceModel ssm = model.as_state_space_model();
  const KernelMatrix K = kernel_matrix(ssm, 1, grid);
  const GridMeasure prior = ssm.prior_on(grid);
  const bool homogeneous = ssm.time_homogeneous;

  NormalizerMonteCarlo mc;
  mc.samples.assign(static_cast<std::size_t>(replicates), {});
  parallel_for(static_cast<std::size_t>(replicates), [&](std::size_t r) {
    const ObservationRecord obs = simulate(model, T, mix64(seed ^ mix64(r + 1)));
    std::vector<double>& z = mc.samples[r];
    GridMeasure pi = prior;
    for (int t = 1; t <= T; ++t) {
      const GridFunction g = ssm.potential_at(t, obs.y(t), grid);
      UpdateResult u = homogeneous ? pu_step(pi, K, g) : pu_step(pi, kernel_matrix(ssm, t, grid), g);
      z.push_back(u.z);
      pi = std::move(u.pi);
    }
  });

  mc.gamma = std::numeric_limits<double>::infinity();
  for (int t = 0; t < T; ++t) {
    CompensatedSum s, s2;
    for (const auto& z : mc.samples) s.add(z[static_cast<std::size_t>(t)]);
    const double mean = s.value() / replicates;
    for (const auto& z : mc.samples) {
      const double d = z[static_cast<std::size_t>(t)] - mean;
      s2.add(d * d);
    }
    const double var = s2.value() / (replicates - 1);
    mc.mean.push_back(mean);
    mc.std_error.push_back(std::sqrt(var / replicates));
    mc.gamma = std::min(mc.gamma, mean);
  }
  return mc;
}

GoodPairReport detect_good_pairs(const std::vector<double>& zs, double gamma, double g_sup) {
  GoodPairReport rep;
  rep.gamma = gamma;
  rep.g_sup = g_sup;
  const double half = gamma / 2;
  for (std::size_t i = 0; i + 1 < zs.size(); ++i) {
    if (zs[i] > half && zs[i + 1] > half) rep.pairs.push_back(static_cast<int>(i + 1));
  }
  rep.fraction = zs.empty() ? 0.0 : static_cast<double>(rep.pairs.size()) / static_cast<double>(zs.size());
  rep.eps2 = g_sup > 0.0 ? gamma * gamma / (4.0 * g_sup * g_sup) : std::numeric_limits<double>::quiet_NaN();
  return rep;
}

Lemma3Report check_lemma3_frequency(const NormalizerMonteCarlo& mc, double gamma, double g_sup) {
  Lemma3Report rep;
  rep.bound = gamma / (2.0 * g_sup);
  rep.degenerate = !(rep.bound < 0.5);
  rep.pass = true;
  const double R = static_cast<double>(mc.samples.size());
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < mc.mean.size(); ++t) {
    double hits = 0.0;
    for (const auto& z : mc.samples) hits += z[t] > gamma / 2 ? 1.0 : 0.0;
    const double f = hits / R;
    const double se = std::sqrt(std::max(f * (1.0 - f), 0.0) / R);
    rep.frequency.push_back(f);
    rep.std_error.push_back(se);
    const double margin = f - (rep.bound - 3.0 * se);
    if (margin < worst) {
      worst = margin;
      rep.worst_t = static_cast<int>(t + 1);
    }
    if (!(margin > 0.0)) rep.pass = false;
  }
  return rep;
}

void write_normconst_csv(std::ostream& os, const std::vector<double>& zs, const std::vector<double>& closed,
                         const GoodPairReport& pairs) {
  csv::row(os, {"t", "Z_t", "E_Z_closed", "gamma", "is_good_pair"});
  const std::set<int> good(pairs.pairs.begin(), pairs.pairs.end());
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t i = 0; i < zs.size(); ++i) {
    const int t = static_cast<int>(i + 1);
    csv::row(os, {csv::num(t), csv::num(zs[i]), csv::num(i < closed.size() ? closed[i] : nan), csv::num(pairs.gamma),
                  csv::num(good.contains(t))});
  }
}

}  // namespace truncfilter
