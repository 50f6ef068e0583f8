#include "truncfilter/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include <json.hpp>

#include "truncfilter/compacts.hpp"
#include "truncfilter/csv.hpp"

namespace truncfilter {

double tv_distance(const GridMeasure& mu, const GridMeasure& nu) {
  require_same_grid(mu.grid(), nu.grid(), "tv_distance");
  return 0.5 * (mu.weights() - nu.weights()).cwiseAbs().sum();
}

double dq_tail(double q, int T) { return 1.0 / (std::pow(q, T) * (q - 1.0)); }

DqResult dq_distance(const FilterTrajectory& a, const FilterTrajectory& b, double q, int T) {
  if (!(q > 1.0)) throw Error(ErrorCode::InvalidQ, "q must exceed 1");
  if (T < 0 || T > a.horizon() || T > b.horizon()) throw Error(ErrorCode::InvalidArgument, "dq_distance: T exceeds a horizon");
  if (a.streaming || b.streaming) throw Error(ErrorCode::InvalidArgument, "dq_distance needs full trajectories");
  require_same_grid(*a.grid, *b.grid, "dq_distance");
  DqResult d;
  d.q = q;
  d.T = T;
  double w = 1.0;
  for (int t = 1; t <= T; ++t) {
    w /= q;
    const double tv = tv_distance(a.pi(t), b.pi(t));
    d.value += w * tv;
    d.tv.push_back(tv);
    d.partial.push_back(d.value);
  }
  d.tail = dq_tail(q, T);
  return d;
}

void write_dq_csv(std::ostream& os, const DqResult& d) {
  csv::row(os, {"t", "tv_t", "q_weight", "partial_dq"});
  for (std::size_t i = 0; i < d.tv.size(); ++i) {
    const int t = static_cast<int>(i + 1);
    csv::row(os, {csv::num(t), csv::num(d.tv[i]), csv::num(std::pow(d.q, -t)), csv::num(d.partial[i])});
  }
}

AxiomReport metric_axiom_suite(int trials, std::uint64_t seed, double q, int T) {
  AxiomReport rep;
  rep.worst_triangle_slack = std::numeric_limits<double>::infinity();
  const GridPtr grid = make_grid_1d(-8.0, 8.0, 48);
  for (int k = 0; k < trials; ++k) {
    Rng rng(seed, static_cast<std::uint64_t>(k));
    auto draw = [&rng](double lo, double hi) { return lo + (hi - lo) * rng.uniform(); };
    auto random_params = [&] {
      LinGaussParams p;
      p.a = draw(0.2, 0.95);
      p.su = draw(0.5, 1.2);
      p.sv = draw(0.4, 1.2);
      p.s0 = draw(0.5, 1.5);
      p.mu0 = draw(-1.0, 1.0);
      return p;
    };
    const ObservationRecord obs = simulate(lingauss(random_params()), T, mix64(seed + 7919 * static_cast<std::uint64_t>(k + 1)));
    auto base_a = std::make_shared<const GridModel>(lingauss(random_params()).as_state_space_model(), grid, obs);
    const GridModel base_b(lingauss(random_params()).as_state_space_model(), grid, obs);
    const FilterTrajectory A = run_filter(*base_a, base_a->prior());
    const FilterTrajectory B = run_filter(base_b, base_b.prior());
    const TruncatedModel tc = build_truncated_model(base_a, A, adaptive_compacts(A, draw(0.05, 0.5)));
    const FilterTrajectory C = run_filter(tc, base_a->prior());

    const double ab = dq_distance(A, B, q, T).value;
    const double ba = dq_distance(B, A, q, T).value;
    const double bc = dq_distance(B, C, q, T).value;
    const double ac = dq_distance(A, C, q, T).value;
    rep.max_symmetry_gap = std::max(rep.max_symmetry_gap, std::abs(ab - ba));
    rep.max_identity = std::max({rep.max_identity, dq_distance(A, A, q, T).value, dq_distance(C, C, q, T).value});
    const double slack = ab + bc + 2.0 * dq_tail(q, T) - ac;
    rep.worst_triangle_slack = std::min(rep.worst_triangle_slack, slack);
    if (slack < 0.0) ++rep.triangle_violations;
    ++rep.trials;
  }
  return rep;
}

DensifyResult densify(const AdditiveModel& model, const ObservationRecord& obs, double eps, double q, GridPtr grid,
                      const DensifyOptions& opts) {
  if (!(q > 1.0)) throw Error(ErrorCode::InvalidQ, "q must exceed 1");
  if (!(eps > 0.0)) throw Error(ErrorCode::InvalidArgument, "densify: epsilon must be positive");
  const int H = obs.horizon();
  int T0 = 0;
  while (!(dq_tail(q, T0) < eps / 2)) ++T0;
  const int T = T0 + 1;
  if (T > H) {
    throw Error(ErrorCode::InvalidArgument, "observation record of length " + std::to_string(H) +
                                                " is shorter than the required horizon " + std::to_string(T));
  }

  DensifyResult res;
  auto base = std::make_shared<const GridModel>(model.as_state_space_model(), grid, obs);
  res.base = run_filter(*base, base->prior());

  std::vector<Point> centers(res.base.means.begin(), res.base.means.end());
  std::vector<double> r;
  for (int t = 0; t <= H; ++t) r.push_back(opts.radius(t));
  double M = minimal_ball_multiplier(res.base, centers, r, T, eps / 4);
  if (!(M > 0.0)) M = grid->cell_width() / r.front();
  const double drift = max_center_drift(model, centers, r);
  const double L = std::max(2.0 * drift / M, 1e-12);

  CompactSeq compacts = ball_sequence(model, centers, M, r, L, grid);
  auto approx = std::make_shared<const TruncatedModel>(finite_horizon_model(base, res.base, compacts, T));
  res.approx = run_filter(*approx, base->prior());
  res.dq = dq_distance(res.base, res.approx, q, H);
  res.stability = stability_series(*approx, compacts, H);
  res.model = approx;

  DensifyCertificate& c = res.certificate;
  c.epsilon = eps;
  c.q = q;
  c.T0 = T0;
  c.T = T;
  c.horizon = H;
  c.M = M;
  c.L = L;
  c.dq_value = res.dq.value;
  c.tail = res.dq.tail;
  c.max_tv = res.dq.tv.empty() ? 0.0 : *std::max_element(res.dq.tv.begin(), res.dq.tv.end());
  c.obs_hash = obs.hash();
  c.pass = res.dq.upper() < eps;
  return res;
}

std::string certificate_json(const DensifyCertificate& c) {
  char hash[19];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(c.obs_hash));
  nlohmann::ordered_json j;
  j["epsilon"] = c.epsilon;
  j["q"] = c.q;
  j["T0"] = c.T0;
  j["T"] = c.T;
  j["horizon"] = c.horizon;
  j["M"] = c.M;
  j["L"] = c.L;
  j["dq_value"] = c.dq_value;
  j["tail"] = c.tail;
  j["dq_upper"] = c.dq_value + c.tail;
  j["max_tv"] = c.max_tv;
  j["obs_hash"] = hash;
  j["pass"] = c.pass;
  return j.dump(2);
}

}  // namespace truncfilter
