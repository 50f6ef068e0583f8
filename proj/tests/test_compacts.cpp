#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "truncfilter/compacts.hpp"
#include "truncfilter/normconst.hpp"

using namespace truncfilter;
using fixtures::code_of;

namespace {

std::vector<double> log_radii(int T) {
  std::vector<double> r;
  for (int t = 0; t <= T; ++t) r.push_back(std::log(t + 2.0));
  return r;
}

}  // namespace

TEST_CASE("ball_sequence centre condition") {
  const GridPtr g = make_grid_1d(-8.0, 8.0, 64);
  const int T = 10;
  AdditiveModel zero = fixtures::plain_model();
  zero.transition = [](int, const Point&) { return Point::Zero(); };
  const std::vector<Point> origin(T + 1, Point::Zero());
  const CompactSeq cs = ball_sequence(zero, origin, 1.0, log_radii(T), 1e-9, g);
  CHECK(cs.horizon() == T);
  CHECK(cs.balls.size() == static_cast<std::size_t>(T + 1));
  CHECK(max_center_drift(zero, origin, log_radii(T)) == 0.0);

  const AdditiveModel lin = lingauss({0.9, 1, 1, 1, 1, 0});
  std::vector<Point> follow{Point(2.0, 0.0)};
  for (int t = 1; t <= T; ++t) follow.push_back(0.9 * follow.back());
  CHECK(max_center_drift(lin, follow, log_radii(T)) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK_NOTHROW(ball_sequence(lin, follow, 1.0, log_radii(T), 1e-6, g));

  std::vector<Point> jump = follow;
  jump[5] = Point(6.0, 0.0);
  CHECK_THROWS_AS(ball_sequence(lin, jump, 1.0, log_radii(T), 0.1, g), CenterDriftError);
  std::vector<double> flat(T + 1, 1.0);
  CHECK(code_of([&] { ball_sequence(lin, follow, 1.0, flat, 1.0, g); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("growth condition trace") {
  const auto s_inv = [](double u) { return std::sqrt(2.0 * std::log(2.0 / u)); };
  const GrowthTrace matched = check_growth_condition(s_inv, [&](int t) { return s_inv(1.0 / t); }, 200);
  for (double v : matched.ratio) CHECK(v == doctest::Approx(1.0));
  CHECK_FALSE(matched.diverging);

  const GrowthTrace flat = check_growth_condition(s_inv, [](int) { return 2.0; }, 200);
  CHECK(flat.diverging);
  CHECK(flat.ratio[99] == doctest::Approx(s_inv(1.0 / 100) / 2.0));

  const auto gauss_inv = [](double u) { return std::sqrt(-2.0 * std::log(u)); };
  const GrowthTrace quarter = check_growth_condition(gauss_inv, [](int t) { return std::pow(t, 0.25); }, 10000);
  for (int t : {2, 100, 10000}) {
    CHECK(quarter.ratio[static_cast<std::size_t>(t - 1)] ==
          doctest::Approx(std::sqrt(2.0 * std::log(t)) / std::pow(t, 0.25)));
  }
  CHECK_FALSE(quarter.diverging);
}

TEST_CASE("adaptive compacts") {
  const LinGaussParams p{0.9, 1.0, 0.7, 0.7, 1.0, 0.0};
  const AdditiveModel m = lingauss(p);
  const GridPtr g = make_grid_1d(-10.0, 10.0, 400);
  const ObservationRecord obs = simulate(m, 30, 13);
  const GridModel gm(m.as_state_space_model(), g, obs);
  const FilterTrajectory tr = run_filter(gm, gm.prior());

  SUBCASE("vacuous epsilon") {
    const CompactSeq cs = adaptive_compacts(tr, 2.0);
    CHECK(cs.mask(0).all());
    for (int t = 1; t <= 30; ++t) {
      CHECK(cs.mask(t).count() <= 2);
      CHECK(tr.pi(t).mass_in(cs.mask(t)) > 0.0);
    }
  }
  SUBCASE("Gaussian quantile radius") {
    const CompactSeq cs = adaptive_compacts(tr, 0.05);
    const auto ks = kalman_recursion(KalmanParams::from(p), scalar_observations(obs));
    const double z = 2.241402727604947;  // standard normal quantile at 0.9875
    for (int t = 1; t <= 30; ++t) {
      const double target = z * std::sqrt(ks[static_cast<std::size_t>(t)].filt_var);
      CHECK(std::abs(cs.balls[static_cast<std::size_t>(t)].radius - target) <= 2.0 * g->cell_width());
      CHECK(tr.pi(t).mass_in(cs.mask(t)) > 0.975);
    }
  }
  SUBCASE("minimal cover") {
    const int k = minimal_cover_steps(tr.pi(5), {tr.means[5]}, 0.05);
    const double w = g->cell_width();
    CHECK(tr.pi(5).mass_in(ball_mask(*g, tr.means[5], k * w)) > 0.975);
    CHECK(tr.pi(5).mass_in(ball_mask(*g, tr.means[5], (k - 1) * w)) <= 0.975);
  }
}

TEST_CASE("union cover of a bimodal posterior") {
  const AdditiveModel m = absobs(0.3, 0.3, 3.0);
  const GridPtr g = make_grid_1d(-8.0, 8.0, 320);
  ObservationRecord obs;
  obs.ys.assign(10, Point(4.0, 0.0));
  const GridModel gm(m.as_state_space_model(), g, obs);
  const FilterTrajectory tr = run_filter(gm, gm.prior());
  const CompactSeq one = adaptive_compacts(tr, 0.05, {CoverShape::Ball, 1});
  const CompactSeq two = adaptive_compacts(tr, 0.05, {CoverShape::Union, 2});
  const BallSpec& u = two.balls[10];
  REQUIRE(u.centers.size() == 2);
  CHECK(std::abs(u.centers[0][0] + u.centers[1][0]) < 0.2);
  CHECK(std::abs(std::abs(u.centers[0][0]) - 4.0) < 0.2);
  CHECK(u.radius < 1.0);
  CHECK(one.balls[10].radius > 3.5);
  const auto modes = density_modes(tr.pi(10), 2);
  CHECK(modes.size() == 2);
}

TEST_CASE("finite horizon model") {
  const AdditiveModel m = lingauss({});
  const GridPtr g = make_grid_1d(-10.0, 10.0, 200);
  const int T = 30;
  auto base = std::make_shared<const GridModel>(m.as_state_space_model(), g, simulate(m, T, 21));
  const FilterTrajectory tr = run_filter(*base, base->prior());
  const CompactSeq adaptive = adaptive_compacts(tr, 0.1);

  const TruncatedModel whole = finite_horizon_model(base, tr, adaptive, T);
  const TruncatedModel ref = build_truncated_model(base, tr, adaptive);
  for (int t = 1; t <= T; ++t) CHECK(whole.dense_kernel(t) == ref.dense_kernel(t));

  const TruncatedModel none = finite_horizon_model(base, tr, adaptive, 0);
  for (int t = 1; t <= T; ++t) CHECK(none.dense_kernel(t) == base->dense_kernel(t));

  const double eps = 0.1;
  const std::vector<Point> centers(tr.means.begin(), tr.means.end());
  const std::vector<double> r = log_radii(T);
  const double M = minimal_ball_multiplier(tr, centers, r, T, eps / 2);
  for (int t = 0; t <= T; ++t) CHECK(tr.pi(t).mass_in(ball_mask(*g, centers[static_cast<std::size_t>(t)], M * r[static_cast<std::size_t>(t)])) > 1 - eps / 2);
  const CompactSeq balls = ball_sequence(m, centers, M, r, 2.0 * max_center_drift(m, centers, r) / M + 1e-12, g);
  const TruncatedModel hat = finite_horizon_model(base, tr, balls, T);
  const FilterTrajectory ht = run_filter(hat, base->prior());
  const auto fs = lemma_test_functions(g);
  double worst = 0.0;
  for (int t = 1; t <= T; ++t)
    for (const auto& f : fs) worst = std::max(worst, std::abs(integrate(f, tr.pi(t)) - integrate(f, ht.pi(t))) / f.sup_norm());
  CHECK(worst < eps);
}

TEST_CASE("good pair compacts") {
  const LinGaussParams p{};
  const AdditiveModel m = lingauss(p);
  const GridPtr g = make_grid_1d(-10.0, 10.0, 200);
  const int T = 30;
  const GridModel gm(m.as_state_space_model(), g, simulate(m, T, 5));
  const FilterTrajectory tr = run_filter(gm, gm.prior());
  const auto r = [](int t) { return std::log(t + 2.0); };
  const double eps = 0.05;

  std::vector<int> all;
  for (int t = 1; t < T; ++t) all.push_back(t);
  const CompactSeq uniform = good_pair_compacts(tr, all, 2.0, r, eps);
  for (int t = 1; t <= T; ++t) CHECK(uniform.balls[static_cast<std::size_t>(t)].radius == doctest::Approx(2.0 * r(t)));

  const CompactSeq none = good_pair_compacts(tr, {}, 2.0, r, eps);
  const CompactSeq adaptive = adaptive_compacts(tr, eps);
  for (int t = 1; t <= T; ++t) CHECK(none.mask(t) == adaptive.mask(t));

  const double gamma = gamma_floor(kalman_variances(KalmanParams::from(p), T));
  const GoodPairReport pairs = detect_good_pairs(tr.zs, gamma);
  const CompactSeq mixed = good_pair_compacts(tr, pairs.pairs, 4.0, r, eps);
  for (int t = 1; t <= T; ++t) CHECK(tr.pi(t).mass_in(mixed.mask(t)) > 1 - eps / 2);
}
