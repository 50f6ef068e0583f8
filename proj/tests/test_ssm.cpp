#include <doctest.h>

#include <cmath>
#include <numbers>

#include "fixtures.hpp"

using namespace truncfilter;
using fixtures::code_of;

namespace {

AdditiveModel with_transition(PointMap a, double declared) {
  AdditiveModel m = fixtures::plain_model();
  m.transition = std::move(a);
  m.lipschitz_bound = declared;
  return m;
}

AdditiveModel with_noise(PointDensity pu, double declared) {
  AdditiveModel m = fixtures::plain_model();
  m.state_noise_pdf = std::move(pu);
  m.noise_upper_bound = declared;
  return m;
}

}  // namespace

TEST_CASE("simulate is a pure function of the seed") {
  const AdditiveModel m = lingauss({0.9, 1.0, 0.5, 0.5, 1.0, 0.0});
  const ObservationRecord a = simulate(m, 3, 7), b = simulate(m, 3, 7), c = simulate(m, 3, 8);
  REQUIRE(a.horizon() == 3);
  CHECK(a.xs.size() == 4);
  for (int t = 1; t <= 3; ++t) CHECK(a.y(t) == b.y(t));
  CHECK(a.hash() == b.hash());
  CHECK(a.hash() != c.hash());
  CHECK(a.y(1) != c.y(1));
}

TEST_CASE("noiseless fixed point") {
  AdditiveModel m = fixtures::plain_model();
  m.state_noise_sampler = [](Rng&) { return Point::Zero(); };
  m.obs_noise_sampler = [](Rng&) { return Point::Zero(); };
  m.prior_sampler = [](Rng&) { return Point(1.0, 0.0); };
  const ObservationRecord r = simulate(m, 5, 3);
  for (int t = 0; t <= 5; ++t) CHECK(r.xs[static_cast<std::size_t>(t)][0] == 1.0);
  for (int t = 1; t <= 5; ++t) CHECK(r.y(t)[0] == 1.0);
}

TEST_CASE("kernel_matrix") {
  SUBCASE("small noise gives the identity") {
    const AdditiveModel m = lingauss({1.0, 1.0, 1e-3, 1.0, 1.0, 0.0});
    const KernelMatrix K = kernel_matrix(m.as_state_space_model(), 1, make_grid_1d(-1.0, 1.0, 20));
    for (int j = 0; j < K.size(); ++j) CHECK(K.matrix(j, j) > 0.99);
  }
  SUBCASE("columns are stochastic") {
    const AdditiveModel m = lingauss({0.9, 1.0, 0.7, 0.7, 1.0, 0.0});
    const KernelMatrix K = kernel_matrix(m.as_state_space_model(), 1, make_grid_1d(-3.0, 3.0, 30));
    for (int j = 0; j < K.size(); ++j) CHECK(K.matrix.col(j).sum() == doctest::Approx(1.0).epsilon(1e-14));
  }
  SUBCASE("hand-evaluated 3-cell densities") {
    const AdditiveModel m = lingauss({0.5, 1.0, 1.0, 1.0, 1.0, 0.0});
    const GridPtr g = make_grid_1d(-1.5, 1.5, 3);  // centres -1, 0, 1; volume 1
    const KernelMatrix K = kernel_matrix(m.as_state_space_model(), 1, g);
    const double c[] = {-1.0, 0.0, 1.0};
    for (int j = 0; j < 3; ++j) {
      const double colsum = 1.0 - K.lost_mass[j];
      for (int i = 0; i < 3; ++i) {
        const double d = c[i] - 0.5 * c[j];
        const double hand = std::exp(-0.5 * d * d) / std::sqrt(2.0 * std::numbers::pi);
        CHECK(std::abs(K.matrix(i, j) * colsum - hand) < 1e-12);
      }
    }
  }
  SUBCASE("vanishing column") {
    Eigen::Matrix2d raw;
    raw << 1.0, 0.0, 0.0, 0.0;
    CHECK(code_of([&] { normalize_kernel(make_grid_1d(0, 1, 2), raw); }) == ErrorCode::ZeroColumn);
  }
}

TEST_CASE("Lipschitz probe") {
  const GridPtr g = make_grid_1d(-3.0, 3.0, 301);
  CHECK(check_ma1_lipschitz(lingauss({0.9, 1, 1, 1, 1, 0}), *g, 1).estimate == doctest::Approx(0.9));

  const auto sx = with_transition([](int, const Point& x) { return Point(x[0] + std::sin(x[0]), 0.0); }, 2.0);
  const LipschitzReport r = check_ma1_lipschitz(sx, *g, 1);
  CHECK(r.estimate >= 1.9);
  CHECK(r.estimate <= 2.0);
  CHECK_FALSE(r.violated);

  const GridPtr u = make_grid_1d(-1.0, 1.0, 50);
  const auto sq = with_transition([](int, const Point& x) { return Point(x[0] * x[0], 0.0); }, 1.0);
  const LipschitzReport q = check_ma1_lipschitz(sq, *u, 1);
  const double w = u->cell_width();
  CHECK(q.estimate == doctest::Approx(2.0 * (1.0 - w)).epsilon(1e-9));
  CHECK(q.violated);
}

TEST_CASE("envelope probe") {
  const GridPtr g = make_grid_1d(-3.0, 3.0, 31);
  AdditiveModel m = fixtures::plain_model();
  const auto pu = [](double r) { return normal_pdf(r, 0.0, 1.0); };
  m.envelope = pu;
  const EnvelopeReport exact = check_ma2_envelope(m, *g, 1);
  CHECK(exact.worst_ratio == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(exact.pass);
  CHECK_FALSE(exact.caveat.empty());

  m.envelope = [pu](double r) { return 0.5 * pu(r); };
  CHECK(check_ma2_envelope(m, *g, 1).worst_ratio == doctest::Approx(2.0).epsilon(1e-12));

  const auto cauchy = [](const Point& z) { return 1.0 / (std::numbers::pi * (1.0 + z.squaredNorm())); };
  const EnvelopeReport c = probe_envelope_radial(cauchy, [pu](double r) { return 0.5 * pu(r); }, 20.0, 2001);
  CHECK(c.pass);
  CHECK(c.worst_ratio > 1.0);
  CHECK(c.worst_ratio < cauchy(Point::Zero()) / (0.5 * pu(0.0)));
  CHECK_FALSE(probe_envelope_radial(cauchy, pu, 20.0, 2001).pass);
}

TEST_CASE("noise upper bound probe") {
  const GridPtr g = make_grid_1d(-3.0, 3.0, 31);
  const double s = 0.5;
  const auto gauss = with_noise([s](const Point& z) { return normal_pdf(z[0], 0.0, s); }, 1.0);
  CHECK(check_ma3_upper(gauss, *g, 1).sup == doctest::Approx(1.0 / std::sqrt(2 * std::numbers::pi * s * s)));

  const auto uni = with_noise([](const Point& z) { return std::abs(z[0]) <= 1.0 ? 0.5 : 0.0; }, 0.5);
  const UpperBoundReport u = check_ma3_upper(uni, *g, 1);
  CHECK(u.sup == 0.5);
  CHECK(u.pass);

  const auto mix = with_noise(
      [](const Point& z) { return 0.5 * normal_pdf(z[0], 0.0, 1.0) + 0.5 * normal_pdf(z[0], 0.0, 0.1); }, 1.0);
  const double at0 = 0.5 / std::sqrt(2 * std::numbers::pi * 0.01) + 0.5 / std::sqrt(2 * std::numbers::pi);
  const UpperBoundReport x = check_ma3_upper(mix, *g, 1);
  CHECK(x.sup == doctest::Approx(at0));
  CHECK_FALSE(x.pass);
}

TEST_CASE("likelihood regularity conditions") {
  const GridPtr xg = make_grid_1d(-4.0, 4.0, 801);
  const GridPtr yg = make_grid_1d(-4.0, 4.0, 801);
  const StateSpaceModel m = fixtures::plain_model().as_state_space_model();
  const Prop1Report r = check_prop1_conditions(m, *xg, *yg, 1);
  const double slope = 1.0 / std::sqrt(2.0 * std::numbers::pi * std::numbers::e);
  CHECK(r.lipschitz_y == doctest::Approx(slope).epsilon(1e-3));
  CHECK(r.lipschitz_x == doctest::Approx(slope).epsilon(1e-3));
  CHECK(r.m_hat == doctest::Approx(1.0 / std::sqrt(2.0 * std::numbers::pi)).epsilon(1e-12));
  CHECK_FALSE(r.c3_checked);

  StateSpaceModel flat = m;
  flat.likelihood = [](int, const Point&, const Point&) { return 0.3; };
  const Prop1Report f = check_prop1_conditions(flat, *xg, *yg, 1);
  CHECK(f.lipschitz_x == 0.0);
  CHECK(f.lipschitz_y == 0.0);
  CHECK(f.m_hat == 0.3);
}

TEST_CASE("parse_model") {
  const ModelSpec s = parse_model(" lingauss(0.5, 2) ");
  REQUIRE(s.lingauss);
  CHECK(s.lingauss->a == 0.5);
  CHECK(s.lingauss->b == 2.0);
  CHECK(s.lingauss->su == 0.7);
  CHECK(parse_model("lingauss").id == "lingauss");
  CHECK(parse_model("absobs(0.3)").model.name == "absobs");
  CHECK(parse_model("stochgrowth").model.time_homogeneous == false);
  CHECK(parse_model("lingauss2d").model.state_dim == 2);
  CHECK(code_of([] { parse_model(""); }) == ErrorCode::Config);
  CHECK(code_of([] { parse_model("nosuch(1)"); }) == ErrorCode::Config);
  CHECK(code_of([] { parse_model("lingauss(0.9,1,-1)"); }) == ErrorCode::Config);
  CHECK(code_of([] { parse_model("lingauss(0.9,x)"); }) == ErrorCode::Config);
}
