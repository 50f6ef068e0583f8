#include <doctest.h>

#include <cmath>
#include <numbers>

#include "fixtures.hpp"
#include "truncfilter/normconst.hpp"

using namespace truncfilter;

TEST_CASE("Kalman variance recursion") {
  const auto hand = kalman_variances({0.9, 1.0, 1.0, 1.0, 1.0, 0.0}, 3);
  CHECK(hand[1].pred_var == doctest::Approx(1.81).epsilon(1e-15));
  CHECK(hand[2].pred_var == doctest::Approx(1.0 + 0.81 * 1.81 / 2.81).epsilon(1e-15));
  CHECK(hand[2].pred_obs_var == doctest::Approx(hand[2].pred_var + 1.0));

  const auto memoryless = kalman_variances({0.0, 1.0, 0.3, 0.5, 2.0, 0.0}, 10);
  for (int t = 2; t <= 10; ++t) CHECK(memoryless[static_cast<std::size_t>(t)].pred_var == doctest::Approx(0.3));

  const double a = 1.0, b = 1.0, su2 = 0.4, sv2 = 0.6;
  const auto diffuse = kalman_variances({a, b, su2, sv2, 1e9, 0.0}, 2);
  CHECK(diffuse[2].pred_var == doctest::Approx(su2 + sv2 * a * a / (b * b)).epsilon(1e-8));
  CHECK(diffuse[2].pred_obs_var == doctest::Approx(b * b * su2 + (1 + a * a) * sv2).epsilon(1e-8));
}

TEST_CASE("Kalman filter moments") {
  const auto ks = kalman_recursion({0.9, 1.0, 0.49, 0.49, 1.0, 0.0}, {1.0});
  const double pv = 0.81 + 0.49, so = pv + 0.49;
  CHECK(ks[1].filt_mean == doctest::Approx(pv / so));
  CHECK(ks[1].filt_var == doctest::Approx(pv * 0.49 / so));
  CHECK(ks[1].obs_density == doctest::Approx(normal_pdf(1.0, 0.0, std::sqrt(so))));
}

TEST_CASE("normaliser floor") {
  CHECK(expected_normalizer(4.0) == doctest::Approx(0.1410473959).epsilon(1e-9));
  std::vector<KalmanState> s(3);
  s[1].pred_obs_var = 4.0;
  s[2].pred_obs_var = 4.0;
  CHECK(gamma_floor(s) == doctest::Approx(0.1410473959).epsilon(1e-9));
}

TEST_CASE("predictive observation pdf and its second moment") {
  const StateSpaceModel m = fixtures::plain_model().as_state_space_model();
  const GridPtr xg = make_grid_1d(-3.0, 3.0, 12);
  const GridPtr yg = observation_grid(0.0, 5.0, 50);
  const int c = 4;
  const GridFunction p = predictive_obs_pdf(m, 1, GridMeasure::point_mass(xg, c), yg);
  for (int j = 0; j < yg->size(); ++j) CHECK(p[j] == doctest::Approx(m.likelihood(1, yg->center(j), xg->center(c))));

  StateSpaceModel flat = m;
  flat.likelihood = [](int, const Point&, const Point&) { return 0.1; };
  const GridFunction q = predictive_obs_pdf(flat, 1, GridMeasure::uniform(xg), yg);
  CHECK(q.values().isApproxToConstant(0.1));
  CHECK(cond_second_moment(q) == doctest::Approx(0.1));  // uniform 1/W on W = 10

  const double s = 1.3;
  const GridPtr wide = observation_grid(0.5, 8 * s, 2000);
  const GridFunction gauss = GridFunction::from(wide, [=](const Point& y) { return normal_pdf(y[0], 0.5, s); });
  CHECK(std::abs(cond_second_moment(gauss) / expected_normalizer(s * s) - 1.0) < 1e-4);

  const LinGaussParams lp{0.9, 1.0, 0.7, 0.7, 1.0, 0.0};
  const AdditiveModel lg = lingauss(lp);
  const GridPtr fine = make_grid_1d(-10.0, 10.0, 400);
  const GridMeasure xi = discretize_density([](const Point& x) { return normal_pdf(x[0], 0.3, 1.1); }, fine);
  const GridFunction pt = predictive_obs_pdf(lg.as_state_space_model(), 1, xi, wide);
  const double sd = std::sqrt(1.1 * 1.1 + 0.49);
  for (int j = 0; j < wide->size(); j += 97) {
    CHECK(std::abs(pt[j] - normal_pdf(wide->center(j)[0], 0.3, sd)) < 1e-8);
  }
}

TEST_CASE("good pairs") {
  const GoodPairReport hand = detect_good_pairs({3, 3, 1, 3, 3, 3}, 4.0);
  CHECK(hand.pairs == std::vector<int>{1, 4, 5});
  const GoodPairReport all = detect_good_pairs({5, 5, 5, 5}, 4.0);
  CHECK(all.pairs == std::vector<int>{1, 2, 3});
  CHECK(detect_good_pairs({3, 1, 3, 1, 3}, 4.0).pairs.empty());
  CHECK(detect_good_pairs({3, 3}, 4.0, 2.0).eps2 == doctest::Approx(1.0));
}

TEST_CASE("Monte Carlo normaliser study") {
  const AdditiveModel m = lingauss({});
  const GridPtr g = make_grid_1d(-8.0, 8.0, 64);
  const NormalizerMonteCarlo a = normalizer_monte_carlo(m, g, 5, 200, 99);
  const NormalizerMonteCarlo b = normalizer_monte_carlo(m, g, 5, 200, 99);
  CHECK(a.mean == b.mean);
  CHECK(a.samples.size() == 200);
  CHECK(a.gamma == *std::min_element(a.mean.begin(), a.mean.end()));

  const Lemma3Report sure = check_lemma3_frequency(a, 1e-12, 1.0);
  CHECK(sure.pass);
  for (double f : sure.frequency) CHECK(f == 1.0);

  const Lemma3Report edge = check_lemma3_frequency(a, 0.5, 0.5);
  CHECK(edge.bound == doctest::Approx(0.5));
  CHECK(edge.degenerate);
  CHECK_FALSE(check_lemma3_frequency(a, 0.1, 1.0).degenerate);
}
