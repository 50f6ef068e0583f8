#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "truncfilter/compacts.hpp"
#include "truncfilter/metrics.hpp"
#include "truncfilter/stability.hpp"

using namespace truncfilter;
using fixtures::code_of;
using fixtures::measure;

TEST_CASE("epsilon_ratio") {
  const Eigen::MatrixXd flat = Eigen::MatrixXd::Constant(5, 5, 0.2);
  CHECK(epsilon_ratio(flat, CellMask::full(5), CellMask::full(5)) == 1.0);
  const Eigen::Matrix3d K = fixtures::k3();
  CHECK(epsilon_ratio(K, CellMask::of(3, {1}), CellMask::of(3, {2})) == 1.0);
  CHECK(epsilon_ratio(K, CellMask::full(3), CellMask::full(3)) == doctest::Approx(0.1 / 0.6));
  CHECK(code_of([] { epsilon_ratio(Eigen::Matrix2d::Zero(), CellMask::full(2), CellMask::full(2)); }) ==
        ErrorCode::DegenerateRatio);

  // N(x; 0.9 x', I) on an 8 x 8 grid over [-2, 2]^2; the exponent separates by axis.
  const GridPtr g = make_grid_2d(Point(-2, -2), Point(2, 2), 8, 8);
  Eigen::MatrixXd D(64, 64);
  for (int j = 0; j < 64; ++j)
    for (int i = 0; i < 64; ++i) D(i, j) = std::exp(-0.5 * (g->center(i) - 0.9 * g->center(j)).squaredNorm());
  const std::vector<double>& c = g->axis_centers(0);
  double lo = 1e300, hi = 0.0;
  for (double x : c)
    for (double xp : c) {
      lo = std::min(lo, (x - 0.9 * xp) * (x - 0.9 * xp));
      hi = std::max(hi, (x - 0.9 * xp) * (x - 0.9 * xp));
    }
  CHECK(hi == doctest::Approx(std::pow(1.9 * 1.75, 2)));
  const double expect = std::exp(-(2 * hi - 2 * lo) / 2);
  CHECK(epsilon_ratio(D, CellMask::full(64), CellMask::full(64)) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("stability_series arithmetic") {
  const GridPtr g = make_grid_1d(0.0, 4.0, 4);
  std::vector<GridFunction> pots(6, GridFunction::constant(g, 1.0));
  const fixtures::MatrixSystem sys(g, Eigen::MatrixXd::Constant(4, 4, 0.25), pots);
  const StabilityReport r = stability_series(sys, CompactSeq::full(g, 6), 6);
  for (int t = 1; t <= 6; ++t) {
    CHECK(r.eps[static_cast<std::size_t>(t - 1)] == 1.0);
    CHECK(r.partial_sums[static_cast<std::size_t>(t - 1)] == doctest::Approx(t));
    CHECK(r.beta_bound[static_cast<std::size_t>(t - 1)] == doctest::Approx(std::exp(-t)));
  }
  CHECK(r.inf_density.size() == 6);
}

TEST_CASE("predictive likelihood and composite kernel on the 3-cell fixture") {
  const fixtures::MatrixSystem sys = fixtures::system3();
  const Eigen::Matrix3d K = fixtures::k3();

  const GridFunction g21 = predictive_likelihood(sys, 1, 2);
  CHECK(g21[0] == doctest::Approx(1.5));
  CHECK(g21[1] == doctest::Approx(1.2));
  CHECK(g21[2] == doctest::Approx(1.1));

  const CompositeKernel c = composite_kernel(sys, 0, 2);
  CHECK(c.g[0] == doctest::Approx(47.0 / 20));
  CHECK(c.g[1] == doctest::Approx(141.0 / 50));
  CHECK(c.g[2] == doctest::Approx(351.0 / 100));
  CHECK(c.kappa(0, 0) == doctest::Approx(18.0 / 47));
  CHECK(c.kappa(1, 1) == doctest::Approx(46.0 / 141));
  CHECK(c.kappa(2, 2) == doctest::Approx(164.0 / 351));
  CHECK(c.kappa(1, 2) == doctest::Approx(35.0 / 117));

  const fixtures::MatrixSystem ones(fixtures::grid3(), K,
                                    {GridFunction::constant(fixtures::grid3(), 1.0),
                                     GridFunction::constant(fixtures::grid3(), 1.0)});
  CHECK(composite_kernel(ones, 0, 1).kappa.isApprox(Eigen::MatrixXd(K)));
  CHECK(predictive_likelihood(ones, 0, 2).values().isApproxToConstant(1.0));

  const GridMeasure mu = measure(fixtures::grid3(), {.2, .3, .5});
  const Eigen::VectorXd upsilon = c.g.cwiseProduct(mu.weights()) / c.g.dot(mu.weights());
  CHECK((c.kappa * upsilon - compose_pu(sys, 0, 2, mu).weights()).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("dobrushin_beta") {
  CHECK(dobrushin_beta(Eigen::MatrixXd::Constant(3, 3, 1.0 / 3), CellMask::full(3)).beta == doctest::Approx(0.0));
  const DobrushinResult o = dobrushin_beta(Eigen::Matrix2d::Identity(), CellMask::full(2));
  CHECK(o.beta == 1.0);
  CHECK(o.alpha == 0.0);
  const DobrushinResult f = dobrushin_beta(fixtures::k3(), CellMask::full(3));
  CHECK(f.beta == doctest::Approx(0.4));
  CHECK(((f.j == 0 && f.j2 == 2) || (f.j == 2 && f.j2 == 0)));
  CHECK(dobrushin_beta(fixtures::k3(), CellMask::full(3), {2}).beta == doctest::Approx(0.3));
}

TEST_CASE("contraction chain") {
  SUBCASE("randomised small grids") {
    Rng rng(77);
    for (int trial = 0; trial < 20; ++trial) {
      const LinGaussParams p{0.5 + 0.4 * rng.uniform(), 1.0, 0.5 + rng.uniform(), 0.7 + rng.uniform(), 1.0, 0.0};
      const AdditiveModel m = lingauss(p);
      const GridPtr g = make_grid_1d(-3.0, 3.0, 8);
      auto base = std::make_shared<const GridModel>(m.as_state_space_model(), g, simulate(m, 5, 100 + trial));
      const FilterTrajectory tr = run_filter(*base, base->prior());
      const CompactSeq cs = adaptive_compacts(tr, 0.2);
      const TruncatedModel tm = build_truncated_model(base, tr, cs);
      const ChainReport r =
          verify_appendix_a_chain(tm, cs, 5, GridMeasure::point_mass(g, 0), GridMeasure::point_mass(g, 7));
      CHECK(r.pass());
      REQUIRE(r.steps.size() == 5);
      CHECK(r.steps[0].beta_kappa <= r.steps[0].eps_product + 1e-9);
    }
  }
  SUBCASE("rank-one kernels") {
    const GridPtr g = make_grid_1d(0.0, 4.0, 4);
    Eigen::MatrixXd K(4, 4);
    for (int j = 0; j < 4; ++j) K.col(j) << .1, .2, .3, .4;
    const fixtures::MatrixSystem sys(g, K, {fixtures::function(g, {1, 2, 3, 4}), fixtures::function(g, {4, 3, 2, 1})});
    const ChainReport r =
        verify_appendix_a_chain(sys, CompactSeq::full(g, 2), 2, GridMeasure::point_mass(g, 0), GridMeasure::uniform(g));
    CHECK(r.pass());
    for (const ChainStep& s : r.steps) {
      CHECK(s.beta_kappa == doctest::Approx(0.0));
      CHECK(s.tv_phi == doctest::Approx(0.0));
    }
  }
  SUBCASE("resource guard") {
    const GridPtr g = make_grid_1d(0.0, 1.0, 65);
    const fixtures::MatrixSystem sys(g, Eigen::MatrixXd::Constant(65, 65, 1.0 / 65), {GridFunction::constant(g, 1.0)});
    CHECK(code_of([&] {
            verify_appendix_a_chain(sys, CompactSeq::full(g, 1), 1, GridMeasure::uniform(g), GridMeasure::uniform(g));
          }) == ErrorCode::ResourceGuard);
  }
}

TEST_CASE("empirical forgetting") {
  const AdditiveModel m = lingauss({0.5, 1.0, 0.7, 0.7, 1.0, 0.0});
  const GridPtr g = make_grid_1d(-12.0, 12.0, 240);
  const GridModel gm(m.as_state_space_model(), g, simulate(m, 50, 8));
  const GridMeasure a = discretize_density([](const Point& x) { return normal_pdf(x[0], -5.0, 0.5); }, g);
  const GridMeasure b = discretize_density([](const Point& x) { return normal_pdf(x[0], 5.0, 0.5); }, g);
  const std::vector<double> same = empirical_forgetting(gm, a, a);
  CHECK(*std::max_element(same.begin(), same.end()) == 0.0);
  const std::vector<double> tv = empirical_forgetting(gm, a, b);
  CHECK(tv_distance(a, b) > 0.999);
  CHECK(tv.back() < 1e-3);
}
