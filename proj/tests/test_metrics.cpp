#include <doctest.h>

#include <json.hpp>

#include "fixtures.hpp"
#include "truncfilter/compacts.hpp"
#include "truncfilter/metrics.hpp"

using namespace truncfilter;
using fixtures::code_of;
using fixtures::measure;

namespace {

FilterTrajectory constant_trajectory(const GridPtr& g, int cell, int T) {
  FilterTrajectory tr;
  tr.grid = g;
  for (int t = 0; t <= T; ++t) tr.pis.push_back(GridMeasure::point_mass(g, cell));
  tr.zs.assign(static_cast<std::size_t>(T), 1.0);
  return tr;
}

}  // namespace

TEST_CASE("total variation") {
  const GridPtr g = fixtures::grid3();
  const GridMeasure mu = measure(g, {.5, .5, 0});
  CHECK(tv_distance(mu, mu) == 0.0);
  CHECK(tv_distance(GridMeasure::point_mass(g, 0), GridMeasure::point_mass(g, 2)) == 1.0);
  CHECK(tv_distance(mu, measure(g, {0, .5, .5})) == doctest::Approx(0.5));
}

TEST_CASE("D_q arithmetic") {
  const GridPtr g = fixtures::grid3();
  const FilterTrajectory a = constant_trajectory(g, 0, 3), b = constant_trajectory(g, 2, 3);
  const DqResult d = dq_distance(a, b, 2.0, 3);
  CHECK(d.value == doctest::Approx(7.0 / 8));
  CHECK(d.tail == doctest::Approx(1.0 / 8));
  CHECK(d.upper() == doctest::Approx(1.0));
  CHECK(d.partial == std::vector<double>{0.5, 0.75, 0.875});
  const DqResult same = dq_distance(a, a, 2.0, 3);
  CHECK(same.value == 0.0);
  CHECK(same.upper() == same.tail);
  CHECK(dq_tail(3.0, 2) == doctest::Approx(1.0 / 18));
  CHECK(code_of([&] { dq_distance(a, b, 1.0, 3); }) == ErrorCode::InvalidQ);
  CHECK(code_of([&] { dq_distance(a, b, 2.0, 4); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("metric axioms") {
  const AxiomReport r = metric_axiom_suite(8, 42);
  CHECK(r.trials == 8);
  CHECK(r.pass());
  CHECK(r.max_symmetry_gap == 0.0);
}

TEST_CASE("full-grid compacts are at distance zero") {
  const AdditiveModel m = lingauss({});
  const GridPtr g = make_grid_1d(-8.0, 8.0, 64);
  auto base = std::make_shared<const GridModel>(m.as_state_space_model(), g, simulate(m, 20, 4));
  const FilterTrajectory tr = run_filter(*base, base->prior());
  const TruncatedModel tm = build_truncated_model(base, tr, CompactSeq::full(g, 20));
  CHECK(dq_distance(tr, run_filter(tm, base->prior()), 2.0, 20).value == 0.0);
}

TEST_CASE("densify") {
  const AdditiveModel m = lingauss({});
  const GridPtr g = make_grid_1d(-12.0, 12.0, 240);
  const ObservationRecord obs = simulate(m, 60, 11);

  const DensifyResult loose = densify(m, obs, 1.0, 2.0, g);
  CHECK(loose.certificate.T0 == 2);
  CHECK(loose.certificate.T == 3);
  CHECK(loose.certificate.pass);

  const DensifyResult tight = densify(m, obs, 0.05, 2.0, g);
  const DensifyCertificate& c = tight.certificate;
  CHECK(c.pass);
  CHECK(c.dq_value + c.tail < 0.05);
  CHECK(c.tail < 0.025);
  CHECK(c.obs_hash == obs.hash());
  for (double e : tight.stability.eps) CHECK(e > 0.0);
  CHECK(tight.model->reshape_until() == c.T);

  const auto j = nlohmann::json::parse(certificate_json(c));
  CHECK(j.at("pass").get<bool>());
  CHECK(j.at("T0").get<int>() == c.T0);
  CHECK(j.at("obs_hash").get<std::string>().size() == 16);

  CHECK(code_of([&] { densify(m, obs, 0.05, 0.5, g); }) == ErrorCode::InvalidQ);
  CHECK(code_of([&] { densify(m, simulate(m, 3, 1), 0.01, 2.0, g); }) == ErrorCode::InvalidArgument);
}
