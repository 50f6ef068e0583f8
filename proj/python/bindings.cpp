#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>
#include <sstream>

#include "cli.hpp"
#include "truncfilter/compacts.hpp"
#include "truncfilter/metrics.hpp"
#include "truncfilter/normconst.hpp"

namespace py = pybind11;
using namespace truncfilter;

namespace {

struct Bound {
  AdditiveModel model;
  std::shared_ptr<const GridModel> base;
  FilterTrajectory traj;
};

Bound bind_model(const std::string& spec, double lo, double hi, int n, int T, std::uint64_t seed) {
  Bound b{parse_model(spec).model, nullptr, {}};
  const GridPtr g = make_grid_1d(lo, hi, n);
  b.base = std::make_shared<const GridModel>(b.model.as_state_space_model(), g, simulate(b.model, T, seed));
  b.traj = run_filter(*b.base, b.base->prior());
  return b;
}

py::dict trajectory_dict(const FilterTrajectory& tr) {
  const int T = tr.horizon();
  Eigen::MatrixXd pis(T + 1, tr.grid->size());
  Eigen::VectorXd means(T + 1), vars(T + 1), boundary(T + 1);
  for (int t = 0; t <= T; ++t) {
    pis.row(t) = tr.pi(t).weights().transpose();
    means[t] = tr.means[static_cast<std::size_t>(t)][0];
    vars[t] = tr.vars[static_cast<std::size_t>(t)][0];
    boundary[t] = tr.boundary_mass[static_cast<std::size_t>(t)];
  }
  py::dict d;
  d["centers"] = tr.grid->axis_centers(0);
  d["pi"] = pis;
  d["mean"] = means;
  d["var"] = vars;
  d["z"] = tr.zs;
  d["boundary_mass"] = boundary;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Grid filters with truncated likelihoods and stability diagnostics";

  py::register_exception<Error>(m, "TruncFilterError", PyExc_RuntimeError);

  m.def(
      "simulate",
      [](const std::string& spec, int T, std::uint64_t seed) {
        const ObservationRecord r = simulate(parse_model(spec).model, T, seed);
        std::vector<double> xs, ys;
        for (const Point& x : r.xs) xs.push_back(x[0]);
        for (const Point& y : r.ys) ys.push_back(y[0]);
        return py::make_tuple(xs, ys);
      },
      py::arg("model"), py::arg("T"), py::arg("seed") = 7);

  m.def(
      "run_filter",
      [](const std::string& spec, double lo, double hi, int n, int T, std::uint64_t seed) {
        return trajectory_dict(bind_model(spec, lo, hi, n, T, seed).traj);
      },
      py::arg("model") = "lingauss", py::arg("lo") = -10.0, py::arg("hi") = 10.0, py::arg("n") = 200,
      py::arg("T") = 50, py::arg("seed") = 7);

  m.def(
      "kalman",
      [](double a, double b, double su, double sv, double s0, double mu0, const std::vector<double>& ys) {
        const auto ks = kalman_recursion(KalmanParams::from({a, b, su, sv, s0, mu0}), ys);
        std::vector<double> mean, var, pred_obs_var;
        for (const KalmanState& s : ks) {
          mean.push_back(s.filt_mean);
          var.push_back(s.filt_var);
          pred_obs_var.push_back(s.pred_obs_var);
        }
        py::dict d;
        d["mean"] = mean;
        d["var"] = var;
        d["pred_obs_var"] = pred_obs_var;
        return d;
      },
      py::arg("a"), py::arg("b"), py::arg("su"), py::arg("sv"), py::arg("s0"), py::arg("mu0"), py::arg("ys"));

  m.def("expected_normalizer", &expected_normalizer, py::arg("pred_obs_var"));

  m.def(
      "truncate",
      [](const std::string& spec, double eps, double lo, double hi, int n, int T, std::uint64_t seed) {
        const Bound b = bind_model(spec, lo, hi, n, T, seed);
        const CompactSeq cs = adaptive_compacts(b.traj, eps);
        const TruncatedModel tm = build_truncated_model(b.base, b.traj, cs);
        const FilterTrajectory ct = run_filter(tm, b.base->prior());
        const auto fs = lemma_test_functions(b.base->grid());
        const Lemma1Report l1 = check_lemma1(b.traj, ct, cs, fs);
        const Lemma2Report l2 = check_lemma2(b.traj, ct, cs, eps, fs);
        py::dict d;
        d["truncated"] = trajectory_dict(ct);
        d["r1"] = l1.r1;
        d["r2"] = l1.r2;
        d["err"] = l2.err;
        d["outside"] = l2.outside;
        d["hypothesis_ok"] = l2.hypothesis_ok;
        d["bound_ok"] = l2.bound_ok;
        return d;
      },
      py::arg("model") = "lingauss", py::arg("epsilon") = 0.05, py::arg("lo") = -10.0, py::arg("hi") = 10.0,
      py::arg("n") = 200, py::arg("T") = 50, py::arg("seed") = 7);

  m.def(
      "stability",
      [](const std::string& spec, double eps, std::pair<double, double> prior_a, std::pair<double, double> prior_b,
         double lo, double hi, int n, int T, std::uint64_t seed) {
        const Bound b = bind_model(spec, lo, hi, n, T, seed);
        const CompactSeq cs = adaptive_compacts(b.traj, eps);
        const TruncatedModel tm = build_truncated_model(b.base, b.traj, cs);
        auto normal = [&](std::pair<double, double> p) {
          return discretize_density([p](const Point& x) { return normal_pdf(x[0], p.first, p.second); },
                                    b.base->grid());
        };
        const StabilityReport rep = stability_series(tm, cs, T);
        py::dict d;
        d["eps"] = rep.eps;
        d["partial_sums"] = rep.partial_sums;
        d["beta_bound"] = rep.beta_bound;
        d["tv"] = empirical_forgetting(tm, normal(prior_a), normal(prior_b));
        return d;
      },
      py::arg("model") = "lingauss", py::arg("epsilon") = 0.05, py::arg("prior_a") = std::pair{-3.0, 0.5},
      py::arg("prior_b") = std::pair{3.0, 0.5}, py::arg("lo") = -12.0, py::arg("hi") = 12.0, py::arg("n") = 240,
      py::arg("T") = 100, py::arg("seed") = 7);

  m.def(
      "dq",
      [](const std::string& a, const std::string& b, double q, double lo, double hi, int n, int T,
         std::uint64_t seed) {
        const Bound ba = bind_model(a, lo, hi, n, T, seed);
        const GridModel mb(parse_model(b).model.as_state_space_model(), ba.base->grid(), ba.base->observations());
        const DqResult d = dq_distance(ba.traj, run_filter(mb, mb.prior()), q, T);
        return py::make_tuple(d.value, d.tail);
      },
      py::arg("model_a"), py::arg("model_b"), py::arg("q") = 2.0, py::arg("lo") = -10.0, py::arg("hi") = 10.0,
      py::arg("n") = 200, py::arg("T") = 50, py::arg("seed") = 7);

  m.def(
      "densify",
      [](const std::string& spec, double eps, double q, double lo, double hi, int n, int T, std::uint64_t seed) {
        const AdditiveModel model = parse_model(spec).model;
        const DensifyResult r = densify(model, simulate(model, T, seed), eps, q, make_grid_1d(lo, hi, n));
        return certificate_json(r.certificate);
      },
      py::arg("model") = "lingauss", py::arg("epsilon") = 0.05, py::arg("q") = 2.0, py::arg("lo") = -12.0,
      py::arg("hi") = 12.0, py::arg("n") = 240, py::arg("T") = 60, py::arg("seed") = 7);

  m.def(
      "metric_axioms",
      [](int trials, std::uint64_t seed) {
        const AxiomReport r = metric_axiom_suite(trials, seed);
        py::dict d;
        d["trials"] = r.trials;
        d["max_symmetry_gap"] = r.max_symmetry_gap;
        d["max_identity"] = r.max_identity;
        d["worst_triangle_slack"] = r.worst_triangle_slack;
        d["pass"] = r.pass();
        return d;
      },
      py::arg("trials") = 50, py::arg("seed") = 3);

  m.def(
      "cli",
      [](std::vector<std::string> args) {
        args.insert(args.begin(), "truncfilter");
        std::vector<const char*> argv;
        for (const auto& a : args) argv.push_back(a.c_str());
        std::ostringstream out, err;
        const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"));
}
