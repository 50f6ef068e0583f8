#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <sstream>

#include "truncfilter/compacts.hpp"
#include "truncfilter/csv.hpp"
#include "truncfilter/metrics.hpp"
#include "truncfilter/normconst.hpp"
#include "truncfilter/stability.hpp"
#include "truncfilter/truncation.hpp"

namespace truncfilter::cli {

using nlohmann::json;

namespace {

[[noreturn]] void config_error(const std::string& what) { throw Error(ErrorCode::Config, what); }

void check_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) config_error(where + ": expected an object");
  for (const auto& [key, _] : obj.items()) {
    if (std::find_if(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }) == allowed.end()) {
      config_error(where + ": unknown key '" + key + "'");
    }
  }
}

template <class T>
void read(const json& obj, const char* key, const std::string& where, T& dst) {
  if (!obj.contains(key)) return;
  try {
    dst = obj.at(key).get<T>();
  } catch (const json::exception&) {
    config_error(where + "." + key + ": wrong type");
  }
}

std::vector<double> read_axes(const json& v, const std::string& where) {
  try {
    if (v.is_number()) return {v.get<double>()};
    return v.get<std::vector<double>>();
  } catch (const json::exception&) {
    config_error(where + ": expected a number or an array of numbers");
  }
}

void read_prior(const json& obj, const char* key, const std::string& where, double& mean, double& sd) {
  if (!obj.contains(key)) return;
  std::vector<double> v;
  read(obj, key, where, v);
  if (v.size() != 2) config_error(where + "." + key + ": expected [mean, sd]");
  mean = v[0];
  sd = v[1];
}

}  // namespace

Settings load_config(const std::string& json_text, Settings s) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    config_error(std::string("config is not valid JSON: ") + e.what());
  }
  check_keys(doc, "config", {"model", "grid", "horizon", "seed", "compacts", "stability", "metrics"});
  read(doc, "model", "config", s.model);
  read(doc, "horizon", "config", s.horizon);
  read(doc, "seed", "config", s.seed);
  if (doc.contains("grid")) {
    const json& g = doc["grid"];
    check_keys(g, "grid", {"lo", "hi", "n"});
    if (g.contains("lo")) s.grid_lo = read_axes(g["lo"], "grid.lo");
    if (g.contains("hi")) s.grid_hi = read_axes(g["hi"], "grid.hi");
    if (g.contains("n")) {
      try {
        s.grid_n = g["n"].is_number() ? std::vector<int>{g["n"].get<int>()} : g["n"].get<std::vector<int>>();
      } catch (const json::exception&) {
        config_error("grid.n: expected an integer or an array of integers");
      }
    }
  }
  if (doc.contains("compacts")) {
    const json& c = doc["compacts"];
    check_keys(c, "compacts", {"kind", "epsilon", "shape", "n"});
    read(c, "kind", "compacts", s.compacts);
    read(c, "epsilon", "compacts", s.epsilon);
    read(c, "shape", "compacts", s.shape);
    read(c, "n", "compacts", s.union_n);
  }
  if (doc.contains("stability")) {
    const json& c = doc["stability"];
    check_keys(c, "stability", {"exact", "prior_a", "prior_b"});
    read(c, "exact", "stability", s.exact);
    read_prior(c, "prior_a", "stability", s.prior_a_mean, s.prior_a_sd);
    read_prior(c, "prior_b", "stability", s.prior_b_mean, s.prior_b_sd);
  }
  if (doc.contains("metrics")) {
    const json& c = doc["metrics"];
    check_keys(c, "metrics", {"q", "densify", "epsilon", "M", "mc", "gamma"});
    read(c, "q", "metrics", s.q);
    read(c, "densify", "metrics", s.densify);
    read(c, "epsilon", "metrics", s.epsilon);
    read(c, "M", "metrics", s.M);
    read(c, "mc", "metrics", s.mc);
    if (c.contains("gamma")) {
      double g = 0.0;
      read(c, "gamma", "metrics", g);
      s.gamma = g;
    }
  }
  return s;
}

Settings load_config_file(const std::string& path, Settings base) {
  std::ifstream in(path);
  if (!in) config_error("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return load_config(ss.str(), std::move(base));
}

namespace {

// ---------------------------------------------------------------------------
// Flag handling: defaults < --config < explicit flags.

struct Flags {
  std::string config;
  std::string out;
  std::string chain_out;
  std::string config_b;
  std::string model_b;
  Settings cli;
  double gamma = 0.0;
  std::vector<std::pair<CLI::Option*, std::function<void(Settings&)>>> overrides;

  Settings resolve() const {
    Settings s = config.empty() ? Settings{} : load_config_file(config);
    for (const auto& [opt, apply] : overrides) {
      if (opt->count() > 0) apply(s);
    }
    return s;
  }
};

template <class T>
void add_override(CLI::App* app, Flags& f, const std::string& name, T Settings::*field, const std::string& help) {
  CLI::Option* opt = app->add_option(name, f.cli.*field, help);
  f.overrides.emplace_back(opt, [&f, field](Settings& s) { s.*field = f.cli.*field; });
}

void add_common(CLI::App* app, Flags& f) {
  app->add_option("--config", f.config, "JSON config file");
  app->add_option("--out", f.out, "output file (stdout when omitted)");
  add_override(app, f, "--model", &Settings::model, "model id, e.g. lingauss(0.9,1,0.7,0.7,1,0)");
  add_override(app, f, "--grid-lo", &Settings::grid_lo, "lower grid bound per axis");
  add_override(app, f, "--grid-hi", &Settings::grid_hi, "upper grid bound per axis");
  add_override(app, f, "--grid-n", &Settings::grid_n, "cells per axis");
  add_override(app, f, "--T", &Settings::horizon, "horizon");
  add_override(app, f, "--seed", &Settings::seed, "simulation seed");
  add_override(app, f, "--epsilon", &Settings::epsilon, "approximation target");
  add_override(app, f, "--compacts", &Settings::compacts, "adaptive | full");
  add_override(app, f, "--shape", &Settings::shape, "ball | union");
  add_override(app, f, "--union-n", &Settings::union_n, "balls per union cover");
  add_override(app, f, "--q", &Settings::q, "D_q weight base (> 1)");
  add_override(app, f, "--M", &Settings::M, "radius multiplier on good pairs");
  add_override(app, f, "--mc", &Settings::mc, "Monte Carlo replicates");
  CLI::Option* exact = app->add_flag("--exact", f.cli.exact, "dense contraction-chain verification");
  f.overrides.emplace_back(exact, [&f](Settings& s) { s.exact = f.cli.exact; });
  CLI::Option* dens = app->add_flag("--densify", f.cli.densify, "build the densified model and certify it");
  f.overrides.emplace_back(dens, [&f](Settings& s) { s.densify = f.cli.densify; });
  CLI::Option* gamma = app->add_option("--gamma", f.gamma, "override the normaliser floor");
  f.overrides.emplace_back(gamma, [&f](Settings& s) { s.gamma = f.gamma; });
}

// ---------------------------------------------------------------------------
// Experiment setup

struct Setup {
  Settings s;
  ModelSpec spec;
  GridPtr grid;
  ObservationRecord obs;
  std::shared_ptr<const GridModel> base;
};

GridPtr build_grid(const Settings& s) {
  const std::size_t d = s.grid_n.size();
  if (d < 1 || d > 2) config_error("grid: 1 or 2 axes supported");
  std::vector<double> lo = s.grid_lo, hi = s.grid_hi;
  if (lo.size() == 1 && d == 2) lo.push_back(lo[0]);
  if (hi.size() == 1 && d == 2) hi.push_back(hi[0]);
  if (lo.size() != d || hi.size() != d) config_error("grid: lo/hi/n must have the same number of axes");
  return make_grid(static_cast<int>(d), lo, hi, s.grid_n);
}

Setup make_setup(const Settings& s) {
  if (s.horizon < 0) config_error("horizon must be >= 0");
  Setup st{s, parse_model(s.model), build_grid(s), {}, nullptr};
  if (st.spec.model.state_dim != st.grid->dim()) {
    config_error("model '" + st.spec.id + "' has state dimension " + std::to_string(st.spec.model.state_dim) +
                 " but the grid has " + std::to_string(st.grid->dim()));
  }
  if (s.horizon > 0) {
    st.obs = simulate(st.spec.model, s.horizon, s.seed);
  } else {
    st.obs.seed = s.seed;
  }
  st.base = std::make_shared<const GridModel>(st.spec.model.as_state_space_model(), st.grid, st.obs);
  return st;
}

CompactSeq make_compacts(const Setup& st, const FilterTrajectory& traj) {
  if (st.s.compacts == "full") return CompactSeq::full(st.grid, st.s.horizon);
  if (st.s.compacts != "adaptive") config_error("compacts.kind must be 'adaptive' or 'full'");
  CoverShape shape;
  if (st.s.shape == "union") {
    shape.kind = CoverShape::Union;
    shape.n = st.s.union_n;
  } else if (st.s.shape != "ball") {
    config_error("compacts.shape must be 'ball' or 'union'");
  }
  return adaptive_compacts(traj, st.s.epsilon, shape);
}

GridMeasure normal_prior(const GridPtr& grid, double mean, double sd) {
  if (!(sd > 0.0)) config_error("prior sd must be positive");
  const int d = grid->dim();
  return discretize_density(
      [=](const Point& x) {
        double p = normal_pdf(x[0], mean, sd);
        if (d == 2) p *= normal_pdf(x[1], mean, sd);
        return p;
      },
      grid);
}

// ---------------------------------------------------------------------------
// Commands

int cmd_run(const Settings& s, std::ostream& out, std::ostream& err) {
  const Setup st = make_setup(s);
  const FilterTrajectory tr = run_filter(*st.base, st.base->prior());
  const bool two = st.grid->dim() == 2;
  if (two) {
    csv::row(out, {"t", "mean", "var", "mean_1", "var_1", "Z_t", "boundary_mass", "boundary_warning"});
  } else {
    csv::row(out, {"t", "mean", "var", "Z_t", "boundary_mass", "boundary_warning"});
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  bool warned = false;
  for (int t = 0; t <= tr.horizon(); ++t) {
    const auto i = static_cast<std::size_t>(t);
    const double z = t == 0 ? nan : tr.z(t);
    const bool warn = tr.boundary_mass[i] > 1e-6;
    warned = warned || warn;
    if (two) {
      csv::row(out, {csv::num(t), csv::num(tr.means[i][0]), csv::num(tr.vars[i][0]), csv::num(tr.means[i][1]),
                     csv::num(tr.vars[i][1]), csv::num(z), csv::num(tr.boundary_mass[i]), csv::num(warn)});
    } else {
      csv::row(out, {csv::num(t), csv::num(tr.means[i][0]), csv::num(tr.vars[i][0]), csv::num(z),
                     csv::num(tr.boundary_mass[i]), csv::num(warn)});
    }
  }
  if (warned) err << "warning: filter mass reaches the grid boundary; widen --grid-lo/--grid-hi\n";
  for (const auto& ev : tr.renormalizations) {
    err << "note: t=" << ev.t << " predicted mass " << csv::num(ev.factor) << " renormalised\n";
  }
  return kOk;
}

int cmd_truncate(const Settings& s, std::ostream& out, std::ostream& err) {
  const Setup st = make_setup(s);
  const FilterTrajectory base = run_filter(*st.base, st.base->prior());
  const CompactSeq compacts = make_compacts(st, base);
  const TruncatedModel tm = build_truncated_model(st.base, base, compacts);
  const FilterTrajectory trunc = run_truncated_filter(tm, st.base->prior());
  const std::vector<GridFunction> fs = lemma_test_functions(st.grid);
  const Lemma1Report l1 = check_lemma1(base, trunc, compacts, fs);
  const Lemma2Report l2 = check_lemma2(base, trunc, compacts, s.epsilon, fs);

  csv::row(out, {"t", "r1_max", "r2_max", "err_f_max", "mass_outside", "hypothesis_ok"});
  for (std::size_t i = 0; i < l1.r1.size(); ++i) {
    csv::row(out, {csv::num(static_cast<int>(i + 1)), csv::num(l1.r1[i]), csv::num(l1.r2[i]), csv::num(l2.err[i]),
                   csv::num(l2.outside[i]), csv::num(l2.outside[i] < s.epsilon / 2)});
  }
  err << "identities: max r1 " << csv::num(l1.max_r1) << ", max r2 " << csv::num(l1.max_r2)
      << (l1.pass() ? " (ok)" : " (FAILED)") << '\n';
  if (l2.hypothesis_ok) {
    err << "error bound: worst " << csv::num(l2.worst_error) << " vs eps " << csv::num(s.epsilon)
        << (l2.bound_ok ? " (ok)" : " (FAILED)") << '\n';
  } else {
    err << "error bound: hypothesis violated at t=" << l2.violating_t << ", bound not asserted\n";
  }
  return kOk;
}

int cmd_stability(const Settings& s, const Flags& f, std::ostream& out, std::ostream& err) {
  const Setup st = make_setup(s);
  if (s.exact && st.grid->size() > kExactCellLimit) {
    throw Error(ErrorCode::ResourceGuard, "--exact needs a grid of at most " + std::to_string(kExactCellLimit) +
                                              " cells, got " + std::to_string(st.grid->size()));
  }
  const FilterTrajectory base = run_filter(*st.base, st.base->prior());
  const CompactSeq compacts = make_compacts(st, base);
  const TruncatedModel tm = build_truncated_model(st.base, base, compacts);
  const GridMeasure a = normal_prior(st.grid, s.prior_a_mean, s.prior_a_sd);
  const GridMeasure b = normal_prior(st.grid, s.prior_b_mean, s.prior_b_sd);
  StabilityReport rep = stability_series(tm, compacts, s.horizon);
  rep.tv_curve = empirical_forgetting(tm, a, b);
  write_stability_csv(out, rep);
  err << "initial tv " << csv::num(tv_distance(a, b));
  if (!rep.tv_curve.empty()) err << ", final tv " << csv::num(rep.tv_curve.back());
  if (!rep.partial_sums.empty()) err << ", eps partial sum " << csv::num(rep.partial_sums.back());
  err << '\n';

  if (s.exact) {
    const int T = std::min(s.horizon, 8);
    const ChainReport chain = verify_appendix_a_chain(tm, compacts, T, a, b);
    err << "contraction chain (T=" << T << "): worst chain slack " << csv::num(chain.worst_chain_slack)
        << ", worst tv slack " << csv::num(chain.worst_tv_slack) << (chain.pass() ? " (ok)" : " (FAILED)") << '\n';
    if (!f.chain_out.empty()) {
      std::ofstream co(f.chain_out);
      if (!co) config_error("cannot write '" + f.chain_out + "'");
      csv::row(co, {"t", "beta_kappa", "sigma_product", "eps_product", "min_alpha_gap", "tv_phi", "tv_upsilon"});
      for (const ChainStep& c : chain.steps) {
        csv::row(co, {csv::num(c.t), csv::num(c.beta_kappa), csv::num(c.sigma_product), csv::num(c.eps_product),
                      csv::num(c.min_alpha_gap), csv::num(c.tv_phi), csv::num(c.tv_upsilon)});
      }
    }
  }
  return kOk;
}

int cmd_dq(const Settings& s, const Flags& f, std::ostream& out, std::ostream& err) {
  if (!(s.q > 1.0)) throw Error(ErrorCode::InvalidQ, "--q must exceed 1, got " + csv::num(s.q));
  const Setup st = make_setup(s);
  if (s.densify) {
    const DensifyResult d = densify(st.spec.model, st.obs, s.epsilon, s.q, st.grid);
    out << certificate_json(d.certificate) << '\n';
    const auto& eps = d.stability.eps;
    const bool positive = std::all_of(eps.begin(), eps.end(), [](double e) { return e > 0.0; });
    err << "densify: D_q upper " << csv::num(d.certificate.dq_value + d.certificate.tail) << " vs eps "
        << csv::num(s.epsilon) << (d.certificate.pass ? " (ok)" : " (FAILED)") << ", eps_t "
        << (positive ? "positive" : "NOT positive") << '\n';
    return kOk;
  }

  Settings sb = s;
  if (!f.config_b.empty()) sb = load_config_file(f.config_b, s);
  if (!f.model_b.empty()) sb.model = f.model_b;
  if (sb.grid_lo != s.grid_lo || sb.grid_hi != s.grid_hi || sb.grid_n != s.grid_n) {
    throw Error(ErrorCode::GridMismatch, "the two configurations use different grids");
  }
  if (sb.horizon != s.horizon || sb.seed != s.seed) {
    throw Error(ErrorCode::GridMismatch, "the two configurations use different observation records");
  }
  const ModelSpec spec_b = parse_model(sb.model);
  const GridModel model_b(spec_b.model.as_state_space_model(), st.grid, st.obs);
  const FilterTrajectory ta = run_filter(*st.base, st.base->prior());
  const FilterTrajectory tb = run_filter(model_b, model_b.prior());
  const DqResult d = dq_distance(ta, tb, s.q, s.horizon);
  char hash[19];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(st.obs.hash()));
  nlohmann::ordered_json j;
  j["q"] = s.q;
  j["T"] = s.horizon;
  j["dq_value"] = d.value;
  j["tail"] = d.tail;
  j["dq_upper"] = d.upper();
  j["obs_hash"] = hash;
  out << j.dump(2) << '\n';
  return kOk;
}

int cmd_normconst(const Settings& s, std::ostream& out, std::ostream& err) {
  const Setup st = make_setup(s);
  const FilterTrajectory tr = run_filter(*st.base, st.base->prior());
  const int T = tr.horizon();
  const double nan = std::numeric_limits<double>::quiet_NaN();

  std::vector<double> closed(static_cast<std::size_t>(T), nan), zk(static_cast<std::size_t>(T), nan);
  std::optional<double> gamma = s.gamma;
  if (st.spec.lingauss && st.grid->dim() == 1) {
    const auto ks = kalman_recursion(KalmanParams::from(*st.spec.lingauss), scalar_observations(st.obs));
    for (int t = 1; t <= T; ++t) {
      closed[static_cast<std::size_t>(t - 1)] = expected_normalizer(ks[static_cast<std::size_t>(t)].pred_obs_var);
      zk[static_cast<std::size_t>(t - 1)] = ks[static_cast<std::size_t>(t)].obs_density;
    }
    if (!gamma && T > 0) gamma = gamma_floor(ks);
  }
  std::optional<NormalizerMonteCarlo> mc;
  if (s.mc > 0) {
    mc = normalizer_monte_carlo(st.spec.model, st.grid, T, s.mc, s.seed);
    if (!gamma) gamma = mc->gamma;
  }
  if (!gamma) config_error("gamma: pass --gamma or --mc for models without a closed form");

  double g_sup = st.spec.model.obs_noise_pdf(Point::Zero());
  for (int t = 1; t <= T; ++t) g_sup = std::max(g_sup, st.base->potential(t).sup_norm());
  const GoodPairReport pairs = detect_good_pairs(tr.zs, *gamma, g_sup);
  std::optional<Lemma3Report> l3;
  if (mc) l3 = check_lemma3_frequency(*mc, *gamma, g_sup);

  csv::row(out, {"t", "Z_t", "E_Z_closed", "gamma", "is_good_pair", "Z_kalman", "rel_err", "mc_mean", "mc_se",
                 "lemma3_freq", "lemma3_pass"});
  for (int t = 1; t <= T; ++t) {
    const auto i = static_cast<std::size_t>(t - 1);
    const bool good = std::find(pairs.pairs.begin(), pairs.pairs.end(), t) != pairs.pairs.end();
    const double rel = std::abs(tr.zs[i] - zk[i]) / zk[i];
    std::string mm = "nan", ms = "nan", lf = "nan", lp = "nan";
    if (mc) {
      mm = csv::num(mc->mean[i]);
      ms = csv::num(mc->std_error[i]);
      lf = csv::num(l3->frequency[i]);
      lp = csv::num(l3->frequency[i] > l3->bound - 3.0 * l3->std_error[i]);
    }
    csv::row(out, {csv::num(t), csv::num(tr.zs[i]), csv::num(closed[i]), csv::num(*gamma), csv::num(good),
                   csv::num(zk[i]), csv::num(rel), mm, ms, lf, lp});
  }
  err << "gamma " << csv::num(*gamma) << ", good-pair fraction " << csv::num(pairs.fraction) << ", eps2 "
      << csv::num(pairs.eps2) << " (g_sup " << csv::num(g_sup) << " over grid and y = b(x) probes)\n";
  if (l3) {
    err << "frequency bound " << csv::num(l3->bound) << (l3->degenerate ? " (degenerate)" : "")
        << (l3->pass ? ": pass" : ": FAILED") << " (worst t=" << l3->worst_t << ")\n";
  }
  return kOk;
}

int exit_code(ErrorCode c) {
  switch (c) {
    case ErrorCode::Config:
    case ErrorCode::InvalidQ:
    case ErrorCode::InvalidBounds:
    case ErrorCode::InvalidResolution:
    case ErrorCode::InvalidArgument:
    case ErrorCode::GridMismatch:
      return kConfigError;
    case ErrorCode::ResourceGuard:
      return kResourceGuard;
    default:
      return kNumericalError;
  }
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Grid optimal filter with truncated models and stability diagnostics", "truncfilter"};
  app.require_subcommand(1);
  struct Command {
    const char* name;
    const char* help;
    std::unique_ptr<Flags> flags;
    CLI::App* sub;
  };
  std::vector<Command> cmds;
  for (auto [name, help] : {std::pair{"run", "filter trajectory CSV"},
                            std::pair{"truncate", "truncated-model identities and error bound"},
                            std::pair{"stability", "stability series and two-prior forgetting"},
                            std::pair{"dq", "D_q distance or densify certificate"},
                            std::pair{"normconst", "normalisation constants and good pairs"}}) {
    Command c{name, help, std::make_unique<Flags>(), app.add_subcommand(name, help)};
    add_common(c.sub, *c.flags);
    cmds.push_back(std::move(c));
  }
  cmds[2].sub->add_option("--chain-out", cmds[2].flags->chain_out, "CSV for the dense chain verification");
  cmds[3].sub->add_option("--config-b", cmds[3].flags->config_b, "config of the second model");
  cmds[3].sub->add_option("--model-b", cmds[3].flags->model_b, "second model id");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    for (const auto& c : cmds) {
      if (c.sub->parsed()) {
        err << "error: " << e.what() << '\n';
        return kConfigError;
      }
    }
    err << "error: " << e.what() << '\n';
    return e.get_exit_code() == 0 ? kOk : kConfigError;
  }

  try {
    for (const auto& c : cmds) {
      if (!c.sub->parsed()) continue;
      const Settings s = c.flags->resolve();
      std::ofstream file;
      if (!c.flags->out.empty()) {
        file.open(c.flags->out);
        if (!file) config_error("cannot write '" + c.flags->out + "'");
      }
      std::ostream& o = c.flags->out.empty() ? out : file;
      const std::string name = c.name;
      if (name == "run") return cmd_run(s, o, err);
      if (name == "truncate") return cmd_truncate(s, o, err);
      if (name == "stability") return cmd_stability(s, *c.flags, o, err);
      if (name == "dq") return cmd_dq(s, *c.flags, o, err);
      return cmd_normconst(s, o, err);
    }
  } catch (const ZeroLikelihoodError& e) {
    err << "error: zero likelihood at t=" << e.step() << ": " << e.what() << '\n';
    return kNumericalError;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code(e.code());
  }
  return kConfigError;
}

}  // namespace truncfilter::cli
