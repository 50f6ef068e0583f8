#include "truncfilter/ssm.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <numbers>
#include <sstream>

namespace truncfilter {

double normal_pdf(double x, double mean, double sd) {
  const double z = (x - mean) / sd;
  return std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * std::numbers::pi));
}

GridFunction StateSpaceModel::potential_at(int t, const Point& y, GridPtr grid) const {
  Eigen::VectorXd g(grid->size());
  for (int i = 0; i < grid->size(); ++i) g[i] = likelihood(t, y, grid->center(i));
  if ((g.array() < 0.0).any()) throw Error(ErrorCode::InvalidArgument, "likelihood returned a negative value");
  return GridFunction(std::move(grid), std::move(g));
}

StateSpaceModel AdditiveModel::as_state_space_model() const {
  StateSpaceModel m;
  m.name = name;
  m.state_dim = state_dim;
  m.obs_dim = obs_dim;
  m.prior_pdf = prior_pdf;
  m.time_homogeneous = time_homogeneous;
  m.transition_density = [a = transition, pu = state_noise_pdf](int t, const Point& x, const Point& xp) {
    return pu(x - a(t, xp));
  };
  m.likelihood = [b = observation, pv = obs_noise_pdf](int t, const Point& y, const Point& x) {
    return pv(y - b(t, x));
  };
  return m;
}

std::uint64_t ObservationRecord::hash() const {
  std::uint64_t h = 1469598103934665603ULL;
  auto feed = [&h](double v) {
    unsigned char bytes[sizeof(double)];
    std::memcpy(bytes, &v, sizeof(double));
    for (unsigned char b : bytes) {
      h ^= b;
      h *= 1099511628211ULL;
    }
  };
  for (const Point& y : ys) {
    feed(y[0]);
    feed(y[1]);
  }
  return h;
}

ObservationRecord simulate(const AdditiveModel& model, int horizon, std::uint64_t seed) {
  if (horizon < 1) throw Error(ErrorCode::InvalidArgument, "simulate: horizon must be >= 1");
  Rng rng(seed);
  ObservationRecord rec;
  rec.seed = seed;
  rec.xs.reserve(static_cast<std::size_t>(horizon) + 1);
  rec.ys.reserve(static_cast<std::size_t>(horizon));
  Point x = model.prior_sampler(rng);
  rec.xs.push_back(x);
  for (int t = 1; t <= horizon; ++t) {
    x = model.transition(t, x) + model.state_noise_sampler(rng);
    const Point y = model.observation(t, x) + model.obs_noise_sampler(rng);
    rec.xs.push_back(x);
    rec.ys.push_back(y);
  }
  return rec;
}

KernelMatrix normalize_kernel(GridPtr grid, Eigen::MatrixXd raw) {
  const int n = grid->size();
  if (raw.rows() != n || raw.cols() != n) throw Error(ErrorCode::GridMismatch, "kernel matrix shape differs from grid");
  KernelMatrix k;
  k.grid = std::move(grid);
  k.lost_mass.resize(n);
  for (int j = 0; j < n; ++j) {
    const double s = raw.col(j).sum();
    if (!(s > 0.0)) {
      throw Error(ErrorCode::ZeroColumn,
                  "source cell " + std::to_string(j) + " has no transition mass on the grid; enlarge the domain");
    }
    k.lost_mass[j] = 1.0 - s;
    raw.col(j) /= s;
  }
  k.matrix = std::move(raw);
  return k;
}

KernelMatrix kernel_matrix(const StateSpaceModel& model, int t, GridPtr grid) {
  const int n = grid->size();
  const double vol = grid->cell_volume();
  Eigen::MatrixXd raw(n, n);
  for (int j = 0; j < n; ++j) {
    const Point& src = grid->center(j);
    for (int i = 0; i < n; ++i) {
      const double k = model.transition_density(t, grid->center(i), src);
      if (!(k >= 0.0) || !std::isfinite(k)) {
        throw Error(ErrorCode::InvalidArgument, "transition density must be finite and nonnegative");
      }
      raw(i, j) = k * vol;
    }
  }
  return normalize_kernel(std::move(grid), std::move(raw));
}

// ---------------------------------------------------------------------------
// Zoo

namespace {

PointDensity isotropic_normal(int dim, double sd) {
  return [dim, sd](const Point& z) {
    double p = normal_pdf(z[0], 0.0, sd);
    if (dim == 2) p *= normal_pdf(z[1], 0.0, sd);
    return p;
  };
}

PointSampler isotropic_sampler(int dim, double mean, double sd) {
  return [dim, mean, sd](Rng& rng) {
    Point p = Point::Zero();
    p[0] = rng.normal(mean, sd);
    if (dim == 2) p[1] = rng.normal(mean, sd);
    return p;
  };
}

// Radial profile of an isotropic Gaussian and its inverse on (0, peak].
void set_gaussian_envelope(AdditiveModel& m, int dim, double sd) {
  const double peak = std::pow(1.0 / (sd * std::sqrt(2.0 * std::numbers::pi)), dim);
  m.noise_upper_bound = peak;
  m.envelope = [peak, sd](double r) { return peak * std::exp(-0.5 * r * r / (sd * sd)); };
  m.envelope_inverse = [peak, sd](double s) {
    if (s >= peak) return 0.0;
    if (s <= 0.0) return std::numeric_limits<double>::infinity();
    return sd * std::sqrt(-2.0 * std::log(s / peak));
  };
}

}  // namespace

AdditiveModel lingauss(const LinGaussParams& p, int dim) {
  if (dim != 1 && dim != 2) throw Error(ErrorCode::InvalidArgument, "lingauss: dim must be 1 or 2");
  AdditiveModel m;
  m.name = dim == 1 ? "lingauss" : "lingauss2d";
  m.state_dim = dim;
  m.obs_dim = dim;
  m.transition = [a = p.a](int, const Point& x) { return Point(a * x); };
  m.observation = [b = p.b](int, const Point& x) { return Point(b * x); };
  m.state_noise_pdf = isotropic_normal(dim, p.su);
  m.state_noise_sampler = isotropic_sampler(dim, 0.0, p.su);
  m.obs_noise_pdf = isotropic_normal(dim, p.sv);
  m.obs_noise_sampler = isotropic_sampler(dim, 0.0, p.sv);
  m.prior_pdf = [dim, mu0 = p.mu0, s0 = p.s0](const Point& x) {
    double v = normal_pdf(x[0], mu0, s0);
    if (dim == 2) v *= normal_pdf(x[1], mu0, s0);
    return v;
  };
  m.prior_sampler = isotropic_sampler(dim, p.mu0, p.s0);
  m.lipschitz_bound = std::abs(p.a);
  if (p.su > 0.0) set_gaussian_envelope(m, dim, p.su);
  return m;
}

AdditiveModel absobs(double su, double sv, double s0) {
  AdditiveModel m = lingauss(LinGaussParams{1.0, 1.0, su, sv, s0, 0.0});
  m.name = "absobs";
  m.observation = [](int, const Point& x) { return Point(std::abs(x[0]), 0.0); };
  return m;
}

AdditiveModel stochgrowth(double su, double sv, double s0) {
  AdditiveModel m = lingauss(LinGaussParams{0.5, 1.0, su, sv, s0, 0.0});
  m.name = "stochgrowth";
  m.time_homogeneous = false;
  m.transition = [](int t, const Point& x) {
    const double v = x[0];
    return Point(0.5 * v + 25.0 * v / (1.0 + v * v) + 8.0 * std::cos(1.2 * t), 0.0);
  };
  m.observation = [](int, const Point& x) { return Point(x[0] * x[0] / 20.0, 0.0); };
  // sup |d/dx (x/2 + 25x/(1+x^2))| is attained at x = 0.
  m.lipschitz_bound = 25.5;
  return m;
}

ModelSpec parse_model(const std::string& text) {
  std::string s;
  for (char c : text) {
    if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(c);
  }
  std::string id = s;
  std::vector<double> args;
  if (const auto open = s.find('('); open != std::string::npos) {
    if (s.back() != ')') throw Error(ErrorCode::Config, "model: missing ')' in '" + text + "'");
    id = s.substr(0, open);
    const std::string inner = s.substr(open + 1, s.size() - open - 2);
    std::stringstream ss(inner);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      if (tok.empty()) continue;
      try {
        std::size_t used = 0;
        args.push_back(std::stod(tok, &used));
        if (used != tok.size()) throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        throw Error(ErrorCode::Config, "model: bad argument '" + tok + "' in '" + text + "'");
      }
    }
  }
  auto arg = [&args](std::size_t i, double fallback) { return i < args.size() ? args[i] : fallback; };
  auto max_args = [&](std::size_t n) {
    if (args.size() > n) {
      throw Error(ErrorCode::Config, "model: '" + id + "' takes at most " + std::to_string(n) + " arguments");
    }
  };

  ModelSpec spec;
  spec.id = id;
  spec.args = args;
  if (id == "lingauss" || id == "lingauss2d") {
    max_args(6);
    LinGaussParams p;
    p.a = arg(0, p.a);
    p.b = arg(1, p.b);
    p.su = arg(2, p.su);
    p.sv = arg(3, p.sv);
    p.s0 = arg(4, p.s0);
    p.mu0 = arg(5, p.mu0);
    if (p.su <= 0.0 || p.sv <= 0.0 || p.s0 <= 0.0) {
      throw Error(ErrorCode::Config, "model: lingauss noise scales must be positive");
    }
    spec.model = lingauss(p, id == "lingauss" ? 1 : 2);
    spec.lingauss = p;
  } else if (id == "absobs") {
    max_args(3);
    const double su = arg(0, 0.5), sv = arg(1, 0.5), s0 = arg(2, 1.0);
    if (su <= 0.0 || sv <= 0.0 || s0 <= 0.0) throw Error(ErrorCode::Config, "model: absobs scales must be positive");
    spec.model = absobs(su, sv, s0);
  } else if (id == "stochgrowth") {
    max_args(3);
    spec.model = stochgrowth(arg(0, std::sqrt(10.0)), arg(1, 1.0), arg(2, std::sqrt(5.0)));
  } else if (id.empty()) {
    throw Error(ErrorCode::Config, "model: missing model id");
  } else {
    throw Error(ErrorCode::Config, "model: unknown model id '" + id + "'");
  }
  return spec;
}

// ---------------------------------------------------------------------------
// Probes

namespace {

int probe_steps(const AdditiveModel& m, int T) { return m.time_homogeneous ? 1 : std::max(1, T); }

template <class Fn>
void for_adjacent_pairs(const StateGrid& grid, Fn&& fn) {
  for (int i = 0; i < grid.size(); ++i) {
    for (int j : grid.neighbours(i)) {
      if (j > i) fn(i, j);
    }
  }
}

}  // namespace

LipschitzReport check_ma1_lipschitz(const AdditiveModel& model, const StateGrid& grid, int T) {
  LipschitzReport r;
  r.declared = model.lipschitz_bound;
  for (int t = 1; t <= probe_steps(model, T); ++t) {
    for_adjacent_pairs(grid, [&](int i, int j) {
      const Point& x = grid.center(i);
      const Point& xp = grid.center(j);
      const double q = (model.transition(t, x) - model.transition(t, xp)).norm() / (x - xp).norm();
      r.estimate = std::max(r.estimate, q);
    });
  }
  r.violated = r.estimate > r.declared * (1.0 + 1e-9);
  return r;
}

EnvelopeReport check_ma2_envelope(const AdditiveModel& model, const StateGrid& grid, int T) {
  if (!model.envelope) throw Error(ErrorCode::InvalidArgument, "check_ma2_envelope: model has no envelope");
  EnvelopeReport r;
  r.worst_ratio = std::numeric_limits<double>::infinity();
  for (int t = 1; t <= probe_steps(model, T); ++t) {
    for (int j = 0; j < grid.size(); ++j) {
      const Point ax = model.transition(t, grid.center(j));
      for (int i = 0; i < grid.size(); ++i) {
        const Point z = grid.center(i) - ax;
        const double s = model.envelope(z.norm());
        if (!(s > 0.0)) continue;
        const double q = model.state_noise_pdf(z) / s;
        if (q < r.worst_ratio) {
          r.worst_ratio = q;
          r.witness_t = t;
          r.witness_x = grid.center(i);
          r.witness_x_prev = grid.center(j);
        }
      }
    }
  }
  r.pass = r.worst_ratio >= 1.0 - 1e-12;
  r.caveat = "certified on the probed grid pairs only; the limit s(r) -> 0 as r -> infinity is not checked";
  return r;
}

EnvelopeReport probe_envelope_radial(const PointDensity& pu, const std::function<double(double)>& s,
                                     double r_max, int probes) {
  EnvelopeReport r;
  r.worst_ratio = std::numeric_limits<double>::infinity();
  for (int k = 0; k < probes; ++k) {
    const double rad = r_max * k / (probes - 1);
    const double sv = s(rad);
    if (!(sv > 0.0)) continue;
    const double q = pu(Point(rad, 0.0)) / sv;
    if (q < r.worst_ratio) {
      r.worst_ratio = q;
      r.witness_x = Point(rad, 0.0);
    }
  }
  r.pass = r.worst_ratio >= 1.0 - 1e-12;
  r.caveat = "radial sweep on [0, r_max] only";
  return r;
}

UpperBoundReport check_ma3_upper(const AdditiveModel& model, const StateGrid& grid, int T) {
  UpperBoundReport r;
  r.declared = model.noise_upper_bound;
  r.sup = model.state_noise_pdf(Point::Zero());
  for (int t = 1; t <= probe_steps(model, T); ++t) {
    for (int j = 0; j < grid.size(); ++j) {
      const Point ax = model.transition(t, grid.center(j));
      for (int i = 0; i < grid.size(); ++i) r.sup = std::max(r.sup, model.state_noise_pdf(grid.center(i) - ax));
    }
  }
  r.pass = r.sup <= r.declared * (1.0 + 1e-12);
  return r;
}

Prop1Report check_prop1_conditions(const StateSpaceModel& model, const StateGrid& grid,
                                   const StateGrid& obs_grid, int T,
                                   std::span<const GridMeasure> predictives, double eps0, double c_dx) {
  Prop1Report r;
  r.m_hat = std::numeric_limits<double>::infinity();
  const int steps = model.time_homogeneous ? 1 : std::max(1, T);
  for (int t = 1; t <= steps; ++t) {
    for (int i = 0; i < grid.size(); ++i) {
      const Point& x = grid.center(i);
      double best = 0.0;
      for (int k = 0; k < obs_grid.size(); ++k) best = std::max(best, model.likelihood(t, obs_grid.center(k), x));
      r.m_hat = std::min(r.m_hat, best);
      for_adjacent_pairs(obs_grid, [&](int k, int l) {
        const Point& y = obs_grid.center(k);
        const Point& yp = obs_grid.center(l);
        const double d = std::abs(model.likelihood(t, y, x) - model.likelihood(t, yp, x)) / (y - yp).norm();
        r.lipschitz_y = std::max(r.lipschitz_y, d);
      });
    }
    for (int k = 0; k < obs_grid.size(); ++k) {
      const Point& y = obs_grid.center(k);
      for_adjacent_pairs(grid, [&](int i, int j) {
        const Point& x = grid.center(i);
        const Point& xp = grid.center(j);
        const double d = std::abs(model.likelihood(t, y, x) - model.likelihood(t, y, xp)) / (x - xp).norm();
        r.lipschitz_x = std::max(r.lipschitz_x, d);
      });
    }
  }
  if (!predictives.empty()) {
    r.c3_checked = true;
    r.c3_threshold = c_dx * std::pow(eps0, grid.dim() + 1);
    r.c3_min_ball_mass = std::numeric_limits<double>::infinity();
    for (const GridMeasure& xi : predictives) {
      double best = 0.0;
      for (int i = 0; i < grid.size(); ++i) {
        double m = 0.0;
        for (int j = 0; j < grid.size(); ++j) {
          if ((grid.center(j) - grid.center(i)).norm() <= eps0) m += xi[j];
        }
        best = std::max(best, m);
      }
      r.c3_min_ball_mass = std::min(r.c3_min_ball_mass, best);
    }
    r.c3_pass = r.c3_min_ball_mass >= r.c3_threshold;
  }
  return r;
}

}  // namespace truncfilter
