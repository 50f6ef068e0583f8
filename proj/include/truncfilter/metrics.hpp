#ifndef TRUNCFILTER_METRICS_HPP
#define TRUNCFILTER_METRICS_HPP

#include <cmath>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "truncfilter/stability.hpp"

namespace truncfilter {

/// Half the L1 distance between two measures on one grid.
double tv_distance(const GridMeasure& mu, const GridMeasure& nu);

/// sum_{n > T} q^{-n} = 1 / (q^T (q - 1)).
double dq_tail(double q, int T);

struct DqResult {
  double q = 2.0;
  int T = 0;
  std::vector<double> tv;       // index t-1
  std::vector<double> partial;  // index t-1
  double value = 0.0;
  double tail = 0.0;
  double upper() const { return value + tail; }
};

/// sum_{t=1..T} q^{-t} D_tv(pi_t, pi'_t) with the geometric tail bound.
/// Throws InvalidQ for q <= 1.
DqResult dq_distance(const FilterTrajectory& a, const FilterTrajectory& b, double q, int T);

/// Rows (t, tv_t, q_weight, partial_dq).
void write_dq_csv(std::ostream& os, const DqResult& d);

struct AxiomReport {
  int trials = 0;
  double max_symmetry_gap = 0.0;
  double max_identity = 0.0;
  double worst_triangle_slack = 0.0;  // min of D(A,B) + D(B,C) + 2 tail - D(A,C)
  int triangle_violations = 0;
  bool pass() const { return max_symmetry_gap <= 1e-12 && max_identity == 0.0 && triangle_violations == 0; }
};

/// Random linear-Gaussian triples on a shared grid and observation record.
AxiomReport metric_axiom_suite(int trials, std::uint64_t seed, double q = 2.0, int T = 20);

struct DensifyOptions {
  /// Ball radius profile r_t; strictly increasing.
  std::function<double(int)> radius = [](int t) { return std::log(t + 2.0); };
};

struct DensifyCertificate {
  double epsilon = 0.0;
  double q = 2.0;
  int T0 = 0;       // tail(T0) < eps / 2
  int T = 0;        // reshaping horizon, T0 + 1
  int horizon = 0;  // steps compared
  double M = 0.0;
  double L = 0.0;
  double dq_value = 0.0;
  double tail = 0.0;
  double max_tv = 0.0;
  std::uint64_t obs_hash = 0;
  bool pass = false;  // dq_value + tail < epsilon
};

struct DensifyResult {
  std::shared_ptr<const TruncatedModel> model;
  FilterTrajectory base;
  FilterTrajectory approx;
  DqResult dq;
  StabilityReport stability;
  DensifyCertificate certificate;
};

/// Builds the finite-horizon truncated model within D_q distance eps of the
/// base model and measures the distance on the record.
DensifyResult densify(const AdditiveModel& model, const ObservationRecord& obs, double eps, double q, GridPtr grid,
                      const DensifyOptions& opts = {});

std::string certificate_json(const DensifyCertificate& c);

}  // namespace truncfilter

#endif
