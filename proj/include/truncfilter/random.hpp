#ifndef TRUNCFILTER_RANDOM_HPP
#define TRUNCFILTER_RANDOM_HPP

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace truncfilter {

/// SplitMix64 finaliser; used to derive independent stream seeds.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Random stream for one (seed, stream) pair. Streams with different ids are
/// statistically independent, so replicate `r` of a Monte Carlo study always
/// draws the same numbers no matter which thread runs it.
///
/// Normal variates use Box-Muller on the raw 64-bit engine output instead of
/// std::normal_distribution, whose algorithm is implementation defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0)
      : key_(mix64(seed ^ mix64(stream + 0x5851f42d4c957f2dULL))), engine_(key_) {}

  /// Child stream, independent of the parent's position.
  Rng split(std::uint64_t stream) const { return Rng(key_, stream); }

  /// Uniform on the open interval (0, 1).
  double uniform() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  double normal(double mean, double sd) { return mean + sd * normal(); }

  /// Standard Cauchy variate.
  double cauchy() { return std::tan(std::numbers::pi * (uniform() - 0.5)); }

 private:
  std::uint64_t key_;
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace truncfilter

#endif
