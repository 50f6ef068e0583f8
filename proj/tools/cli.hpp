#ifndef TRUNCFILTER_TOOLS_CLI_HPP
#define TRUNCFILTER_TOOLS_CLI_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace truncfilter::cli {

/// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kConfigError = 2;
inline constexpr int kNumericalError = 3;
inline constexpr int kResourceGuard = 4;

struct Settings {
  std::string model = "lingauss";
  std::vector<double> grid_lo{-10.0};
  std::vector<double> grid_hi{10.0};
  std::vector<int> grid_n{200};
  int horizon = 50;
  std::uint64_t seed = 7;

  std::string compacts = "adaptive";  // adaptive | full
  double epsilon = 0.05;
  std::string shape = "ball";  // ball | union
  int union_n = 2;

  bool exact = false;
  double prior_a_mean = -3.0, prior_a_sd = 0.5;
  double prior_b_mean = 3.0, prior_b_sd = 0.5;

  double q = 2.0;
  bool densify = false;
  double M = 4.0;
  int mc = 0;
  std::optional<double> gamma;
};

/// Reads a JSON config document over `base`; unknown keys are errors.
Settings load_config(const std::string& json_text, Settings base = {});
Settings load_config_file(const std::string& path, Settings base = {});

/// Entry point shared by the executable and the tests.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace truncfilter::cli

#endif
