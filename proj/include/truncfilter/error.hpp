#ifndef TRUNCFILTER_ERROR_HPP
#define TRUNCFILTER_ERROR_HPP

#include <stdexcept>
#include <string>

namespace truncfilter {

enum class ErrorCode {
  InvalidBounds,
  InvalidResolution,
  ZeroMass,
  GridMismatch,
  ZeroColumn,
  ZeroLikelihood,
  CenterDriftViolation,
  CannotCover,
  DegenerateRatio,
  InvalidQ,
  InvalidArgument,
  Config,
  ResourceGuard,
};

const char* to_string(ErrorCode code);

/// Base exception for every failure raised by the library.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Raised when (g_t, xi_t) vanishes; `step` is the offending time index.
class ZeroLikelihoodError : public Error {
 public:
  ZeroLikelihoodError(int step, const std::string& what)
      : Error(ErrorCode::ZeroLikelihood, "t=" + std::to_string(step) + ": " + what), step_(step) {}

  int step() const noexcept { return step_; }

 private:
  int step_;
};

/// Raised by ball_sequence when ||l_t - a_t(l_{t-1})|| >= M L r_t.
class CenterDriftError : public Error {
 public:
  CenterDriftError(int step, double drift, double allowed)
      : Error(ErrorCode::CenterDriftViolation,
              "t=" + std::to_string(step) + " drift=" + std::to_string(drift) +
                  " allowed=" + std::to_string(allowed)),
        step_(step) {}

  int step() const noexcept { return step_; }

 private:
  int step_;
};

}  // namespace truncfilter

#endif
