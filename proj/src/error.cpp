#include "truncfilter/error.hpp"

namespace truncfilter {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidBounds: return "InvalidBounds";
    case ErrorCode::InvalidResolution: return "InvalidResolution";
    case ErrorCode::ZeroMass: return "ZeroMass";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::ZeroColumn: return "ZeroColumn";
    case ErrorCode::ZeroLikelihood: return "ZeroLikelihood";
    case ErrorCode::CenterDriftViolation: return "CenterDriftViolation";
    case ErrorCode::CannotCover: return "CannotCover";
    case ErrorCode::DegenerateRatio: return "DegenerateRatio";
    case ErrorCode::InvalidQ: return "InvalidQ";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Config: return "ConfigError";
    case ErrorCode::ResourceGuard: return "ResourceGuard";
  }
  return "Unknown";
}

}  // namespace truncfilter
