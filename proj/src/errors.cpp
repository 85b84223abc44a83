#include "speclaw/errors.hpp"

namespace speclaw {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidProfile: return "InvalidProfile";
    case ErrorKind::InvalidSpec: return "InvalidSpec";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::NonConvergence: return "NonConvergence";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::OutOfRange: return "OutOfRange";
    case ErrorKind::DegenerateVariance: return "DegenerateVariance";
    case ErrorKind::MissingVectors: return "MissingVectors";
    case ErrorKind::EmptyBulk: return "EmptyBulk";
    case ErrorKind::AssertionFailure: return "AssertionFailure";
    case ErrorKind::Config: return "Config";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace speclaw
