#include "foliated/core.hpp"

#include <cmath>
#include <numbers>

namespace foliated {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid-argument";
    case ErrorKind::UnknownPreset: return "unknown-preset";
    case ErrorKind::DimensionMismatch: return "dimension-mismatch";
    case ErrorKind::Degenerate: return "degenerate";
    case ErrorKind::UnderSampled: return "under-sampled";
    case ErrorKind::NonCoercive: return "non-coercive";
    case ErrorKind::SingularSystem: return "singular-system";
    case ErrorKind::NonConvergence: return "non-convergence";
    case ErrorKind::LineSearch: return "line-search";
    case ErrorKind::ParameterDomain: return "parameter-domain";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

Error::Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

double sphere_volume(int k) {
  const double half = 0.5 * (k + 1);
  return 2.0 * std::pow(std::numbers::pi, half) / std::tgamma(half);
}

}  // namespace foliated
