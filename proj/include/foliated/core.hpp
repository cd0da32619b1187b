#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace foliated {

/// A foliation-invariant function, stored as its values on the quotient nodes.
using Field = Eigen::VectorXd;

enum class ErrorKind {
  InvalidArgument,
  UnknownPreset,
  DimensionMismatch,
  Degenerate,
  UnderSampled,
  NonCoercive,
  SingularSystem,
  NonConvergence,
  LineSearch,
  ParameterDomain,
  Io,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& what);
  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& what);

inline void require(bool condition, ErrorKind kind, const std::string& what) {
  if (!condition) fail(kind, what);
}

/// Surface area of the unit sphere S^k in R^{k+1}.
double sphere_volume(int k);

}  // namespace foliated
