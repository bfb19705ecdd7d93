#pragma once

#include <stdexcept>
#include <string>

namespace chainlab {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Potential violates one of the standing assumptions (symmetry, uniform convexity).
class AssumptionError : public Error {
 public:
  using Error::Error;
};

/// Adaptive quadrature failed to reach the requested tolerance.
class QuadratureError : public Error {
 public:
  using Error::Error;
};

/// Scalar root finding (inverse energy maps, beta(E)) did not converge.
class RootFindError : public Error {
 public:
  using Error::Error;
};

/// A symbolic operation would need a letter outside {p, r, V, V', V''}.
class AlphabetOverflow : public Error {
 public:
  using Error::Error;
};

/// Estimator could not produce a fit (too few points, bad window, guard violated).
class FitError : public Error {
 public:
  using Error::Error;
};

/// Invalid run configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace chainlab
