#pragma once

#include <functional>

namespace chainlab {

/// Adaptive Gauss-Kronrod (61 point) integration on [a, b].
/// Throws QuadratureError naming the interval when the error estimate
/// exceeds max(abs_tol, 1e-14 * integral of abs(f)) after the refinement budget is exhausted.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double abs_tol = 1e-12);

}  // namespace chainlab
