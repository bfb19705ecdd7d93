#include "chainlab/quadrature.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "chainlab/error.hpp"

namespace chainlab {

double integrate(const std::function<double(double)>& f, double a, double b, double abs_tol) {
  using boost::math::quadrature::gauss_kronrod;
  double error = 0.0;
  double l1 = 0.0;
  // Relative target far below abs_tol so nearby parameter values (finite
  // differences in beta) see the same refinement pattern.
  const double value = gauss_kronrod<double, 61>::integrate(f, a, b, 20, 1e-15, &error, &l1);
  if (!std::isfinite(value) || error > std::max(abs_tol, 1e-14 * l1)) {
    std::ostringstream msg;
    msg << "quadrature did not converge on [" << a << ", " << b << "]: estimate " << value
        << ", error " << error << " > " << abs_tol;
    throw QuadratureError(msg.str());
  }
  return value;
}

}  // namespace chainlab
