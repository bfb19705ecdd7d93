#pragma once

#include <cmath>

namespace chainlab {

struct SinCos {
  double sin;
  double cos;
};

/// Sine and cosine together, within about one ulp of the correctly rounded
/// values. Faster than separate libm calls for the moderate angles drawn by
/// the noise flows; large arguments fall back to libm.
inline SinCos sincos(double x) {
  if (!(std::fabs(x) < 1.0e5)) return {std::sin(x), std::cos(x)};
  constexpr double kTwoOverPi = 6.36619772367581382433e-01;
  constexpr double kPio2Hi = 1.57079632673412561417e+00;
  constexpr double kPio2Mid = 6.07710050630396597660e-11;
  constexpr double kPio2Lo = 2.02226624871116645580e-21;
  const double k = std::nearbyint(x * kTwoOverPi);
  const double y = ((x - k * kPio2Hi) - k * kPio2Mid) - k * kPio2Lo;
  const double z = y * y;

  constexpr double s1 = -1.66666666666666324348e-01, s2 = 8.33333333332248946124e-03,
                   s3 = -1.98412698298579493134e-04, s4 = 2.75573137070700676789e-06,
                   s5 = -2.50507602534068634195e-08, s6 = 1.58969099521155010221e-10;
  const double sp = s2 + z * (s3 + z * (s4 + z * (s5 + z * s6)));
  const double s = y + y * z * (s1 + z * sp);

  constexpr double c1 = 4.16666666666666019037e-02, c2 = -1.38888888888741095749e-03,
                   c3 = 2.48015872894767294178e-05, c4 = -2.75573143513906633035e-07,
                   c5 = 2.08757232129817482790e-09, c6 = -1.13596475577881948265e-11;
  const double cp = z * (c1 + z * (c2 + z * (c3 + z * (c4 + z * (c5 + z * c6)))));
  const double hz = 0.5 * z;
  const double w = 1.0 - hz;
  const double c = w + (((1.0 - w) - hz) + z * cp);

  switch (static_cast<long long>(k) & 3) {
    case 0: return {s, c};
    case 1: return {c, -s};
    case 2: return {-s, -c};
    default: return {-c, s};
  }
}

}  // namespace chainlab
