// Independent high-precision standard normal CDF via adaptive Simpson
// quadrature of the density — used to check the erfc-based implementation.

#ifndef RML_TESTS_SUPPORT_NORMAL_QUAD_HPP
#define RML_TESTS_SUPPORT_NORMAL_QUAD_HPP

#include <cmath>

namespace rml::testing {

inline double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * 3.14159265358979323846);
}

inline double simpson(double a, double b) {
  double m = 0.5 * (a + b);
  return (b - a) / 6.0 * (normal_pdf(a) + 4.0 * normal_pdf(m) + normal_pdf(b));
}

inline double adaptive_simpson(double a, double b, double whole, double eps,
                               int depth) {
  double m = 0.5 * (a + b);
  double left = simpson(a, m);
  double right = simpson(m, b);
  if (depth <= 0 || std::abs(left + right - whole) < 15.0 * eps)
    return left + right + (left + right - whole) / 15.0;
  return adaptive_simpson(a, m, left, eps / 2.0, depth - 1) +
         adaptive_simpson(m, b, right, eps / 2.0, depth - 1);
}

/// Phi(x) to ~1e-10 without touching erf/erfc.
inline double normal_cdf_quadrature(double x) {
  if (x < -12.0) return 0.0;
  if (x > 12.0) return 1.0;
  double lo = -12.0;
  return adaptive_simpson(lo, x, simpson(lo, x), 1e-12, 30);
}

}  // namespace rml::testing

#endif  // RML_TESTS_SUPPORT_NORMAL_QUAD_HPP
