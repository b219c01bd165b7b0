#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>

namespace polylab::horner {

// Error-free transformations. two_prod relies on a correctly rounded fma.
inline void two_sum(double a, double b, double& s, double& e) noexcept {
  s = a + b;
  const double z = s - a;
  e = (a - (s - z)) + (b - z);
}

inline void two_prod(double a, double b, double& p, double& e) noexcept {
  p = a * b;
  e = std::fma(a, b, -p);
}

/// gamma_k = k u / (1 - k u), the standard accumulated-rounding factor.
constexpr double gamma(std::size_t k, double unit_roundoff = 0x1.0p-53) noexcept {
  const double ku = static_cast<double>(k) * unit_roundoff;
  return ku / (1.0 - ku);
}

/// Plain Horner; coefficients in ascending order (coeffs[i] multiplies x^i).
template <class Real>
Real evaluate(std::span<const Real> coeffs, const Real& x) {
  Real s(0);
  for (std::size_t i = coeffs.size(); i-- > 0;) s = s * x + coeffs[i];
  return s;
}

/// Sum of |a_i| |x|^i, the condition-number numerator of Horner.
template <class Real>
Real evaluate_abs(std::span<const Real> coeffs, const Real& x) {
  using std::abs;
  const Real ax = abs(x);
  Real s(0);
  for (std::size_t i = coeffs.size(); i-- > 0;) s = s * ax + abs(coeffs[i]);
  return s;
}

/// Compensated Horner (Graillat, Langlois, Louvet). The result is as accurate
/// as plain Horner in twice the working precision, then rounded:
///   |res - p(x)| <= u |p(x)| + gamma_{2n}^2 * sum |a_i||x|^i.
inline double compensated(std::span<const double> coeffs, double x) noexcept {
  if (coeffs.empty()) return 0.0;
  const std::size_t n = coeffs.size() - 1;
  double s = coeffs[n];
  double c = 0.0;
  for (std::size_t i = n; i-- > 0;) {
    double p, pi, sigma;
    two_prod(s, x, p, pi);
    two_sum(p, coeffs[i], s, sigma);
    c = c * x + (pi + sigma);
  }
  return s + c;
}

/// A priori bound on |compensated(coeffs, x) - p(x)| given the computed value.
inline double compensated_error_bound(std::span<const double> coeffs, double x,
                                      double computed) noexcept {
  constexpr double u = 0x1.0p-53;
  const std::size_t n = coeffs.empty() ? 0 : coeffs.size() - 1;
  const double g = gamma(2 * n + 2);
  const double cond = evaluate_abs(coeffs, x) * (1.0 + gamma(2 * n + 2));
  return (u * std::abs(computed) + g * g * cond) / (1.0 - u) * 2.0;
}

}  // namespace polylab::horner
