#pragma once

#include "polylab/ensemble.hpp"
#include "polylab/quadrature.hpp"

namespace polylab {

/// A = sum c_i^2 t^{2i}, B = sum i c_i^2 t^{2i}, C = sum i^2 c_i^2 t^{2i}.
struct MomentSums {
  double A = 0.0;
  double B = 0.0;
  double C = 0.0;
  bool overflow = false;
};

MomentSums moment_sums(const CoefficientScheme& scheme, double t);

/// Var P_n(x) = sum c_i^2 x^{2i}, Neumaier-compensated.
EvalResult variance_V(const CoefficientScheme& scheme, double x);

/// E P(x)P(y) / sqrt(V(x) V(y)). Throws ValidationError for zero variance and
/// NumericsError when |r| exceeds 1 by more than 1e-12.
double correlation_r(const CoefficientScheme& scheme, double x, double y);

/// 1 - r(x, y)^2 without forming 1 - r.
double one_minus_r_squared(const CoefficientScheme& scheme, double x, double y);

/// Kac-Rice density of real zeros of the Gaussian polynomial at t.
double kacrice_integrand(const CoefficientScheme& scheme, double t);

/// Expected number of real zeros on (a, b), -1 <= a <= b <= 1.
QuadResult expected_roots(const CoefficientScheme& scheme, double a, double b, const QuadConfig& quad = {});

/// Expected number of real zeros on (a, b) for any a < b, endpoints possibly
/// infinite. The parts outside [-1, 1] use the reversed scheme on (1/b, 1/a).
QuadResult expected_real_roots(const CoefficientScheme& scheme, double a, double b, const QuadConfig& quad = {});

/// (1 - x^2)^{-(2 rho + 1)}.
double hyperbolic_variance_closed(double rho, double x);

/// Ratio V(x) (1 - x + 1/n)^{2 rho + 1} scanned over [1 - 1/C, 1].
struct EnvelopeCalibration {
  double C = 10.0;
  double kappa_lo = 0.0;
  double kappa_hi = 0.0;
};

EnvelopeCalibration calibrate_envelope(const CoefficientScheme& scheme, double C = 10.0);

struct VarianceBracket {
  double low = 0.0;
  double high = 0.0;
};

VarianceBracket envelope_variance_bound(const CoefficientScheme& scheme, double x, const EnvelopeCalibration& cal);
VarianceBracket envelope_variance_bound(const CoefficientScheme& scheme, double x);

/// sum_i (c_i^2 / c_n) x^i y^{n-i}.
double delta_cross(const CoefficientScheme& scheme, double x, double y);

/// exp(-s^2 V(x)/2) exp(-t^2 V_R(y)/2) (cosh(s t Delta) - 1), V_R the variance of
/// the reversal at y.
double f4_term(const CoefficientScheme& scheme, double x, double y, double s, double t);

}  // namespace polylab
