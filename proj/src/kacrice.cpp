#include "polylab/kacrice.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "polylab/errors.hpp"

namespace polylab {
namespace {

using Wide = boost::multiprecision::number<boost::multiprecision::cpp_bin_float<256>, boost::multiprecision::et_off>;

// Neumaier summation.
class Accumulator {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v))
      comp_ += (sum_ - t) + v;
    else
      comp_ += (v - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

double square(double v) { return v * v; }

void require_nonzero_leading(const CoefficientScheme& scheme) {
  if (scheme.coeffs[scheme.n] == 0.0) throw DegenerateCoefficientError("c_n is zero");
}

// sum_i c_i^2 (x y)^i.
double cross_sum(const CoefficientScheme& scheme, double x, double y) {
  Accumulator acc;
  const double xy = x * y;
  double p = 1.0;
  for (int i = 0; i <= scheme.n; ++i) {
    acc.add(square(scheme.coeffs[i]) * p);
    p *= xy;
  }
  return acc.value();
}

double one_minus_r_squared_wide(const CoefficientScheme& scheme, double x, double y) {
  Wide ax = 0, ay = 0, s = 0;
  Wide px = 1, py = 1;
  const Wide wx = x, wy = y;
  for (int i = 0; i <= scheme.n; ++i) {
    const Wide c2 = Wide(scheme.coeffs[i]) * Wide(scheme.coeffs[i]);
    ax += c2 * px * px;
    ay += c2 * py * py;
    s += c2 * px * py;
    px *= wx;
    py *= wy;
  }
  const Wide prod = ax * ay;
  const Wide d = (prod - s * s) / prod;
  return std::max(0.0, static_cast<double>(d));
}

}  // namespace

MomentSums moment_sums(const CoefficientScheme& scheme, double t) {
  MomentSums m;
  Accumulator a, b, c;
  const double t2 = t * t;
  double p = 1.0;
  for (int i = 0; i <= scheme.n; ++i) {
    const double w = square(scheme.coeffs[i]) * p;
    a.add(w);
    b.add(i * w);
    c.add(static_cast<double>(i) * i * w);
    p *= t2;
  }
  m.A = a.value();
  m.B = b.value();
  m.C = c.value();
  m.overflow = !std::isfinite(m.A) || !std::isfinite(m.B) || !std::isfinite(m.C);
  return m;
}

EvalResult variance_V(const CoefficientScheme& scheme, double x) {
  if (!std::isfinite(x)) throw ValidationError("variance_V needs finite x");
  Accumulator acc;
  const double x2 = x * x;
  double p = 1.0;
  for (int i = 0; i <= scheme.n; ++i) {
    acc.add(square(scheme.coeffs[i]) * p);
    p *= x2;
  }
  const double v = acc.value();
  return {v, !std::isfinite(v)};
}

double correlation_r(const CoefficientScheme& scheme, double x, double y) {
  const double vx = variance_V(scheme, x).value;
  const double vy = variance_V(scheme, y).value;
  if (!(vx > 0.0) || !(vy > 0.0)) throw ValidationError("correlation undefined: zero variance");
  if (!std::isfinite(vx) || !std::isfinite(vy)) throw NumericsError("variance overflow in correlation");
  const double r = cross_sum(scheme, x, y) / std::sqrt(vx * vy);
  if (std::abs(r) > 1.0) {
    if (std::abs(r) - 1.0 > 1e-12) throw NumericsError("correlation exceeds 1 beyond rounding");
    return std::copysign(1.0, r);
  }
  return r;
}

double one_minus_r_squared(const CoefficientScheme& scheme, double x, double y) {
  const double vx = variance_V(scheme, x).value;
  const double vy = variance_V(scheme, y).value;
  if (!(vx > 0.0) || !(vy > 0.0)) throw ValidationError("correlation undefined: zero variance");
  if (x == y) return 0.0;
  const int n = scheme.n;

  if (n <= 64) {
    // x^i y^k - x^k y^i = (xy)^i (y - x) h_{k-i}, h_m = sum_{j<m} y^j x^{m-1-j}.
    std::vector<double> h(static_cast<std::size_t>(n) + 1, 0.0);
    double xm = 1.0;
    for (int m = 0; m < n; ++m) {
      h[m + 1] = y * h[m] + xm;
      xm *= x;
    }
    const double d2 = square(y - x);
    Accumulator acc;
    double xy_2i = 1.0;
    for (int i = 0; i <= n; ++i) {
      const double ci2 = square(scheme.coeffs[i]);
      for (int k = i + 1; k <= n; ++k) acc.add(ci2 * square(scheme.coeffs[k]) * xy_2i * d2 * square(h[k - i]));
      xy_2i *= square(x * y);
    }
    return acc.value() / (vx * vy);
  }

  const double s = cross_sum(scheme, x, y);
  const double prod = vx * vy;
  const double rel = (prod - s * s) / prod;
  if (rel < 1e-10) return one_minus_r_squared_wide(scheme, x, y);
  return rel;
}

double kacrice_integrand(const CoefficientScheme& scheme, double t) {
  const int n = scheme.n;
  if (t == 0.0) {
    if (scheme.coeffs[0] == 0.0) throw DegenerateCoefficientError("Kac-Rice density has a pole at t = 0 when c_0 = 0");
    return n >= 1 ? std::abs(scheme.coeffs[1] / scheme.coeffs[0]) / std::numbers::pi : 0.0;
  }
  // Weights c_i^2 t^{2i} in log space, scaled by the largest one.
  const double lt = std::log(std::abs(t));
  std::vector<double> lw(static_cast<std::size_t>(n) + 1);
  double top = -std::numeric_limits<double>::infinity();
  for (int i = 0; i <= n; ++i) {
    const double c = std::abs(scheme.coeffs[i]);
    lw[i] = c > 0.0 ? 2.0 * (std::log(c) + i * lt) : -std::numeric_limits<double>::infinity();
    top = std::max(top, lw[i]);
  }
  if (!std::isfinite(top)) throw ValidationError("all coefficients are zero");
  Accumulator a, b;
  for (int i = 0; i <= n; ++i) {
    lw[i] = std::exp(lw[i] - top);
    a.add(lw[i]);
    b.add(i * lw[i]);
  }
  const double mean = b.value() / a.value();
  Accumulator spread;
  for (int i = 0; i <= n; ++i) spread.add(lw[i] * square(i - mean));
  // (A C - B^2) / A^2 = sum w (i - mean)^2 / A.
  return std::sqrt(spread.value() / a.value()) / (std::numbers::pi * std::abs(t));
}

QuadResult expected_roots(const CoefficientScheme& scheme, double a, double b, const QuadConfig& quad) {
  if (!(a >= -1.0 && a <= b && b <= 1.0)) throw ValidationError("expected_roots needs -1 <= a <= b <= 1");
  if (a == b) return {};
  if (quad.rel_tol <= 0.0 || quad.abs_tol <= 0.0) throw ValidationError("quadrature tolerances must be positive");

  // The density grows like 1/(1 - |t|) until |t| ~ 1 - 1/n: geometric panels.
  std::vector<double> breaks{a, b};
  const int levels = std::min(60, static_cast<int>(std::ceil(std::log2(scheme.n + 1.0))) + 6);
  for (int k = 1; k <= levels; ++k) {
    const double g = std::ldexp(1.0, -k);
    for (double p : {1.0 - g, -1.0 + g})
      if (p > a && p < b) breaks.push_back(p);
  }
  if (0.0 > a && 0.0 < b) breaks.push_back(0.0);
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

  return integrate([&scheme](double t) { return kacrice_integrand(scheme, t); }, breaks, quad);
}

QuadResult expected_real_roots(const CoefficientScheme& scheme, double a, double b, const QuadConfig& quad) {
  if (!(a < b) || std::isnan(a) || std::isnan(b)) throw ValidationError("expected_real_roots needs a < b");
  QuadResult out;
  const auto add = [&out](const QuadResult& q) {
    out.value += q.value;
    out.error += q.error;
    out.converged = out.converged && q.converged;
    out.subdivisions += q.subdivisions;
  };
  const double lo = std::max(a, -1.0);
  const double hi = std::min(b, 1.0);
  if (lo < hi) add(expected_roots(scheme, lo, hi, quad));
  if (b <= 1.0 && a >= -1.0) return out;
  const CoefficientScheme r = reversed_scheme(scheme);
  if (b > 1.0) {
    const double from = std::max(a, 1.0);
    if (from < b) add(expected_roots(r, 1.0 / b, 1.0 / from, quad));
  }
  if (a < -1.0) {
    const double to = std::min(b, -1.0);
    if (a < to) add(expected_roots(r, 1.0 / to, 1.0 / a, quad));
  }
  return out;
}

double hyperbolic_variance_closed(double rho, double x) {
  if (!(std::abs(x) < 1.0)) throw ValidationError("hyperbolic_variance_closed needs |x| < 1");
  if (!(rho > -0.5)) throw ValidationError("hyperbolic_variance_closed needs rho > -1/2");
  return std::exp(-(2.0 * rho + 1.0) * std::log1p(-x * x));
}

EnvelopeCalibration calibrate_envelope(const CoefficientScheme& scheme, double C) {
  if (!(C > 1.0)) throw ValidationError("envelope constant C must exceed 1");
  EnvelopeCalibration cal;
  cal.C = C;
  const double expo = 2.0 * scheme.rho + 1.0;
  const double inv_n = 1.0 / std::max(1, scheme.n);
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  const auto visit = [&](double u) {
    const double ratio = variance_V(scheme, 1.0 - u).value * std::pow(u + inv_n, expo);
    lo = std::min(lo, ratio);
    hi = std::max(hi, ratio);
  };
  constexpr int kLinear = 2000;
  for (int k = 0; k <= kLinear; ++k) visit((1.0 / C) * k / kLinear);
  for (int j = 1; j <= 60; ++j) visit(std::ldexp(1.0 / C, -j));
  cal.kappa_lo = 0.95 * lo;
  cal.kappa_hi = 1.05 * hi;
  return cal;
}

VarianceBracket envelope_variance_bound(const CoefficientScheme& scheme, double x, const EnvelopeCalibration& cal) {
  if (!(x >= 1.0 - 1.0 / cal.C && x <= 1.0)) throw ValidationError("x outside the calibrated range [1 - 1/C, 1]");
  const double scale = std::pow(1.0 - x + 1.0 / std::max(1, scheme.n), -(2.0 * scheme.rho + 1.0));
  return {cal.kappa_lo * scale, cal.kappa_hi * scale};
}

VarianceBracket envelope_variance_bound(const CoefficientScheme& scheme, double x) {
  return envelope_variance_bound(scheme, x, calibrate_envelope(scheme));
}

double delta_cross(const CoefficientScheme& scheme, double x, double y) {
  require_nonzero_leading(scheme);
  const int n = scheme.n;
  const double cn = scheme.coeffs[n];
  Accumulator acc;
  for (int i = 0; i <= n; ++i) acc.add(square(scheme.coeffs[i]) / cn * std::pow(x, i) * std::pow(y, n - i));
  return acc.value();
}

double f4_term(const CoefficientScheme& scheme, double x, double y, double s, double t) {
  require_nonzero_leading(scheme);
  const int n = scheme.n;
  const double cn = scheme.coeffs[n];
  const double u = s * t * delta_cross(scheme, x, y);
  if (u == 0.0) return 0.0;

  const double vx = variance_V(scheme, x).value;
  Accumulator vr;
  for (int i = 0; i <= n; ++i) vr.add(square(scheme.coeffs[i] / cn) * std::pow(y, 2 * (n - i)));

  // cosh u - 1 = 2 sinh^2(u/2), kept in log form for large |u|.
  const double h = 0.5 * std::abs(u);
  const double log_sinh = h < 20.0 ? std::log(std::sinh(h)) : h - std::numbers::ln2 + std::log1p(-std::exp(-2.0 * h));
  return std::exp(-0.5 * s * s * vx - 0.5 * t * t * vr.value() + std::numbers::ln2 + 2.0 * log_sinh);
}

}  // namespace polylab
