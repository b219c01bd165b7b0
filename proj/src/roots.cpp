#include "polylab/roots.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include "certify.hpp"
#include "polylab/errors.hpp"

namespace polylab {
namespace {

using detail::EndpointSpec;
using detail::ExactPoint;

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<double> trimmed(std::span<const double> coeffs) {
  std::size_t size = coeffs.size();
  while (size > 0 && coeffs[size - 1] == 0.0) --size;
  if (size == 0) throw ValidationError("identically zero polynomial has no finite root count");
  for (std::size_t i = 0; i < size; ++i)
    if (!std::isfinite(coeffs[i])) throw ValidationError("non-finite coefficient");
  return {coeffs.begin(), coeffs.begin() + static_cast<std::ptrdiff_t>(size)};
}

std::vector<double> reversed(const std::vector<double>& p) {
  std::vector<double> r(p.rbegin(), p.rend());
  while (!r.empty() && r.back() == 0.0) r.pop_back();
  return r;
}

// Count on the exact interval between lo and hi (both inside [-1, 1]).
CertifiedCount count_piece(const std::vector<double>& p, const EndpointSpec& lo, const EndpointSpec& hi,
                           const CountOptions& options) {
  if (p.size() <= 1) return {};
  const auto lo_r = lo.point.rational();
  const auto hi_r = hi.point.rational();
  if (lo_r > hi_r) return {};
  if (lo_r == hi_r) {
    const bool closed = lo.bound == Bound::closed && hi.bound == Bound::closed;
    const bool root = detail::exact_sign(p, lo.point) == 0;
    return {closed && root ? 1u : 0u, true, 53};
  }
  return detail::count_in_unit_interval(p, lo, hi, options);
}

EndpointSpec plain(double x, Bound b) { return {ExactPoint{x, false}, b}; }
EndpointSpec recip(double x, Bound b) { return {ExactPoint{x, true}, b}; }

// Parlett-Reinsch balancing of the off-diagonal part.
void balance(Eigen::MatrixXd& m) {
  Eigen::MatrixXd off = m;
  off.diagonal().setZero();
  const double gamma = 0.9;
  bool changed = true;
  while (changed) {
    changed = false;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      const double row = off.row(i).lpNorm<1>();
      const double col = off.col(i).lpNorm<1>();
      if (row == 0.0 || col == 0.0) continue;
      int e = 0;
      std::frexp(row / col, &e);
      e /= 2;
      if (e == 0) continue;
      if (std::ldexp(col, e) + std::ldexp(row, -e) < gamma * (col + row)) {
        changed = true;
        off.row(i) *= std::ldexp(1.0, -e);
        off.col(i) *= std::ldexp(1.0, e);
      }
    }
  }
  off.diagonal() = m.diagonal();
  m = off;
}

std::complex<double> derivative_complex(std::span<const double> coeffs, std::complex<double> z) {
  std::complex<double> d = 0.0;
  for (std::size_t i = coeffs.size(); i-- > 1;) d = d * z + static_cast<double>(i) * coeffs[i];
  return d;
}

}  // namespace

CertifiedCount count_real_roots(std::span<const double> coeffs, double a, Bound a_bound, double b, Bound b_bound,
                                const CountOptions& options) {
  if (std::isnan(a) || std::isnan(b)) throw ValidationError("interval endpoint is NaN");
  if (a > b) throw ValidationError("interval endpoints out of order");
  if (std::isinf(a) && a > 0) throw ValidationError("lower endpoint is +inf");
  if (std::isinf(b) && b < 0) throw ValidationError("upper endpoint is -inf");
  const std::vector<double> p = trimmed(coeffs);
  if (p.size() == 1) return {};
  if (std::isinf(a)) a_bound = Bound::open;
  if (std::isinf(b)) b_bound = Bound::open;

  CertifiedCount total;
  // [-1, 1] on p.
  if (b >= -1.0 && a <= 1.0) {
    const EndpointSpec lo = a >= -1.0 ? plain(a, a_bound) : plain(-1.0, Bound::closed);
    const EndpointSpec hi = b <= 1.0 ? plain(b, b_bound) : plain(1.0, Bound::closed);
    total += count_piece(p, lo, hi, options);
  }
  const bool right = b > 1.0;
  const bool left = a < -1.0;
  if (!right && !left) return total;

  // |x| > 1 through y = 1/x on the reversed coefficients.
  const std::vector<double> q = reversed(p);
  if (right) {
    const double m = std::max(a, 1.0);
    const Bound mb = a > 1.0 ? a_bound : Bound::open;
    total += count_piece(q, recip(b, b_bound), recip(m, mb), options);
  }
  if (left) {
    const double m = std::min(b, -1.0);
    const Bound mb = b < -1.0 ? b_bound : Bound::open;
    total += count_piece(q, recip(m, mb), recip(a, a_bound), options);
  }
  return total;
}

CertifiedCount count_real_roots(std::span<const double> coeffs, double a, double b, const CountOptions& options) {
  return count_real_roots(coeffs, a, Bound::closed, b, Bound::open, options);
}

CertifiedCount count_real_line(std::span<const double> coeffs, const CountOptions& options) {
  const std::vector<double> p = trimmed(coeffs);
  if (p.size() == 1) return {};
  CertifiedCount total = count_piece(p, plain(-1.0, Bound::closed), plain(1.0, Bound::closed), options);
  // The reversal has no root at 0, so one pass covers both outer half-lines.
  total += count_piece(reversed(p), plain(-1.0, Bound::open), plain(1.0, Bound::open), options);
  return total;
}

CoreRegion::CoreRegion(double a, double b) : a_n(a), b_n(b) {
  if (!(b >= 0.0 && b < a && a < 1.0)) throw ValidationError("core region needs 0 <= b_n < a_n < 1");
}

CoreRegion CoreRegion::default_rule(int n) {
  if (n < 2) throw ValidationError("core region needs n >= 2");
  const double a = std::exp(-2.0 * std::pow(std::log(static_cast<double>(n)), 0.2));
  const double b = 1.0 / (a * n);
  if (!(b < a)) throw ValidationError("default core rule is empty for n < 288");
  return {a, b};
}

std::array<Interval, 4> CoreRegion::intervals() const {
  const double lo = 1.0 - a_n;
  const double hi = 1.0 - b_n;
  return {Interval{-1.0 / lo, -1.0 / hi}, Interval{-hi, -lo}, Interval{lo, hi}, Interval{1.0 / hi, 1.0 / lo}};
}

bool CoreRegion::contains(double x) const {
  const double lo = 1.0 - a_n;
  const double hi = 1.0 - b_n;
  const double ax = std::abs(x);
  if (ax > lo && ax < hi) return true;
  if (ax > 1.0) {
    const double y = 1.0 / ax;
    return y > lo && y < hi;
  }
  return false;
}

CertifiedCount count_core_region(std::span<const double> coeffs, const CoreRegion& region,
                                 const CountOptions& options) {
  const std::vector<double> p = trimmed(coeffs);
  if (p.size() == 1) return {};
  const double lo = 1.0 - region.a_n;
  const double hi = 1.0 - region.b_n;
  CertifiedCount total;
  for (const auto& poly : {p, reversed(p)}) {
    total += count_piece(poly, plain(lo, Bound::open), plain(hi, Bound::open), options);
    total += count_piece(poly, plain(-hi, Bound::open), plain(-lo, Bound::open), options);
  }
  return total;
}

std::complex<double> evaluate_complex(std::span<const double> coeffs, std::complex<double> z) {
  std::complex<double> s = 0.0;
  for (std::size_t i = coeffs.size(); i-- > 0;) s = s * z + coeffs[i];
  return s;
}

double relative_residual(std::span<const double> coeffs, std::complex<double> z) {
  const double az = std::abs(z);
  double m = 0.0;
  for (std::size_t i = coeffs.size(); i-- > 0;) m = m * az + std::abs(coeffs[i]);
  if (m == 0.0) return 0.0;
  return std::abs(evaluate_complex(coeffs, z)) / m;
}

ComplexRoots complex_roots(std::span<const double> coeffs) {
  if (coeffs.empty() || coeffs.back() == 0.0) throw DegenerateCoefficientError("leading coefficient is zero");
  const auto degree = static_cast<Eigen::Index>(coeffs.size() - 1);
  ComplexRoots out;
  if (degree == 0) return out;

  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(degree, degree);
  companion.diagonal(-1).setOnes();
  for (Eigen::Index i = 0; i < degree; ++i) companion(i, degree - 1) = -coeffs[i] / coeffs.back();
  balance(companion);

  Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
  if (solver.info() != Eigen::Success) throw NumericsError("companion eigenvalue iteration failed");
  const auto& ev = solver.eigenvalues();

  out.roots.reserve(static_cast<std::size_t>(degree));
  for (Eigen::Index k = 0; k < degree; ++k) {
    std::complex<double> z = ev[k];
    double res = relative_residual(coeffs, z);
    for (int it = 0; it < 8 && res > 0.0; ++it) {
      const std::complex<double> d = derivative_complex(coeffs, z);
      if (d == 0.0) break;
      const std::complex<double> next = z - evaluate_complex(coeffs, z) / d;
      const double next_res = relative_residual(coeffs, next);
      if (!(next_res < res)) break;
      z = next;
      res = next_res;
    }
    if (res > 1e-8) out.flagged.push_back(static_cast<std::size_t>(k));
    out.roots.push_back(z);
  }
  return out;
}

DiskCount count_roots_in_disk(const ComplexRoots& roots, std::complex<double> center, double radius) {
  if (!(radius > 0.0)) throw ValidationError("disk radius must be positive");
  const double tol = 1e-9 * std::max(1.0, radius);
  DiskCount out;
  for (const auto& z : roots.roots) {
    const double d = std::abs(z - center);
    if (std::abs(d - radius) <= tol) ++out.ambiguous;
    if (d < radius) ++out.count;
  }
  return out;
}

DiskCount count_roots_in_disk(std::span<const double> coeffs, std::complex<double> center, double radius) {
  return count_roots_in_disk(complex_roots(trimmed(coeffs)), center, radius);
}

double circle_sup(std::span<const double> coeffs, std::complex<double> z, double radius) {
  const auto sample = [&](std::size_t m) {
    double best = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      const double theta = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(m);
      best = std::max(best, std::abs(evaluate_complex(coeffs, z + std::polar(radius, theta))));
    }
    return best;
  };
  std::size_t m = 256;
  double prev = sample(m);
  while (m < (std::size_t{1} << 20)) {
    m *= 2;
    const double next = sample(m);
    const bool settled = std::abs(next - prev) <= 1e-6 * std::abs(next);
    prev = next;
    if (settled) break;
  }
  return prev;
}

JensenBound jensen_bound(std::span<const double> coeffs, std::complex<double> z, double r, double R) {
  if (!(r > 0.0 && r < R)) throw ValidationError("Jensen bound needs 0 < r < R");
  JensenBound out;
  out.outer_sup = circle_sup(coeffs, z, R);
  out.inner_sup = circle_sup(coeffs, z, r);
  if (out.inner_sup == 0.0) {
    out.infinite = true;
    out.value = kInf;
    return out;
  }
  out.value = std::log(out.outer_sup / out.inner_sup) / std::log((R * R + r * r) / (2.0 * R * r));
  return out;
}

}  // namespace polylab
