#pragma once

#include <algorithm>
#include <array>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "polylab/ensemble.hpp"

namespace polylab {

/// Root count on a set; `certified` means every sign decision behind it was
/// proven (interval bounds or exact arithmetic) for the given coefficients.
struct CertifiedCount {
  std::size_t count = 0;
  bool certified = true;
  int precision_bits = 53;  // highest rung used; kExactPrecision for rational arithmetic

  static constexpr int kExactPrecision = 0;

  CertifiedCount& operator+=(const CertifiedCount& o) {
    count += o.count;
    certified = certified && o.certified;
    if (precision_bits != kExactPrecision)
      precision_bits = (o.precision_bits == kExactPrecision) ? kExactPrecision
                                                             : std::max(precision_bits, o.precision_bits);
    return *this;
  }
};

struct CountOptions {
  int max_precision_bits = 512;    // ladder 53 -> 128 -> 256 -> 512
  std::size_t exact_degree_cap = 96;  // rational Sturm fallback up to this degree
  std::size_t max_cells = 1u << 20;   // per precision rung
};

enum class Bound { open, closed };

/// Distinct real roots in [a, b). a may be -inf and b may be +inf.
CertifiedCount count_real_roots(std::span<const double> coeffs, double a, double b,
                                const CountOptions& options = {});

/// Distinct real roots between a and b with explicit endpoint conventions.
CertifiedCount count_real_roots(std::span<const double> coeffs, double a, Bound a_bound, double b,
                                Bound b_bound, const CountOptions& options = {});

inline CertifiedCount count_real_roots(const SampledPolynomial& p, double a, double b,
                                       const CountOptions& options = {}) {
  return count_real_roots(p.span(), a, b, options);
}

/// All distinct real roots.
CertifiedCount count_real_line(std::span<const double> coeffs, const CountOptions& options = {});

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// +-(1 - a_n, 1 - b_n) and +-(1 - a_n, 1 - b_n)^{-1}.
struct CoreRegion {
  double a_n = 0.5;
  double b_n = 0.0;

  CoreRegion() = default;
  CoreRegion(double a, double b);

  /// a_n = exp(-2 log^{1/5} n), b_n = 1/(a_n n). Valid for n >= 288.
  static CoreRegion default_rule(int n);

  /// The four open intervals in increasing order; the reciprocal pair is
  /// +-(1/(1 - b_n), 1/(1 - a_n)).
  std::array<Interval, 4> intervals() const;
  bool contains(double x) const;
};

/// Roots in the core region, counted on p for +-(1-a_n, 1-b_n) and on its
/// reversal for the reciprocal intervals.
CertifiedCount count_core_region(std::span<const double> coeffs, const CoreRegion& region,
                                 const CountOptions& options = {});
inline CertifiedCount count_core_region(const SampledPolynomial& p, const CoreRegion& region,
                                        const CountOptions& options = {}) {
  return count_core_region(p.span(), region, options);
}

struct ComplexRoots {
  std::vector<std::complex<double>> roots;
  std::vector<std::size_t> flagged;  // indices whose residual test failed
};

/// Balanced companion-matrix eigenvalues polished by Newton steps. Throws
/// DegenerateCoefficientError when the leading coefficient is zero.
ComplexRoots complex_roots(std::span<const double> coeffs);

/// |P(z)| / sum |a_i| |z|^i.
double relative_residual(std::span<const double> coeffs, std::complex<double> z);

struct DiskCount {
  std::size_t count = 0;
  std::size_t ambiguous = 0;  // roots within 1e-9 of the circle
};

DiskCount count_roots_in_disk(std::span<const double> coeffs, std::complex<double> center, double radius);
DiskCount count_roots_in_disk(const ComplexRoots& roots, std::complex<double> center, double radius);

struct JensenBound {
  double value = 0.0;
  bool infinite = false;
  double outer_sup = 0.0;  // M1 over the circle of radius R
  double inner_sup = 0.0;  // M2 over the circle of radius r
};

/// log(M1/M2) / log((R^2 + r^2)/(2Rr)), suprema sampled on the circles.
JensenBound jensen_bound(std::span<const double> coeffs, std::complex<double> z, double r, double R);

/// sup |p| over the circle |w - z| = radius, refined by doubling the sample count.
double circle_sup(std::span<const double> coeffs, std::complex<double> z, double radius);

std::complex<double> evaluate_complex(std::span<const double> coeffs, std::complex<double> z);

}  // namespace polylab
