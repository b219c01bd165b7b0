#pragma once

// Exact arithmetic helpers for the root certifier (internal header).

#include <cstddef>
#include <span>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace polylab::detail {

using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

/// A point known exactly: either a double x or its reciprocal 1/x (with
/// 1/(+-inf) = 0).
struct ExactPoint {
  double x = 0.0;
  bool reciprocal = false;

  Rational rational() const;
};

/// Exact sign of sum coeffs[i] t^i at the point t (all doubles are dyadic
/// rationals, so the evaluation is carried out in big integers).
int exact_sign(std::span<const double> coeffs, const ExactPoint& t);

Rational to_rational(double x);

using RationalPoly = std::vector<Rational>;  // ascending coefficients

RationalPoly to_rational_poly(std::span<const double> coeffs);

/// Number of distinct real roots of p in the open interval (lo, hi).
/// p must not be identically zero. Uses a Sturm sequence of the square-free part.
std::size_t sturm_count_open(const RationalPoly& p, const Rational& lo, const Rational& hi);

}  // namespace polylab::detail
