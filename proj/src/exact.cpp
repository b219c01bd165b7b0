#include "exact.hpp"

#include <cmath>
#include <stdexcept>

namespace polylab::detail {
namespace {

// x = mantissa * 2^exponent with an integral mantissa.
struct Dyadic {
  BigInt mantissa;
  int exponent = 0;
};

Dyadic to_dyadic(double x) {
  if (!std::isfinite(x)) throw std::domain_error("non-finite value has no dyadic form");
  if (x == 0.0) return {BigInt(0), 0};
  int e = 0;
  const double m = std::frexp(x, &e);  // x = m 2^e, 0.5 <= |m| < 1
  const auto scaled = static_cast<long long>(std::ldexp(m, 53));
  return {BigInt(scaled), e - 53};
}

// a*2^ea + b*2^eb, exactly.
Dyadic add(const Dyadic& a, const Dyadic& b) {
  if (a.mantissa == 0) return b;
  if (b.mantissa == 0) return a;
  if (a.exponent <= b.exponent) {
    Dyadic r{b.mantissa, a.exponent};
    r.mantissa <<= (b.exponent - a.exponent);
    r.mantissa += a.mantissa;
    return r;
  }
  return add(b, a);
}

int sign_of(const BigInt& v) { return v > 0 ? 1 : (v < 0 ? -1 : 0); }

int sign_of(const Rational& v) { return v > 0 ? 1 : (v < 0 ? -1 : 0); }

RationalPoly trim(RationalPoly p) {
  while (!p.empty() && p.back() == 0) p.pop_back();
  return p;
}

RationalPoly derivative(const RationalPoly& p) {
  RationalPoly d;
  for (std::size_t i = 1; i < p.size(); ++i) d.push_back(p[i] * static_cast<long long>(i));
  return trim(d);
}

// Remainder of a / b (b nonzero).
RationalPoly remainder(RationalPoly a, const RationalPoly& b) {
  a = trim(a);
  while (a.size() >= b.size() && !a.empty()) {
    const Rational q = a.back() / b.back();
    const std::size_t shift = a.size() - b.size();
    for (std::size_t i = 0; i < b.size(); ++i) a[i + shift] -= q * b[i];
    a.pop_back();
    a = trim(a);
  }
  return a;
}

RationalPoly quotient(RationalPoly a, const RationalPoly& b) {
  a = trim(a);
  if (a.size() < b.size()) return {};
  RationalPoly q(a.size() - b.size() + 1);
  while (a.size() >= b.size() && !a.empty()) {
    const Rational c = a.back() / b.back();
    const std::size_t shift = a.size() - b.size();
    q[shift] = c;
    for (std::size_t i = 0; i < b.size(); ++i) a[i + shift] -= c * b[i];
    a.pop_back();
    a = trim(a);
  }
  return trim(q);
}

RationalPoly monic(RationalPoly p) {
  const Rational lead = p.back();
  for (auto& c : p) c /= lead;
  return p;
}

RationalPoly gcd(RationalPoly a, RationalPoly b) {
  a = trim(a);
  b = trim(b);
  while (!b.empty()) {
    RationalPoly r = remainder(a, b);
    a = std::move(b);
    b = r.empty() ? r : monic(r);
  }
  return monic(a);
}

Rational eval(const RationalPoly& p, const Rational& t) {
  Rational s = 0;
  for (std::size_t i = p.size(); i-- > 0;) s = s * t + p[i];
  return s;
}

int variations(const std::vector<RationalPoly>& chain, const Rational& t) {
  int count = 0, last = 0;
  for (const auto& f : chain) {
    const int s = sign_of(eval(f, t));
    if (s == 0) continue;
    if (last != 0 && s != last) ++count;
    last = s;
  }
  return count;
}

}  // namespace

Rational to_rational(double x) {
  const Dyadic d = to_dyadic(x);
  Rational r(d.mantissa);
  if (d.exponent >= 0) return r * Rational(BigInt(1) << d.exponent);
  return r / Rational(BigInt(1) << (-d.exponent));
}

Rational ExactPoint::rational() const {
  if (!reciprocal) return to_rational(x);
  if (std::isinf(x)) return Rational(0);
  return Rational(1) / to_rational(x);
}

int exact_sign(std::span<const double> coeffs, const ExactPoint& t) {
  const std::size_t size = coeffs.size();
  if (size == 0) return 0;
  if (t.reciprocal) {
    // t = 1/x: p(1/x) = x^{-d} sum a_i x^{d-i}, d = size-1.
    if (std::isinf(t.x)) {
      return coeffs[0] > 0 ? 1 : (coeffs[0] < 0 ? -1 : 0);
    }
    const Dyadic x = to_dyadic(t.x);
    Dyadic s = to_dyadic(coeffs[0]);
    for (std::size_t i = 1; i < size; ++i) {
      s.mantissa *= x.mantissa;
      s.exponent += x.exponent;
      s = add(s, to_dyadic(coeffs[i]));
    }
    int sign = sign_of(s.mantissa);
    if (t.x < 0 && (size - 1) % 2 == 1) sign = -sign;
    return sign;
  }
  const Dyadic x = to_dyadic(t.x);
  Dyadic s = to_dyadic(coeffs[size - 1]);
  for (std::size_t i = size - 1; i-- > 0;) {
    s.mantissa *= x.mantissa;
    s.exponent += x.exponent;
    s = add(s, to_dyadic(coeffs[i]));
  }
  return sign_of(s.mantissa);
}

RationalPoly to_rational_poly(std::span<const double> coeffs) {
  RationalPoly p;
  p.reserve(coeffs.size());
  for (double c : coeffs) p.push_back(to_rational(c));
  return trim(p);
}

std::size_t sturm_count_open(const RationalPoly& p_in, const Rational& lo, const Rational& hi) {
  const RationalPoly p = trim(p_in);
  if (p.empty()) throw std::domain_error("zero polynomial has no finite root count");
  if (p.size() == 1 || !(lo < hi)) return 0;
  const RationalPoly g = gcd(p, derivative(p));
  const RationalPoly f = g.size() > 1 ? quotient(p, g) : p;

  std::vector<RationalPoly> chain{monic(f)};
  RationalPoly next = derivative(chain[0]);
  while (!next.empty()) {
    chain.push_back(next);
    RationalPoly r = remainder(chain[chain.size() - 2], chain.back());
    for (auto& c : r) c = -c;
    next = trim(r);
  }
  // V(lo) - V(hi) counts distinct roots in (lo, hi].
  const int in_half_open = variations(chain, lo) - variations(chain, hi);
  const bool root_at_hi = eval(f, hi) == 0;
  return static_cast<std::size_t>(in_half_open - (root_at_hi ? 1 : 0));
}

}  // namespace polylab::detail
