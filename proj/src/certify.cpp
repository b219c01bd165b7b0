#include "certify.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>

namespace polylab::detail {
namespace {

namespace mp = boost::multiprecision;

template <unsigned Bits>
using BinFloat = mp::number<mp::cpp_bin_float<Bits, mp::digit_base_2>, mp::et_off>;

template <class Real>
struct Precision;
template <>
struct Precision<double> {
  static constexpr int bits = 53;
};
template <unsigned B>
struct Precision<BinFloat<B>> {
  static constexpr int bits = static_cast<int>(B);
};

// Taylor order of the cell tests: t_0..t_{K-1} are computed, the rest is
// bounded through the majorant sum |a_i| x^i.
constexpr int kOrder = 4;

using std::abs;
using std::ldexp;
using mp::abs;
using mp::ldexp;

template <class Real>
class CellCertifier {
 public:
  enum class Verdict { no_root, monotone, undecided };

  struct Expansion {
    std::array<Real, kOrder> t{};    // P^(k)(c)/k!
    std::array<Real, kOrder> err{};  // |computed - exact| bounds
    Real tail{};                     // >= P~^(K)(|c|+r)/K!
  };

  explicit CellCertifier(std::span<const double> coeffs) {
    coeffs_.reserve(coeffs.size());
    for (double c : coeffs) {
      coeffs_.emplace_back(c);
      abs_coeffs_.emplace_back(std::abs(c));
    }
    unit_ = ldexp(Real(1), -Precision<Real>::bits);
    const Real ops = Real(static_cast<double>(2 * coeffs.size() + 8));
    gamma_ = ops * unit_ / (Real(1) - ops * unit_);
    slack_ = Real(64 * (kOrder + 2)) * unit_;
  }

  Expansion expand(const Real& c, const Real& r) const {
    Expansion e;
    std::array<Real, kOrder> t;
    t.fill(Real(0));
    for (std::size_t i = coeffs_.size(); i-- > 0;) {
      for (int k = kOrder - 1; k >= 1; --k) t[k] = t[k] * c + t[k - 1];
      t[0] = t[0] * c + coeffs_[i];
    }
    const Real s = (abs(c) + r) * (Real(1) + Real(4) * unit_);
    std::array<Real, kOrder + 1> m;
    m.fill(Real(0));
    for (std::size_t i = abs_coeffs_.size(); i-- > 0;) {
      for (int k = kOrder; k >= 1; --k) m[k] = m[k] * s + m[k - 1];
      m[0] = m[0] * s + abs_coeffs_[i];
    }
    const Real inflate = Real(1) + Real(2) * gamma_;
    for (int k = 0; k < kOrder; ++k) {
      e.t[k] = t[k];
      e.err[k] = Real(2) * gamma_ * m[k] * inflate;
    }
    e.tail = m[kOrder] * inflate;
    return e;
  }

  Verdict classify(const Expansion& e, const Real& r) const {
    const Real up = Real(1) + slack_;
    const Real down = Real(1) - slack_;

    Real rk = r;
    Real excl(0);
    for (int k = 1; k < kOrder; ++k) {
      excl += (abs(e.t[k]) + e.err[k]) * rk;
      rk *= r;
    }
    excl += e.tail * rk;  // rk == r^K
    if ((abs(e.t[0]) - e.err[0]) * down > excl * up) return Verdict::no_root;

    // |P'(x) - t_1| <= sum_{k>=2} k |t_k| r^{k-1} + K tail r^{K-1}.
    Real rk1 = r;
    Real mono(0);
    for (int k = 2; k < kOrder; ++k) {
      mono += Real(k) * (abs(e.t[k]) + e.err[k]) * rk1;
      rk1 *= r;
    }
    mono += Real(kOrder) * e.tail * rk1;  // rk1 == r^{K-1}
    if ((abs(e.t[1]) - e.err[1]) * down > mono * up) return Verdict::monotone;
    return Verdict::undecided;
  }

  int sign_of(const Expansion& e) const {
    if (abs(e.t[0]) > e.err[0] * (Real(1) + slack_)) return e.t[0] > 0 ? 1 : -1;
    return 0;
  }

  // Certified sign of P at x, 0 when the rounding bound does not decide it.
  int sign_at(const Real& x) const {
    Real v(0), m(0);
    const Real ax = abs(x);
    for (std::size_t i = coeffs_.size(); i-- > 0;) {
      v = v * x + coeffs_[i];
      m = m * ax + abs_coeffs_[i];
    }
    const Real err = Real(2) * gamma_ * m * (Real(1) + Real(2) * gamma_);
    if (abs(v) > err * (Real(1) + slack_)) return v > 0 ? 1 : -1;
    return 0;
  }

  // Certified sign on the whole ball around x; used for endpoints known only
  // up to rounding.
  int sign_on_ball(const Real& x, const Real& r) const {
    const Expansion e = expand(x, r);
    if (classify(e, r) == Verdict::no_root) return e.t[0] > 0 ? 1 : -1;
    return 0;
  }

  const Real& unit() const { return unit_; }

 private:
  std::vector<Real> coeffs_;
  std::vector<Real> abs_coeffs_;
  Real unit_;
  Real gamma_;
  Real slack_;
};

template <class Real>
struct Cell {
  Real l, h;
  int sl = 0, sh = 0;  // certified signs at the exact endpoints
  bool l_outer = false, h_outer = false;
};

template <class Real>
struct RungOutcome {
  std::size_t count = 0;
  std::vector<Cell<Real>> unresolved;
};

template <class Real>
Rational exact_value(const Real& x) {
  if (x == 0) return Rational(0);
  int e = 0;
  const Real m = frexp(x, &e);  // |m| in [0.5, 1)
  constexpr int bits = Precision<Real>::bits;
  const BigInt mant = static_cast<BigInt>(Real(ldexp(m, bits)));
  const int shift = e - bits;
  Rational r(mant);
  if (shift >= 0) return r * Rational(BigInt(1) << shift);
  return r / Rational(BigInt(1) << (-shift));
}

Rational exact_value(double x) { return to_rational(x); }

// The exact interval. Cells start from outward-rounded endpoints, so split
// points are checked against the exact values before use.
struct Domain {
  bool lo_closed = false;
  bool hi_closed = false;
  Rational lo, hi;
  double lo_guard = 0.0;  // splits above lo_guard and below hi_guard are inside
  double hi_guard = 0.0;

  Domain(const EndpointSpec& l, const EndpointSpec& h, double lo_num, double hi_num)
      : lo_closed(l.bound == Bound::closed),
        hi_closed(h.bound == Bound::closed),
        lo(l.point.rational()),
        hi(h.point.rational()) {
    lo_guard = lo_num;
    hi_guard = hi_num;
    if (l.point.reciprocal)
      for (int k = 0; k < 4; ++k) lo_guard = std::nextafter(lo_guard, HUGE_VAL);
    if (h.point.reciprocal)
      for (int k = 0; k < 4; ++k) hi_guard = std::nextafter(hi_guard, -HUGE_VAL);
  }

  template <class Real>
  bool inside(const Real& x) const {
    // Rounding to double may move x by half an ulp, hence the strict margin
    // of the guards.
    const double d = static_cast<double>(x);
    if (d > lo_guard && d < hi_guard) return true;
    const Rational r = exact_value(x);
    return r > lo && r < hi;
  }
};

template <class Real>
std::size_t endpoint_roots(const Cell<Real>& cell, const Domain& domain) {
  std::size_t n = 0;
  if (cell.l_outer && cell.sl == 0 && domain.lo_closed) ++n;
  if (cell.h_outer && cell.sh == 0 && domain.hi_closed) ++n;
  return n;
}

template <class Real>
RungOutcome<Real> subdivide(const CellCertifier<Real>& cert, std::vector<Cell<Real>> work, const Domain& domain,
                            std::size_t max_cells) {
  using V = typename CellCertifier<Real>::Verdict;
  RungOutcome<Real> out;
  const Real min_width = ldexp(Real(1), -(Precision<Real>::bits - 10));
  const Real floor_scale = ldexp(Real(1), -20);
  const Real widen = Real(1) + Real(4) * cert.unit();
  static constexpr std::array<double, 6> kOffsets{0.4375, 0.5625, 0.375, 0.625, 0.3125, 0.6875};
  std::size_t processed = 0;

  while (!work.empty()) {
    Cell<Real> cell = work.back();
    work.pop_back();
    if (++processed > max_cells) {
      out.unresolved.push_back(cell);
      continue;
    }
    const Real c = (cell.l + cell.h) / Real(2);
    Real r = std::max(Real(c - cell.l), Real(cell.h - c)) * widen;
    if (r <= min_width * std::max(Real(abs(c)), floor_scale)) {
      out.unresolved.push_back(cell);
      continue;
    }
    const auto e = cert.expand(c, r);
    const V verdict = cert.classify(e, r);
    if (verdict == V::no_root) continue;
    if (verdict == V::monotone) {
      if (cell.sl != 0 && cell.sh != 0) {
        out.count += (cell.sl != cell.sh) ? 1 : 0;
      } else {
        out.count += endpoint_roots(cell, domain);
      }
      continue;
    }

    const auto usable = [&](const Real& x) { return x > cell.l && x < cell.h && domain.inside(x); };
    Real split = c;
    int s = usable(c) ? cert.sign_of(e) : 0;
    for (std::size_t k = 0; s == 0 && k < kOffsets.size(); ++k) {
      split = cell.l + (cell.h - cell.l) * Real(kOffsets[k]);
      if (usable(split)) s = cert.sign_at(split);
    }
    if (s == 0) {
      out.unresolved.push_back(cell);
      continue;
    }
    work.push_back({split, cell.h, s, cell.sh, false, cell.h_outer});
    work.push_back({cell.l, split, cell.sl, s, cell.l_outer, false});
  }
  return out;
}

template <class To, class From>
std::vector<Cell<To>> promote(const std::vector<Cell<From>>& cells) {
  std::vector<Cell<To>> out;
  out.reserve(cells.size());
  for (const auto& c : cells) out.push_back({To(c.l), To(c.h), c.sl, c.sh, c.l_outer, c.h_outer});
  return out;
}

double outward(const ExactPoint& p, bool lower) {
  if (!p.reciprocal) return p.x;
  if (std::isinf(p.x)) return 0.0;
  const double y = 1.0 / p.x;
  return std::nextafter(y, lower ? -HUGE_VAL : HUGE_VAL);
}

int endpoint_sign(const CellCertifier<double>& cert, std::span<const double> coeffs, const ExactPoint& p) {
  if (!p.reciprocal) {
    if (const int s = cert.sign_at(p.x); s != 0) return s;
  } else if (std::isinf(p.x)) {
    return coeffs[0] > 0 ? 1 : (coeffs[0] < 0 ? -1 : 0);
  } else {
    const double y = 1.0 / p.x;
    const double r = 4.0 * std::abs(std::nextafter(y, HUGE_VAL) - y);
    if (const int s = cert.sign_on_ball(y, r); s != 0) return s;
  }
  return exact_sign(coeffs, p);
}

}  // namespace

CertifiedCount count_in_unit_interval(std::span<const double> coeffs, const EndpointSpec& lo, const EndpointSpec& hi,
                                      const CountOptions& options) {
  CertifiedCount total{0, true, 53};
  const CellCertifier<double> cert53(coeffs);
  const double lo_num = outward(lo.point, true);
  const double hi_num = outward(hi.point, false);
  const Domain domain(lo, hi, lo_num, hi_num);

  Cell<double> root{lo_num, hi_num, endpoint_sign(cert53, coeffs, lo.point), endpoint_sign(cert53, coeffs, hi.point),
                    true, true};

  auto r53 = subdivide(cert53, {root}, domain, options.max_cells);
  total.count += r53.count;
  if (r53.unresolved.empty()) return total;

  std::vector<Cell<BinFloat<512>>> pending;
  if (options.max_precision_bits >= 128) {
    total.precision_bits = 128;
    const CellCertifier<BinFloat<128>> cert(coeffs);
    auto r = subdivide(cert, promote<BinFloat<128>>(r53.unresolved), domain, options.max_cells);
    total.count += r.count;
    if (!r.unresolved.empty() && options.max_precision_bits >= 256) {
      total.precision_bits = 256;
      const CellCertifier<BinFloat<256>> cert256(coeffs);
      auto r2 = subdivide(cert256, promote<BinFloat<256>>(r.unresolved), domain, options.max_cells);
      total.count += r2.count;
      if (!r2.unresolved.empty() && options.max_precision_bits >= 512) {
        total.precision_bits = 512;
        const CellCertifier<BinFloat<512>> cert512(coeffs);
        auto r3 = subdivide(cert512, promote<BinFloat<512>>(r2.unresolved), domain, options.max_cells);
        total.count += r3.count;
        pending = std::move(r3.unresolved);
      } else {
        pending = promote<BinFloat<512>>(r2.unresolved);
      }
    } else {
      pending = promote<BinFloat<512>>(r.unresolved);
    }
  } else {
    pending = promote<BinFloat<512>>(r53.unresolved);
  }
  if (pending.empty()) return total;

  const std::size_t degree = coeffs.size() - 1;
  if (degree <= options.exact_degree_cap) {
    // Multiple roots (or clusters below the working precision): exact Sturm
    // sequence of the square-free part on each unresolved cell.
    const RationalPoly poly = to_rational_poly(coeffs);
    for (const auto& cell : pending) {
      const Rational l = cell.l_outer ? domain.lo : exact_value(cell.l);
      const Rational h = cell.h_outer ? domain.hi : exact_value(cell.h);
      total.count += sturm_count_open(poly, l, h) + endpoint_roots(cell, domain);
    }
    total.precision_bits = CertifiedCount::kExactPrecision;
    return total;
  }

  for (const auto& cell : pending) {
    total.count += (cell.sl * cell.sh < 0 ? 1 : 0) + endpoint_roots(cell, domain);
  }
  total.certified = false;
  return total;
}

}  // namespace polylab::detail
