#include "doctest.h"

#include <cmath>
#include <limits>
#include <numbers>

#include "polylab/errors.hpp"
#include "polylab/kacrice.hpp"

using namespace polylab;

namespace {

constexpr double kPi = std::numbers::pi;

// (1/pi) sqrt(sum_{i<j} c_i^2 c_j^2 t^{2i+2j} (i-j)^2) / (|t| sum c_i^2 t^{2i}), long double.
double brute_density(const CoefficientScheme& s, double t) {
  long double num = 0.0L, den = 0.0L;
  for (int i = 0; i <= s.n; ++i) {
    const long double ci = static_cast<long double>(s.coeffs[i]) * s.coeffs[i] * std::pow(static_cast<long double>(t), 2 * i);
    den += ci;
    for (int j = i + 1; j <= s.n; ++j) {
      const long double cj = static_cast<long double>(s.coeffs[j]) * s.coeffs[j] * std::pow(static_cast<long double>(t), 2 * j);
      num += ci * cj * (i - j) * (i - j);
    }
  }
  return static_cast<double>(std::sqrt(num) / (std::abs(static_cast<long double>(t)) * den) / std::numbers::pi_v<long double>);
}

CoefficientScheme zero_constant_scheme() {
  EnvelopeOverrides env;
  env.rho = 0.0;
  env.tau1 = 0.5;
  env.tau2 = 2.0;
  env.N0 = 1;
  return make_scheme(CustomTable{{0.0, 1.0, 1.0}}, 2, env);
}

}  // namespace

TEST_CASE("variance and correlation") {
  const auto kac2 = make_scheme(Kac{}, 2);
  CHECK(variance_V(kac2, 0.5).value == 1.3125);
  CHECK(variance_V(make_scheme(KacDerivative{2}, 4), 0.0).value == 4.0);
  CHECK(variance_V(make_scheme(Kac{}, 100), 1.0).value == 101.0);

  const auto kac1 = make_scheme(Kac{}, 1);
  CHECK(correlation_r(kac2, 0.3, 0.3) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(correlation_r(kac1, 0.0, 1.0) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));
  CHECK(one_minus_r_squared(kac1, 0.0, 1.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(one_minus_r_squared(kac2, 0.4, 0.4) == 0.0);

  CHECK_THROWS_AS(correlation_r(zero_constant_scheme(), 0.0, 0.5), ValidationError);
}

TEST_CASE("1 - r^2 close to the diagonal") {
  // 50-digit references
  CHECK(one_minus_r_squared(make_scheme(Kac{}, 100), 0.9, 0.91) ==
        doctest::Approx(0.003052407477001376).epsilon(1e-11));
  CHECK(one_minus_r_squared(make_scheme(Kac{}, 300), 0.999, 0.9991) ==
        doctest::Approx(7.441803048920838e-05).epsilon(1e-9));
  CHECK(one_minus_r_squared(make_scheme(Kac{}, 8), 0.5, -0.3) == doctest::Approx(0.4839299385401756).epsilon(1e-13));
}

TEST_CASE("density") {
  CHECK(kacrice_integrand(make_scheme(Kac{}, 2), 0.5) == doctest::Approx(0.3482954442276524).epsilon(1e-14));
  const auto kac1 = make_scheme(Kac{}, 1);
  CHECK(kacrice_integrand(kac1, 0.0) == doctest::Approx(1.0 / kPi).epsilon(1e-15));
  for (double t : {-0.9, -0.2, 0.3, 0.99}) CHECK(kacrice_integrand(kac1, t) == doctest::Approx(1.0 / (kPi * (1 + t * t))));
  CHECK_THROWS_AS(kacrice_integrand(zero_constant_scheme(), 0.0), DegenerateCoefficientError);

  for (const auto& s : {make_scheme(Kac{}, 40), make_scheme(Hyperbolic{2.0}, 30), make_scheme(KacDerivative{1}, 25)})
    for (double t : {-0.95, -0.5, 0.01, 0.37, 0.8, 0.999}) CHECK(kacrice_integrand(s, t) == doctest::Approx(brute_density(s, t)).epsilon(1e-11));
}

TEST_CASE("expected root counts") {
  const auto kac1 = make_scheme(Kac{}, 1);
  const auto one = expected_roots(kac1, -1.0, 1.0);
  CHECK(one.value == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(one.converged);
  CHECK(expected_roots(kac1, 0.3, 0.3).value == 0.0);
  CHECK_THROWS_AS(expected_roots(kac1, -1.5, 0.0), ValidationError);

  // 50-digit references
  const auto kac50 = make_scheme(Kac{}, 50);
  CHECK(expected_roots(kac50, -0.99, 0.99).value == doctest::Approx(1.470991875396255).epsilon(1e-10));
  CHECK(expected_roots(kac50, -1.0, 1.0).value == doctest::Approx(1.564360228391065).epsilon(1e-10));
  const double inf = std::numeric_limits<double>::infinity();
  CHECK(expected_real_roots(kac50, -inf, inf).value == doctest::Approx(3.128720456782130).epsilon(1e-10));
  CHECK(expected_roots(make_scheme(Hyperbolic{2.0}, 20), -0.5, 0.5).value ==
        doctest::Approx(0.4945492842954564).epsilon(1e-10));
  CHECK(expected_roots(make_scheme(KacDerivative{1}, 10), 0.0, 0.9).value ==
        doctest::Approx(0.7186947031934586).epsilon(1e-10));

  // (1, inf) on p is (0, 1) on the reversal
  CHECK(expected_real_roots(kac50, 1.0, inf).value ==
        doctest::Approx(expected_roots(reversed_scheme(kac50), 0.0, 1.0).value).epsilon(1e-10));
  CHECK(expected_real_roots(kac50, -0.5, 3.0).value ==
        doctest::Approx(expected_roots(kac50, -0.5, 1.0).value + expected_real_roots(kac50, 1.0, 3.0).value)
            .epsilon(1e-9));
}

TEST_CASE("hyperbolic variance") {
  CHECK(hyperbolic_variance_closed(0.0, 0.6) == doctest::Approx(1.5625).epsilon(1e-15));
  CHECK(hyperbolic_variance_closed(0.7, 0.0) == 1.0);
  // sum_i (L)_i/i! x^{2i} = (1 - x^2)^{-L}, L = 2 rho + 1
  for (double L : {0.5, 2.0, 3.5})
    CHECK(variance_V(make_scheme(Hyperbolic{L}, 3000), 0.7).value ==
          doctest::Approx(hyperbolic_variance_closed((L - 1.0) / 2.0, 0.7)).epsilon(1e-12));
}

TEST_CASE("c_k_rho") {
  CHECK(c_k_rho(0.0, 17) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(c_k_rho(0.5, 3) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(c_k_rho(1.0, 2) == doctest::Approx(std::sqrt(6.0)).epsilon(1e-14));
}

TEST_CASE("variance envelope") {
  const auto kac = make_scheme(Kac{}, 100);
  const auto cal = calibrate_envelope(kac);
  CHECK(cal.kappa_lo > 0.0);
  CHECK(cal.kappa_lo <= cal.kappa_hi);
  const auto b = envelope_variance_bound(kac, 0.95, cal);
  const double v = variance_V(kac, 0.95).value;
  CHECK(b.low <= v);
  CHECK(v <= b.high);
  const auto at1 = envelope_variance_bound(kac, 1.0, cal);
  CHECK(at1.low <= 101.0);
  CHECK(101.0 <= at1.high);
  double prev = 0.0;
  for (double x = 0.9; x < 1.0; x += 0.001) {
    const auto br = envelope_variance_bound(kac, x, cal);
    CHECK(br.low + br.high > prev);
    prev = br.low + br.high;
  }
  CHECK_THROWS_AS(envelope_variance_bound(kac, 0.5, cal), ValidationError);
}

TEST_CASE("reversal cross term and F4") {
  const auto kac2 = make_scheme(Kac{}, 2);
  CHECK(delta_cross(kac2, 0.5, 0.5) == doctest::Approx(0.75).epsilon(1e-15));
  const auto h = make_scheme(Hyperbolic{2.0}, 6);
  CHECK(delta_cross(h, 0.0, 0.7) ==
        doctest::Approx(h.coeffs[0] * h.coeffs[0] * std::pow(0.7, 6) / h.coeffs[6]).epsilon(1e-14));

  CHECK(f4_term(kac2, 0.5, 0.5, 0.0, 1.3) == 0.0);
  CHECK(f4_term(kac2, 0.5, 0.5, 0.7, 0.0) == 0.0);
  CHECK(f4_term(kac2, 0.0, 0.0, 0.7, 1.1) == 0.0);  // Delta = 0
  CHECK(f4_term(kac2, 0.5, 0.5, 1.0, 1.0) == doctest::Approx(0.0793129301022954).epsilon(1e-13));
}
