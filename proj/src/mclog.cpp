#include "polylab/mclog.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "polylab/errors.hpp"
#include "polylab/philox.hpp"

namespace polylab {
namespace {

double step(double t) {
  const double t2 = t * t;
  return t2 * t2 * (35.0 + t * (-84.0 + t * (70.0 - 20.0 * t)));
}

double step_dd(double t) {
  const double u = t * (1.0 - t);
  return 420.0 * u * u * (1.0 - 2.0 * t);
}

struct Profile {
  double value = 0.0;
  double second = 0.0;
};

Profile real_profile(const BumpSpec& spec, double x) {
  const double h = spec.margin();
  const double lo = spec.plateau_lo();
  const double hi = spec.plateau_hi();
  if (x <= lo - h || x >= hi + h) return {};
  if (x >= lo && x <= hi) return {1.0, 0.0};
  const double t = x < lo ? (x - (lo - h)) / h : (hi + h - x) / h;
  return {step(t), step_dd(t) / (h * h)};
}

Profile imag_profile(double s) {
  const double a = std::abs(s);
  if (a >= 1.0) return {};
  if (a <= 0.5) return {1.0, 0.0};
  const double t = 2.0 * (1.0 - a);
  return {step(t), 4.0 * step_dd(t)};
}

constexpr std::array<double, 8> kGLNodes{-0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
                                         -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
                                         0.7966664774136267,  0.9602898564975363};
constexpr std::array<double, 8> kGLWeights{0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
                                           0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
                                           0.2223810344533745, 0.1012285362903763};

double log_abs(std::span<const double> coeffs, std::complex<double> z, double nudge) {
  double v = std::abs(evaluate_complex(coeffs, z));
  for (int k = 1; (v < 1e-300 || !std::isfinite(v)) && k <= 8; ++k)
    v = std::abs(evaluate_complex(coeffs, z + std::complex<double>(0.0, k * nudge)));
  if (!(v > 0.0)) throw NumericsError("log|P| undefined at a quadrature node");
  return std::log(v);
}

// One tensor pass: every panel split into nx x ny Gauss-Legendre cells.
double green_pass(std::span<const double> coeffs, const BumpSpec& spec, int k) {
  const double h = spec.margin();
  const double lo = spec.plateau_lo();
  const double hi = spec.plateau_hi();
  const std::array<double, 4> xb{lo - h, lo, hi, hi + h};
  const std::array<double, 4> yb{-h, -0.5 * h, 0.5 * h, h};
  const double nudge = 1e-12 * spec.delta;

  double total = 0.0;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      if (i == 1 && j == 1) continue;  // flat part: the Laplacian vanishes
      const double w = xb[i + 1] - xb[i];
      const double v = yb[j + 1] - yb[j];
      const int nx = k * std::max(1, static_cast<int>(std::ceil(w / v)));
      const int ny = k * std::max(1, static_cast<int>(std::ceil(v / w)));
      const double dx = w / nx;
      const double dy = v / ny;
      for (int a = 0; a < nx; ++a) {
        const double cx = xb[i] + (a + 0.5) * dx;
        for (int b = 0; b < ny; ++b) {
          const double cy = yb[j] + (b + 0.5) * dy;
          double cell = 0.0;
          for (std::size_t p = 0; p < kGLNodes.size(); ++p) {
            const double x = cx + 0.5 * dx * kGLNodes[p];
            for (std::size_t q = 0; q < kGLNodes.size(); ++q) {
              const std::complex<double> z(x, cy + 0.5 * dy * kGLNodes[q]);
              const double lap = bump_laplacian(spec, z);
              if (lap == 0.0) continue;
              cell += kGLWeights[p] * kGLWeights[q] * lap * log_abs(coeffs, z, nudge);
            }
          }
          total += cell * 0.25 * dx * dy;
        }
      }
    }
  }
  return total / (2.0 * std::numbers::pi);
}

}  // namespace

BumpSpec BumpSpec::make(double delta, double alpha) {
  BumpSpec s{delta, alpha, 2.0 * delta};
  s.validate();
  return s;
}

double BumpSpec::margin() const { return std::pow(delta, 1.0 + alpha); }

void BumpSpec::validate() const {
  if (!(delta > 0.0 && delta < delta_prev && delta_prev < 1.0)) throw ValidationError("bump needs 0 < delta < delta_prev < 1");
  if (!(alpha > 0.0)) throw ValidationError("bump alpha must be positive");
}

double bump_value(const BumpSpec& spec, std::complex<double> z) {
  const Profile re = real_profile(spec, z.real());
  if (re.value == 0.0) return 0.0;
  return re.value * imag_profile(z.imag() / spec.margin()).value;
}

double bump_laplacian(const BumpSpec& spec, std::complex<double> z) {
  const double h = spec.margin();
  const Profile re = real_profile(spec, z.real());
  const Profile im = imag_profile(z.imag() / h);
  return re.second * im.value + re.value * im.second / (h * h);
}

double smoothed_count(const ComplexRoots& roots, const BumpSpec& spec) {
  double s = 0.0;
  for (const auto& z : roots.roots) s += bump_value(spec, z);
  return s;
}

double smoothed_count(std::span<const double> coeffs, const BumpSpec& spec) {
  return smoothed_count(complex_roots(coeffs), spec);
}

GreenResult green_integral(std::span<const double> coeffs, const BumpSpec& spec, int initial_resolution, double tol,
                           int max_resolution) {
  spec.validate();
  if (initial_resolution < 1) throw ValidationError("quadrature resolution must be positive");
  GreenResult out;
  int k = initial_resolution;
  double prev = green_pass(coeffs, spec, k);
  while (true) {
    if (2 * k > max_resolution) {
      out.converged = false;
      out.value = prev;
      out.resolution = k;
      return out;
    }
    k *= 2;
    const double cur = green_pass(coeffs, spec, k);
    const bool done = std::abs(cur - prev) < tol;
    prev = cur;
    if (done) break;
  }
  out.value = prev;
  out.resolution = k;
  return out;
}

MCConfig MCConfig::defaults(const BumpSpec& spec, std::uint64_t seed) {
  MCConfig mc;
  mc.seed = seed;
  const double m = std::floor(std::pow(spec.delta, -11.0 * spec.alpha));
  constexpr double kCap = 1e6;
  mc.capped = !(m <= kCap);
  mc.m = static_cast<std::uint64_t>(std::max(1.0, std::min(m, kCap)));
  return mc;
}

std::complex<double> mc_center(const BumpSpec& spec) { return {1.0 - 1.5 * spec.delta, 0.0}; }

double mc_radius(const BumpSpec& spec) { return 2.0 * spec.delta / 3.0; }

bool support_in_ball(const BumpSpec& spec) {
  const double h = spec.margin();
  const double c = mc_center(spec).real();
  const double dx = std::max(c - (spec.plateau_lo() - h), spec.plateau_hi() + h - c);
  return std::hypot(dx, h) < mc_radius(spec);
}

MCEstimate mc_zero_estimate(std::span<const double> coeffs, const BumpSpec& spec, const MCConfig& mc) {
  spec.validate();
  if (mc.m < 1) throw ValidationError("Monte Carlo sample count must be >= 1");
  MCEstimate out;
  out.support_contained = support_in_ball(spec);
  const CounterStream stream(mc.seed);
  const std::complex<double> c = mc_center(spec);
  const double radius = mc_radius(spec);

  double sum = 0.0;
  std::uint64_t next = mc.m;  // replacement draws use indices past m
  for (std::uint64_t k = 0; k < mc.m; ++k) {
    std::uint64_t index = k;
    while (true) {
      const auto [u, v] = stream.uniform2(index);
      const std::complex<double> w = c + std::polar(radius * std::sqrt(u), 2.0 * std::numbers::pi * v);
      const double lap = bump_laplacian(spec, w);
      if (lap == 0.0) break;
      const double a = std::abs(evaluate_complex(coeffs, w));
      if (a >= 1e-300 && std::isfinite(a)) {
        sum += std::log(a) * lap;
        break;
      }
      ++out.resamples;
      index = next++;
    }
  }
  out.value = 2.0 * spec.delta * spec.delta / (9.0 * static_cast<double>(mc.m)) * sum;
  return out;
}

JensenConsistency jensen_consistency(std::span<const double> coeffs, const BumpSpec& spec) {
  spec.validate();
  JensenConsistency out;
  const double d = spec.delta;
  const double c1 = spec.alpha / 2.0;
  const double level = 0.5 * std::pow(d, -c1);
  const std::complex<double> x0 = mc_center(spec);

  const double upper = std::log(circle_sup(coeffs, x0, 0.8 * d));
  double lower = -std::numeric_limits<double>::infinity();
  const double small = d / 100.0;
  for (std::complex<double> x1 : {x0, x0 + small / 2.0, x0 - small / 2.0, x0 + std::complex<double>(0.0, small / 2.0)})
    lower = std::max(lower, std::log(std::abs(evaluate_complex(coeffs, x1))));
  out.conditions_hold = upper <= level && lower >= -level;

  const double R = 0.8 * d;
  const double r = 0.75 * d;
  const double kappa = 1.0 / std::log((R * R + r * r) / (2.0 * R * r));
  out.bound = kappa * std::pow(d, -c1);
  const auto disk = count_roots_in_disk(coeffs, x0, r);
  out.disk_count = disk.count;
  out.consistent = !out.conditions_hold || static_cast<double>(out.disk_count) <= out.bound;
  return out;
}

}  // namespace polylab
