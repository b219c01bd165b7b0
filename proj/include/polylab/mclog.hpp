#pragma once

#include <complex>
#include <cstdint>
#include <span>

#include "polylab/roots.hpp"

namespace polylab {

/// phi(z) = phi_re(Re z) phi_0(Im z / h), h = delta^{1+alpha}. phi_re is 1 on
/// [1 - delta_prev, 1 - delta] and vanishes outside the h-neighbourhood of it;
/// phi_0 is 1 on [-1/2, 1/2] and vanishes outside [-1, 1]. Both transitions
/// use the C^3 septic smoothstep 35t^4 - 84t^5 + 70t^6 - 20t^7.
struct BumpSpec {
  double delta = 0.05;
  double alpha = 1.0;
  double delta_prev = 0.1;  // delta_{i-1}

  static BumpSpec make(double delta, double alpha);  // delta_prev = 2 delta

  double margin() const;     // h
  double plateau_lo() const { return 1.0 - delta_prev; }
  double plateau_hi() const { return 1.0 - delta; }
  void validate() const;
};

/// Sup norms of the a-th derivative of the smoothstep, a = 0..3.
inline constexpr double kSmoothstepDerivativeSup[4] = {1.0, 2.1875, 7.513188404399293, 52.5};

double bump_value(const BumpSpec& spec, std::complex<double> z);
double bump_laplacian(const BumpSpec& spec, std::complex<double> z);

/// sum of bump_value over the complex roots.
double smoothed_count(std::span<const double> coeffs, const BumpSpec& spec);
double smoothed_count(const ComplexRoots& roots, const BumpSpec& spec);

struct GreenResult {
  double value = 0.0;
  int resolution = 0;  // sub-panels per side in the final pass
  bool converged = true;
};

/// (1/2pi) int log|P| Laplacian(phi) over the support, tensor Gauss-Legendre on
/// panels aligned with the profile breakpoints, refined by doubling
/// `initial_resolution` until successive values differ by < tol.
GreenResult green_integral(std::span<const double> coeffs, const BumpSpec& spec, int initial_resolution = 1,
                           double tol = 1e-3, int max_resolution = 256);

struct MCConfig {
  std::uint64_t m = 1;
  std::uint64_t seed = 0;
  bool capped = false;  // default m hit the 10^6 cap

  /// m = floor(delta^{-11 alpha}) capped at 10^6.
  static MCConfig defaults(const BumpSpec& spec, std::uint64_t seed);
};

/// Ball B(1 - 3 delta/2, 2 delta/3).
std::complex<double> mc_center(const BumpSpec& spec);
double mc_radius(const BumpSpec& spec);
/// Whether the support rectangle of phi lies inside the sampling ball.
bool support_in_ball(const BumpSpec& spec);

struct MCEstimate {
  double value = 0.0;
  std::uint64_t resamples = 0;
  bool support_contained = true;
};

/// (2 delta^2 / (9 m)) sum_k log|P(w_k)| Laplacian(phi)(w_k), w_k uniform on the ball.
MCEstimate mc_zero_estimate(std::span<const double> coeffs, const BumpSpec& spec, const MCConfig& mc);

/// Numerical restatement of the event T bound: if log|P| <= delta^{-c1}/2 on
/// B(x0, 4 delta/5) and log|P(x1)| >= -delta^{-c1}/2 at some x1 in B(x0, delta/100),
/// then the root count in B(x0, 3 delta/4) is at most kappa delta^{-c1} with
/// kappa = 1/log((R^2 + r^2)/(2Rr)), R = 4 delta/5, r = 3 delta/4.
struct JensenConsistency {
  bool conditions_hold = false;
  std::size_t disk_count = 0;
  double bound = 0.0;
  bool consistent = true;
};

JensenConsistency jensen_consistency(std::span<const double> coeffs, const BumpSpec& spec);

}  // namespace polylab
