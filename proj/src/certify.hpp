#pragma once

// Certified counting of real roots on a subinterval of [-1, 1] (internal).

#include <span>

#include "exact.hpp"
#include "polylab/roots.hpp"

namespace polylab::detail {

struct EndpointSpec {
  ExactPoint point;
  Bound bound = Bound::open;
};

/// Distinct roots of the polynomial on the interval between lo and hi, whose
/// exact values must lie in [-1, 1] with lo < hi. The coefficient vector must
/// have a nonzero last entry.
CertifiedCount count_in_unit_interval(std::span<const double> coeffs, const EndpointSpec& lo,
                                      const EndpointSpec& hi, const CountOptions& options);

}  // namespace polylab::detail
