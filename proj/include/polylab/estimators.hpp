#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "polylab/ensemble.hpp"

namespace polylab {

/// Nodes x_j = 1 - exp(-j delta), j0 <= j <= j1.
struct DyadicGrid {
  double delta = 0.0;
  long j0 = 0;
  long j1 = -1;
  std::vector<double> nodes;
  std::vector<double> gaps;  // 1 - x_j = exp(-j delta), kept separately to avoid cancellation

  bool empty() const { return j1 <= j0; }
  std::size_t cells() const { return empty() ? 0 : static_cast<std::size_t>(j1 - j0); }
  double T() const { return empty() ? 0.0 : static_cast<double>(j1 - j0) * delta; }
};

/// j0 = ceil(log(1/a_n)/delta), j1 = floor(log(1/b_n)/delta).
DyadicGrid dyadic_grid(double a_n, double b_n, double delta);

/// Sum of (1 - sign(P(u)P(v)))/2 over consecutive nodes. A zero value has
/// sign 0, contributes 1/2 per adjacent cell and is counted in zero_values.
struct SignCount {
  double value = 0.0;
  std::size_t zero_values = 0;
};

/// Sign-change indicators of a sequence of values, one per adjacent pair.
std::vector<double> sign_change_cells(std::span<const double> values);

SignCount sign_change_count(std::span<const double> coeffs, const DyadicGrid& grid);

struct TruncationParams {
  double alpha = 2.0;
  double rho_prime = 1.0;  // min(1, 1 + 2 rho)

  static TruncationParams make(double alpha, double rho);
};

/// A_x = log(1/(1-x)), m_x = max(0, ceil(A_x^{-alpha}/(1-x))), M_x = min(n, floor(alpha log(A_x)/(1-x))).
struct TruncationWindow {
  double A = 0.0;
  long m = 0;
  long M = 0;

  bool empty() const { return m > M; }
};

TruncationWindow truncation_window(double x, double alpha, int n);
/// Same window from the gap 1 - x directly.
TruncationWindow truncation_window_gap(double one_minus_x, double alpha, int n);

struct TruncatedValue {
  double value = 0.0;
  bool empty_window = false;
};

/// Q(x) = sum_{j=m_x}^{M_x} a_j x^j with the window taken at |x|.
TruncatedValue truncated_eval(std::span<const double> coeffs, double x, const TruncationParams& params);

SignCount truncated_sign_chain(std::span<const double> coeffs, const DyadicGrid& grid, const TruncationParams& params);

/// Half-open index range of grid cells [begin, end); cell j is (x_j, x_{j+1}).
struct IndexRange {
  long begin = 0;
  long end = 0;

  long size() const { return end - begin; }
};

struct BlockPlan {
  long p = 0;
  long q = 0;
  long l = 0;
  std::vector<IndexRange> z_ranges;  // length-p runs
  std::vector<IndexRange> x_ranges;  // length-q gaps following each run
  IndexRange tail;                   // cells beyond l (p + q)
};

/// p = floor(T^{1/2}/delta), q = floor(T^{1/8}/delta), l = floor((j1 - j0)/(p + q)).
BlockPlan block_plan(const DyadicGrid& grid);

/// Truncated indicators summed over a plan on all four sides of the core
/// region: P on +-x_j gives Z_k (runs) and X_k (gaps), the reversal R on +-x_j
/// gives W_k and Y_k.
struct BlockSums {
  std::vector<double> Z, W, X, Y;
  double tail = 0.0;
  double total = 0.0;  // S^trun
  std::size_t zero_values = 0;
};

BlockSums block_sums(const SampledPolynomial& p, const DyadicGrid& grid, const BlockPlan& plan,
                     const TruncationParams& params);

/// Four-sided chains over the core region: P on +-x_j and the reversal on +-x_j.
SignCount core_sign_chain(const SampledPolynomial& p, const DyadicGrid& grid);
SignCount core_truncated_chain(const SampledPolynomial& p, const DyadicGrid& grid, const TruncationParams& params);

/// M_x < m_y: Q(x) and Q(y) use disjoint coefficient sets.
bool independence_check(double x, double y, double alpha, int n);

}  // namespace polylab
