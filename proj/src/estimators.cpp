#include "polylab/estimators.hpp"

#include <cmath>
#include <limits>

#include "polylab/errors.hpp"
#include "polylab/horner.hpp"

namespace polylab {
namespace {

// Integer part with a small tolerance so that exact products such as
// 256^{1/8} = 2 are not lost to rounding.
long floor_tol(double v) { return static_cast<long>(std::floor(v + 1e-9 * std::max(1.0, std::abs(v)))); }
long ceil_tol(double v) { return static_cast<long>(std::ceil(v - 1e-9 * std::max(1.0, std::abs(v)))); }

int sign_of(double v) { return v > 0.0 ? 1 : (v < 0.0 ? -1 : 0); }

double indicator(int a, int b) { return 0.5 - 0.5 * a * b; }

struct SignedValue {
  double value = 0.0;
  int sign = 0;
  bool empty = false;
};

SignedValue truncated_value(std::span<const double> coeffs, double x, const TruncationWindow& w) {
  const long n = static_cast<long>(coeffs.size()) - 1;
  const long m = std::min(w.m, n + 1);
  const long M = std::min(w.M, n);
  if (m > M) return {0.0, 0, true};
  // Q(x) = x^m H(x); the sign of x^m is taken separately so underflow of the
  // prefactor does not lose it.
  const double h = horner::compensated(coeffs.subspan(static_cast<std::size_t>(m), static_cast<std::size_t>(M - m + 1)), x);
  int s = sign_of(h);
  if (x < 0.0 && (m % 2 == 1)) s = -s;
  return {std::pow(x, static_cast<double>(m)) * h, s, false};
}

std::vector<int> node_signs(std::span<const double> coeffs, const DyadicGrid& grid, double side) {
  std::vector<int> s;
  s.reserve(grid.nodes.size());
  for (double x : grid.nodes) s.push_back(sign_of(horner::compensated(coeffs, side * x)));
  return s;
}

std::vector<int> truncated_node_signs(std::span<const double> coeffs, const DyadicGrid& grid, double side,
                                      const TruncationParams& params) {
  const int n = static_cast<int>(coeffs.size()) - 1;
  std::vector<int> s;
  s.reserve(grid.nodes.size());
  for (std::size_t k = 0; k < grid.nodes.size(); ++k) {
    const auto w = truncation_window_gap(grid.gaps[k], params.alpha, n);
    s.push_back(truncated_value(coeffs, side * grid.nodes[k], w).sign);
  }
  return s;
}

// Per-cell indicators for nodes listed in increasing x; for side -1 the nodes
// -x_j decrease, which leaves each cell's indicator unchanged.
std::vector<double> cells_from_signs(const std::vector<int>& s) {
  std::vector<double> out;
  if (s.size() < 2) return out;
  out.reserve(s.size() - 1);
  for (std::size_t k = 0; k + 1 < s.size(); ++k) out.push_back(indicator(s[k], s[k + 1]));
  return out;
}

std::size_t zeros(const std::vector<int>& s) {
  std::size_t z = 0;
  for (int v : s) z += (v == 0);
  return z;
}

SignCount accumulate(const std::vector<std::vector<int>>& sides) {
  SignCount out;
  for (const auto& s : sides) {
    for (double c : cells_from_signs(s)) out.value += c;
    out.zero_values += zeros(s);
  }
  return out;
}

void require_grid(const DyadicGrid& grid) {
  if (grid.empty()) throw ValidationError("empty dyadic grid");
}

}  // namespace

DyadicGrid dyadic_grid(double a_n, double b_n, double delta) {
  if (!(delta > 0.0 && std::isfinite(delta))) throw ValidationError("grid spacing must be positive and finite");
  if (!(b_n > 0.0 && b_n < a_n && a_n < 1.0)) throw ValidationError("dyadic grid needs 0 < b_n < a_n < 1");
  DyadicGrid g;
  g.delta = delta;
  g.j0 = ceil_tol(std::log(1.0 / a_n) / delta);
  g.j1 = floor_tol(std::log(1.0 / b_n) / delta);
  if (g.empty()) return g;
  for (long j = g.j0; j <= g.j1; ++j) {
    const double gap = std::exp(-static_cast<double>(j) * delta);
    g.gaps.push_back(gap);
    g.nodes.push_back(-std::expm1(-static_cast<double>(j) * delta));
  }
  return g;
}

std::vector<double> sign_change_cells(std::span<const double> values) {
  std::vector<int> s;
  s.reserve(values.size());
  for (double v : values) s.push_back(sign_of(v));
  return cells_from_signs(s);
}

SignCount sign_change_count(std::span<const double> coeffs, const DyadicGrid& grid) {
  require_grid(grid);
  return accumulate({node_signs(coeffs, grid, 1.0)});
}

TruncationParams TruncationParams::make(double alpha, double rho) {
  if (!(alpha >= 1.0)) throw ValidationError("truncation alpha must be >= 1");
  return {alpha, std::min(1.0, 1.0 + 2.0 * rho)};
}

TruncationWindow truncation_window_gap(double one_minus_x, double alpha, int n) {
  if (!(one_minus_x > 0.0 && one_minus_x < 1.0)) throw ValidationError("truncation window needs 0 < x < 1");
  if (!(alpha > 0.0)) throw ValidationError("truncation alpha must be positive");
  TruncationWindow w;
  w.A = -std::log(one_minus_x);
  if (!(w.A > 1.0)) throw ValidationError("truncation window undefined: A_x <= 1");
  const double inv = 1.0 / one_minus_x;
  // alpha = +inf is the full window [0, n].
  const double low = std::isinf(alpha) ? 0.0 : std::exp(std::log(inv) - alpha * std::log(w.A));
  const double high = std::isinf(alpha) ? std::numeric_limits<double>::infinity() : alpha * inv * std::log(w.A);
  w.m = std::max(0L, low == 0.0 ? 0L : ceil_tol(low));
  w.M = high >= static_cast<double>(n) ? n : floor_tol(high);
  return w;
}

TruncationWindow truncation_window(double x, double alpha, int n) {
  if (!(x > 0.0 && x < 1.0)) throw ValidationError("truncation window needs 0 < x < 1");
  return truncation_window_gap(1.0 - x, alpha, n);
}

TruncatedValue truncated_eval(std::span<const double> coeffs, double x, const TruncationParams& params) {
  const int n = static_cast<int>(coeffs.size()) - 1;
  const auto w = truncation_window(std::abs(x), params.alpha, n);
  const auto v = truncated_value(coeffs, x, w);
  return {v.value, v.empty};
}

SignCount truncated_sign_chain(std::span<const double> coeffs, const DyadicGrid& grid, const TruncationParams& params) {
  require_grid(grid);
  return accumulate({truncated_node_signs(coeffs, grid, 1.0, params)});
}

BlockPlan block_plan(const DyadicGrid& grid) {
  require_grid(grid);
  const double T = grid.T();
  if (!(T > 1.0)) throw ValidationError("block plan degenerate: T <= 1");
  BlockPlan plan;
  plan.p = floor_tol(std::sqrt(T) / grid.delta);
  plan.q = floor_tol(std::pow(T, 0.125) / grid.delta);
  if (plan.p < 1) throw ValidationError("block plan degenerate: p = 0");
  const long span = grid.j1 - grid.j0;
  plan.l = span / (plan.p + plan.q);
  if (plan.l < 1) throw ValidationError("block plan degenerate: no complete block");
  for (long k = 0; k < plan.l; ++k) {
    const long start = grid.j0 + k * (plan.p + plan.q);
    plan.z_ranges.push_back({start, start + plan.p});
    plan.x_ranges.push_back({start + plan.p, start + plan.p + plan.q});
  }
  plan.tail = {grid.j0 + plan.l * (plan.p + plan.q), grid.j1};
  return plan;
}

BlockSums block_sums(const SampledPolynomial& p, const DyadicGrid& grid, const BlockPlan& plan,
                     const TruncationParams& params) {
  require_grid(grid);
  const SampledPolynomial r = reverse_polynomial(p);
  std::vector<std::vector<int>> signs{
      truncated_node_signs(p.span(), grid, 1.0, params), truncated_node_signs(p.span(), grid, -1.0, params),
      truncated_node_signs(r.span(), grid, 1.0, params), truncated_node_signs(r.span(), grid, -1.0, params)};
  std::vector<std::vector<double>> cells;
  BlockSums out;
  for (const auto& s : signs) {
    cells.push_back(cells_from_signs(s));
    out.zero_values += zeros(s);
  }
  const auto range_sum = [&](const IndexRange& range, std::size_t first, std::size_t second) {
    double v = 0.0;
    for (long j = range.begin; j < range.end; ++j) {
      const auto k = static_cast<std::size_t>(j - grid.j0);
      v += cells[first][k] + cells[second][k];
    }
    return v;
  };
  for (long k = 0; k < plan.l; ++k) {
    out.Z.push_back(range_sum(plan.z_ranges[k], 0, 1));
    out.W.push_back(range_sum(plan.z_ranges[k], 2, 3));
    out.X.push_back(range_sum(plan.x_ranges[k], 0, 1));
    out.Y.push_back(range_sum(plan.x_ranges[k], 2, 3));
  }
  out.tail = range_sum(plan.tail, 0, 1) + range_sum(plan.tail, 2, 3);
  for (const auto& c : cells)
    for (double v : c) out.total += v;
  return out;
}

SignCount core_sign_chain(const SampledPolynomial& p, const DyadicGrid& grid) {
  require_grid(grid);
  const SampledPolynomial r = reverse_polynomial(p);
  return accumulate({node_signs(p.span(), grid, 1.0), node_signs(p.span(), grid, -1.0), node_signs(r.span(), grid, 1.0),
                     node_signs(r.span(), grid, -1.0)});
}

SignCount core_truncated_chain(const SampledPolynomial& p, const DyadicGrid& grid, const TruncationParams& params) {
  require_grid(grid);
  const SampledPolynomial r = reverse_polynomial(p);
  return accumulate({truncated_node_signs(p.span(), grid, 1.0, params),
                     truncated_node_signs(p.span(), grid, -1.0, params),
                     truncated_node_signs(r.span(), grid, 1.0, params),
                     truncated_node_signs(r.span(), grid, -1.0, params)});
}

bool independence_check(double x, double y, double alpha, int n) {
  if (!(x < y)) return false;
  return truncation_window(x, alpha, n).M < truncation_window(y, alpha, n).m;
}

}  // namespace polylab
