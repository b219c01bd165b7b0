#pragma once

// Adaptive Gauss-Kronrod (7/15) quadrature with global interval selection.

#include <algorithm>
#include <array>
#include <cmath>
#include <queue>
#include <vector>

namespace polylab {

struct QuadConfig {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  int max_subdivisions = 4000;
};

struct QuadResult {
  double value = 0.0;
  double error = 0.0;
  bool converged = true;
  int subdivisions = 0;
};

namespace quad_detail {

inline constexpr std::array<double, 8> kKronrodNodes{
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851, 0.864864423359769072789712788640926,
    0.741531185599394439863864773280788, 0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kKronrodWeights{
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204, 0.104790010322250183839876322541518,
    0.140653259715525918745189590510238, 0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
// Gauss weights for the odd Kronrod nodes (index 1, 3, 5, 7).
inline constexpr std::array<double, 4> kGaussWeights{
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780, 0.381830050505118944950369775488975,
    0.417959183673469387755102040816327};

struct Panel {
  double a, b, value, error;
  bool operator<(const Panel& o) const { return error < o.error; }
};

template <class F>
Panel gauss_kronrod(const F& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double fc = f(c);
  double kronrod = fc * kKronrodWeights[7];
  double gauss = fc * kGaussWeights[3];
  for (int k = 0; k < 7; ++k) {
    const double dx = h * kKronrodNodes[k];
    const double s = f(c - dx) + f(c + dx);
    kronrod += kKronrodWeights[k] * s;
    if (k % 2 == 1) gauss += kGaussWeights[k / 2] * s;
  }
  return {a, b, kronrod * h, std::abs((kronrod - gauss) * h)};
}

}  // namespace quad_detail

/// Integral of f over [breaks.front(), breaks.back()], starting from the given
/// panels and bisecting the panel with the largest error estimate.
template <class F>
QuadResult integrate(const F& f, const std::vector<double>& breaks, const QuadConfig& cfg = {}) {
  QuadResult out;
  if (breaks.size() < 2) return out;
  std::priority_queue<quad_detail::Panel> heap;
  double value = 0.0, error = 0.0;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    if (!(breaks[i + 1] > breaks[i])) continue;
    const auto panel = quad_detail::gauss_kronrod(f, breaks[i], breaks[i + 1]);
    value += panel.value;
    error += panel.error;
    heap.push(panel);
  }

  while (!heap.empty() && error > std::max(cfg.abs_tol, cfg.rel_tol * std::abs(value))) {
    if (out.subdivisions >= cfg.max_subdivisions) {
      out.converged = false;
      break;
    }
    const quad_detail::Panel worst = heap.top();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      out.converged = false;
      break;
    }
    heap.pop();
    const auto left = quad_detail::gauss_kronrod(f, worst.a, mid);
    const auto right = quad_detail::gauss_kronrod(f, mid, worst.b);
    value += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    ++out.subdivisions;
  }
  // Final sum in a fixed left-to-right order.
  std::vector<quad_detail::Panel> panels;
  panels.reserve(heap.size());
  for (; !heap.empty(); heap.pop()) panels.push_back(heap.top());
  std::sort(panels.begin(), panels.end(), [](const auto& x, const auto& y) { return x.a < y.a; });
  out.value = 0.0;
  for (const auto& p : panels) {
    out.value += p.value;
    out.error += p.error;
  }
  return out;
}

}  // namespace polylab
