#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <vector>

#include <nlohmann/json.hpp>

#include "polylab/errors.hpp"
#include "polylab/estimators.hpp"
#include "polylab/philox.hpp"
#include "polylab/roots.hpp"
#include "polylab/stats.hpp"

using namespace polylab;

namespace {

nlohmann::json calibration() {
  std::ifstream f(POLYLAB_SOURCE_DIR "/config/calibration.json");
  REQUIRE(f.good());
  return nlohmann::json::parse(f);
}

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

TEST_CASE("dyadic grid") {
  const auto g = dyadic_grid(1.0 / 8, 1.0 / 32, std::log(2.0));
  CHECK(g.j0 == 3);
  CHECK(g.j1 == 5);
  REQUIRE(g.nodes.size() == 3);
  CHECK(g.nodes[0] == 0.875);
  CHECK(g.nodes[1] == 0.9375);
  CHECK(g.nodes[2] == 0.96875);
  CHECK(g.cells() == 2);
  CHECK(g.T() == doctest::Approx(2.0 * std::log(2.0)));
  CHECK_THROWS_AS(dyadic_grid(0.1, 0.1, 0.05), ValidationError);
  CHECK_THROWS_AS(dyadic_grid(0.01, 0.1, 0.05), ValidationError);
  CHECK(dyadic_grid(0.1, 0.09, 0.5).empty());
}

TEST_CASE("sign changes") {
  CHECK(sign_change_cells(std::vector<double>{1.0, -2.0, 3.0}) == std::vector<double>{1.0, 1.0});
  CHECK(sign_change_cells(std::vector<double>{1.0, 2.0, 3.0}) == std::vector<double>{0.0, 0.0});
  CHECK(sign_change_cells(std::vector<double>{1.0, 0.0, -1.0}) == std::vector<double>{0.5, 0.5});

  const auto g = dyadic_grid(1.0 / 8, 1.0 / 32, std::log(2.0));
  // (x - 0.9)(x - 0.95): nodes give (+, -, +)
  const std::vector<double> p{0.855, -1.85, 1.0};
  CHECK(sign_change_count(p, g).value == 2.0);
  CHECK(sign_change_count(std::vector<double>{1.0, 1.0}, g).value == 0.0);
  // root exactly at the middle node
  const std::vector<double> q{-0.9375, 1.0};
  const auto z = sign_change_count(q, g);
  CHECK(z.value == 1.0);
  CHECK(z.zero_values == 1);
}

TEST_CASE("sign chain never exceeds the certified count") {
  const auto scheme = make_scheme(Kac{}, 256);
  const auto g = dyadic_grid(0.5, 1.0 / 256, 0.01);
  int equal = 0;
  for (std::uint64_t i = 0; i < 1000; ++i) {
    const auto p = sample_polynomial(scheme, AtomSpec{}, derive_seed(3, "sign-chain", i));
    const auto s = sign_change_count(p.span(), g);
    REQUIRE(s.zero_values == 0);
    const auto c = count_real_roots(p, g.nodes.front(), g.nodes.back());
    REQUIRE(c.certified);
    const auto sign = static_cast<std::size_t>(s.value);
    CHECK(sign <= c.count);
    CHECK((c.count - sign) % 2 == 0);
    if (sign == c.count) {
      ++equal;
      continue;
    }
    // some cell must then hold two or more roots
    bool crowded = false;
    for (std::size_t k = 0; k + 1 < g.nodes.size() && !crowded; ++k)
      crowded = count_real_roots(p, g.nodes[k], g.nodes[k + 1]).count >= 2;
    CHECK(crowded);
  }
  CHECK(equal > 900);
}

TEST_CASE("truncation window") {
  const auto w = truncation_window_gap(std::exp(-10.0), 2.0, 1000000);
  CHECK(w.A == doctest::Approx(10.0).epsilon(1e-14));
  CHECK(w.m == 221);
  CHECK(w.M == 101435);  // floor(2 e^10 ln 10) = floor(101435.39...)
  CHECK(truncation_window_gap(std::exp(-10.0), 2.0, 5000).M == 5000);

  const auto e = truncation_window_gap(std::exp(-std::exp(1.0)), 1.0, 1000);
  CHECK(e.m == 6);
  CHECK(e.M == 15);

  CHECK_THROWS_AS(truncation_window(0.5, 2.0, 100), ValidationError);  // A = log 2 <= 1
  CHECK_THROWS_AS(truncation_window(1.0, 2.0, 100), ValidationError);

  for (double A = 3.0; A <= 20.0; A += 0.25)
    for (double alpha = 1.0; alpha <= A; alpha += 0.5) {
      const auto v = truncation_window_gap(std::exp(-A), alpha, std::numeric_limits<int>::max());
      CHECK(v.m < v.M);
    }

  // m_x = e^A A^-alpha only increases once A >= alpha
  for (double alpha : {2.0, 4.0}) {
    TruncationWindow prev = truncation_window_gap(std::exp(-alpha), alpha, 1000000);
    for (double A = alpha + 0.05; A < 14.0; A += 0.05) {
      const auto cur = truncation_window_gap(std::exp(-A), alpha, 1000000);
      CHECK(prev.m <= cur.m);
      CHECK(prev.M <= cur.M);
      prev = cur;
    }
  }
}

TEST_CASE("truncated evaluation") {
  const auto p = sample_polynomial(make_scheme(Kac{}, 300), AtomSpec{}, 21);
  const auto full = TruncationParams{kInf, 1.0};
  for (double x : {0.7, -0.8, 0.99})
    CHECK(truncated_eval(p.span(), x, full).value == doctest::Approx(evaluate(p, x).value).epsilon(1e-13));

  // x = 1 - e^-2, alpha = 1: window [ceil(e^2/2), floor(e^2 ln 2)] = [4, 5]
  const double x = -std::expm1(-2.0);
  const auto t = truncated_eval(p.span(), x, TruncationParams{1.0, 1.0});
  const double direct = p.coeffs[4] * std::pow(x, 4) + p.coeffs[5] * std::pow(x, 5);
  CHECK(t.value == doctest::Approx(direct).epsilon(1e-13));
  CHECK_FALSE(t.empty_window);

  const auto small = sample_polynomial(make_scheme(Kac{}, 3), AtomSpec{}, 2);
  // m = ceil(e^6/6) = 68 > n
  const auto empty = truncated_eval(small.span(), -std::expm1(-6.0), TruncationParams{1.0, 1.0});
  CHECK(empty.empty_window);
  CHECK(empty.value == 0.0);
}

TEST_CASE("full-window truncated chain equals the sign chain") {
  const auto scheme = make_scheme(Kac{}, 2048);
  const auto g = dyadic_grid(std::exp(-1.2), std::exp(-6.4), 0.05);
  for (std::uint64_t i = 0; i < 50; ++i) {
    const auto p = sample_polynomial(scheme, AtomSpec{}, derive_seed(4, "full-window", i));
    CHECK(truncated_sign_chain(p.span(), g, TruncationParams{kInf, 1.0}).value == sign_change_count(p.span(), g).value);
    CHECK(core_truncated_chain(p, g, TruncationParams{kInf, 1.0}).value == core_sign_chain(p, g).value);
  }
  CHECK(truncated_sign_chain(std::vector<double>{1.0, 0.0, 0.0, 0.0, 0.0, 0.0}, dyadic_grid(0.3, 0.01, 0.1),
                             TruncationParams{kInf, 1.0})
            .value == 0.0);
}

TEST_CASE("block plan") {
  const auto g = dyadic_grid(std::exp(-2.0), std::exp(-258.0), 1.0);
  REQUIRE(g.j1 - g.j0 == 256);
  const auto plan = block_plan(g);
  CHECK(plan.q == 2);
  CHECK(plan.p == 16);
  CHECK(plan.l == 14);
  REQUIRE(plan.z_ranges.size() == 14);
  REQUIRE(plan.x_ranges.size() == 14);
  long cursor = g.j0;
  for (long k = 0; k < plan.l; ++k) {
    CHECK(plan.z_ranges[k].begin == cursor);
    CHECK(plan.z_ranges[k].size() == plan.p);
    CHECK(plan.x_ranges[k].begin == plan.z_ranges[k].end);
    CHECK(plan.x_ranges[k].size() == plan.q);
    cursor = plan.x_ranges[k].end;
  }
  CHECK(plan.tail.begin == cursor);
  CHECK(plan.tail.end == g.j1);
  CHECK(plan.tail.size() == 4);

  CHECK_THROWS_AS(block_plan(dyadic_grid(0.3, 0.2, 0.1)), ValidationError);
}

TEST_CASE("block sums add up to the truncated chain") {
  const auto scheme = make_scheme(Kac{}, 4000);
  const auto g = dyadic_grid(std::exp(-1.1), std::exp(-10.0), 0.2);
  const auto plan = block_plan(g);
  REQUIRE(plan.l >= 2);
  const auto params = TruncationParams::make(2.0, 0.0);
  const int N = 5000;
  std::vector<double> z0(N), z1(N);
  for (int i = 0; i < N; ++i) {
    const auto p = sample_polynomial(scheme, AtomSpec{}, derive_seed(5, "blocks", i));
    const auto b = block_sums(p, g, plan, params);
    double sum = b.tail;
    for (std::size_t k = 0; k < b.Z.size(); ++k) sum += b.Z[k] + b.W[k] + b.X[k] + b.Y[k];
    CHECK(sum == doctest::Approx(b.total));
    if (i < 20) CHECK(b.total == core_truncated_chain(p, g, params).value);
    z0[i] = b.Z[0];
    z1[i] = b.Z[1];
  }
  const auto m0 = sample_moments(z0), m1 = sample_moments(z1);
  double cov = 0.0;
  for (int i = 0; i < N; ++i) cov += (z0[i] - m0.mean) * (z1[i] - m1.mean);
  const double corr = cov / N / std::sqrt(m0.var * m1.var);
  CHECK(std::abs(corr) <= 4.0 / std::sqrt(static_cast<double>(N)));
}

TEST_CASE("independence predicate") {
  CHECK_FALSE(independence_check(0.9, 0.9, 2.0, 1000000));
  CHECK(independence_check(-std::expm1(-5.0), -std::expm1(-16.0), 2.0, 1000000));
  for (int n : {10000, 1000000})
    for (double alpha : {2.0, 4.0}) {
      const double need = 2.0 * alpha * std::log(std::log(static_cast<double>(n))) + 1.0;
      for (double u = 1.05; u < 12.0; u += 0.1)
        for (double v = u + need; v < std::min(u + need + 6.0, 35.0); v += 0.1)
          CHECK(independence_check(-std::expm1(-u), -std::expm1(-v), alpha, n));
    }
}

TEST_CASE("window variance is within the calibrated bound") {
  const auto cal = calibration()["window_variance"];
  const int n = cal["n"];
  const double alpha = cal["alpha"];
  const double gap = std::exp(cal["log_gap"].get<double>());
  const auto w = truncation_window_gap(gap, alpha, n);
  const auto scheme = make_scheme(Kac{}, n);
  const double x = 1.0 - gap;
  const int samples = 4000;
  std::vector<double> full(samples), rest(samples);
  for (int i = 0; i < samples; ++i) {
    const auto p = sample_polynomial(scheme, AtomSpec{}, derive_seed(6, "window-variance", i));
    const auto q = truncated_eval(p.span(), x, TruncationParams{alpha, 1.0});
    full[i] = evaluate(p, x).value;
    rest[i] = full[i] - q.value;
  }
  const double ratio = sample_moments(rest).var / sample_moments(full).var;
  CHECK(ratio <= cal["kappa"].get<double>() * std::pow(w.A, -alpha));
}

TEST_CASE("truncation error is within the calibrated bound") {
  const auto cal = calibration()["truncation_mse"];
  ExperimentConfig cfg;
  cfg.n_list = {cal["n"].get<int>()};
  cfg.samples = 600;
  cfg.region.kind = RegionSpec::Kind::core;
  cfg.estimator.alpha = cal["alpha"];
  cfg.seed = 77;
  const double delta = cal["delta"];
  const std::vector<double> deltas{delta};
  const auto row = estimator_chain_report(cfg, deltas).rows.front();
  const double log_a = -std::log(cfg.region.core(cfg.n_list.front()).a_n);
  const double scale = row.T * row.T / (delta * delta) * std::pow(log_a, -cfg.estimator.alpha / 3.0);
  CHECK(row.mse_trunc <= cal["kappa"].get<double>() * scale);
}
