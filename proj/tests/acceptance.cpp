// Acceptance run: one PASS/FAIL line per criterion.
//   acceptance [--only 3 4] [--known-infeasible 5]
// Criteria listed as known infeasible are still run and reported; they only
// stop counting toward the exit status.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <limits>
#include <numbers>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "CLI11.hpp"
#include "polylab/estimators.hpp"
#include "polylab/kacrice.hpp"
#include "polylab/mclog.hpp"
#include "polylab/philox.hpp"
#include "polylab/roots.hpp"
#include "polylab/stats.hpp"

using namespace polylab;
using cd = std::complex<double>;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Distinct real roots from companion-matrix eigenvalues: eigenvalues within
// 1e-4 (1 + |z|) of each other are one root, real when the cluster centre is.
std::size_t companion_real_count(const std::vector<double>& a) {
  const int n = static_cast<int>(a.size()) - 1;
  if (n == 0) return 0;
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(n, n);
  for (int i = 1; i < n; ++i) C(i, i - 1) = 1.0;
  for (int i = 0; i < n; ++i) C(i, n - 1) = -a[i] / a[n];
  const Eigen::VectorXcd ev = Eigen::EigenSolver<Eigen::MatrixXd>(C, false).eigenvalues();
  std::vector<cd> z(ev.data(), ev.data() + n);
  std::vector<bool> used(n, false);
  std::size_t real = 0;
  for (int i = 0; i < n; ++i) {
    if (used[i]) continue;
    cd sum = z[i];
    int members = 1;
    used[i] = true;
    for (int j = i + 1; j < n; ++j)
      if (!used[j] && std::abs(z[j] - z[i]) <= 1e-4 * (1.0 + std::abs(z[i]))) {
        used[j] = true;
        sum += z[j];
        ++members;
      }
    const cd c = sum / static_cast<double>(members);
    real += std::abs(c.imag()) <= 1e-6 * (1.0 + std::abs(c));
  }
  return real;
}

Outcome oracle_equivalence() {
  const CounterStream rng(101);
  std::size_t certified = 0, mismatches = 0;
  std::uint64_t k = 0;
  for (int s = 0; s < 1000; ++s) {
    const int n = 1 + static_cast<int>(rng.uniform(k++) * 12.0);
    std::vector<double> a(n + 1);
    const bool integer = s % 2 == 0;
    for (auto& c : a) c = integer ? std::floor(rng.uniform(k++) * 11.0) - 5.0 : rng.normal(k++);
    while (a[n] == 0.0) a[n] = std::floor(rng.uniform(k++) * 11.0) - 5.0;
    const auto cert = count_real_line(a);
    if (!cert.certified) continue;
    ++certified;
    mismatches += cert.count != companion_real_count(a);
  }
  return {mismatches == 0 && certified > 0, fmt("%zu certified of 1000, %zu mismatches", certified, mismatches)};
}

long double brute_density(const CoefficientScheme& s, double t) {
  long double num = 0.0L, den = 0.0L;
  for (int i = 0; i <= s.n; ++i) {
    const long double ci = static_cast<long double>(s.coeffs[i]) * s.coeffs[i] * std::pow(static_cast<long double>(t), 2 * i);
    den += ci;
    for (int j = i + 1; j <= s.n; ++j) {
      const long double cj = static_cast<long double>(s.coeffs[j]) * s.coeffs[j] * std::pow(static_cast<long double>(t), 2 * j);
      num += ci * cj * (i - j) * (i - j);
    }
  }
  return std::sqrt(num) / (std::abs(static_cast<long double>(t)) * den) / std::numbers::pi_v<long double>;
}

Outcome kacrice_identity() {
  const CounterStream rng(102);
  double worst = 0.0;
  std::uint64_t k = 0;
  for (int n = 1; n <= 20; ++n)
    for (const auto& s : {make_scheme(Kac{}, n), make_scheme(Hyperbolic{2.0}, n), make_scheme(KacDerivative{1}, n)})
      for (int i = 0; i < 100; ++i) {
        double t = 0.0;
        while (t == 0.0) t = 2.0 * rng.uniform(k++) - 1.0;
        const long double ref = brute_density(s, t);
        worst = std::max(worst, static_cast<double>(std::abs(kacrice_integrand(s, t) - ref) / ref));
      }
  return {worst <= 1e-10, fmt("max rel err %.2e over n = 1..20, 3 schemes, 100 t each", worst)};
}

Outcome analytic_truth() {
  const auto kac1 = make_scheme(Kac{}, 1);
  const double inner = expected_roots(kac1, -1.0, 1.0).value;
  const double outer = expected_roots(reversed_scheme(kac1), -1.0, 1.0).value;
  const bool ok = std::abs(inner - 0.5) <= 1e-8 && std::abs(inner + outer - 1.0) <= 1e-8;
  return {ok, fmt("E N(-1,1) = %.12f, with reversal %.12f", inner, inner + outer)};
}

Outcome kacrice_vs_mc() {
  ExperimentConfig cfg;
  cfg.n_list = {50};
  cfg.samples = 20000;
  cfg.region.kind = RegionSpec::Kind::interval;
  cfg.region.a = -0.99;
  cfg.region.b = 0.99;
  cfg.seed = 104;
  const auto d = run_clt_experiment(cfg).degrees.front();
  const double z = (d.moments.mean - *d.kacrice_mean) / d.moments.mean_se;
  return {d.kacrice_agrees && d.uncertified == 0,
          fmt("mean %.5f, quadrature %.5f, z = %.2f, %zu uncertified", d.moments.mean, *d.kacrice_mean, z, d.uncertified)};
}

ExperimentReport& clt_report() {
  static ExperimentReport report = [] {
    ExperimentConfig cfg;
    cfg.n_list = {256, 512, 1024, 2048, 4096};
    cfg.samples = 5000;
    cfg.seed = 105;
    auto r = run_clt_experiment(cfg);
    return r;
  }();
  return report;
}

Outcome clt() {
  const auto& d = clt_report().degrees.back();
  return {!d.degenerate && d.uncertified == 0 && d.ks.p_value >= 0.01,
          fmt("n = %d: KS D = %.4f, p = %.3g, smooth F mean %.4f vs %.4f", d.n, d.ks.D, d.ks.p_value, d.smooth_f,
              clt_report().smooth_f_normal)};
}

Outcome variance_growth() {
  const auto& r = clt_report();
  const double slope = r.slope ? r.slope->slope : std::nan("");
  return {slope >= 0.30 && slope <= 0.65,
          fmt("slope %.4f (bootstrap [%.4f, %.4f]), K = %.4f", slope, r.slope->ci_lo, r.slope->ci_hi, r.maslova_K)};
}

Outcome universality() {
  ExperimentConfig a;
  a.n_list = {1024};
  a.samples = 10000;
  a.region.kind = RegionSpec::Kind::core;
  a.seed = 107;
  ExperimentConfig b = a;
  b.atom.kind = Rademacher{};
  b.seed = 207;
  bool ok = true;
  std::string detail;
  for (const auto& row : universality_compare(a, b, 2)) {
    ok = ok && row.pass;
    detail += fmt("%sk=%d diff %.4f (3 se %.4f)", detail.empty() ? "" : ", ", row.k, row.difference, 3.0 * row.se);
  }
  return {ok, detail};
}

Outcome independence() {
  std::size_t pairs = 0, counterexamples = 0;
  // 1 - x = e^{-u}: the window needs u = A_x > 1, and u < 35 keeps x < 1 in double.
  constexpr double du = 0.02;
  for (int n : {10000, 1000000})
    for (double alpha : {2.0, 4.0}) {
      const double gap = 2.0 * alpha * std::log(std::log(static_cast<double>(n))) + 1.0;
      for (double ux = 1.0 + du; ux < 35.0; ux += du)
        for (double uy = ux + gap; uy < 35.0; uy += du) {
          const double x = -std::expm1(-ux), y = -std::expm1(-uy);
          if (!(x < y)) continue;
          ++pairs;
          counterexamples += !independence_check(x, y, alpha, n);
        }
    }
  return {counterexamples == 0 && pairs > 0, fmt("%zu pairs, %zu counterexamples", pairs, counterexamples)};
}

Outcome green_mc() {
  const auto b = BumpSpec::make(0.05, 1.0);
  const auto scheme = make_scheme(Kac{}, 30);
  double worst = 0.0;
  std::optional<SampledPolynomial> target;
  for (std::uint64_t i = 0; i < 100; ++i) {
    const auto p = sample_polynomial(scheme, AtomSpec{}, derive_seed(109, "green", i));
    const double s = smoothed_count(p.span(), b);
    worst = std::max(worst, std::abs(green_integral(p.span(), b).value - s));
    if (!target && s >= 0.5) target = p;
  }
  if (!target) return {false, fmt("max |green - smoothed| %.2e, no sample with a root on the plateau", worst)};

  const double g = green_integral(target->span(), b, 1, 1e-6).value;
  const int runs = 1000;
  std::vector<double> v(runs);
  for (int t = 0; t < runs; ++t) {
    MCConfig mc;
    mc.m = 64;
    mc.seed = derive_seed(109, "mc", t);
    v[t] = mc_zero_estimate(target->span(), b, mc).value;
  }
  const Moments m = sample_moments(v);
  const double z = (m.mean - g) / m.mean_se;
  return {worst <= 1e-2 && std::abs(z) <= 3.0,
          fmt("max |green - smoothed| %.2e; MC mean %.4f vs green %.4f, z = %.2f", worst, m.mean, g, z)};
}

Outcome jensen() {
  const auto scheme = make_scheme(Kac{}, 8);
  std::size_t violations = 0, nonzero = 0;
  for (std::uint64_t i = 0; i < 200; ++i) {
    const auto p = sample_polynomial(scheme, AtomSpec{}, derive_seed(110, "jensen", i));
    const auto bound = jensen_bound(p.span(), 0.9, 0.05, 0.1);
    const auto disk = count_roots_in_disk(p.span(), 0.9, 0.05);
    nonzero += disk.count > 0;
    violations += !bound.infinite && static_cast<double>(disk.count) > bound.value;
  }
  return {violations == 0, fmt("200 instances, %zu with roots in the disk, %zu violations", nonzero, violations)};
}

Outcome chain_trend() {
  ExperimentConfig cfg;
  cfg.n_list = {2048};
  cfg.samples = 2000;
  cfg.region.kind = RegionSpec::Kind::core;
  cfg.region.a_n = std::exp(-3.0);
  cfg.region.b_n = std::exp(-4.6);
  cfg.estimator.alpha = kInf;
  cfg.seed = 111;
  const std::vector<double> deltas{0.2, 0.1, 0.05, 0.025};
  const auto r = estimator_chain_report(cfg, deltas);
  bool exact = true;
  for (const auto& s : r.samples) exact = exact && s.S_trun == s.S_sign;
  std::string detail;
  for (const auto& row : r.rows) detail += fmt("d=%.3f: %.3g (T %.2f); ", row.delta, row.mse_sign, row.T);
  detail += exact ? "S_trun = S_sign on all samples" : "S_trun differs from S_sign";
  return {r.decreasing && exact, detail};
}

Outcome hyperbolic() {
  const int n = 10000;
  const auto core = CoreRegion::default_rule(n);
  double lo = kInf, hi = -kInf, coeff_err = 0.0;
  for (double rho : {0.0, 0.5, 1.0}) {
    const auto s = make_scheme(Hyperbolic{2.0 * rho + 1.0}, n);
    for (int k : {0, 1, 17, 5000, n}) coeff_err = std::max(coeff_err, std::abs(s.coeffs[k] / c_k_rho(rho, k) - 1.0));
    for (int i = 0; i <= 1000; ++i) {
      const double gap = core.a_n * std::pow(core.b_n / core.a_n, i / 1000.0);
      const double x = 1.0 - gap;
      for (double sx : {x, -x}) {
        const double ratio = variance_V(s, sx).value / hyperbolic_variance_closed(rho, sx);
        lo = std::min(lo, ratio);
        hi = std::max(hi, ratio);
      }
    }
  }
  return {lo >= 0.99 && hi <= 1.01 && coeff_err <= 1e-12,
          fmt("ratio in [%.6f, %.6f]; max coefficient rel err %.1e", lo, hi, coeff_err)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::vector<int> only, infeasible;
  app.add_option("--only", only, "Run only these criteria")->check(CLI::Range(1, 12));
  app.add_option("--known-infeasible", infeasible, "Criteria excluded from the exit status")->check(CLI::Range(1, 12));
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"oracle equivalence", oracle_equivalence},
      {"Kac-Rice identity", kacrice_identity},
      {"analytic ground truth", analytic_truth},
      {"Kac-Rice vs Monte Carlo", kacrice_vs_mc},
      {"CLT", clt},
      {"variance growth", variance_growth},
      {"universality", universality},
      {"independence scan", independence},
      {"Green / Monte Carlo", green_mc},
      {"Jensen dominance", jensen},
      {"estimator chain trend", chain_trend},
      {"hyperbolic closed form", hyperbolic},
  };
  const std::set<int> skip_status(infeasible.begin(), infeasible.end());
  int failed = 0;
  for (int i = 1; i <= static_cast<int>(criteria.size()); ++i) {
    if (!only.empty() && std::find(only.begin(), only.end(), i) == only.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i - 1].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool excused = !o.pass && skip_status.count(i);
    std::printf("%-4s %2d %-24s %s [%.1fs]%s\n", o.pass ? "PASS" : "FAIL", i, criteria[i - 1].first, o.detail.c_str(),
                secs, excused ? " (known infeasible, see README)" : "");
    std::fflush(stdout);
    failed += !o.pass && !excused;
  }
  return failed == 0 ? 0 : 1;
}
