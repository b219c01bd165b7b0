// Writes config/calibration.json: empirical constants for the tail-moment,
// block fourth-moment and truncation checks (twice the observed ratio) and the
// observed Monte Carlo concentration rate.
#include <cmath>
#include <fstream>
#include <iostream>
#include <vector>

#include <nlohmann/json.hpp>

#include "polylab/estimators.hpp"
#include "polylab/mclog.hpp"
#include "polylab/philox.hpp"
#include "polylab/stats.hpp"

using namespace polylab;

int main(int argc, char** argv) {
  const std::string path = argc > 1 ? argv[1] : "config/calibration.json";
  constexpr double kMargin = 2.0;
  constexpr std::uint64_t kSeed = 20240601;

  ExperimentConfig tail;
  tail.n_list = {4096};
  tail.samples = 2000;
  tail.region.kind = RegionSpec::Kind::core;
  tail.seed = kSeed;
  const double log_a = -std::log(tail.region.core(4096).a_n);
  const TailMoment t1 = tail_moment(tail, 1);
  const TailMoment t2 = tail_moment(tail, 2);
  const double r1 = t1.estimate / (log_a * log_a);
  const double r2 = t2.estimate / std::pow(log_a, 4.0);
  std::cerr << "tail n=4096: E N = " << t1.estimate << ", E N^2 = " << t2.estimate << "\n";

  ExperimentConfig chain;
  chain.n_list = {2048};
  chain.samples = 2000;
  chain.region.kind = RegionSpec::Kind::core;
  chain.region.a_n = std::exp(-1.2);
  chain.region.b_n = std::exp(-6.4);
  chain.seed = kSeed;
  const std::vector<double> deltas{0.2, 0.1, 0.05, 0.025};
  const ChainReport report = estimator_chain_report(chain, deltas);
  const double ll = std::log(std::log(2048.0));
  double r4 = 0.0;
  for (const auto& row : report.rows) {
    if (!row.block_plan_valid) continue;
    r4 = std::max(r4, row.block_m4 / (row.T * row.T * ll * ll));
    std::cerr << "chain delta=" << row.delta << ": block m4 = " << row.block_m4 << "\n";
  }

  // E(S^trun - S^sign)^2 against delta^-2 T^2 (log 1/a_n)^(-alpha rho'/3).
  ExperimentConfig trunc;
  trunc.n_list = {4096};
  trunc.samples = 2000;
  trunc.region.kind = RegionSpec::Kind::core;
  trunc.estimator.alpha = 4.0;
  trunc.seed = kSeed;
  const std::vector<double> trunc_delta{0.05};
  const ChainRow tr = estimator_chain_report(trunc, trunc_delta).rows.front();
  const double log_a4096 = -std::log(trunc.region.core(4096).a_n);
  const double trunc_scale = tr.T * tr.T / (0.05 * 0.05) * std::pow(log_a4096, -4.0 / 3.0);
  std::cerr << "truncation n=4096: E(S^trun - S^sign)^2 = " << tr.mse_trunc << "\n";

  // Var(P - Q)/Var P at 1 - x = e^-7 against A_x^(-alpha rho').
  const int vn = 10000;
  const double gap = std::exp(-7.0);
  const CoefficientScheme kac = make_scheme(Kac{}, vn);
  const TruncationWindow w = truncation_window_gap(gap, 4.0, vn);
  const double x = 1.0 - gap;
  const int vs = 10000;
  std::vector<double> full(vs), rest(vs);
  for (int i = 0; i < vs; ++i) {
    const auto p = sample_polynomial(kac, AtomSpec{}, derive_seed(kSeed, "calibrate/window", i));
    const auto e = p.span();
    double all = 0.0, inside = 0.0, xp = 1.0;
    for (int j = 0; j <= vn; ++j) {
      all += e[j] * xp;
      if (j >= w.m && j <= w.M) inside += e[j] * xp;
      xp *= x;
    }
    full[i] = all;
    rest[i] = all - inside;
  }
  const double var_ratio = sample_moments(rest).var / sample_moments(full).var;
  std::cerr << "window n=10000: Var(P - Q)/Var P = " << var_ratio << "\n";

  // Concentration of the Monte Carlo estimate: delta = 0.1, alpha = 0.25, m = 10^4, degree 200.
  const BumpSpec bump = BumpSpec::make(0.1, 0.25);
  const CoefficientScheme k200 = make_scheme(Kac{}, 200);
  int close = 0;
  const int trials = 200;
  for (int t = 0; t < trials; ++t) {
    const auto p = sample_polynomial(k200, AtomSpec{}, derive_seed(kSeed, "calibrate/mc", t));
    MCConfig mc;
    mc.m = 10000;
    mc.seed = derive_seed(kSeed, "calibrate/mc-points", t);
    close += std::abs(mc_zero_estimate(p.span(), bump, mc).value - smoothed_count(p.span(), bump)) <= 0.5;
  }
  std::cerr << "mc concentration: " << close << "/" << trials << " within 0.5\n";

  const nlohmann::json out{
      {"tail",
       {{"n", 4096}, {"samples", tail.samples}, {"seed", kSeed}, {"kappa_k1", kMargin * r1}, {"kappa_k2", kMargin * r2}}},
      {"block_fourth_moment",
       {{"n", 2048},
        {"samples", chain.samples},
        {"seed", kSeed},
        {"a_n", *chain.region.a_n},
        {"b_n", *chain.region.b_n},
        {"deltas", deltas},
        {"kappa", kMargin * r4}}},
      {"truncation_mse",
       {{"n", 4096}, {"samples", trunc.samples}, {"seed", kSeed}, {"alpha", 4.0}, {"delta", 0.05},
        {"observed", tr.mse_trunc}, {"kappa", kMargin * tr.mse_trunc / trunc_scale}}},
      {"window_variance",
       {{"n", vn}, {"samples", vs}, {"seed", kSeed}, {"alpha", 4.0}, {"log_gap", -7.0},
        {"observed", var_ratio}, {"kappa", kMargin * var_ratio * std::pow(w.A, 4.0)}}},
      {"mc_concentration",
       {{"n", 200}, {"delta", 0.1}, {"alpha", 0.25}, {"m", 10000}, {"trials", trials}, {"seed", kSeed},
        {"tolerance", 0.5}, {"support_in_ball", support_in_ball(bump)},
        {"observed_fraction", static_cast<double>(close) / trials}}},
      {"margin", kMargin}};
  std::ofstream f(path);
  if (!f) {
    std::cerr << "cannot write " << path << "\n";
    return 1;
  }
  f << out.dump(2) << "\n";
  return 0;
}
