#pragma once

#include <cstdint>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "polylab/ensemble.hpp"
#include "polylab/quadrature.hpp"
#include "polylab/roots.hpp"

namespace polylab {

struct MaslovaConstant {
  static constexpr double value = 4.0 / std::numbers::pi * (1.0 - 2.0 / std::numbers::pi);
};

struct RegionSpec {
  enum class Kind { real_line, core, interval };
  Kind kind = Kind::real_line;
  double a = -1.0;  // interval [a, b)
  double b = 1.0;
  std::optional<double> a_n;  // core; the default rule when unset
  std::optional<double> b_n;

  CoreRegion core(int n) const;
};

struct EstimatorSpec {
  enum class Kind { exact, sign_chain, truncated_chain };
  Kind kind = Kind::exact;
  double delta = 0.05;
  double alpha = 2.0;
};

struct ExperimentConfig {
  SchemeSpec scheme;
  AtomSpec atom;
  std::vector<int> n_list{64};
  int samples = 100;
  RegionSpec region;
  std::uint64_t seed = 0;
  EstimatorSpec estimator;
  int bootstrap = 1000;
  int threads = 0;  // 0: runtime default

  void validate() const;
};

nlohmann::json to_json(const ExperimentConfig& cfg);
ExperimentConfig config_from_json(const nlohmann::json& doc);

struct KSResult {
  double D = 0.0;
  double p_value = 1.0;
  bool small_sample = false;  // fewer than 50 samples
};

/// One-sample Kolmogorov-Smirnov test against N(0, 1), asymptotic p-value.
KSResult ks_statistic(std::span<const double> samples);

/// P(sup |B| > lambda) for the Brownian bridge.
double kolmogorov_survival(double lambda);

/// Cubic smoothstep of (x + 2)/4, clipped to [0, 1].
double smooth_test_function(double x);
/// E F(Z) for Z ~ N(0, 1) and F = smooth_test_function.
double smooth_test_normal_mean();

struct Moments {
  double mean = 0.0;
  double var = 0.0;  // second central moment (1/N)
  double m4 = 0.0;   // fourth central moment
  double mean_se = 0.0;
  double var_se = 0.0;
};

Moments sample_moments(std::span<const double> x);

struct DegreeReport {
  int n = 0;
  std::vector<double> counts;
  std::vector<double> standardized;
  Moments moments;
  bool degenerate = false;  // zero variance: KS skipped
  KSResult ks;
  double smooth_f = 0.0;  // mean of F over the standardized sample
  std::optional<double> kacrice_mean;
  double kacrice_error = 0.0;
  bool kacrice_agrees = true;  // |mean - kacrice| <= 3 se
  std::size_t uncertified = 0;
  std::size_t zero_values = 0;  // chain estimators: exact zeros at grid nodes
};

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
};

struct ExperimentReport {
  ExperimentConfig config;
  std::vector<DegreeReport> degrees;
  std::optional<SlopeFit> slope;
  double maslova_K = MaslovaConstant::value;
  double smooth_f_normal = 0.0;
};

/// Count of one sample in the configured region with the configured estimator.
struct SampleCount {
  double value = 0.0;
  bool certified = true;
  std::size_t zero_values = 0;
};

SampleCount count_sample(const SampledPolynomial& p, const ExperimentConfig& cfg);

/// Kac-Rice expectation of the configured region for Gaussian coefficients.
QuadResult expected_in_region(const ExperimentConfig& cfg, const CoefficientScheme& scheme);

/// Sample seed for (degree, index), derived from the run seed.
std::uint64_t sample_seed(std::uint64_t seed, int n, std::uint64_t index);

ExperimentReport run_clt_experiment(const ExperimentConfig& cfg);

/// Report fields computed from raw counts (used by run_clt_experiment and for
/// injected samples).
DegreeReport summarize_counts(int n, std::vector<double> counts);

/// OLS of variance against log n with a percentile bootstrap interval.
SlopeFit variance_slope(const ExperimentReport& report, int resamples = 1000, std::uint64_t seed = 0);
/// Same fit from (n, variance) pairs alone; the interval comes from a residual bootstrap.
SlopeFit variance_slope(std::span<const int> n, std::span<const double> variance, int resamples = 1000,
                        std::uint64_t seed = 0);

struct MomentComparison {
  int n = 0;
  int k = 0;
  double moment_a = 0.0;
  double moment_b = 0.0;
  double difference = 0.0;
  double se = 0.0;  // combined standard error
  bool pass = true;  // |difference| <= 3 se
};

std::vector<MomentComparison> universality_compare(const ExperimentConfig& a, const ExperimentConfig& b, int k_max);
std::vector<MomentComparison> compare_moments(int n, std::span<const double> a, std::span<const double> b, int k_max);

struct TailMoment {
  int n = 0;
  int k = 1;
  double estimate = 0.0;
  double se = 0.0;
  double first = 0.0;   // E N
  double second = 0.0;  // E N^2
  bool moment_order_ok = true;  // E N^2 >= (E N)^2
};

/// E N^k on the complement of the configured core or interval region (exact
/// counts: real-line total minus region count), for the first degree in n_list.
TailMoment tail_moment(const ExperimentConfig& cfg, int k);

struct ChainRow {
  double delta = 0.0;
  double T = 0.0;
  double mse_sign = 0.0;   // E (S - S^sign)^2
  double mse_trunc = 0.0;  // E (S^trun - S^sign)^2
  double mse_sign_se = 0.0;
  double block_m4 = 0.0;  // mean over blocks of the centred fourth moment of Z_k
  bool block_plan_valid = false;
};

struct ChainSample {
  std::uint64_t sample = 0;
  double delta = 0.0;
  double S = 0.0;
  double S_sign = 0.0;
  double S_trun = 0.0;
  double Z = 0.0, W = 0.0, X = 0.0, Y = 0.0;
};

struct ChainReport {
  std::vector<ChainRow> rows;
  std::vector<ChainSample> samples;
  bool decreasing = false;  // mse_sign non-increasing as delta decreases, first > last
};

/// delta sweep on the positive side of the core region: S is the exact count on
/// [x_{j0}, x_{j1}), S^sign and S^trun the chains on the same grid. Gaussian atom only.
ChainReport estimator_chain_report(const ExperimentConfig& cfg, std::span<const double> deltas);

nlohmann::json to_json(const ExperimentReport& report);
/// Per-degree rows: n,mean,var,m4,ks_D,ks_p,kacrice_mean.
std::string report_csv(const ExperimentReport& report);
std::string chain_csv(const ChainReport& report);

inline constexpr const char* kReportCsvHeader = "n,mean,var,m4,ks_D,ks_p,kacrice_mean";
inline constexpr const char* kChainCsvHeader = "sample,delta,S,S_sign,S_trun,Z,W,X,Y";

}  // namespace polylab
