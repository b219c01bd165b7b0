#include "polylab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "polylab/errors.hpp"
#include "polylab/estimators.hpp"
#include "polylab/kacrice.hpp"
#include "polylab/philox.hpp"
#include "polylab/quadrature.hpp"

#ifdef POLYLAB_HAVE_OPENMP
#include <omp.h>
#endif

namespace polylab {
namespace {

using json = nlohmann::json;

constexpr double kInf = std::numeric_limits<double>::infinity();

json number_or_inf(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

double read_number(const json& v) {
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "inf" || s == "+inf") return kInf;
    if (s == "-inf") return -kInf;
    throw ValidationError("expected a number or \"inf\", got \"" + s + "\"");
  }
  return v.get<double>();
}

bool plain_gaussian(const AtomSpec& atom) {
  return std::holds_alternative<Gaussian>(atom.kind) && atom.mean_exceptions.empty();
}

// Runs body(i) for i in [0, count) and rethrows the first failure by index.
template <class Body>
void parallel_for(std::size_t count, int threads, Body&& body) {
  std::vector<std::exception_ptr> errors(count);
#ifdef POLYLAB_HAVE_OPENMP
  const int t = threads > 0 ? threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 4) num_threads(t)
  for (long i = 0; i < static_cast<long>(count); ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
#else
  (void)threads;
  for (std::size_t i = 0; i < count; ++i) {
    try {
      body(i);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
#endif
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

SampleCount count_with(const SampledPolynomial& p, const ExperimentConfig& cfg, double rho) {
  SampleCount out;
  const auto from = [&out](const CertifiedCount& c) {
    out.value = static_cast<double>(c.count);
    out.certified = c.certified;
  };
  if (cfg.estimator.kind == EstimatorSpec::Kind::exact) {
    switch (cfg.region.kind) {
      case RegionSpec::Kind::real_line:
        from(count_real_line(p.span()));
        break;
      case RegionSpec::Kind::interval:
        from(count_real_roots(p.span(), cfg.region.a, cfg.region.b));
        break;
      case RegionSpec::Kind::core:
        from(count_core_region(p, cfg.region.core(p.n)));
        break;
    }
    return out;
  }
  const CoreRegion core = cfg.region.core(p.n);
  const DyadicGrid grid = dyadic_grid(core.a_n, core.b_n, cfg.estimator.delta);
  const SignCount c = cfg.estimator.kind == EstimatorSpec::Kind::sign_chain
                          ? core_sign_chain(p, grid)
                          : core_truncated_chain(p, grid, TruncationParams::make(cfg.estimator.alpha, rho));
  out.value = c.value;
  out.zero_values = c.zero_values;
  return out;
}

// Percentile of a sorted sample, linear interpolation between order statistics.
double percentile(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return 0.0;
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto i = static_cast<std::size_t>(std::floor(pos));
  if (i + 1 >= sorted.size()) return sorted.back();
  const double f = pos - static_cast<double>(i);
  return sorted[i] + f * (sorted[i + 1] - sorted[i]);
}

struct Line {
  double slope = 0.0;
  double intercept = 0.0;
};

Line ols(std::span<const double> x, std::span<const double> y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  if (!(sxx > 0.0)) throw ValidationError("variance slope needs distinct degrees");
  const double slope = sxy / sxx;
  return {slope, my - slope * mx};
}

std::size_t draw_index(const CounterStream& stream, std::uint64_t index, std::size_t size) {
  const auto k = static_cast<std::size_t>(stream.uniform(index) * static_cast<double>(size));
  return std::min(k, size - 1);
}

double second_central(std::span<const double> x) {
  const double m = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return s / static_cast<double>(x.size());
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void require_core(const ExperimentConfig& cfg, const char* what) {
  if (cfg.region.kind != RegionSpec::Kind::core) throw ValidationError(std::string(what) + " needs a core region");
}

}  // namespace

CoreRegion RegionSpec::core(int n) const {
  if (!a_n && !b_n) return CoreRegion::default_rule(n);
  const double a = a_n ? *a_n : CoreRegion::default_rule(n).a_n;
  const double b = b_n ? *b_n : 1.0 / (a * n);
  return CoreRegion(a, b);
}

void ExperimentConfig::validate() const {
  if (n_list.empty()) throw ValidationError("n_list must name at least one degree");
  for (int n : n_list)
    if (n < 1) throw ValidationError("degrees must be >= 1");
  if (samples < 2) throw ValidationError("samples must be >= 2");
  if (bootstrap < 1) throw ValidationError("bootstrap must be >= 1");
  atom.validate();
  if (region.kind == RegionSpec::Kind::interval && !(region.a < region.b))
    throw ValidationError("interval region needs a < b");
  if (region.kind == RegionSpec::Kind::core)
    for (int n : n_list) (void)region.core(n);
  if (estimator.kind != EstimatorSpec::Kind::exact) {
    require_core(*this, "chain estimator");
    if (!(estimator.delta > 0.0 && estimator.delta < 1.0)) throw ValidationError("estimator delta must lie in (0, 1)");
    if (estimator.kind == EstimatorSpec::Kind::truncated_chain && !(estimator.alpha >= 1.0))
      throw ValidationError("truncation alpha must be >= 1");
  }
}

json to_json(const ExperimentConfig& cfg) {
  json region;
  switch (cfg.region.kind) {
    case RegionSpec::Kind::real_line:
      region = {{"kind", "real_line"}};
      break;
    case RegionSpec::Kind::interval:
      region = {{"kind", "interval"}, {"a", number_or_inf(cfg.region.a)}, {"b", number_or_inf(cfg.region.b)}};
      break;
    case RegionSpec::Kind::core:
      region = {{"kind", "core"}};
      if (cfg.region.a_n) region["a_n"] = *cfg.region.a_n;
      if (cfg.region.b_n) region["b_n"] = *cfg.region.b_n;
      break;
  }
  json est;
  switch (cfg.estimator.kind) {
    case EstimatorSpec::Kind::exact:
      est = {{"kind", "exact"}};
      break;
    case EstimatorSpec::Kind::sign_chain:
      est = {{"kind", "sign_chain"}, {"delta", cfg.estimator.delta}};
      break;
    case EstimatorSpec::Kind::truncated_chain:
      est = {{"kind", "truncated_chain"}, {"delta", cfg.estimator.delta}, {"alpha", number_or_inf(cfg.estimator.alpha)}};
      break;
  }
  return {{"scheme", to_json(cfg.scheme)}, {"atom", to_json(cfg.atom)},       {"n_list", cfg.n_list},
          {"samples", cfg.samples},        {"region", region},                {"seed", cfg.seed},
          {"estimator", est},              {"bootstrap", cfg.bootstrap},      {"threads", cfg.threads}};
}

ExperimentConfig config_from_json(const json& doc) {
  ExperimentConfig cfg;
  if (doc.contains("scheme")) cfg.scheme = scheme_spec_from_json(doc["scheme"]);
  if (doc.contains("atom")) cfg.atom = atom_from_json(doc["atom"]);
  if (doc.contains("n_list")) cfg.n_list = doc["n_list"].get<std::vector<int>>();
  if (doc.contains("samples")) cfg.samples = doc["samples"].get<int>();
  if (doc.contains("seed")) cfg.seed = doc["seed"].get<std::uint64_t>();
  if (doc.contains("bootstrap")) cfg.bootstrap = doc["bootstrap"].get<int>();
  if (doc.contains("threads")) cfg.threads = doc["threads"].get<int>();
  if (doc.contains("region")) {
    const auto& r = doc["region"];
    const auto kind = r.at("kind").get<std::string>();
    if (kind == "real_line") {
      cfg.region.kind = RegionSpec::Kind::real_line;
    } else if (kind == "interval") {
      cfg.region.kind = RegionSpec::Kind::interval;
      cfg.region.a = read_number(r.at("a"));
      cfg.region.b = read_number(r.at("b"));
    } else if (kind == "core") {
      cfg.region.kind = RegionSpec::Kind::core;
      if (r.contains("a_n")) cfg.region.a_n = r["a_n"].get<double>();
      if (r.contains("b_n")) cfg.region.b_n = r["b_n"].get<double>();
    } else {
      throw ValidationError("unknown region kind \"" + kind + "\"");
    }
  }
  if (doc.contains("estimator")) {
    const auto& e = doc["estimator"];
    const auto kind = e.at("kind").get<std::string>();
    if (kind == "exact") {
      cfg.estimator.kind = EstimatorSpec::Kind::exact;
    } else if (kind == "sign_chain") {
      cfg.estimator.kind = EstimatorSpec::Kind::sign_chain;
    } else if (kind == "truncated_chain") {
      cfg.estimator.kind = EstimatorSpec::Kind::truncated_chain;
    } else {
      throw ValidationError("unknown estimator kind \"" + kind + "\"");
    }
    if (e.contains("delta")) cfg.estimator.delta = e["delta"].get<double>();
    if (e.contains("alpha")) cfg.estimator.alpha = read_number(e["alpha"]);
  }
  cfg.validate();
  return cfg;
}

double kolmogorov_survival(double lambda) {
  if (!(lambda > 0.0)) return 1.0;
  if (lambda < 1.18) {
    // Jacobi theta form of the CDF converges fast for small lambda.
    const double c = std::numbers::pi * std::numbers::pi / (8.0 * lambda * lambda);
    double s = 0.0;
    for (int k = 1; k <= 20; ++k) s += std::exp(-(2.0 * k - 1) * (2.0 * k - 1) * c);
    return std::clamp(1.0 - std::sqrt(2.0 * std::numbers::pi) / lambda * s, 0.0, 1.0);
  }
  double s = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    s += (k % 2 == 1 ? term : -term);
    if (term < 1e-300) break;
  }
  return std::clamp(2.0 * s, 0.0, 1.0);
}

KSResult ks_statistic(std::span<const double> samples) {
  if (samples.empty()) throw ValidationError("KS test needs at least one sample");
  std::vector<double> x(samples.begin(), samples.end());
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  KSResult out;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double F = normal_cdf(x[i]);
    out.D = std::max({out.D, static_cast<double>(i + 1) / n - F, F - static_cast<double>(i) / n});
  }
  const double rn = std::sqrt(n);
  out.p_value = kolmogorov_survival((rn + 0.12 + 0.11 / rn) * out.D);
  out.small_sample = x.size() < 50;
  return out;
}

double smooth_test_function(double x) {
  const double t = std::clamp((x + 2.0) / 4.0, 0.0, 1.0);
  return t * t * (3.0 - 2.0 * t);
}

double smooth_test_normal_mean() {
  const auto f = [](double x) {
    return smooth_test_function(x) * std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
  };
  const double inside = integrate(f, std::vector<double>{-2.0, 0.0, 2.0}, QuadConfig{1e-14, 1e-15, 4000}).value;
  return inside + (1.0 - normal_cdf(2.0));
}

Moments sample_moments(std::span<const double> x) {
  if (x.size() < 2) throw ValidationError("moments need at least two samples");
  Moments m;
  const double n = static_cast<double>(x.size());
  m.mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double s2 = 0.0, s4 = 0.0;
  for (double v : x) {
    const double d = (v - m.mean) * (v - m.mean);
    s2 += d;
    s4 += d * d;
  }
  m.var = s2 / n;
  m.m4 = s4 / n;
  m.mean_se = std::sqrt(s2 / (n - 1.0) / n);
  m.var_se = std::sqrt(std::max(0.0, m.m4 - m.var * m.var) / n);
  return m;
}

DegreeReport summarize_counts(int n, std::vector<double> counts) {
  DegreeReport d;
  d.n = n;
  d.moments = sample_moments(counts);
  d.counts = std::move(counts);
  d.degenerate = !(d.moments.var > 0.0);
  if (d.degenerate) return d;
  const double sd = std::sqrt(d.moments.var);
  d.standardized.reserve(d.counts.size());
  double f = 0.0;
  for (double c : d.counts) {
    const double z = (c - d.moments.mean) / sd;
    d.standardized.push_back(z);
    f += smooth_test_function(z);
  }
  d.smooth_f = f / static_cast<double>(d.counts.size());
  d.ks = ks_statistic(d.standardized);
  return d;
}

QuadResult expected_in_region(const ExperimentConfig& cfg, const CoefficientScheme& s) {
  const int n = s.n;
  switch (cfg.region.kind) {
    case RegionSpec::Kind::real_line:
      return expected_real_roots(s, -kInf, kInf);
    case RegionSpec::Kind::interval:
      return expected_real_roots(s, cfg.region.a, cfg.region.b);
    case RegionSpec::Kind::core: {
      QuadResult out;
      const CoefficientScheme r = reversed_scheme(s);
      const CoreRegion core = cfg.region.core(n);
      const double lo = 1.0 - core.a_n;
      const double hi = 1.0 - core.b_n;
      for (const auto* scheme : {&s, &r}) {
        for (const auto& q : {expected_roots(*scheme, lo, hi), expected_roots(*scheme, -hi, -lo)}) {
          out.value += q.value;
          out.error += q.error;
          out.converged = out.converged && q.converged;
        }
      }
      return out;
    }
  }
  return {};
}

std::uint64_t sample_seed(std::uint64_t seed, int n, std::uint64_t index) {
  return derive_seed(seed, "clt/" + std::to_string(n), index);
}

SampleCount count_sample(const SampledPolynomial& p, const ExperimentConfig& cfg) {
  return count_with(p, cfg, cfg.scheme.build(p.n).rho);
}

ExperimentReport run_clt_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  ExperimentReport report;
  report.config = cfg;
  report.smooth_f_normal = smooth_test_normal_mean();
  for (int n : cfg.n_list) {
    const CoefficientScheme scheme = cfg.scheme.build(n);
    const auto N = static_cast<std::size_t>(cfg.samples);
    std::vector<SampleCount> slots(N);
    parallel_for(N, cfg.threads, [&](std::size_t i) {
      const auto p = sample_polynomial(scheme, cfg.atom, sample_seed(cfg.seed, n, i));
      slots[i] = count_with(p, cfg, scheme.rho);
    });
    std::vector<double> counts(N);
    std::size_t uncertified = 0, zeros = 0;
    for (std::size_t i = 0; i < N; ++i) {
      counts[i] = slots[i].value;
      uncertified += !slots[i].certified;
      zeros += slots[i].zero_values;
    }
    DegreeReport d = summarize_counts(n, std::move(counts));
    d.uncertified = uncertified;
    d.zero_values = zeros;
    if (plain_gaussian(cfg.atom) && cfg.estimator.kind == EstimatorSpec::Kind::exact) {
      const QuadResult q = expected_in_region(cfg, scheme);
      d.kacrice_mean = q.value;
      d.kacrice_error = q.error;
      d.kacrice_agrees = std::abs(d.moments.mean - q.value) <= 3.0 * d.moments.mean_se + q.error + 1e-9;
    }
    report.degrees.push_back(std::move(d));
  }
  if (cfg.n_list.size() >= 3) report.slope = variance_slope(report, cfg.bootstrap, derive_seed(cfg.seed, "slope"));
  return report;
}

SlopeFit variance_slope(const ExperimentReport& report, int resamples, std::uint64_t seed) {
  if (report.degrees.size() < 3) throw ValidationError("variance slope needs at least three degrees");
  if (resamples < 1) throw ValidationError("bootstrap needs at least one resample");
  std::vector<double> x, y;
  for (const auto& d : report.degrees) {
    x.push_back(std::log(static_cast<double>(d.n)));
    y.push_back(d.moments.var);
  }
  const Line fit = ols(x, y);
  const CounterStream stream(seed);
  std::vector<double> slopes;
  slopes.reserve(static_cast<std::size_t>(resamples));
  std::vector<double> buf;
  std::uint64_t index = 0;
  for (int b = 0; b < resamples; ++b) {
    std::vector<double> yb;
    for (const auto& d : report.degrees) {
      const auto& c = d.counts;
      buf.resize(c.size());
      for (auto& v : buf) v = c[draw_index(stream, index++, c.size())];
      yb.push_back(second_central(buf));
    }
    slopes.push_back(ols(x, yb).slope);
  }
  std::sort(slopes.begin(), slopes.end());
  return {fit.slope, fit.intercept, percentile(slopes, 0.025), percentile(slopes, 0.975)};
}

SlopeFit variance_slope(std::span<const int> n, std::span<const double> variance, int resamples, std::uint64_t seed) {
  if (n.size() != variance.size()) throw ValidationError("degree and variance lists differ in length");
  if (n.size() < 3) throw ValidationError("variance slope needs at least three degrees");
  if (resamples < 1) throw ValidationError("bootstrap needs at least one resample");
  std::vector<double> x;
  for (int v : n) x.push_back(std::log(static_cast<double>(v)));
  const Line fit = ols(x, variance);
  std::vector<double> fitted, resid;
  for (std::size_t i = 0; i < x.size(); ++i) {
    fitted.push_back(fit.intercept + fit.slope * x[i]);
    resid.push_back(variance[i] - fitted.back());
  }
  const CounterStream stream(seed);
  std::vector<double> slopes, yb(x.size());
  std::uint64_t index = 0;
  for (int b = 0; b < resamples; ++b) {
    for (std::size_t i = 0; i < x.size(); ++i) yb[i] = fitted[i] + resid[draw_index(stream, index++, resid.size())];
    slopes.push_back(ols(x, yb).slope);
  }
  std::sort(slopes.begin(), slopes.end());
  return {fit.slope, fit.intercept, percentile(slopes, 0.025), percentile(slopes, 0.975)};
}

std::vector<MomentComparison> compare_moments(int n, std::span<const double> a, std::span<const double> b, int k_max) {
  if (k_max < 1) throw ValidationError("k_max must be >= 1");
  if (a.size() < 2 || b.size() < 2) throw ValidationError("moment comparison needs at least two samples per side");
  const auto moment = [](std::span<const double> x, int k) {
    const double N = static_cast<double>(x.size());
    double s = 0.0, s2 = 0.0;
    for (double v : x) {
      const double p = std::pow(v, k);
      s += p;
      s2 += p * p;
    }
    const double m = s / N;
    const double var = std::max(0.0, (s2 - N * m * m) / (N - 1.0));
    return std::pair{m, var / N};
  };
  std::vector<MomentComparison> rows;
  for (int k = 1; k <= k_max; ++k) {
    const auto [ma, va] = moment(a, k);
    const auto [mb, vb] = moment(b, k);
    MomentComparison r;
    r.n = n;
    r.k = k;
    r.moment_a = ma;
    r.moment_b = mb;
    r.difference = ma - mb;
    r.se = std::sqrt(va + vb);
    r.pass = std::abs(r.difference) <= 3.0 * r.se;
    rows.push_back(r);
  }
  return rows;
}

std::vector<MomentComparison> universality_compare(const ExperimentConfig& a, const ExperimentConfig& b, int k_max) {
  if (to_json(a.scheme) != to_json(b.scheme)) throw ValidationError("universality configs use different schemes");
  if (a.n_list != b.n_list) throw ValidationError("universality configs use different degrees");
  if (to_json(a)["region"] != to_json(b)["region"]) throw ValidationError("universality configs use different regions");
  if (to_json(a)["estimator"] != to_json(b)["estimator"])
    throw ValidationError("universality configs use different estimators");
  const auto ra = run_clt_experiment(a);
  const auto rb = run_clt_experiment(b);
  std::vector<MomentComparison> rows;
  for (std::size_t i = 0; i < ra.degrees.size(); ++i) {
    auto part = compare_moments(ra.degrees[i].n, ra.degrees[i].counts, rb.degrees[i].counts, k_max);
    rows.insert(rows.end(), part.begin(), part.end());
  }
  return rows;
}

TailMoment tail_moment(const ExperimentConfig& cfg, int k) {
  cfg.validate();
  if (k != 1 && k != 2) throw ValidationError("tail moment order must be 1 or 2");
  if (cfg.region.kind == RegionSpec::Kind::real_line) throw ValidationError("tail moment needs a core or interval region");
  const int n = cfg.n_list.front();
  const CoefficientScheme scheme = cfg.scheme.build(n);
  ExperimentConfig exact = cfg;
  exact.estimator = {};
  const auto N = static_cast<std::size_t>(cfg.samples);
  std::vector<double> tail(N);
  parallel_for(N, cfg.threads, [&](std::size_t i) {
    const auto p = sample_polynomial(scheme, cfg.atom, derive_seed(cfg.seed, "tail/" + std::to_string(n), i));
    const double total = static_cast<double>(count_real_line(p.span()).count);
    tail[i] = total - count_with(p, exact, scheme.rho).value;
  });
  TailMoment out;
  out.n = n;
  out.k = k;
  std::vector<double> sq(N);
  for (std::size_t i = 0; i < N; ++i) sq[i] = tail[i] * tail[i];
  const Moments m1 = sample_moments(tail);
  const Moments m2 = sample_moments(sq);
  out.first = m1.mean;
  out.second = m2.mean;
  out.estimate = k == 1 ? m1.mean : m2.mean;
  out.se = k == 1 ? m1.mean_se : m2.mean_se;
  out.moment_order_ok = out.second >= out.first * out.first * (1.0 - 1e-12);
  return out;
}

ChainReport estimator_chain_report(const ExperimentConfig& cfg, std::span<const double> deltas) {
  cfg.validate();
  require_core(cfg, "estimator chain");
  if (!plain_gaussian(cfg.atom)) throw ValidationError("estimator chain needs a centred Gaussian atom");
  if (deltas.empty()) throw ValidationError("estimator chain needs at least one delta");
  const int n = cfg.n_list.front();
  const CoefficientScheme scheme = cfg.scheme.build(n);
  const CoreRegion core = cfg.region.core(n);
  const TruncationParams params = TruncationParams::make(cfg.estimator.alpha, scheme.rho);

  struct Plan {
    DyadicGrid grid;
    std::optional<BlockPlan> blocks;
  };
  std::vector<Plan> plans;
  for (double d : deltas) {
    Plan p{dyadic_grid(core.a_n, core.b_n, d), std::nullopt};
    if (p.grid.empty()) throw ValidationError("estimator chain grid is empty for delta " + fmt(d));
    try {
      p.blocks = block_plan(p.grid);
    } catch (const ValidationError&) {
    }
    plans.push_back(std::move(p));
  }

  const auto N = static_cast<std::size_t>(cfg.samples);
  const std::size_t D = plans.size();
  std::vector<ChainSample> rows(N * D);
  std::vector<std::vector<double>> z_blocks(N * D);
  parallel_for(N, cfg.threads, [&](std::size_t i) {
    const auto p = sample_polynomial(scheme, cfg.atom, derive_seed(cfg.seed, "chain/" + std::to_string(n), i));
    for (std::size_t k = 0; k < D; ++k) {
      const DyadicGrid& g = plans[k].grid;
      ChainSample& s = rows[i * D + k];
      s.sample = i;
      s.delta = g.delta;
      s.S = static_cast<double>(count_real_roots(p.span(), g.nodes.front(), g.nodes.back()).count);
      s.S_sign = sign_change_count(p.span(), g).value;
      s.S_trun = truncated_sign_chain(p.span(), g, params).value;
      if (plans[k].blocks) {
        const BlockSums b = block_sums(p, g, *plans[k].blocks, params);
        s.Z = std::accumulate(b.Z.begin(), b.Z.end(), 0.0);
        s.W = std::accumulate(b.W.begin(), b.W.end(), 0.0);
        s.X = std::accumulate(b.X.begin(), b.X.end(), 0.0);
        s.Y = std::accumulate(b.Y.begin(), b.Y.end(), 0.0);
        z_blocks[i * D + k] = b.Z;
      }
    }
  });

  ChainReport out;
  out.samples = rows;
  for (std::size_t k = 0; k < D; ++k) {
    ChainRow r;
    r.delta = plans[k].grid.delta;
    r.T = plans[k].grid.T();
    std::vector<double> e_sign(N), e_trunc(N);
    for (std::size_t i = 0; i < N; ++i) {
      const ChainSample& s = rows[i * D + k];
      e_sign[i] = (s.S - s.S_sign) * (s.S - s.S_sign);
      e_trunc[i] = (s.S_trun - s.S_sign) * (s.S_trun - s.S_sign);
    }
    const Moments ms = sample_moments(e_sign);
    r.mse_sign = ms.mean;
    r.mse_sign_se = ms.mean_se;
    r.mse_trunc = sample_moments(e_trunc).mean;
    if (plans[k].blocks) {
      r.block_plan_valid = true;
      const auto l = static_cast<std::size_t>(plans[k].blocks->l);
      double acc = 0.0;
      std::vector<double> zk(N);
      for (std::size_t b = 0; b < l; ++b) {
        for (std::size_t i = 0; i < N; ++i) zk[i] = z_blocks[i * D + k][b];
        acc += sample_moments(zk).m4;
      }
      r.block_m4 = acc / static_cast<double>(l);
    }
    out.rows.push_back(r);
  }
  std::vector<ChainRow> sorted = out.rows;
  std::sort(sorted.begin(), sorted.end(), [](const ChainRow& a, const ChainRow& b) { return a.delta > b.delta; });
  out.decreasing = sorted.size() >= 2 && sorted.front().mse_sign > sorted.back().mse_sign;
  for (std::size_t k = 1; k < sorted.size(); ++k)
    out.decreasing = out.decreasing && sorted[k].mse_sign <= sorted[k - 1].mse_sign;
  return out;
}

json to_json(const ExperimentReport& report) {
  json degrees = json::array();
  for (const auto& d : report.degrees) {
    json j{{"n", d.n},
           {"mean", d.moments.mean},
           {"var", d.moments.var},
           {"m4", d.moments.m4},
           {"mean_se", d.moments.mean_se},
           {"var_se", d.moments.var_se},
           {"degenerate", d.degenerate},
           {"uncertified", d.uncertified},
           {"zero_values", d.zero_values},
           {"counts", d.counts},
           {"standardized", d.standardized}};
    if (!d.degenerate) {
      j["ks_D"] = d.ks.D;
      j["ks_p"] = d.ks.p_value;
      j["ks_small_sample"] = d.ks.small_sample;
      j["smooth_f"] = d.smooth_f;
    }
    if (d.kacrice_mean) {
      j["kacrice_mean"] = *d.kacrice_mean;
      j["kacrice_error"] = d.kacrice_error;
      j["kacrice_agrees"] = d.kacrice_agrees;
    }
    degrees.push_back(std::move(j));
  }
  json config = to_json(report.config);
  config.erase("threads");  // results do not depend on it
  json out{{"config", config},
           {"degrees", degrees},
           {"maslova_K", report.maslova_K},
           {"smooth_f_normal", report.smooth_f_normal}};
  if (report.slope)
    out["variance_slope"] = {{"slope", report.slope->slope},
                             {"intercept", report.slope->intercept},
                             {"ci_lo", report.slope->ci_lo},
                             {"ci_hi", report.slope->ci_hi}};
  return out;
}

std::string report_csv(const ExperimentReport& report) {
  std::ostringstream os;
  os << kReportCsvHeader << '\n';
  for (const auto& d : report.degrees) {
    os << d.n << ',' << fmt(d.moments.mean) << ',' << fmt(d.moments.var) << ',' << fmt(d.moments.m4) << ',';
    if (!d.degenerate) os << fmt(d.ks.D) << ',' << fmt(d.ks.p_value);
    else os << ',';
    os << ',';
    if (d.kacrice_mean) os << fmt(*d.kacrice_mean);
    os << '\n';
  }
  return os.str();
}

std::string chain_csv(const ChainReport& report) {
  std::ostringstream os;
  os << kChainCsvHeader << '\n';
  for (const auto& s : report.samples)
    os << s.sample << ',' << fmt(s.delta) << ',' << fmt(s.S) << ',' << fmt(s.S_sign) << ',' << fmt(s.S_trun) << ','
       << fmt(s.Z) << ',' << fmt(s.W) << ',' << fmt(s.X) << ',' << fmt(s.Y) << '\n';
  return os.str();
}

}  // namespace polylab
