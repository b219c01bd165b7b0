#include "polylab/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "polylab/errors.hpp"
#include "polylab/horner.hpp"
#include "polylab/philox.hpp"

namespace polylab {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// Neumaier summation of log-increments.
double log_rising_ratio(double L, int i) {
  double sum = 0.0, comp = 0.0;
  for (int k = 1; k <= i; ++k) {
    const double term = 0.5 * std::log1p((L - 1.0) / k);
    const double t = sum + term;
    comp += std::abs(sum) >= std::abs(term) ? (sum - t) + term : (term - t) + sum;
    sum = t;
  }
  return sum + comp;
}

Eigen::VectorXd hyperbolic_coeffs(double L, int n) {
  Eigen::VectorXd c(n + 1);
  double sum = 0.0, comp = 0.0;
  c[0] = 1.0;
  for (int k = 1; k <= n; ++k) {
    const double term = 0.5 * std::log1p((L - 1.0) / k);
    const double t = sum + term;
    comp += std::abs(sum) >= std::abs(term) ? (sum - t) + term : (term - t) + sum;
    sum = t;
    c[k] = std::exp(sum + comp);
  }
  return c;
}

Eigen::VectorXd build_coeffs(const SchemeKind& kind, int n) {
  return std::visit(
      overloaded{
          [n](const Kac&) -> Eigen::VectorXd { return Eigen::VectorXd::Ones(n + 1); },
          [n](const KacDerivative& k) -> Eigen::VectorXd {
            if (k.order < 0) throw ValidationError("kac_derivative order must be nonnegative");
            Eigen::VectorXd c(n + 1);
            for (int j = 0; j <= n; ++j) {
              double prod = 1.0;
              for (int m = 1; m <= k.order; ++m) prod *= static_cast<double>(j + m);
              c[j] = prod;
            }
            return c;
          },
          [n](const Hyperbolic& h) -> Eigen::VectorXd {
            if (!(h.L > 0.0)) throw ValidationError("hyperbolic L must be positive");
            return hyperbolic_coeffs(h.L, n);
          },
          [n](const CustomTable& t) -> Eigen::VectorXd {
            if (static_cast<int>(t.table.size()) != n + 1)
              throw ValidationError("custom table must have n+1 entries");
            return Eigen::Map<const Eigen::VectorXd>(t.table.data(), n + 1);
          },
      },
      kind);
}

double natural_rho(const SchemeKind& kind) {
  return std::visit(overloaded{
                        [](const Kac&) { return 0.0; },
                        [](const KacDerivative& k) { return static_cast<double>(k.order); },
                        [](const Hyperbolic& h) { return (h.L - 1.0) / 2.0; },
                        [](const CustomTable&) { return std::numeric_limits<double>::quiet_NaN(); },
                    },
                    kind);
}

std::string fmt_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

std::string CoefficientScheme::id() const {
  const std::string base = std::visit(
      overloaded{
          [](const Kac&) { return std::string("kac"); },
          [](const KacDerivative& k) { return "kac_derivative(d=" + std::to_string(k.order) + ")"; },
          [](const Hyperbolic& h) { return "hyperbolic(L=" + fmt_double(h.L) + ")"; },
          [](const CustomTable&) { return std::string("custom"); },
      },
      kind);
  return base + "[n=" + std::to_string(n) + "]";
}

std::optional<std::size_t> envelope_violation(const CoefficientScheme& s) {
  for (int i = 0; i <= s.n; ++i) {
    const double c = std::abs(s.coeffs[i]);
    if (i < s.N0) {
      if (c > s.tau2) return static_cast<std::size_t>(i);
      continue;
    }
    const double scale = std::pow(static_cast<double>(i), s.rho);
    if (c < s.tau1 * scale || c > s.tau2 * scale) return static_cast<std::size_t>(i);
  }
  return std::nullopt;
}

CoefficientScheme make_scheme(const SchemeKind& kind, int n, const EnvelopeOverrides& overrides) {
  if (n < 1) throw ValidationError("degree n must be at least 1");
  CoefficientScheme s{kind, n, 0.0, 1.0, 1.0, 1, build_coeffs(kind, n)};

  const bool custom = std::holds_alternative<CustomTable>(kind);
  if (custom && !(overrides.rho && overrides.tau1 && overrides.tau2 && overrides.N0))
    throw ValidationError("custom table requires declared rho, tau1, tau2 and N0");

  s.rho = overrides.rho.value_or(natural_rho(kind));
  if (!(s.rho > -0.5)) throw ValidationError("growth exponent rho must exceed -1/2");
  s.N0 = overrides.N0.value_or(1);
  if (s.N0 < 0 || s.N0 > n + 1) throw ValidationError("N0 out of range");

  if (!custom) {
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (int i = std::max(s.N0, 1); i <= n; ++i) {
      const double ratio = std::abs(s.coeffs[i]) / std::pow(static_cast<double>(i), s.rho);
      lo = std::min(lo, ratio);
      hi = std::max(hi, ratio);
    }
    for (int i = 0; i < s.N0; ++i) hi = std::max(hi, std::abs(s.coeffs[i]));
    if (s.N0 == 0) hi = std::max(hi, std::abs(s.coeffs[0]));  // 0^rho term
    s.tau1 = overrides.tau1.value_or(lo * (1.0 - 1e-12));
    s.tau2 = overrides.tau2.value_or(hi * (1.0 + 1e-12));
  } else {
    s.tau1 = *overrides.tau1;
    s.tau2 = *overrides.tau2;
  }
  if (!(s.tau1 > 0.0) || !(s.tau2 >= s.tau1)) throw ValidationError("need 0 < tau1 <= tau2");

  if (auto bad = envelope_violation(s)) {
    throw EnvelopeError("coefficient table violates its declared envelope at index " + std::to_string(*bad),
                        *bad);
  }
  return s;
}

double coefficient(const CoefficientScheme& scheme, int i) {
  if (i < 0 || i > scheme.n) throw std::out_of_range("coefficient index out of range");
  return scheme.coeffs[i];
}

CoefficientScheme reversed_scheme(const CoefficientScheme& scheme) {
  CoefficientScheme r = scheme;
  r.coeffs = scheme.coeffs.reverse() / scheme.leading();
  r.kind = CustomTable{std::vector<double>(r.coeffs.data(), r.coeffs.data() + r.coeffs.size())};
  // The reversal is bounded, not polynomially growing; record the trivial envelope.
  r.rho = 0.0;
  r.N0 = r.n + 1;
  r.tau1 = 1.0;
  r.tau2 = r.coeffs.cwiseAbs().maxCoeff();
  return r;
}

double c_k_rho(double rho, int k) {
  if (k < 0) throw ValidationError("k must be nonnegative");
  if (!(rho > -0.5)) throw ValidationError("rho must exceed -1/2");
  return std::exp(log_rising_ratio(2.0 * rho + 1.0, k));
}

// ---------------------------------------------------------------------------

std::string AtomSpec::id() const {
  return std::visit(overloaded{
                        [](const Gaussian&) { return std::string("gaussian"); },
                        [](const Rademacher&) { return std::string("rademacher"); },
                        [](const UniformSym&) { return std::string("uniform_sym"); },
                        [](const CustomDiscrete& d) {
                          return "custom_discrete(k=" + std::to_string(d.support.size()) + ")";
                        },
                    },
                    kind);
}

void AtomSpec::validate() const {
  if (!(epsilon_moment > 0.0)) throw ValidationError("epsilon_moment must be positive");
  if (const auto* d = std::get_if<CustomDiscrete>(&kind)) {
    if (d->support.empty() || d->support.size() != d->probabilities.size())
      throw ValidationError("custom_discrete needs matching support and probabilities");
    double total = 0.0, mean = 0.0, second = 0.0;
    for (std::size_t k = 0; k < d->support.size(); ++k) {
      if (!(d->probabilities[k] >= 0.0)) throw ValidationError("negative probability");
      total += d->probabilities[k];
      mean += d->probabilities[k] * d->support[k];
      second += d->probabilities[k] * d->support[k] * d->support[k];
    }
    if (std::abs(total - 1.0) > 1e-9) throw ValidationError("probabilities must sum to 1");
    if (std::abs(mean) > 1e-9 || std::abs(second - 1.0) > 1e-9)
      throw ValidationError("custom_discrete atom must have mean 0 and variance 1");
  }
}

double AtomSpec::draw(std::uint64_t seed, std::uint64_t index) const {
  const CounterStream stream(seed);
  double xi = std::visit(overloaded{
                             [&](const Gaussian&) { return stream.normal(index); },
                             [&](const Rademacher&) { return (stream.bits(index)[0] & 1u) ? 1.0 : -1.0; },
                             [&](const UniformSym&) {
                               return std::sqrt(3.0) * (2.0 * stream.uniform(index) - 1.0);
                             },
                             [&](const CustomDiscrete& d) {
                               const double u = stream.uniform(index);
                               double acc = 0.0;
                               for (std::size_t k = 0; k + 1 < d.support.size(); ++k) {
                                 acc += d.probabilities[k];
                                 if (u < acc) return d.support[k];
                               }
                               return d.support.back();
                             },
                         },
                         kind);
  for (const auto& [i, mu] : mean_exceptions)
    if (static_cast<std::uint64_t>(i) == index) xi += mu;
  return xi;
}

// ---------------------------------------------------------------------------

SampledPolynomial from_coefficients(const Eigen::VectorXd& coeffs) {
  SampledPolynomial p;
  p.coeffs = coeffs;
  p.n = static_cast<int>(coeffs.size()) - 1;
  p.scheme_id = "explicit";
  p.atom_id = "none";
  return p;
}

SampledPolynomial sample_polynomial(const CoefficientScheme& scheme, const AtomSpec& atom, std::uint64_t seed) {
  atom.validate();
  for (const auto& [i, mu] : atom.mean_exceptions) {
    (void)mu;
    if (i < 0 || i >= scheme.N0)
      throw ValidationError("mean exceptions are only allowed for indices below N0");
  }
  SampledPolynomial p;
  p.n = scheme.n;
  p.coeffs.resize(scheme.n + 1);
  for (int i = 0; i <= scheme.n; ++i) p.coeffs[i] = scheme.coeffs[i] * atom.draw(seed, static_cast<std::uint64_t>(i));
  p.scheme_id = scheme.id();
  p.atom_id = atom.id();
  p.seed = seed;
  p.scale = scheme.leading();
  return p;
}

EvalResult evaluate(std::span<const double> coeffs, double x) {
  if (!std::isfinite(x)) throw ValidationError("evaluation point must be finite");
  const double v = horner::compensated(coeffs, x);
  if (std::isfinite(v)) return {v, false};
  // Overflowed somewhere in the recurrence; report the sign of the plain sum.
  const double plain = horner::evaluate<double>(coeffs, x);
  const double sign = std::isnan(plain) ? 1.0 : std::copysign(1.0, plain);
  return {sign * std::numeric_limits<double>::infinity(), true};
}

EvalResult derivative_eval(std::span<const double> coeffs, double x, int k) {
  const int n = static_cast<int>(coeffs.size()) - 1;
  if (k < 0 || k > std::max(n, 0)) throw ValidationError("derivative order out of range");
  if (k == 0) return evaluate(coeffs, x);
  std::vector<double> d(static_cast<std::size_t>(n - k + 1));
  for (int i = k; i <= n; ++i) {
    double falling = 1.0;
    for (int m = 0; m < k; ++m) falling *= static_cast<double>(i - m);
    d[static_cast<std::size_t>(i - k)] = coeffs[static_cast<std::size_t>(i)] * falling;
  }
  return evaluate(d, x);
}

SampledPolynomial reverse_polynomial(const SampledPolynomial& p) {
  if (p.coeffs[p.n] == 0.0)
    throw DegenerateCoefficientError("leading coefficient is zero; the reversal is undefined");
  SampledPolynomial r = p;
  r.coeffs = p.coeffs.reverse() / p.scale;
  r.scale = 1.0;
  r.scheme_id = "reversed(" + p.scheme_id + ")";
  return r;
}

SampledPolynomial negate_argument(const SampledPolynomial& p) {
  SampledPolynomial r = p;
  for (int i = 1; i <= p.n; i += 2) r.coeffs[i] = -r.coeffs[i];
  r.scheme_id = "negated(" + p.scheme_id + ")";
  return r;
}

// ---------------------------------------------------------------------------

nlohmann::json to_json(const CoefficientScheme& s) {
  nlohmann::json j;
  std::visit(overloaded{
                 [&](const Kac&) { j["kind"] = "kac"; },
                 [&](const KacDerivative& k) {
                   j["kind"] = "kac_derivative";
                   j["d"] = k.order;
                 },
                 [&](const Hyperbolic& h) {
                   j["kind"] = "hyperbolic";
                   j["L"] = h.L;
                 },
                 [&](const CustomTable& t) {
                   j["kind"] = "custom";
                   j["table"] = t.table;
                 },
             },
             s.kind);
  j["n"] = s.n;
  j["rho"] = s.rho;
  j["tau1"] = s.tau1;
  j["tau2"] = s.tau2;
  j["N0"] = s.N0;
  return j;
}

SchemeSpec scheme_spec_from_json(const nlohmann::json& doc) {
  const std::string kind = doc.at("kind").get<std::string>();
  SchemeSpec spec;
  if (kind == "kac") {
    spec.kind = Kac{};
  } else if (kind == "kac_derivative") {
    spec.kind = KacDerivative{doc.at("d").get<int>()};
  } else if (kind == "hyperbolic") {
    spec.kind = Hyperbolic{doc.at("L").get<double>()};
  } else if (kind == "custom") {
    spec.kind = CustomTable{doc.at("table").get<std::vector<double>>()};
  } else {
    throw ValidationError("unknown scheme kind '" + kind + "'");
  }
  EnvelopeOverrides& o = spec.overrides;
  if (doc.contains("rho")) o.rho = doc["rho"].get<double>();
  if (doc.contains("tau1")) o.tau1 = doc["tau1"].get<double>();
  if (doc.contains("tau2")) o.tau2 = doc["tau2"].get<double>();
  if (doc.contains("N0")) o.N0 = doc["N0"].get<int>();
  return spec;
}

CoefficientScheme scheme_from_json(const nlohmann::json& doc) {
  return scheme_spec_from_json(doc).build(doc.at("n").get<int>());
}

nlohmann::json to_json(const SchemeSpec& spec) {
  nlohmann::json j = to_json(CoefficientScheme{spec.kind, 0, 0.0, 1.0, 1.0, 0, {}});
  j.erase("n");
  j.erase("rho");
  j.erase("tau1");
  j.erase("tau2");
  j.erase("N0");
  const EnvelopeOverrides& o = spec.overrides;
  if (o.rho) j["rho"] = *o.rho;
  if (o.tau1) j["tau1"] = *o.tau1;
  if (o.tau2) j["tau2"] = *o.tau2;
  if (o.N0) j["N0"] = *o.N0;
  return j;
}

nlohmann::json to_json(const AtomSpec& a) {
  nlohmann::json j;
  std::visit(overloaded{
                 [&](const Gaussian&) { j["kind"] = "gaussian"; },
                 [&](const Rademacher&) { j["kind"] = "rademacher"; },
                 [&](const UniformSym&) { j["kind"] = "uniform_sym"; },
                 [&](const CustomDiscrete& d) {
                   j["kind"] = "custom_discrete";
                   j["support"] = d.support;
                   j["probabilities"] = d.probabilities;
                 },
             },
             a.kind);
  j["epsilon_moment"] = a.epsilon_moment;
  j["mean_exceptions"] = nlohmann::json::array();
  for (const auto& [i, mu] : a.mean_exceptions) j["mean_exceptions"].push_back({i, mu});
  return j;
}

AtomSpec atom_from_json(const nlohmann::json& doc) {
  AtomSpec a;
  const std::string kind = doc.at("kind").get<std::string>();
  if (kind == "gaussian") {
    a.kind = Gaussian{};
  } else if (kind == "rademacher") {
    a.kind = Rademacher{};
  } else if (kind == "uniform_sym") {
    a.kind = UniformSym{};
  } else if (kind == "custom_discrete") {
    a.kind = CustomDiscrete{doc.at("support").get<std::vector<double>>(),
                            doc.at("probabilities").get<std::vector<double>>()};
  } else {
    throw ValidationError("unknown atom kind '" + kind + "'");
  }
  if (doc.contains("epsilon_moment")) a.epsilon_moment = doc["epsilon_moment"].get<double>();
  if (doc.contains("mean_exceptions"))
    for (const auto& e : doc["mean_exceptions"]) a.mean_exceptions.emplace_back(e.at(0).get<int>(), e.at(1).get<double>());
  a.validate();
  return a;
}

}  // namespace polylab
