#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json_fwd.hpp>

namespace polylab {

// ---------------------------------------------------------------------------
// Coefficient schemes: the deterministic c_i of P(x) = sum c_i xi_i x^i.

struct Kac {};
struct KacDerivative {
  int order = 1;  // d: c_j = (j+d)!/j!
};
struct Hyperbolic {
  double L = 1.0;  // c_i = sqrt(L(L+1)...(L+i-1)/i!)
};
struct CustomTable {
  std::vector<double> table;  // c_0 .. c_n
};

using SchemeKind = std::variant<Kac, KacDerivative, Hyperbolic, CustomTable>;

/// Optional envelope constants. Required for custom tables; for built-in kinds
/// anything left empty is derived from the coefficients.
struct EnvelopeOverrides {
  std::optional<double> rho;
  std::optional<double> tau1;
  std::optional<double> tau2;
  std::optional<int> N0;
};

/// Deterministic coefficients together with the polynomial-growth envelope
///   tau1 i^rho <= |c_i| <= tau2 i^rho  for N0 <= i <= n,  |c_i| <= tau2 below N0.
struct CoefficientScheme {
  SchemeKind kind;
  int n = 0;
  double rho = 0.0;
  double tau1 = 1.0;
  double tau2 = 1.0;
  int N0 = 0;
  Eigen::VectorXd coeffs;  // c_0 .. c_n

  std::string id() const;
  double leading() const { return coeffs[n]; }
};

CoefficientScheme make_scheme(const SchemeKind& kind, int n, const EnvelopeOverrides& overrides = {});

/// c_i exactly as the scheme defines it. Throws std::out_of_range.
double coefficient(const CoefficientScheme& scheme, int i);

/// First index violating the scheme's declared envelope, if any.
std::optional<std::size_t> envelope_violation(const CoefficientScheme& scheme);

/// Scheme with c'_i = c_{n-i}; the coefficients of the reversal R_n, up to 1/c_n.
CoefficientScheme reversed_scheme(const CoefficientScheme& scheme);

/// sqrt((k+2rho)...(1+2rho)/k!) computed as a sum of logs.
double c_k_rho(double rho, int k);

// ---------------------------------------------------------------------------
// Atom distributions for the random multipliers xi_i.

struct Gaussian {};
struct Rademacher {};
struct UniformSym {};  // uniform on [-sqrt 3, sqrt 3]
struct CustomDiscrete {
  std::vector<double> support;
  std::vector<double> probabilities;
};

using AtomKind = std::variant<Gaussian, Rademacher, UniformSym, CustomDiscrete>;

struct AtomSpec {
  AtomKind kind = Gaussian{};
  double epsilon_moment = 1.0;
  // (index, mean) pairs; only indices below the scheme's N0 may be non-centred.
  std::vector<std::pair<int, double>> mean_exceptions;

  std::string id() const;
  /// Throws ValidationError unless the distribution has mean 0 and variance 1.
  void validate() const;
  /// xi_i for a stream key: a pure function of (seed, index).
  double draw(std::uint64_t seed, std::uint64_t index) const;
};

// ---------------------------------------------------------------------------
// One realisation of the random polynomial.

struct SampledPolynomial {
  Eigen::VectorXd coeffs;  // a_i = c_i xi_i, ascending
  std::string scheme_id;
  std::string atom_id;
  std::uint64_t seed = 0;
  int n = 0;
  double scale = 1.0;  // c_n of the generating scheme (used by the reversal)

  std::span<const double> span() const { return {coeffs.data(), static_cast<std::size_t>(coeffs.size())}; }
};

/// Wraps a bare coefficient vector (scale 1, no provenance).
SampledPolynomial from_coefficients(const Eigen::VectorXd& coeffs);

SampledPolynomial sample_polynomial(const CoefficientScheme& scheme, const AtomSpec& atom, std::uint64_t seed);

struct EvalResult {
  double value = 0.0;
  bool overflow = false;
};

/// Compensated Horner evaluation.
EvalResult evaluate(std::span<const double> coeffs, double x);
inline EvalResult evaluate(const SampledPolynomial& p, double x) { return evaluate(p.span(), x); }

/// k-th derivative at x via compensated Horner on the differentiated coefficients.
EvalResult derivative_eval(std::span<const double> coeffs, double x, int k);
inline EvalResult derivative_eval(const SampledPolynomial& p, double x, int k) {
  return derivative_eval(p.span(), x, k);
}

/// (x^n / c_n) P(1/x): coefficient a_{n-i}/c_n in slot i. Throws
/// DegenerateCoefficientError when a_n == 0.
SampledPolynomial reverse_polynomial(const SampledPolynomial& p);

/// P(-x): coefficient i multiplied by (-1)^i.
SampledPolynomial negate_argument(const SampledPolynomial& p);

// ---------------------------------------------------------------------------
// JSON documents (schema in docs/formats.md).

nlohmann::json to_json(const CoefficientScheme& scheme);
CoefficientScheme scheme_from_json(const nlohmann::json& doc);

/// A scheme without its degree, as stored in experiment configs.
struct SchemeSpec {
  SchemeKind kind = Kac{};
  EnvelopeOverrides overrides;

  CoefficientScheme build(int n) const { return make_scheme(kind, n, overrides); }
};

nlohmann::json to_json(const SchemeSpec& spec);
/// Same document as scheme_from_json; "n" and derived envelope fields are ignored
/// unless given as overrides.
SchemeSpec scheme_spec_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const AtomSpec& atom);
AtomSpec atom_from_json(const nlohmann::json& doc);

}  // namespace polylab
