#include "cli.hpp"

#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "polylab/errors.hpp"
#include "polylab/kacrice.hpp"
#include "polylab/mclog.hpp"
#include "polylab/philox.hpp"
#include "polylab/roots.hpp"
#include "polylab/stats.hpp"

namespace polylab::cli {
namespace {

using json = nlohmann::json;

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

json endpoint(const std::string& text) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw ValidationError("not a number: " + text);
  }
  if (used != text.size()) throw ValidationError("not a number: " + text);
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

void write_text(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write " + path);
  f << text;
  if (!f) throw IoError("write failed: " + path);
}

// Flags shared by every command. Each set applies on top of the config file.
struct Common {
  std::string config;
  std::uint64_t seed = 0;
  std::string output;
  int threads = 0;
  bool dump = false;
  std::string scheme;
  int order = 1;
  double L = 1.0;
  std::string atom;
  std::vector<int> n;
  int samples = 0;
  std::string region;
  std::vector<std::string> interval;
  double a_n = 0.0, b_n = 0.0;
  std::string estimator;
  double delta = 0.0, alpha = 0.0;
  int bootstrap = 0;

  CLI::App* app = nullptr;
  bool given(const std::string& name) const { return app->count(name) > 0; }
};

void add_common(CLI::App* sub, Common& c) {
  c.app = sub;
  sub->add_option("--config", c.config, "JSON config file (docs/formats.md)");
  sub->add_option("--seed", c.seed, "run seed; every random stream derives from it");
  sub->add_option("--output", c.output, "output file (default: standard output)");
  sub->add_option("--threads", c.threads, "worker threads (default: POLYLAB_THREADS, then all cores)");
  sub->add_flag("--dump-config", c.dump, "print the effective config as JSON and exit");
  sub->add_option("--scheme", c.scheme, "coefficient scheme")
      ->check(CLI::IsMember({"kac", "kac_derivative", "hyperbolic"}));
  sub->add_option("--order", c.order, "derivative order d for kac_derivative");
  sub->add_option("--L", c.L, "parameter L for hyperbolic");
  sub->add_option("--atom", c.atom, "atom distribution")->check(CLI::IsMember({"gaussian", "rademacher", "uniform_sym"}));
  sub->add_option("--n", c.n, "degree(s)");
  sub->add_option("--samples", c.samples, "samples per degree");
  sub->add_option("--region", c.region, "counting region")->check(CLI::IsMember({"real_line", "core", "interval"}));
  sub->add_option("--interval", c.interval, "interval region [a, b); endpoints may be inf or -inf")->expected(2);
  sub->add_option("--a-n", c.a_n, "core region a_n (default rule when omitted)");
  sub->add_option("--b-n", c.b_n, "core region b_n (1/(a_n n) when omitted)");
  sub->add_option("--estimator", c.estimator, "root-count estimator")
      ->check(CLI::IsMember({"exact", "sign_chain", "truncated_chain"}));
  sub->add_option("--delta", c.delta, "grid spacing of the chain estimators");
  sub->add_option("--alpha", c.alpha, "truncation exponent of truncated_chain");
  sub->add_option("--bootstrap", c.bootstrap, "bootstrap resamples for the variance slope");
}

int resolve_threads(const Common& c, int from_config) {
  if (c.given("--threads")) return c.threads;
  if (const char* env = std::getenv("POLYLAB_THREADS")) {
    try {
      return std::stoi(env);
    } catch (const std::exception&) {
      throw ValidationError(std::string("POLYLAB_THREADS is not an integer: ") + env);
    }
  }
  return from_config;
}

// Config document after flag overrides. `extras` holds command keys and their defaults.
json effective_document(const Common& c, const json& extras) {
  json doc = c.config.empty() ? json::object() : read_json_file(c.config);
  if (!doc.is_object()) throw ValidationError("config must be a JSON object");
  for (const auto& [key, value] : extras.items())
    if (!doc.contains(key)) doc[key] = value;
  if (c.given("--scheme")) {
    json s{{"kind", c.scheme}};
    if (c.scheme == "kac_derivative") s["d"] = c.order;
    if (c.scheme == "hyperbolic") s["L"] = c.L;
    doc["scheme"] = s;
  } else if (doc.contains("scheme")) {
    if (c.given("--order")) doc["scheme"]["d"] = c.order;
    if (c.given("--L")) doc["scheme"]["L"] = c.L;
  }
  if (c.given("--atom")) doc["atom"] = {{"kind", c.atom}};
  if (c.given("--n")) doc["n_list"] = c.n;
  if (c.given("--samples")) doc["samples"] = c.samples;
  if (c.given("--seed")) doc["seed"] = c.seed;
  if (c.given("--bootstrap")) doc["bootstrap"] = c.bootstrap;
  if (c.given("--region")) doc["region"] = {{"kind", c.region}};
  if (c.given("--interval")) doc["region"] = {{"kind", "interval"}, {"a", endpoint(c.interval[0])}, {"b", endpoint(c.interval[1])}};
  if (c.given("--a-n") || c.given("--b-n")) {
    if (!doc.contains("region") || doc["region"].value("kind", "") != "core") doc["region"] = {{"kind", "core"}};
    if (c.given("--a-n")) doc["region"]["a_n"] = c.a_n;
    if (c.given("--b-n")) doc["region"]["b_n"] = c.b_n;
  }
  if (c.given("--estimator")) doc["estimator"] = {{"kind", c.estimator}};
  if (c.given("--delta")) doc["estimator"]["delta"] = c.delta;
  if (c.given("--alpha")) doc["estimator"]["alpha"] = c.alpha;
  if (!doc.contains("estimator")) doc["estimator"] = {{"kind", "exact"}};
  if (!doc["estimator"].contains("kind")) doc["estimator"]["kind"] = "exact";
  return doc;
}

struct Setup {
  ExperimentConfig cfg;
  json doc;  // effective document including command keys
};

Setup setup(const Common& c, const json& extras) {
  Setup s;
  s.doc = effective_document(c, extras);
  try {
    s.cfg = config_from_json(s.doc);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
  s.cfg.threads = resolve_threads(c, s.cfg.threads);
  return s;
}

json dumped(const Setup& s, const json& extras) {
  json out = to_json(s.cfg);
  for (const auto& [key, value] : extras.items()) out[key] = s.doc.at(key);
  return out;
}

std::string text(const json& j) { return j.dump(2) + "\n"; }

json polynomial_doc(const SampledPolynomial& p, const CoefficientScheme& scheme, const AtomSpec& atom) {
  return {{"scheme", to_json(scheme)},
          {"atom", to_json(atom)},
          {"seed", p.seed},
          {"n", p.n},
          {"coeffs", std::vector<double>(p.coeffs.data(), p.coeffs.data() + p.coeffs.size())}};
}

// The polynomial of the sample / count / mczero commands: index `index` of the
// first degree, the same draw the clt command makes.
SampledPolynomial configured_polynomial(const Setup& s) {
  const int n = s.cfg.n_list.front();
  const auto index = s.doc.at("index").get<std::uint64_t>();
  return sample_polynomial(s.cfg.scheme.build(n), s.cfg.atom, sample_seed(s.cfg.seed, n, index));
}

json moment_row(const MomentComparison& r) {
  return {{"n", r.n}, {"k", r.k}, {"moment_a", r.moment_a}, {"moment_b", r.moment_b},
          {"difference", r.difference}, {"se", r.se}, {"pass", r.pass}};
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"polylab: real roots of random polynomials"};
  app.name("polylab");
  app.require_subcommand(1);
  app.footer("Run 'polylab <command> --help' for the flags of a command. Exit status: 0 success, 2 usage error, 1 runtime failure.");

  struct Command {
    CLI::App* app;
    Common common;
  };
  std::vector<std::unique_ptr<Command>> commands;
  const auto command = [&](const char* name, const char* help) -> Command& {
    auto c = std::make_unique<Command>();
    c->app = app.add_subcommand(name, help);
    add_common(c->app, c->common);
    commands.push_back(std::move(c));
    return *commands.back();
  };

  auto& sample = command("sample", "draw one polynomial and print its coefficients as JSON");
  std::uint64_t index = 0;
  sample.app->add_option("--index", index, "sample index within the degree");

  auto& count = command("count", "certified real-root count of one polynomial in the configured region");
  std::string input;
  std::vector<double> coeffs;
  count.app->add_option("--input", input, "polynomial JSON written by the sample command");
  count.app->add_option("--coeffs", coeffs, "coefficients a_0 .. a_n");
  count.app->add_option("--index", index, "sample index when the polynomial is drawn");

  auto& kacrice = command("kacrice", "expected number of real roots in the configured region (Gaussian)");

  auto& clt = command("clt", "root-count moments, KS test and variance slope over n_list");
  std::string csv;
  clt.app->add_option("--csv", csv, "per-degree CSV output");

  auto& uni = command("universality", "compare root-count moments of two atoms");
  std::string atom_b;
  std::uint64_t seed_b = 0;
  int k_max = 2;
  uni.app->add_option("--atom-b", atom_b, "atom of the second ensemble")
      ->check(CLI::IsMember({"gaussian", "rademacher", "uniform_sym"}));
  uni.app->add_option("--seed-b", seed_b, "seed of the second ensemble");
  uni.app->add_option("--k-max", k_max, "highest moment compared");

  auto& chain = command("chain", "estimator-chain errors over a delta sweep");
  std::vector<double> deltas;
  chain.app->add_option("--deltas", deltas, "grid spacings");
  std::string chain_csv_path;
  chain.app->add_option("--csv", chain_csv_path, "per-sample CSV output");

  auto& mczero = command("mczero", "Monte Carlo, Green-identity and smoothed zero counts near 1");
  double bump_delta = 0.05, bump_alpha = 1.0;
  std::uint64_t mc_m = 0;
  mczero.app->add_option("--bump-delta", bump_delta, "bump parameter delta");
  mczero.app->add_option("--bump-alpha", bump_alpha, "bump parameter alpha");
  mczero.app->add_option("--m", mc_m, "Monte Carlo points (default floor(delta^(-11 alpha)), capped at 1e6)");
  mczero.app->add_option("--index", index, "sample index of the polynomial");
  std::uint64_t trials = 1;
  std::string mc_csv;
  mczero.app->add_option("--trials", trials, "independent Monte Carlo runs");
  mczero.app->add_option("--csv", mc_csv, "per-trial CSV output");

  auto& tail = command("tail", "E N^k outside the core or interval region");
  int k = 1;
  tail.app->add_option("--k", k, "moment order (1 or 2)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : 2;
  }

  try {
    if (sample.app->parsed()) {
      const json ex{{"index", 0}};
      Setup s = setup(sample.common, ex);
      if (sample.app->count("--index")) s.doc["index"] = index;
      if (sample.common.dump) return write_text(sample.common.output, text(dumped(s, ex)), out), 0;
      const auto p = configured_polynomial(s);
      write_text(sample.common.output, text(polynomial_doc(p, s.cfg.scheme.build(p.n), s.cfg.atom)), out);
      return 0;
    }

    if (count.app->parsed()) {
      const json ex{{"index", 0}};
      Setup s = setup(count.common, ex);
      if (count.app->count("--index")) s.doc["index"] = index;
      if (count.common.dump) return write_text(count.common.output, text(dumped(s, ex)), out), 0;
      SampledPolynomial p;
      if (!coeffs.empty()) {
        p = from_coefficients(Eigen::Map<const Eigen::VectorXd>(coeffs.data(), static_cast<Eigen::Index>(coeffs.size())));
      } else if (!input.empty()) {
        const auto doc = read_json_file(input);
        const auto c = doc.at("coeffs").get<std::vector<double>>();
        p = from_coefficients(Eigen::Map<const Eigen::VectorXd>(c.data(), static_cast<Eigen::Index>(c.size())));
      } else {
        p = configured_polynomial(s);
      }
      ExperimentConfig cfg = s.cfg;
      cfg.estimator = {};
      const SampleCount r = count_sample(p, cfg);
      write_text(count.common.output,
                 text({{"count", static_cast<long>(r.value)}, {"certified", r.certified}, {"region", to_json(s.cfg)["region"]}}), out);
      return r.certified ? 0 : 1;
    }

    if (kacrice.app->parsed()) {
      Setup s = setup(kacrice.common, json::object());
      if (kacrice.common.dump) return write_text(kacrice.common.output, text(dumped(s, json::object())), out), 0;
      json rows = json::array();
      bool converged = true;
      for (int n : s.cfg.n_list) {
        const QuadResult q = expected_in_region(s.cfg, s.cfg.scheme.build(n));
        converged = converged && q.converged;
        rows.push_back({{"n", n}, {"value", q.value}, {"error", q.error}, {"converged", q.converged}});
      }
      const json result = rows.size() == 1 ? rows[0] : json{{"results", rows}};
      write_text(kacrice.common.output, text(result), out);
      return converged ? 0 : 1;
    }

    if (clt.app->parsed()) {
      Setup s = setup(clt.common, json::object());
      if (clt.common.dump) return write_text(clt.common.output, text(dumped(s, json::object())), out), 0;
      err << "clt: " << s.cfg.n_list.size() << " degree(s), " << s.cfg.samples << " samples each\n";
      const ExperimentReport report = run_clt_experiment(s.cfg);
      write_text(clt.common.output, text(to_json(report)), out);
      if (!csv.empty()) write_text(csv, report_csv(report), out);
      return 0;
    }

    if (uni.app->parsed()) {
      const json ex{{"atom_b", {{"kind", "rademacher"}}}, {"seed_b", nullptr}, {"k_max", 2}};
      Setup s = setup(uni.common, ex);
      if (uni.app->count("--atom-b")) s.doc["atom_b"] = {{"kind", atom_b}};
      if (uni.app->count("--seed-b")) s.doc["seed_b"] = seed_b;
      if (uni.app->count("--k-max")) s.doc["k_max"] = k_max;
      if (uni.common.dump) return write_text(uni.common.output, text(dumped(s, ex)), out), 0;
      ExperimentConfig b = s.cfg;
      b.atom = atom_from_json(s.doc.at("atom_b"));
      b.seed = s.doc.at("seed_b").is_null() ? derive_seed(s.cfg.seed, "universality/b") : s.doc["seed_b"].get<std::uint64_t>();
      const auto rows = universality_compare(s.cfg, b, s.doc.at("k_max").get<int>());
      json table = json::array();
      bool pass = true;
      for (const auto& r : rows) {
        table.push_back(moment_row(r));
        pass = pass && r.pass;
      }
      write_text(uni.common.output, text({{"rows", table}, {"pass", pass}}), out);
      return 0;
    }

    if (chain.app->parsed()) {
      const json ex{{"deltas", {0.2, 0.1, 0.05, 0.025}}};
      Setup s = setup(chain.common, ex);
      if (chain.app->count("--deltas")) s.doc["deltas"] = deltas;
      if (chain.common.dump) return write_text(chain.common.output, text(dumped(s, ex)), out), 0;
      const auto d = s.doc.at("deltas").get<std::vector<double>>();
      const ChainReport report = estimator_chain_report(s.cfg, d);
      json rows = json::array();
      for (const auto& r : report.rows)
        rows.push_back({{"delta", r.delta}, {"T", r.T}, {"mse_sign", r.mse_sign}, {"mse_sign_se", r.mse_sign_se},
                        {"mse_trunc", r.mse_trunc}, {"block_m4", r.block_m4}, {"block_plan_valid", r.block_plan_valid}});
      write_text(chain.common.output, text({{"rows", rows}, {"decreasing", report.decreasing}}), out);
      if (!chain_csv_path.empty()) write_text(chain_csv_path, polylab::chain_csv(report), out);
      return 0;
    }

    if (mczero.app->parsed()) {
      const json ex{{"bump", {{"delta", 0.05}, {"alpha", 1.0}}}, {"m", nullptr}, {"index", 0}, {"trials", 1}};
      Setup s = setup(mczero.common, ex);
      if (mczero.app->count("--bump-delta")) s.doc["bump"]["delta"] = bump_delta;
      if (mczero.app->count("--bump-alpha")) s.doc["bump"]["alpha"] = bump_alpha;
      if (mczero.app->count("--m")) s.doc["m"] = mc_m;
      if (mczero.app->count("--index")) s.doc["index"] = index;
      if (mczero.app->count("--trials")) s.doc["trials"] = trials;
      if (mczero.common.dump) return write_text(mczero.common.output, text(dumped(s, ex)), out), 0;
      const BumpSpec spec = BumpSpec::make(s.doc["bump"].at("delta").get<double>(), s.doc["bump"].at("alpha").get<double>());
      MCConfig mc = MCConfig::defaults(spec, 0);
      if (!s.doc["m"].is_null()) {
        mc.m = s.doc["m"].get<std::uint64_t>();
        mc.capped = false;
      }
      const auto runs = s.doc.at("trials").get<std::uint64_t>();
      if (runs < 1) throw ValidationError("trials must be >= 1");
      const auto p = configured_polynomial(s);
      const GreenResult green = green_integral(p.span(), spec);
      const double smoothed = smoothed_count(p.span(), spec);
      std::vector<double> values;
      std::uint64_t resamples = 0;
      bool contained = true;
      std::ostringstream rows;
      rows << "seed,estimate,green_integral,smoothed_count,resamples\n";
      for (std::uint64_t t = 0; t < runs; ++t) {
        mc.seed = derive_seed(s.cfg.seed, "mczero", t);
        const MCEstimate est = mc_zero_estimate(p.span(), spec, mc);
        values.push_back(est.value);
        resamples += est.resamples;
        contained = est.support_contained;
        rows << mc.seed << ',' << json(est.value).dump() << ',' << json(green.value).dump() << ','
             << json(smoothed).dump() << ',' << est.resamples << '\n';
      }
      json result{{"m", mc.m},
                  {"m_capped", mc.capped},
                  {"trials", runs},
                  {"resamples", resamples},
                  {"support_contained", contained},
                  {"green", green.value},
                  {"green_converged", green.converged},
                  {"smoothed", smoothed}};
      if (runs == 1) {
        result["mc"] = values[0];
      } else {
        const Moments mom = sample_moments(values);
        result["mc"] = mom.mean;
        result["mc_se"] = mom.mean_se;
      }
      write_text(mczero.common.output, text(result), out);
      if (!mc_csv.empty()) write_text(mc_csv, rows.str(), out);
      return green.converged ? 0 : 1;
    }

    if (tail.app->parsed()) {
      const json ex{{"k", 1}};
      Setup s = setup(tail.common, ex);
      if (tail.app->count("--k")) s.doc["k"] = k;
      if (tail.common.dump) return write_text(tail.common.output, text(dumped(s, ex)), out), 0;
      const TailMoment t = tail_moment(s.cfg, s.doc.at("k").get<int>());
      write_text(tail.common.output,
                 text({{"n", t.n}, {"k", t.k}, {"estimate", t.estimate}, {"se", t.se}, {"first", t.first},
                       {"second", t.second}, {"moment_order_ok", t.moment_order_ok}}),
                 out);
      return 0;
    }
  } catch (const ValidationError& e) {
    err << "polylab: " << e.what() << '\n';
    return 2;
  } catch (const json::exception& e) {
    err << "polylab: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "polylab: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace polylab::cli
