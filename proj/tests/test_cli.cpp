#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cli.hpp"
#include "polylab/stats.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Result {
  int code = 0;
  std::string out;
  std::string err;
};

Result run(std::initializer_list<std::string> args) {
  std::vector<std::string> owned{"polylab"};
  owned.insert(owned.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : owned) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = polylab::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "polylab_cli_test";
  fs::create_directories(dir);
  return dir / name;
}

std::string first_line(const std::string& s) { return s.substr(0, s.find('\n')); }

}  // namespace

TEST_CASE("kacrice command") {
  const auto r = run({"kacrice", "--scheme", "kac", "--n", "1", "--interval", "-1", "1"});
  REQUIRE(r.code == 0);
  const auto j = json::parse(r.out);
  CHECK(j["value"].get<double>() == doctest::Approx(0.5).epsilon(1e-8));
  CHECK(j["converged"].get<bool>());

  const auto real = run({"kacrice", "--n", "50", "--region", "real_line"});
  REQUIRE(real.code == 0);
  CHECK(json::parse(real.out)["value"].get<double>() == doctest::Approx(3.128720456782130).epsilon(1e-10));
}

TEST_CASE("usage errors exit 2") {
  CHECK(run({"kacrice", "--no-such-flag"}).code == 2);
  CHECK(run({}).code == 2);
  CHECK(run({"frobnicate"}).code == 2);
  CHECK(run({"clt", "--samples", "1"}).code == 2);
  CHECK(run({"clt", "--atom", "cauchy"}).code == 2);
  CHECK(run({"tail", "--n", "300", "--region", "core", "--k", "3"}).code == 2);
  const auto bad = run({"kacrice", "--n", "0"});
  CHECK(bad.code == 2);
  CHECK_FALSE(bad.err.empty());
}

TEST_CASE("runtime failures exit 1") {
  CHECK(run({"count", "--input", scratch("missing.json").string()}).code == 1);
  CHECK(run({"clt", "--config", scratch("missing-config.json").string()}).code == 1);
}

TEST_CASE("help lists every command") {
  const auto r = run({"--help"});
  CHECK(r.code == 0);
  for (const char* cmd : {"sample", "count", "kacrice", "clt", "universality", "chain", "mczero", "tail"})
    CHECK(r.out.find(cmd) != std::string::npos);
  const auto sub = run({"clt", "--help"});
  CHECK(sub.code == 0);
  for (const char* flag : {"--config", "--seed", "--output", "--threads", "--dump-config", "--csv"})
    CHECK(sub.out.find(flag) != std::string::npos);
}

TEST_CASE("count command") {
  const auto r = run({"count", "--coeffs", "-1", "0", "1"});
  REQUIRE(r.code == 0);
  CHECK(json::parse(r.out)["count"] == 2);
  const auto half = run({"count", "--coeffs", "-1", "0", "1", "--region", "interval", "--interval", "0", "inf"});
  CHECK(json::parse(half.out)["count"] == 1);

  // sample then count the written polynomial
  const auto file = scratch("poly.json");
  REQUIRE(run({"sample", "--n", "40", "--seed", "3", "--output", file.string()}).code == 0);
  const auto from_file = run({"count", "--input", file.string()});
  const auto drawn = run({"count", "--n", "40", "--seed", "3"});
  REQUIRE(from_file.code == 0);
  CHECK(json::parse(from_file.out)["count"] == json::parse(drawn.out)["count"]);
}

TEST_CASE("clt output is deterministic") {
  const auto a = scratch("clt_a.json"), b = scratch("clt_b.json"), csv = scratch("clt.csv");
  REQUIRE(run({"clt", "--n", "20", "40", "60", "--samples", "100", "--seed", "7", "--bootstrap", "50", "--output",
               a.string(), "--csv", csv.string()})
              .code == 0);
  REQUIRE(run({"clt", "--n", "20", "40", "60", "--samples", "100", "--seed", "7", "--bootstrap", "50", "--threads", "1",
               "--output", b.string()})
              .code == 0);
  CHECK(slurp(a) == slurp(b));
  CHECK(first_line(slurp(csv)) == polylab::kReportCsvHeader);
  const auto j = json::parse(slurp(a));
  CHECK(j["degrees"].size() == 3);
}

TEST_CASE("dumped configs round-trip") {
  for (const auto& cmd : {"clt", "chain", "mczero", "universality", "tail", "kacrice", "sample"}) {
    const auto file = scratch(std::string(cmd) + "_cfg.json");
    const auto first = run({cmd, "--n", "300", "--samples", "17", "--seed", "5", "--region", "core", "--dump-config",
                            "--output", file.string()});
    REQUIRE(first.code == 0);
    const auto second = run({cmd, "--config", file.string(), "--dump-config"});
    REQUIRE(second.code == 0);
    CHECK(second.out == slurp(file));
  }
  // flags override the file
  const auto file = scratch("override_cfg.json");
  REQUIRE(run({"clt", "--n", "64", "--samples", "10", "--dump-config", "--output", file.string()}).code == 0);
  const auto over = json::parse(run({"clt", "--config", file.string(), "--samples", "30", "--dump-config"}).out);
  CHECK(over["samples"] == 30);
  CHECK(over["n_list"] == json::array({64}));
}

TEST_CASE("chain, mczero, tail and universality commands") {
  const auto csv = scratch("chain.csv");
  const auto chain = run({"chain", "--n", "512", "--samples", "20", "--region", "core", "--a-n", "0.3", "--b-n", "0.01",
                          "--deltas", "0.2", "0.1", "--csv", csv.string()});
  REQUIRE(chain.code == 0);
  CHECK(json::parse(chain.out)["rows"].size() == 2);
  CHECK(first_line(slurp(csv)) == polylab::kChainCsvHeader);

  const auto mc = run({"mczero", "--n", "30", "--m", "64", "--trials", "5", "--seed", "2"});
  REQUIRE(mc.code == 0);
  const auto mj = json::parse(mc.out);
  CHECK(mj.contains("green"));
  CHECK(mj.contains("mc_se"));

  const auto tail = run({"tail", "--n", "1", "--samples", "200", "--region", "interval", "--interval", "-1", "1"});
  REQUIRE(tail.code == 0);
  CHECK(json::parse(tail.out).contains("estimate"));

  const auto uni = run({"universality", "--n", "300", "--samples", "100", "--region", "core"});
  REQUIRE(uni.code == 0);
  CHECK(json::parse(uni.out).contains("rows"));
}
