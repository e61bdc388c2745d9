#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fixtures.hpp"
#include "kbmc_cli/cli.hpp"

namespace kbmc::cli {
namespace {

struct Captured {
  int code = 0;
  std::string out;
  std::string err;
};

Captured run_cli(const CliConfig& cfg, const std::string& input = "") {
  std::istringstream in(input);
  std::ostringstream out, err;
  Captured r;
  r.code = run(cfg, in, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

CliConfig config(const std::string& fixture, const std::string& query) {
  CliConfig cfg;
  cfg.kb_path = testing::fixture_path(fixture);
  cfg.query = query;
  return cfg;
}

std::filesystem::path temp_file(const std::string& name, const std::string& content) {
  auto path = std::filesystem::temp_directory_path() / ("kbmc_cli_test_" + name);
  std::ofstream(path) << content;
  return path;
}

// Compares against tests/golden/<name>; KBMC_UPDATE_GOLDEN=1 rewrites it.
void expect_golden(const std::string& name, const std::string& actual) {
  const std::string path = std::string(KBMC_GOLDEN_DIR) + "/" + name;
  if (std::getenv("KBMC_UPDATE_GOLDEN")) {
    std::ofstream(path, std::ios::binary) << actual;
    return;
  }
  EXPECT_EQ(actual, testing::read_file(path)) << "golden " << name;
}

TEST(CliRun, WeatherPriorDistribution) {
  Captured r = run_cli(config("weather_prior.ikb", "?dist (weather ?x monday)."));
  EXPECT_EQ(r.code, kOk);
  EXPECT_EQ(r.out, "fair 0.700000\ncloudy 0.200000\nrainy 0.100000\n");
  EXPECT_EQ(r.err, "");
}

TEST(CliRun, FactAnswersYes) {
  Captured r = run_cli(config("weather_facts.ikb", "?logic (weather rainy saturday)."));
  EXPECT_EQ(r.code, kOk);
  EXPECT_EQ(r.out, "yes\n");
}

TEST(CliRun, LogicBindings) {
  Captured r = run_cli(config("horn/ancestor.ikb", "?logic (ancestor ?a eve)."));
  EXPECT_EQ(r.code, kOk);
  EXPECT_EQ(r.out, "yes\n  ?a = cid\n");
}

TEST(CliRun, LogicNo) {
  Captured r = run_cli(config("horn/ancestor.ikb", "?logic (ancestor eve ann)."));
  EXPECT_EQ(r.code, kConstructionFailed);
  EXPECT_EQ(r.out, "no\n");
}

TEST(CliRun, EmptyKbExhausted) {
  CliConfig cfg;
  cfg.kb_path = temp_file("empty.ikb", "").string();
  cfg.query = "?dist (weather ?x monday).";
  Captured r = run_cli(cfg);
  EXPECT_EQ(r.code, kConstructionFailed);
  EXPECT_EQ(r.out, "");
  EXPECT_EQ(r.err.rfind("construction failed: exhausted", 0), 0u) << r.err;
}

TEST(CliRun, ParseErrorWithSpan) {
  CliConfig cfg;
  cfg.kb_path = temp_file("bad.ikb", "domain w/1 @1 {a, b}.\nprior (w ?x) = {a: 0.5, b: 0.6}.\n").string();
  cfg.query = "?dist (w ?x).";
  Captured r = run_cli(cfg);
  EXPECT_EQ(r.code, kParseError);
  EXPECT_NE(r.err.find("bad.ikb:2:"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("bad-distribution"), std::string::npos);
}

TEST(CliRun, QueryParseError) {
  Captured r = run_cli(config("weather_prior.ikb", "?dist weather"));
  EXPECT_EQ(r.code, kParseError);
  EXPECT_NE(r.err.find("<query>:1:"), std::string::npos) << r.err;
}

TEST(CliRun, MissingKbIsIoError) {
  CliConfig cfg;
  cfg.kb_path = "/nonexistent/kb.ikb";
  cfg.query = "?dist (w ?x).";
  EXPECT_EQ(run_cli(cfg).code, kIoError);
}

TEST(CliRun, MissingQueryFileIsIoError) {
  CliConfig cfg = config("weather_prior.ikb", "");
  cfg.query.reset();
  cfg.query_file = "/nonexistent/q.txt";
  EXPECT_EQ(run_cli(cfg).code, kIoError);
}

TEST(CliRun, QueryFile) {
  CliConfig cfg = config("weather_prior.ikb", "");
  cfg.query.reset();
  cfg.query_file = temp_file("q.txt", "?dist (weather ?x monday).\n").string();
  Captured r = run_cli(cfg);
  EXPECT_EQ(r.code, kOk);
  EXPECT_EQ(r.out, "fair 0.700000\ncloudy 0.200000\nrainy 0.100000\n");
}

TEST(CliRun, DotWrittenBeforeSolving) {
  CliConfig cfg = config("picnic.ikb", "?decide (payoff ?v).");
  auto path = std::filesystem::temp_directory_path() / "kbmc_cli_test_picnic.dot";
  std::filesystem::remove(path);
  cfg.dot_path = path.string();
  EXPECT_EQ(run_cli(cfg).code, kOk);
  expect_golden("picnic.dot", testing::read_file(path.string()));
}

TEST(CliRun, UnwritableDotIsIoError) {
  CliConfig cfg = config("picnic.ikb", "?decide (payoff ?v).");
  cfg.dot_path = "/nonexistent/dir/x.dot";
  EXPECT_EQ(run_cli(cfg).code, kIoError);
}

TEST(CliRun, DepthOption) {
  CliConfig cfg = config("temporal.ikb", "?dist (weather ?x dayafter).");
  cfg.depth = 1;
  Captured r = run_cli(cfg);
  EXPECT_EQ(r.code, kConstructionFailed);
  EXPECT_EQ(r.err.rfind("construction failed: depth", 0), 0u) << r.err;
}

TEST(CliRun, LineModeKeepsKbUnchanged) {
  CliConfig cfg = config("weather_prior.ikb", "");
  cfg.query.reset();
  Captured r = run_cli(cfg,
                  "% comment\n?dist (weather ?x monday).\n\n?logic (weather fair monday).\n"
                  "?dist (weather ?x monday).\n");
  EXPECT_EQ(r.code, kConstructionFailed);
  expect_golden("line_mode.txt", r.out);
}

TEST(CliValidate, Fixture) {
  std::ostringstream out, err;
  EXPECT_EQ(validate(testing::fixture_path("picnic.ikb"), out, err), kOk);
  EXPECT_NE(out.str().find("  value 1\n"), std::string::npos);
  EXPECT_NE(out.str().find("  domains 3\n"), std::string::npos);
}

TEST(CliValidate, BadRowSum) {
  std::ostringstream out, err;
  auto path = temp_file("rows.ikb", "domain w/1 @1 {a, b}.\nprior (w ?x) = {a: 0.5, b: 0.6}.\n");
  EXPECT_EQ(validate(path.string(), out, err), kParseError);
  EXPECT_NE(err.str().find(":2:"), std::string::npos);
}

TEST(CliValidate, UnknownRelation) {
  std::ostringstream out, err;
  auto path = temp_file("unknown.ikb", "prob (w ?x) |p (v ?y) = { a: 1; }.\n");
  EXPECT_EQ(validate(path.string(), out, err), kParseError);
  EXPECT_NE(err.str().find("unknown-relation"), std::string::npos);
}

TEST(CliOracle, AgreesWithSolverOnFixtures) {
  for (const std::string& name : testing::all_fixtures()) {
    for (const Query& q : testing::fixture_queries(name)) {
      CliConfig cfg = config(name, to_string(q));
      std::istringstream in;
      std::ostringstream out, err;
      int code = oracle(cfg, in, out, err);
      Captured r = run_cli(cfg);
      EXPECT_EQ(code, r.code) << name;
      EXPECT_EQ(out.str(), r.out) << name << " " << to_string(q);
    }
  }
}

struct GoldenCase {
  const char* golden;
  const char* fixture;
  const char* query;
  bool trace = false;
  bool explain = false;
  std::size_t models = 0;
  Format format = Format::kText;
};

class CliGolden : public ::testing::TestWithParam<GoldenCase> {};

TEST_P(CliGolden, Output) {
  const GoldenCase& g = GetParam();
  CliConfig cfg = config(g.fixture, g.query);
  cfg.trace = g.trace;
  cfg.explain = g.explain;
  if (g.models) cfg.models = g.models;
  cfg.format = g.format;
  Captured first = run_cli(cfg);
  EXPECT_EQ(first.code, kOk) << first.err;
  expect_golden(g.golden, first.out);
  // Byte-identical on a second run.
  EXPECT_EQ(run_cli(cfg).out, first.out);
}

INSTANTIATE_TEST_SUITE_P(
    Fixtures, CliGolden,
    ::testing::Values(
        GoldenCase{"weather_prior.txt", "weather_prior.ikb", "?dist (weather ?x monday).", true, true},
        GoldenCase{"inversion_models.txt", "inversion.ikb", "?dist (weather ?x tomorrow).", true, false, 5},
        GoldenCase{"inversion_nofact.txt", "inversion_nofact.ikb", "?dist (weather ?x tomorrow).", true},
        GoldenCase{"picnic.txt", "picnic.ikb", "?decide (payoff ?v).", true, true},
        GoldenCase{"picnic.json", "picnic.ikb", "?decide (payoff ?v).", false, false, 0, Format::kJson},
        GoldenCase{"sprinkler.txt", "sprinkler.ikb", "?dist (grass ?g).", true, true},
        GoldenCase{"temporal.txt", "temporal.ikb", "?dist (weather ?x dayafter).", true, true},
        GoldenCase{"temporal.json", "temporal.ikb", "?dist (weather ?x dayafter).", false, false, 0, Format::kJson},
        GoldenCase{"known_today.txt", "known_today.ikb", "?dist (weather ?x tomorrow).", true, true},
        GoldenCase{"two_priors.txt", "two_priors.ikb", "?dist (coin ?x).", false, false, 3},
        GoldenCase{"ancestor.txt", "horn/ancestor.ikb", "?logic (ancestor ann ?d).", true, false, 10},
        GoldenCase{"ancestor.json", "horn/ancestor.ikb", "?logic (ancestor ann ?d).", false, false, 10, Format::kJson}),
    [](const auto& info) {
      std::string n = info.param.golden;
      for (char& ch : n) {
        if (!std::isalnum(static_cast<unsigned char>(ch))) ch = '_';
      }
      return n;
    });

}  // namespace
}  // namespace kbmc::cli
