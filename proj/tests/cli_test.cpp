#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>

#include "pha/cli.hpp"
#include "support/fixtures.hpp"

using namespace pha;
using namespace pha::cli;
using namespace pha::testing;
namespace fs = std::filesystem;

namespace {

struct Captured {
  int code;
  std::string out;
  std::string err;
};

template <typename Args, typename F>
Captured call(F&& f, const Args& args) {
  std::ostringstream out, err;
  int code = f(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  fs::path dir = fs::path(::testing::TempDir()) / "pha_cli_test";
  fs::create_directories(dir);
  return dir / name;
}

std::string compiled_listing() {
  auto path = scratch("smoke_alarm.pha");
  CompileArgs args;
  args.input = data_path("smoke_alarm.json");
  args.output = path.string();
  EXPECT_EQ(call(cmd_compile_bn, args).code, exit_ok);
  return path.string();
}

int run_binary(const std::string& args) {
  std::string cmd = std::string(PHA_BINARY) + " " + args + " >/dev/null 2>&1";
  int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Cli, CompileWritesProgramAndSidecar) {
  auto path = compiled_listing();
  EXPECT_TRUE(load_kb(slurp(path)).ok());
  auto side = nlohmann::json::parse(slurp(sidecar_path(path)));
  EXPECT_EQ(side["variables"].size(), 6u);
}

TEST(Cli, CompileToStdout) {
  CompileArgs args;
  args.input = data_path("smoke_alarm.json");
  auto r = call(cmd_compile_bn, args);
  EXPECT_EQ(r.code, exit_ok);
  EXPECT_NE(r.out.find("assumable( c_alarm(yes,no,no), 1.0e-04 )."), std::string::npos);
}

TEST(Cli, CompileErrors) {
  CompileArgs missing;
  missing.input = scratch("does-not-exist.json").string();
  EXPECT_EQ(call(cmd_compile_bn, missing).code, exit_io);

  auto bad = scratch("bad.json");
  std::ofstream(bad) << "{\"variables\": [{\"name\": \"a\", \"values\": [\"x\"], \"cpt\": []}]}";
  CompileArgs invalid;
  invalid.input = bad.string();
  auto r = call(cmd_compile_bn, invalid);
  EXPECT_EQ(r.code, exit_domain);
  EXPECT_NE(r.err.find("/variables/0"), std::string::npos);
}

TEST(Cli, ExplainJsonMatchesGolden) {
  ExplainArgs args;
  args.kb = test_data_path("smoke_alarm_listing.pha");
  args.query = "smoke(yes)";
  args.format = Format::json;
  auto r = call(cmd_explain, args);
  ASSERT_EQ(r.code, exit_ok) << r.err;
  auto doc = nlohmann::json::parse(r.out);
  ASSERT_TRUE(doc.contains("wall_time_ms"));
  doc.erase("wall_time_ms");
  auto golden = nlohmann::json::parse(slurp(test_data_path("golden/explain_smoke_yes.json")));
  EXPECT_EQ(doc, golden) << doc.dump(2);
}

TEST(Cli, ExplainTableAndTrace) {
  ExplainArgs args;
  args.kb = test_data_path("smoke_alarm_listing.pha");
  args.query = "report(yes)";
  args.trace = true;
  args.stop.max_explanations = 4;
  auto r = call(cmd_explain, args);
  ASSERT_EQ(r.code, exit_ok);
  EXPECT_NE(r.out.find("termination: max-explanations"), std::string::npos);
  EXPECT_EQ(r.err.rfind("trace 1 ", 0), 0u);
}

TEST(Cli, ExplainErrors) {
  ExplainArgs args;
  args.kb = test_data_path("smoke_alarm_listing.pha");
  args.query = "smoke(X)";
  auto r = call(cmd_explain, args);
  EXPECT_EQ(r.code, exit_domain);
  EXPECT_NE(r.err.find("non-ground-query"), std::string::npos);
  args.query = "smoke(yes";
  EXPECT_EQ(call(cmd_explain, args).code, exit_domain);
  args.kb = scratch("nothing.pha").string();
  EXPECT_EQ(call(cmd_explain, args).code, exit_io);
}

TEST(Cli, PosteriorFromSidecar) {
  PosteriorArgs args;
  args.kb = compiled_listing();
  args.variable = "fire";
  args.observation = "smoke(yes)";
  args.format = Format::json;
  auto r = call(cmd_posterior, args);
  ASSERT_EQ(r.code, exit_ok) << r.err;
  auto doc = nlohmann::json::parse(r.out);
  EXPECT_NEAR(doc["values"][0]["lower"].get<double>(), 0.476190476, 1e-9);
  EXPECT_NEAR(doc["values"][1]["lower"].get<double>(), 0.523809524, 1e-9);
  EXPECT_TRUE(doc["values"][0]["exact"].get<bool>());
}

TEST(Cli, PosteriorWithExplicitValues) {
  PosteriorArgs args;
  args.kb = test_data_path("smoke_alarm_listing.pha");
  args.variable = "fire";
  args.values = {"yes", "no"};
  auto r = call(cmd_posterior, args);
  ASSERT_EQ(r.code, exit_ok) << r.err;
  EXPECT_NE(r.out.find("fire=yes       0.01  (exact)"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("fire=no        0.99  (exact)"), std::string::npos) << r.out;
}

TEST(Cli, PosteriorErrors) {
  PosteriorArgs args;
  args.kb = test_data_path("smoke_alarm_listing.pha");
  args.variable = "fire";
  EXPECT_EQ(call(cmd_posterior, args).code, exit_io);

  args.values = {"yes", "no"};
  args.observation = "smoke(yes), smoke(no)";
  auto r = call(cmd_posterior, args);
  EXPECT_EQ(r.code, exit_domain);
  EXPECT_NE(r.err.find("undefined-posterior"), std::string::npos);

  PosteriorArgs unknown;
  unknown.kb = compiled_listing();
  unknown.variable = "weather";
  EXPECT_EQ(call(cmd_posterior, unknown).code, exit_domain);
}

TEST(Cli, CheckAgreesOnShippedNetwork) {
  CheckArgs args;
  args.bn = data_path("smoke_alarm.json");
  auto r = call(cmd_check, args);
  EXPECT_EQ(r.code, exit_ok) << r.out;
  EXPECT_NE(r.out.find("12 marginals"), std::string::npos);
  EXPECT_EQ(r.out.find("MISMATCH"), std::string::npos);
}

TEST(Cli, CheckDetectsPerturbedPrior) {
  std::string text = slurp(compiled_listing());
  auto at = text.find("assumable( c_smoke(yes,yes), 0.9 ).");
  ASSERT_NE(at, std::string::npos);
  text.replace(at, 35, "assumable( c_smoke(yes,yes), 0.8 ).");
  auto path = scratch("perturbed.pha");
  std::ofstream(path) << text;
  ASSERT_TRUE(load_kb(text).ok());

  CheckArgs args;
  args.bn = data_path("smoke_alarm.json");
  args.kb = path.string();
  auto r = call(cmd_check, args);
  EXPECT_EQ(r.code, exit_domain);
  EXPECT_NE(r.out.find("MISMATCH"), std::string::npos);
}

TEST(Cli, CheckSizeGuard) {
  nlohmann::json vars = nlohmann::json::array();
  for (int i = 0; i < 15; ++i) {
    vars.push_back({{"name", "v" + std::to_string(i)}, {"values", {"a", "b"}},
                    {"cpt", {{{"probabilities", {0.5, 0.5}}}}}});
  }
  auto path = scratch("wide.json");
  std::ofstream(path) << nlohmann::json {{"variables", vars}}.dump();
  CheckArgs args;
  args.bn = path.string();
  auto r = call(cmd_check, args);
  EXPECT_EQ(r.code, exit_domain);
  EXPECT_NE(r.err.find("size-guard"), std::string::npos);
}

TEST(Cli, BinaryExitCodes) {
  std::string listing = test_data_path("smoke_alarm_listing.pha");
  EXPECT_EQ(run_binary("explain " + listing + " 'smoke(yes)'"), 0);
  EXPECT_EQ(run_binary("explain " + listing + " 'smoke(X)'"), 1);
  EXPECT_EQ(run_binary("explain /nonexistent.pha 'smoke(yes)'"), 2);
  EXPECT_EQ(run_binary("explain"), 2);
  EXPECT_EQ(run_binary("no-such-command"), 2);
  EXPECT_EQ(run_binary("--help"), 0);
  EXPECT_EQ(run_binary("check " + data_path("smoke_alarm.json")), 0);
  EXPECT_EQ(run_binary("posterior " + listing + " --var fire --values yes,no --obs 'smoke(yes)'"), 0);
  EXPECT_EQ(run_binary("compile-bn " + data_path("smoke_alarm.json") + " -o -"), 0);
}

TEST(Cli, BinaryReadsStdin) {
  std::string cmd = "cat " + test_data_path("smoke_alarm_listing.pha") + " | " + PHA_BINARY +
                    " explain - 'smoke(no)' --format json >/dev/null 2>&1";
  EXPECT_EQ(std::system(cmd.c_str()), 0);
}
