#include <gtest/gtest.h>

#include "pha/bn.hpp"
#include "support/fixtures.hpp"

using namespace pha;
using namespace pha::testing;

namespace {

const char* kTwoNodes = R"({
  "variables": [
    { "name": "rain", "values": ["t", "f"], "cpt": [ { "probabilities": [0.2, 0.8] } ] },
    { "name": "wet", "values": ["t", "f"], "parents": ["rain"],
      "cpt": [ { "given": ["t"], "probabilities": [0.9, 0.1] },
               { "given": ["f"], "probabilities": [0.1, 0.9] } ] }
  ]
})";

Diagnostic first_error(const std::string& text) {
  auto r = parse_bn(text);
  EXPECT_FALSE(r.ok()) << text;
  if (r.diagnostics().empty()) return {};
  return r.diagnostics().front();
}

std::string with(std::string text, const std::string& from, const std::string& to) {
  auto at = text.find(from);
  EXPECT_NE(at, std::string::npos) << from;
  return text.replace(at, from.size(), to);
}

}  // namespace

TEST(BayesNet, ParsesShippedNetwork) {
  const auto& bn = smoke_alarm();
  EXPECT_EQ(bn.size(), 6u);
  auto alarm = *bn.index_of("alarm");
  EXPECT_EQ(bn.parent_indices(alarm).size(), 2u);
  std::vector<std::size_t> assignment(bn.size(), 0);
  assignment[*bn.index_of("tampering")] = 1;
  EXPECT_DOUBLE_EQ(bn.conditional(alarm, 0, assignment), 0.99);
}

TEST(BayesNet, DepthAndTerminals) {
  const auto& bn = smoke_alarm();
  EXPECT_EQ(depth(bn, "fire"), 0u);
  EXPECT_EQ(depth(bn, "smoke"), 1u);
  EXPECT_EQ(depth(bn, "alarm"), 1u);
  EXPECT_EQ(depth(bn, "report"), 3u);
  auto t = terminals(bn);
  std::sort(t.begin(), t.end());
  EXPECT_EQ(t, (std::vector<std::string>{"report", "smoke"}));
  try {
    depth(bn, "nope");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), errc::unknown_variable);
  }
}

TEST(BayesNet, JsonRoundTrip) {
  auto again = parse_bn(to_json(smoke_alarm()).dump());
  ASSERT_TRUE(again.ok());
  EXPECT_EQ(to_json(*again), to_json(smoke_alarm()));
}

TEST(BayesNet, SyntaxErrorHasLineAndColumn) {
  auto d = first_error("{\n  \"variables\": [\n    oops\n  ]\n}");
  EXPECT_EQ(d.code, "syntax");
  EXPECT_EQ(d.location.line, 3u);
}

TEST(BayesNet, SchemaErrorsCarryPointers) {
  auto d = first_error(with(kTwoNodes, "\"name\": \"wet\"", "\"name\": 3"));
  EXPECT_EQ(d.code, "schema");
  EXPECT_EQ(d.location.pointer, "/variables/1/name");
  d = first_error(with(kTwoNodes, "[0.9, 0.1]", "[0.9, \"x\"]"));
  EXPECT_EQ(d.location.pointer, "/variables/1/cpt/0/probabilities/1");
}

TEST(BayesNet, ValidationErrors) {
  ASSERT_TRUE(parse_bn(kTwoNodes).ok());
  EXPECT_EQ(first_error(with(kTwoNodes, "[0.9, 0.1]", "[0.9, 0.2]")).code, "row-sum");
  EXPECT_EQ(first_error(with(kTwoNodes, "[\"rain\"]", "[\"snow\"]")).code, "unknown-parent");
  EXPECT_EQ(first_error(with(kTwoNodes, "[\"rain\"]", "[\"wet\"]")).code, "cycle");
  EXPECT_EQ(first_error(with(kTwoNodes, "\"values\": [\"t\", \"f\"], \"cpt\"", "\"values\": [\"t\"], \"cpt\"")).code,
            "domain-too-small");
  EXPECT_EQ(first_error(with(kTwoNodes, "\"given\": [\"f\"]", "\"given\": [\"t\"]")).code, "duplicate-row");
  EXPECT_EQ(first_error(with(kTwoNodes, "\"given\": [\"f\"]", "\"given\": [\"x\"]")).code, "bad-value");
  EXPECT_EQ(first_error(with(kTwoNodes, "\"name\": \"wet\"", "\"name\": \"rain\"")).code, "duplicate-variable");
  EXPECT_EQ(first_error(with(kTwoNodes, "\"name\": \"wet\"", "\"name\": \"Wet\"")).code, "bad-name");
  EXPECT_EQ(first_error(with(kTwoNodes, "[0.2, 0.8]", "[1.2, -0.2]")).code, "probability-out-of-range");
  std::string missing = with(kTwoNodes, ",\n               { \"given\": [\"f\"], \"probabilities\": [0.1, 0.9] }", "");
  EXPECT_EQ(first_error(missing).code, "missing-row");
}

TEST(BayesNet, CompileShape) {
  auto compiled = compile(smoke_alarm());
  std::size_t assumables = 0, rules = 0, constraints = 0;
  for (const auto& st : compiled.program.statements) {
    if (std::holds_alternative<AssumableDecl>(st)) {
      ++assumables;
    } else if (std::get<Clause>(st).is_constraint()) {
      ++constraints;
    } else {
      ++rules;
    }
  }
  EXPECT_EQ(assumables, 24u);
  EXPECT_EQ(rules, 4u);
  EXPECT_EQ(constraints, 6u);
  EXPECT_EQ(compiled.provenance.size(), compiled.program.statements.size());
}

TEST(BayesNet, CompileOptions) {
  auto three = parse_bn(R"({"variables": [
    {"name": "w", "values": ["a", "b", "c"], "cpt": [{"probabilities": [0.2, 0.3, 0.5]}]},
    {"name": "v", "values": ["p", "q"], "parents": ["w"],
     "cpt": [{"given": ["a"], "probabilities": [0.5, 0.5]},
             {"given": ["b"], "probabilities": [0.5, 0.5]},
             {"given": ["c"], "probabilities": [0.5, 0.5]}]}]})");
  ASSERT_TRUE(three.ok());
  auto count = [](const CompiledProgram& c, Provenance::Kind k) {
    return std::count_if(c.provenance.begin(), c.provenance.end(),
                         [&](const Provenance& p) { return p.kind == k; });
  };
  auto plain = compile(*three);
  EXPECT_EQ(count(plain, Provenance::Kind::exclusivity), 3 + 1);
  EXPECT_EQ(count(plain, Provenance::Kind::c_exclusivity), 0);
  auto exact = compile(*three, {true, false});
  EXPECT_EQ(count(exact, Provenance::Kind::exclusivity), 6 + 2);
  auto with_c = compile(*three, {false, true});
  EXPECT_EQ(count(with_c, Provenance::Kind::c_exclusivity), 3);
  EXPECT_TRUE(load_kb(to_string(with_c.program)).ok());
}

TEST(BayesNet, LogicVariablesDeduplicated) {
  auto bn = parse_bn(R"({"variables": [
    {"name": "alpha", "values": ["y", "n"], "cpt": [{"probabilities": [0.5, 0.5]}]},
    {"name": "also", "values": ["y", "n"], "cpt": [{"probabilities": [0.5, 0.5]}]},
    {"name": "alarm", "values": ["y", "n"], "parents": ["alpha", "also"],
     "cpt": [{"given": ["y", "y"], "probabilities": [0.5, 0.5]},
             {"given": ["y", "n"], "probabilities": [0.5, 0.5]},
             {"given": ["n", "y"], "probabilities": [0.5, 0.5]},
             {"given": ["n", "n"], "probabilities": [0.5, 0.5]}]}]})");
  ASSERT_TRUE(bn.ok());
  for (const auto& st : compile(*bn).program.statements) {
    const auto* c = std::get_if<Clause>(&st);
    if (!c || c->is_constraint()) continue;
    std::vector<std::string> vars;
    for (const auto& b : c->body) collect_variables(b, vars);
    collect_variables(c->head, vars);
    EXPECT_EQ(vars.size(), 3u) << to_string(*c);
  }
}

TEST(BayesNet, DomainsSidecar) {
  auto j = domains_json(smoke_alarm());
  ASSERT_EQ(j["variables"].size(), 6u);
  EXPECT_EQ(j["variables"][0]["name"], "fire");
  EXPECT_EQ(j["variables"][0]["values"], nlohmann::json::array({"yes", "no"}));
}

TEST(BayesNet, RandomNetworksValidate) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    auto bn = random_network(seed);
    EXPECT_TRUE(validate(bn).empty()) << seed;
    EXPECT_TRUE(load_kb(to_string(compile(bn).program)).ok()) << seed;
  }
}
