#include <gtest/gtest.h>

#include "pha/syntax.hpp"
#include "support/fixtures.hpp"

using namespace pha;
using namespace pha::testing;

namespace {

std::string first_code(std::string_view text) {
  auto p = parse_program(text);
  EXPECT_FALSE(p.ok());
  return p.diagnostics().empty() ? "" : p.diagnostics().front().code;
}

}  // namespace

TEST(Syntax, ParsesAllStatementKinds) {
  auto prog = must_parse(
      "assumable( fire(yes), 0.01 ).\n"
      "smoke(Sm) <- fire(Fi), c_smoke(Sm,Fi).\n"
      "false <- fire(yes), fire(no).\n"
      "fact(a).\n");
  ASSERT_EQ(prog.statements.size(), 4u);
  const auto& decl = std::get<AssumableDecl>(prog.statements[0]);
  EXPECT_EQ(to_string(decl.atom), "fire(yes)");
  EXPECT_DOUBLE_EQ(decl.prior, 0.01);
  const auto& rule = std::get<Clause>(prog.statements[1]);
  EXPECT_EQ(rule.body.size(), 2u);
  EXPECT_FALSE(rule.is_constraint());
  EXPECT_TRUE(std::get<Clause>(prog.statements[2]).is_constraint());
  EXPECT_TRUE(std::get<Clause>(prog.statements[3]).body.empty());
}

TEST(Syntax, CommentsAndLayoutIgnored) {
  auto a = must_parse("p(X) <- q(X). % trailing\n%whole line\nq(a).");
  auto b = must_parse("p( X )<-\n  q( X ) .\n q(a) .");
  EXPECT_EQ(to_string(a), to_string(b));
}

TEST(Syntax, LocationsAreReported) {
  auto p = parse_program("p(a).\nq(b) <- .\n");
  ASSERT_FALSE(p.ok());
  EXPECT_EQ(p.diagnostics().front().location.line, 2u);
}

TEST(Syntax, Errors) {
  EXPECT_EQ(first_code("p(a)"), "syntax");
  EXPECT_EQ(first_code("p(a) <- q(a"), "syntax");
  EXPECT_EQ(first_code("p(a) # q."), "lexical");
  EXPECT_EQ(first_code("assumable( p(a), -0.5 )."), "lexical");
  EXPECT_EQ(first_code("assumable( p(a), high )."), "probability");
  EXPECT_EQ(first_code("assumable( false, 0.5 )."), "syntax");
  EXPECT_EQ(first_code("p <- false."), "syntax");
}

TEST(Syntax, ProbabilityFormatting) {
  EXPECT_EQ(format_probability(0.01), "0.01");
  EXPECT_EQ(format_probability(1.0), "1.0");
  EXPECT_EQ(format_probability(0.0), "0.0");
  for (double p : {0.0001, 1e-30, 0.123456789012345678, 0.5, 2.5e-7}) {
    auto prog = must_parse("assumable( a, " + format_probability(p) + " ).");
    EXPECT_EQ(std::get<AssumableDecl>(prog.statements[0]).prior, p);
  }
}

TEST(Syntax, Conjunction) {
  auto c = parse_conjunction("smoke(yes), report(no)");
  ASSERT_TRUE(c);
  EXPECT_EQ(c->size(), 2u);
  EXPECT_TRUE(parse_conjunction("smoke(yes).").ok());
  ASSERT_TRUE(parse_conjunction(""));
  EXPECT_TRUE(parse_conjunction("")->empty());
  EXPECT_FALSE(parse_conjunction("smoke(yes),").ok());
}

TEST(Syntax, ListingRoundTrips) {
  auto once = must_parse(slurp(test_data_path("smoke_alarm_listing.pha")));
  auto twice = must_parse(to_string(once));
  EXPECT_EQ(once.statements, twice.statements);
  EXPECT_EQ(to_string(once), to_string(twice));
}

TEST(Syntax, RandomProgramsRoundTrip) {
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    Program p = random_program(seed);
    std::string text = to_string(p);
    auto back = parse_program(text);
    ASSERT_TRUE(back.ok()) << text;
    EXPECT_EQ(back->statements, p.statements) << text;
    EXPECT_EQ(to_string(*back), text);
  }
}
