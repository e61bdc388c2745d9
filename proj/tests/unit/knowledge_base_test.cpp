#include <gtest/gtest.h>

#include "kbmc/knowledge_base.hpp"

namespace kbmc {
namespace {

Term c(const char* s) { return Term::constant(s); }
Term v(const char* s) { return Term::variable(s); }

KnowledgeBase weather_kb() {
  KnowledgeBase kb;
  kb.add_domain(DomainDecl{"weather", 2, {{0, {"fair", "cloudy", "rainy"}}}});
  return kb;
}

TEST(KnowledgeBase, DeclarationOrderAcrossKinds) {
  KnowledgeBase kb = weather_kb();
  kb.add_fact(make_proposition("inversion", {c("today")}));
  Proposition subject = make_proposition("weather", {Term::alt_set({"fair", "cloudy", "rainy"}), c("monday")});
  kb.add_influence(Prior{Distribution{subject, {0.7, 0.2, 0.1}}});
  ASSERT_EQ(kb.declaration_count(), 3u);
  EXPECT_EQ(kb.declaration_order()[0].kind, KnowledgeBase::DeclKind::kDomain);
  EXPECT_EQ(kb.declaration_order()[1].kind, KnowledgeBase::DeclKind::kFact);
  EXPECT_EQ(kb.declaration_order()[2].kind, KnowledgeBase::DeclKind::kInfluence);
  EXPECT_TRUE(check_invariants(kb).empty());
  EXPECT_STREQ(influence_keyword(kb.influences()[0]), "prior");
}

TEST(KnowledgeBase, ExpandRestrictedReplacesVariablesOnly) {
  KnowledgeBase kb = weather_kb();
  EXPECT_EQ(expand_restricted(make_proposition("weather", {v("x"), v("d")}), kb),
            make_proposition("weather", {Term::alt_set({"fair", "cloudy", "rainy"}), v("d")}));
  Proposition fixed = make_proposition("weather", {c("fair"), v("d")});
  EXPECT_EQ(expand_restricted(fixed, kb), fixed);
  Proposition other = make_proposition("forecast", {v("x")});
  EXPECT_EQ(expand_restricted(other, kb), other);
}

TEST(KnowledgeBase, InvariantViolations) {
  KnowledgeBase kb = weather_kb();
  kb.add_fact(make_proposition("weather", {v("x"), c("monday")}));
  kb.add_fact(make_proposition("weather", {c("snowy"), c("monday")}));
  Proposition wrong = make_proposition("weather", {Term::alt_set({"rainy", "fair"}), c("monday")});
  kb.add_influence(Prior{Distribution{wrong, {0.5, 0.5}}});
  Proposition subject = make_proposition("weather", {Term::alt_set({"fair", "cloudy", "rainy"}), c("monday")});
  kb.add_influence(Prior{Distribution{subject, {0.5, 0.2, 0.1}}});
  EXPECT_EQ(check_invariants(kb).size(), 4u);
}

TEST(KnowledgeBase, GuardsAreUnrestrictedConditions) {
  Term w = Term::alt_set({"fair", "cloudy", "rainy"});
  ProbInfluence pi;
  pi.subject = make_proposition("weather", {w, c("tomorrow")});
  pi.conditions = {make_proposition("inversion", {c("today")}),
                   make_proposition("weather", {w, c("today")})};
  EXPECT_EQ(pi.guards(), std::vector<Proposition>{make_proposition("inversion", {c("today")})});
}

TEST(SourceSpan, Rendering) {
  EXPECT_EQ(to_string(SourceSpan{"kb.ikb", 3, 7}), "kb.ikb:3:7");
}

}  // namespace
}  // namespace kbmc
