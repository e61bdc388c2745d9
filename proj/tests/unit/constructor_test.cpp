#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "fixtures.hpp"
#include "kbmc/constructor.hpp"
#include "kbmc/logic_engine.hpp"
#include "kbmc/parser.hpp"

namespace kbmc {
namespace {

using testing::load_fixture;

Term c(const char* s) { return Term::constant(s); }
Term wx() { return Term::alt_set({"fair", "cloudy", "rainy"}); }
Proposition weather(const char* day) { return make_proposition("weather", {wx(), c(day)}); }

ConstructionResult build(const std::string& fixture, const char* query) {
  ConstructionOutcome out = construct(parse_query(query), load_fixture(fixture));
  if (auto* f = std::get_if<ConstructionFailure>(&out)) {
    ADD_FAILURE() << fixture << ": construction failed: " << to_string(f->kind) << " " << f->detail;
    return {};
  }
  return std::get<ConstructionResult>(out);
}

std::optional<NodeId> node_labelled(const InfluenceDiagram& d, const Proposition& label) {
  for (const auto& [id, n] : d.nodes()) {
    if (n.label == label) return id;
  }
  return std::nullopt;
}

// Follows the first candidate at every step.
std::vector<std::vector<GoalState>> first_path(const Query& q, const KnowledgeBase& kb) {
  std::vector<std::vector<GoalState>> levels;
  GoalState s = initial_state(q);
  while (!s.pending.empty()) {
    std::vector<GoalState> next = step(s, kb, ProofConfig{});
    levels.push_back(next);
    if (next.empty()) break;
    s = next.front();
  }
  return levels;
}

TEST(Construct, FactAnswersDistributionQueryLogically) {
  ConstructionResult r = build("weather_facts.ikb", "?dist (weather ?x saturday).");
  EXPECT_EQ(r.kind, ResultKind::kLogical);
  EXPECT_TRUE(r.diagram.empty());
  EXPECT_FALSE(r.query_node);
  EXPECT_EQ(r.answer, (Substitution{{"x", c("rainy")}}));
}

TEST(Construct, WeatherPriorSingleNode) {
  ConstructionResult r = build("weather_prior.ikb", "?dist (weather ?x monday).");
  EXPECT_EQ(r.kind, ResultKind::kProbabilistic);
  ASSERT_EQ(r.diagram.size(), 1u);
  ASSERT_TRUE(r.query_node);
  const Node& n = r.diagram.node(*r.query_node);
  EXPECT_EQ(n.label, weather("monday"));
  EXPECT_EQ(n.table().rows, (std::vector<std::vector<double>>{{0.7, 0.2, 0.1}}));
  EXPECT_EQ(r.answer, (Substitution{{"x", wx()}}));
}

TEST(Construct, InversionGuardSelectsFirstInfluence) {
  ConstructionResult r = build("inversion.ikb", "?dist (weather ?x tomorrow).");
  ASSERT_FALSE(r.trace.steps.empty());
  const TraceStep& root = r.trace.steps.front();
  EXPECT_EQ(root.rule, Rule::kChain);
  EXPECT_EQ(root.declaration, 3u);  // the guarded influence
  auto guard = std::find_if(r.trace.steps.begin(), r.trace.steps.end(),
                            [](const TraceStep& s) { return s.guard; });
  ASSERT_NE(guard, r.trace.steps.end());
  EXPECT_EQ(guard->rule, Rule::kLogic);
  EXPECT_EQ(guard->subgoal, make_proposition("inversion", {c("today")}));
  // The guard never becomes a node.
  EXPECT_FALSE(node_labelled(r.diagram, make_proposition("inversion", {c("today")})));
  EXPECT_EQ(r.diagram.size(), 2u);
}

TEST(Construct, WithoutGuardFactUsesSecondInfluence) {
  ConstructionResult r = build("inversion_nofact.ikb", "?dist (weather ?x tomorrow).");
  ASSERT_FALSE(r.trace.steps.empty());
  EXPECT_EQ(r.trace.steps.front().declaration, 4u);
  for (const TraceStep& s : r.trace.steps) EXPECT_FALSE(s.guard);
}

TEST(Construct, PicnicDiagram) {
  ConstructionResult r = build("picnic.ikb", "?decide (payoff ?v).");
  EXPECT_EQ(r.kind, ResultKind::kDecision);
  ASSERT_EQ(r.diagram.size(), 4u);
  auto w = node_labelled(r.diagram, weather("tomorrow"));
  auto f = node_labelled(r.diagram, make_proposition("forecast", {Term::alt_set({"sunny", "rainy"}), c("tomorrow")}));
  auto a = node_labelled(r.diagram, make_proposition("activity", {Term::alt_set({"picnic", "work", "sleep"}), c("tomorrow")}));
  ASSERT_TRUE(w && f && a);
  ASSERT_TRUE(r.diagram.value_node());
  EXPECT_EQ(r.query_node, r.diagram.value_node());
  EXPECT_TRUE(r.diagram.node(*w).is_chance());
  EXPECT_TRUE(r.diagram.node(*w).parents.empty());
  EXPECT_EQ(r.diagram.node(*f).parents, std::vector<NodeId>{*w});
  EXPECT_TRUE(r.diagram.node(*a).is_decision());
  EXPECT_EQ(r.diagram.node(*a).parents, std::vector<NodeId>{*f});
  EXPECT_EQ(r.diagram.node(*r.diagram.value_node()).parents, (std::vector<NodeId>{*w, *a}));
  auto reuse = std::find_if(r.trace.steps.begin(), r.trace.steps.end(),
                            [](const TraceStep& s) { return s.rule == Rule::kReuse; });
  ASSERT_NE(reuse, r.trace.steps.end());
  EXPECT_EQ(reuse->node, w);
  EXPECT_EQ(reuse->consumer, f);
}

TEST(Construct, ObservedTodayFixesTableRow) {
  ConstructionResult r = build("known_today.ikb", "?dist (weather ?x tomorrow).");
  ASSERT_EQ(r.diagram.size(), 1u);
  const Node& n = r.diagram.node(*r.query_node);
  EXPECT_TRUE(n.parents.empty());
  EXPECT_EQ(n.table().rows, (std::vector<std::vector<double>>{{0.2, 0.3, 0.5}}));
}

TEST(Construct, TemporalChainUsesGenericInfluenceTwice) {
  ConstructionResult r = build("temporal.ikb", "?dist (weather ?x dayafter).");
  ASSERT_EQ(r.diagram.size(), 3u);
  auto today = node_labelled(r.diagram, weather("today"));
  auto tomorrow = node_labelled(r.diagram, weather("tomorrow"));
  ASSERT_TRUE(today && tomorrow);
  EXPECT_EQ(r.diagram.node(*tomorrow).parents, std::vector<NodeId>{*today});
  EXPECT_EQ(r.diagram.node(*r.query_node).parents, std::vector<NodeId>{*tomorrow});
}

TEST(Construct, EmptyKbExhausts) {
  ConstructionOutcome out = construct(parse_query("?dist (weather ?x monday)."), parse_kb(""));
  ASSERT_TRUE(std::holds_alternative<ConstructionFailure>(out));
  EXPECT_EQ(std::get<ConstructionFailure>(out).kind, FailureKind::kExhausted);
}

TEST(Construct, InformationalInfluenceInDistQueryFails) {
  KnowledgeBase kb = parse_kb(
      "domain act/1 @1 {go, stay}.\ndomain sky/1 @1 {clear, grey}.\n"
      "prior (sky ?s) = {clear: 0.5, grey: 0.5}.\n"
      "info (act ?a) |i (sky ?s).\n");
  ConstructionOutcome out = construct(parse_query("?dist (act ?a)."), kb);
  ASSERT_TRUE(std::holds_alternative<ConstructionFailure>(out));
  EXPECT_EQ(std::get<ConstructionFailure>(out).kind, FailureKind::kDecisionInDistQuery);
}

TEST(Construct, RecursiveInfluenceHitsAncestryOrDepth) {
  // Every day's weather depends on the same day's weather: no base case.
  KnowledgeBase kb = parse_kb(
      "domain weather/2 @1 {fair, cloudy, rainy}.\n"
      "prob (weather ?x ?d) |p (weather ?y ?d) = {\n"
      "  fair: 1, 0, 0; cloudy: 0, 1, 0; rainy: 0, 0, 1; }.\n");
  ConstructionOutcome out = construct(parse_query("?dist (weather ?x monday)."), kb);
  ASSERT_TRUE(std::holds_alternative<ConstructionFailure>(out));
}

TEST(Construct, DepthLimitReported) {
  // A 30-day chain with no prior at its start.
  std::string text = "domain weather/2 @1 {fair, rainy}.\n";
  for (int i = 0; i < 30; ++i) {
    text += "fact (next d" + std::to_string(i) + " d" + std::to_string(i + 1) + ").\n";
  }
  text += "prob (weather ?x ?d) |p (next ?e ?d), (weather ?y ?e) = { fair: 0.5, 0.5; rainy: 0.5, 0.5; }.\n";
  ProofConfig cfg;
  cfg.depth_limit = 10;
  ConstructionOutcome out = construct(parse_query("?dist (weather ?x d30)."), parse_kb(text), cfg);
  ASSERT_TRUE(std::holds_alternative<ConstructionFailure>(out));
  EXPECT_EQ(std::get<ConstructionFailure>(out).kind, FailureKind::kDepth);
  cfg.depth_limit = 64;
  // With a prior at the start of the chain the full depth is reachable.
  text += "prior (weather ?x d0) = {fair: 0.5, rainy: 0.5}.\n";
  out = construct(parse_query("?dist (weather ?x d30)."), parse_kb(text), cfg);
  ASSERT_TRUE(std::holds_alternative<ConstructionResult>(out));
  EXPECT_EQ(std::get<ConstructionResult>(out).diagram.size(), 31u);
}

TEST(Construct, UnorderedDecisionsRejected) {
  KnowledgeBase kb = parse_kb(
      "domain a/1 @1 {x, y}.\ndomain b/1 @1 {x, y}.\n"
      "info (a ?p).\ninfo (b ?q).\n"
      "value (u ?v) |v (a ?p), (b ?q) = { x, x: 1; x, y: 2; y, x: 3; y, y: 4; }.\n");
  ConstructionOutcome out = construct(parse_query("?decide (u ?v)."), kb);
  ASSERT_TRUE(std::holds_alternative<ConstructionFailure>(out));
  EXPECT_EQ(std::get<ConstructionFailure>(out).kind, FailureKind::kUnorderedDecisions);
}

TEST(Construct, OrderedDecisionsAccepted) {
  KnowledgeBase kb = parse_kb(
      "domain a/1 @1 {x, y}.\ndomain b/1 @1 {x, y}.\n"
      "info (a ?p).\ninfo (b ?q) |i (a ?p).\n"
      "value (u ?v) |v (a ?p), (b ?q) = { x, x: 1; x, y: 2; y, x: 3; y, y: 4; }.\n");
  ConstructionOutcome out = construct(parse_query("?decide (u ?v)."), kb);
  ASSERT_TRUE(std::holds_alternative<ConstructionResult>(out));
}

TEST(Step, ReuseCandidateAddsArcToConsumer) {
  KnowledgeBase kb = load_fixture("picnic.ikb");
  auto levels = first_path(parse_query("?decide (payoff ?v)."), kb);
  bool seen = false;
  for (const auto& level : levels) {
    ASSERT_FALSE(level.empty());
    const GoalState& s = level.front();
    const TraceStep& t = s.trace.steps.back();
    if (t.rule != Rule::kReuse) continue;
    seen = true;
    EXPECT_EQ(level.size(), 1u);
    const Node& consumer = s.diagram.node(*t.consumer);
    EXPECT_NE(std::find(consumer.parents.begin(), consumer.parents.end(), *t.node),
              consumer.parents.end());
  }
  EXPECT_TRUE(seen);
}

TEST(Step, PriorBeforeConditional) {
  KnowledgeBase kb = parse_kb(
      "domain weather/2 @1 {fair, cloudy, rainy}.\n"
      "prob (weather ?x tomorrow) |p (weather ?y today) = {\n"
      "  fair: 0.6, 0.3, 0.1; cloudy: 0.3, 0.4, 0.3; rainy: 0.2, 0.3, 0.5; }.\n"
      "prior (weather ?x tomorrow) = {fair: 0.4, cloudy: 0.4, rainy: 0.2}.\n"
      "prior (weather ?x today) = {fair: 0.5, cloudy: 0.3, rainy: 0.2}.\n");
  std::vector<GoalState> next =
      step(initial_state(parse_query("?dist (weather ?x tomorrow).")), kb, ProofConfig{});
  ASSERT_EQ(next.size(), 2u);
  EXPECT_EQ(next[0].trace.steps.back().rule, Rule::kPrior);
  EXPECT_EQ(next[1].trace.steps.back().rule, Rule::kChain);
  EXPECT_EQ(next[0].trace.steps.back().candidate, 0u);
  EXPECT_EQ(next[1].trace.steps.back().candidate, 1u);
}

TEST(Step, ProvableSubgoalGivesSingleLogicCandidate) {
  KnowledgeBase kb = load_fixture("known_today.ikb");
  GoalState s = initial_state(parse_query("?dist (weather ?x today)."));
  std::vector<GoalState> next = step(s, kb, ProofConfig{});
  ASSERT_EQ(next.size(), 1u);
  EXPECT_EQ(next[0].trace.steps.back().rule, Rule::kLogic);
  EXPECT_TRUE(next[0].diagram.empty());
}

TEST(Step, DeadEndIsEmpty) {
  GoalState s = initial_state(parse_query("?dist (weather ?x monday)."));
  EXPECT_TRUE(step(s, parse_kb(""), ProofConfig{}).empty());
}

TEST(InstantiateInfluence, BindsDayConstants) {
  KnowledgeBase kb = load_fixture("temporal.ikb");
  const Influence& generic = kb.influences().back();
  Substitution theta{{"d", c("tomorrow")}, {"e", c("today")}};
  Node n = instantiate_influence(generic, theta, NodeId{4});
  EXPECT_EQ(n.id, NodeId{4});
  EXPECT_EQ(n.label, weather("tomorrow"));
  EXPECT_EQ(n.table().row_axes, std::vector<Proposition>{weather("today")});
  EXPECT_EQ(n.table().rows.size(), 3u);
}

TEST(InstantiateInfluence, PriorIsUnconditional) {
  KnowledgeBase kb = load_fixture("weather_prior.ikb");
  Node n = instantiate_influence(kb.influences().front(), Substitution{}, NodeId{0});
  EXPECT_TRUE(n.table().row_axes.empty());
  EXPECT_EQ(n.label, weather("monday"));
}

TEST(InstantiateInfluence, FreeDayFlounders) {
  KnowledgeBase kb = load_fixture("temporal.ikb");
  EXPECT_THROW(instantiate_influence(kb.influences().back(), Substitution{}, NodeId{0}),
               ConstructionError);
}

TEST(AttachDecision, ObservedBecomesSubgoalForDecision) {
  KnowledgeBase kb = parse_kb(
      "domain weather/2 @1 {fair, cloudy, rainy}.\n"
      "domain activity/2 @1 {picnic, work, sleep}.\n"
      "info (activity ?x tomorrow) |i (weather ?y tomorrow).\n");
  const auto& inf = std::get<InfoInfluence>(kb.influences()[0]);
  GoalState s = initial_state(parse_query("?decide (payoff ?v)."));
  Subgoal sg = s.pending.back();
  s.pending.pop_back();
  GoalState next = attach_decision(inf, Substitution{}, s, sg);
  ASSERT_EQ(next.diagram.size(), 1u);
  const Node& d = next.diagram.nodes().begin()->second;
  EXPECT_TRUE(d.is_decision());
  EXPECT_EQ(d.alternatives(), (std::vector<Symbol>{"picnic", "work", "sleep"}));
  ASSERT_EQ(next.pending.size(), 1u);
  EXPECT_EQ(next.pending.back().prop, weather("tomorrow"));
  EXPECT_EQ(next.pending.back().consumer, d.id);
}

TEST(AttachDecision, NoObservations) {
  KnowledgeBase kb = parse_kb("domain act/1 @1 {go, stay}.\ninfo (act ?a).\n");
  GoalState s = initial_state(parse_query("?decide (u ?v)."));
  Subgoal sg = s.pending.back();
  s.pending.pop_back();
  GoalState next = attach_decision(std::get<InfoInfluence>(kb.influences()[0]), Substitution{}, s, sg);
  EXPECT_TRUE(next.pending.empty());
  EXPECT_TRUE(next.diagram.nodes().begin()->second.parents.empty());
}

TEST(AttachDecision, OutsideDecisionQueryThrows) {
  KnowledgeBase kb = parse_kb("domain act/1 @1 {go, stay}.\ninfo (act ?a).\n");
  GoalState s = initial_state(parse_query("?dist (act ?a)."));
  Subgoal sg = s.pending.back();
  s.pending.pop_back();
  EXPECT_THROW(attach_decision(std::get<InfoInfluence>(kb.influences()[0]), Substitution{}, s, sg),
               ConstructionError);
}

TEST(EnumerateModels, InversionGivesBothInfluencesInOrder) {
  auto models = enumerate_models(parse_query("?dist (weather ?x tomorrow)."),
                                 load_fixture("inversion.ikb"), 10);
  ASSERT_EQ(models.size(), 2u);
  EXPECT_EQ(models[0].trace.steps.front().declaration, 3u);
  EXPECT_EQ(models[1].trace.steps.front().declaration, 4u);
}

TEST(EnumerateModels, UniquePriorGivesOneModel) {
  auto models = enumerate_models(parse_query("?dist (weather ?x monday)."),
                                 load_fixture("weather_prior.ikb"), 10);
  EXPECT_EQ(models.size(), 1u);
}

TEST(EnumerateModels, TwoPriorsInDeclarationOrder) {
  auto models = enumerate_models(parse_query("?dist (coin ?x)."), load_fixture("two_priors.ikb"), 10);
  ASSERT_EQ(models.size(), 2u);
  EXPECT_EQ(models[0].diagram.size(), 1u);
  EXPECT_EQ(models[0].diagram.nodes().begin()->second.table().rows[0],
            (std::vector<double>{0.5, 0.5}));
  EXPECT_EQ(models[1].diagram.nodes().begin()->second.table().rows[0],
            (std::vector<double>{0.9, 0.1}));
  EXPECT_EQ(enumerate_models(parse_query("?dist (coin ?x)."), load_fixture("two_priors.ikb"), 1).size(), 1u);
}

TEST(EnumerateModels, FailureReported) {
  ConstructionFailure failure;
  auto models = enumerate_models(parse_query("?dist (weather ?x monday)."), parse_kb(""), 3,
                                 ProofConfig{}, &failure);
  EXPECT_TRUE(models.empty());
  EXPECT_EQ(failure.kind, FailureKind::kExhausted);
}

TEST(Trace, RenderedLines) {
  ConstructionResult r = build("forecast_chain.ikb", "?dist (forecast ?f monday).");
  EXPECT_EQ(to_string(r.trace),
            "iv (forecast ?f monday) => decl 4 -> n0 {?f/{sunny, rainy}}\n"
            "  iii (weather {fair, cloudy, rainy} monday) => decl 3 -> n1 for n0 {}\n");
}

// Properties over every fixture query.
class FixtureQueries : public ::testing::TestWithParam<std::string> {};

TEST_P(FixtureQueries, Invariants) {
  const std::string name = GetParam();
  KnowledgeBase kb = load_fixture(name);
  for (const Query& q : testing::fixture_queries(name)) {
    SCOPED_TRACE(to_string(q));
    auto models = enumerate_models(q, kb, 5);
    ASSERT_FALSE(models.empty());
    for (const ConstructionResult& r : models) {
      // Well formed, kind consistent with the diagram.
      EXPECT_NO_THROW(validate(r.diagram));
      EXPECT_EQ(r.kind == ResultKind::kLogical, r.diagram.empty());
      // Replay reproduces the diagram.
      ConstructionOutcome again = replay(q, kb, r.trace);
      ASSERT_TRUE(std::holds_alternative<ConstructionResult>(again));
      EXPECT_TRUE(structurally_equal(std::get<ConstructionResult>(again).diagram, r.diagram));
      EXPECT_EQ(std::get<ConstructionResult>(again).answer, r.answer);
      // The answer leaves no free unrestricted variable in the goals.
      for (const Proposition& g : apply_all(r.answer, q.goals)) {
        Proposition e = expand_restricted(g, kb);
        if (q.kind == Query::Kind::kDecide) {
          EXPECT_LE(e.variables().size(), 1u);
        } else {
          EXPECT_FALSE(e.has_variables()) << to_string(e);
        }
      }
      // No two non-value nodes carry unifiable labels.
      std::vector<Proposition> labels;
      for (const auto& [id, n] : r.diagram.nodes()) {
        if (!n.is_value()) labels.push_back(n.label);
      }
      for (std::size_t i = 0; i < labels.size(); ++i) {
        for (std::size_t j = i + 1; j < labels.size(); ++j) {
          EXPECT_FALSE(unify(labels[i], labels[j])) << to_string(labels[i]);
        }
      }
    }
    // Distinct models.
    for (std::size_t i = 0; i < models.size(); ++i) {
      for (std::size_t j = i + 1; j < models.size(); ++j) {
        EXPECT_FALSE(structurally_equal(models[i].diagram, models[j].diagram) &&
                     models[i].answer == models[j].answer);
      }
    }
  }
}

TEST_P(FixtureQueries, LogicQueriesMatchProver) {
  const std::string name = GetParam();
  KnowledgeBase kb = load_fixture(name);
  for (const Query& q : testing::fixture_queries(name)) {
    if (q.kind != Query::Kind::kLogic) continue;
    SCOPED_TRACE(to_string(q));
    std::vector<Substitution> expected = prove(q.goals, kb).all();
    auto models = enumerate_models(q, kb, 1000);
    std::vector<Substitution> got;
    for (const ConstructionResult& r : models) {
      EXPECT_EQ(r.kind, ResultKind::kLogical);
      EXPECT_TRUE(r.diagram.empty());
      got.push_back(r.answer);
    }
    EXPECT_EQ(got, expected);
  }
}

INSTANTIATE_TEST_SUITE_P(AllFixtures, FixtureQueries, ::testing::ValuesIn(testing::all_fixtures()),
                         [](const auto& info) {
                           std::string n = info.param;
                           for (char& ch : n) {
                             if (!std::isalnum(static_cast<unsigned char>(ch))) ch = '_';
                           }
                           return n;
                         });

}  // namespace
}  // namespace kbmc
