// Query-driven construction of influence diagrams from a knowledge base.
//
// A goal stack is rewritten one subgoal at a time. For each subgoal the
// rules are tried in a fixed order: logical proof (i), reuse of an existing
// node (ii), a prior (iii), a conditional influence (iv), an informational
// influence (decision queries only) and, for the root of a decision query,
// a value influence. Within a rule, influences are tried in declaration
// order; dead ends backtrack chronologically.

#ifndef KBMC_CONSTRUCTOR_HPP_
#define KBMC_CONSTRUCTOR_HPP_

#include <cstddef>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "kbmc/diagram.hpp"
#include "kbmc/knowledge_base.hpp"
#include "kbmc/logic_engine.hpp"
#include "kbmc/parser.hpp"
#include "kbmc/substitution.hpp"

namespace kbmc {

enum class Rule { kLogic, kReuse, kPrior, kChain, kInfo, kValue };

// "i", "ii", "iii", "iv", "info", "value".
const char* to_string(Rule rule);

struct Subgoal {
  Proposition prop;
  // Node whose table (or information set) this subgoal feeds, and which of
  // its axes.
  std::optional<NodeId> consumer;
  std::size_t axis = 0;
  // Deterministic condition: may only be discharged by rule i.
  bool guard = false;
  // Already moved to the bottom of the stack once for being under-bound.
  bool delayed = false;
  // Subgoals this one was spawned from, root first.
  std::vector<Proposition> ancestry;
};

struct TraceStep {
  Rule rule = Rule::kLogic;
  Proposition subgoal;  // as selected, after the accumulated substitution
  std::optional<NodeId> consumer;
  bool guard = false;
  std::size_t depth = 0;
  // 1-based declaration number of the influence used (rules iii, iv, info,
  // value), or the reused / created node.
  std::optional<std::size_t> declaration;
  std::optional<NodeId> node;
  Substitution theta;
  // Position among the candidates step() produced; replay picks it again.
  std::size_t candidate = 0;
};

struct Trace {
  std::vector<TraceStep> steps;
};

// One line per step, indented by subgoal depth.
std::string to_string(const TraceStep& step);
std::string to_string(const Trace& trace);

// How an axis of a node under construction has been resolved.
struct AxisSlot {
  enum class State { kOpen, kParent, kFixed };
  State state = State::kOpen;
  NodeId parent;           // kParent
  std::size_t outcome = 0;  // kFixed: outcome index of the axis proposition
};

struct GoalState {
  Query::Kind mode = Query::Kind::kDist;
  // back() is selected next.
  std::vector<Subgoal> pending;
  // Nodes carry their full tables; arcs appear as axes are resolved.
  InfluenceDiagram diagram;
  Substitution theta;
  Trace trace;
  std::map<NodeId, std::vector<AxisSlot>> axes;
  std::optional<NodeId> query_node;
  std::size_t fresh = 0;
};

enum class ResultKind { kLogical, kProbabilistic, kDecision };

const char* to_string(ResultKind kind);

struct ConstructionResult {
  InfluenceDiagram diagram;
  // The query's node for distribution queries, the value node for decision
  // queries.
  std::optional<NodeId> query_node;
  Substitution answer;
  Trace trace;
  ResultKind kind = ResultKind::kLogical;
};

enum class FailureKind {
  kExhausted,
  kCycle,
  kDepth,
  kDecisionInDistQuery,
  kUnorderedDecisions,
};

// "exhausted", "cycle", "depth", "decision-in-dist-query",
// "unordered-decisions".
const char* to_string(FailureKind kind);

struct ConstructionFailure {
  FailureKind kind = FailureKind::kExhausted;
  std::string detail;
};

using ConstructionOutcome = std::variant<ConstructionResult, ConstructionFailure>;

// Precondition violations of the building blocks below.
class ConstructionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Observations made while expanding a state; they pick the failure kind
// reported when the whole search comes up empty.
struct StepNotes {
  bool cycle = false;
  bool depth = false;
  bool decision_in_dist_query = false;
  bool unordered_decisions = false;

  void merge(const StepNotes& other);
};

GoalState initial_state(const Query& query);

// All successor states of `state` for its selected subgoal, in rule order.
// Empty when the subgoal cannot be discharged.
std::vector<GoalState> step(const GoalState& state, const KnowledgeBase& kb,
                            const ProofConfig& cfg, StepNotes* notes = nullptr);

// Node for an influence's subject under `theta`. Throws ConstructionError
// when a non-restricted position of the subject is still a variable.
Node instantiate_influence(const Influence& inf, const Substitution& theta, NodeId id);

// Adds the decision node for `inf` under `theta`, wires it to the consumer
// of `subgoal` and pushes the observed propositions. `theta` extends
// `state.theta`. Throws ConstructionError outside decision queries.
GoalState attach_decision(const InfoInfluence& inf, const Substitution& theta, GoalState state,
                          const Subgoal& subgoal);

// Completed state (nothing pending) to result; failure if the assembled
// diagram is not well formed.
ConstructionOutcome finalize(const GoalState& state, const Query& query);

ConstructionOutcome construct(const Query& query, const KnowledgeBase& kb,
                              const ProofConfig& cfg = {});

// Distinct results (different diagram structure or answer) in backtracking
// order, at most `limit`. Empty vector plus `failure` when none exist.
std::vector<ConstructionResult> enumerate_models(const Query& query, const KnowledgeBase& kb,
                                                 std::size_t limit, const ProofConfig& cfg = {},
                                                 ConstructionFailure* failure = nullptr);

// Re-runs the recorded choices of `trace` from the initial state.
ConstructionOutcome replay(const Query& query, const KnowledgeBase& kb, const Trace& trace,
                           const ProofConfig& cfg = {});

}  // namespace kbmc

#endif  // KBMC_CONSTRUCTOR_HPP_
