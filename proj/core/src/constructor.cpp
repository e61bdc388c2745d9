#include "kbmc/constructor.hpp"

#include <algorithm>

namespace kbmc {

const char* to_string(Rule rule) {
  switch (rule) {
    case Rule::kLogic:
      return "i";
    case Rule::kReuse:
      return "ii";
    case Rule::kPrior:
      return "iii";
    case Rule::kChain:
      return "iv";
    case Rule::kInfo:
      return "info";
    case Rule::kValue:
      return "value";
  }
  return "?";
}

const char* to_string(ResultKind kind) {
  switch (kind) {
    case ResultKind::kLogical:
      return "logical";
    case ResultKind::kProbabilistic:
      return "probabilistic";
    case ResultKind::kDecision:
      return "decision";
  }
  return "?";
}

const char* to_string(FailureKind kind) {
  switch (kind) {
    case FailureKind::kExhausted:
      return "exhausted";
    case FailureKind::kCycle:
      return "cycle";
    case FailureKind::kDepth:
      return "depth";
    case FailureKind::kDecisionInDistQuery:
      return "decision-in-dist-query";
    case FailureKind::kUnorderedDecisions:
      return "unordered-decisions";
  }
  return "?";
}

std::string to_string(const TraceStep& step) {
  std::string out(2 * step.depth, ' ');
  out += to_string(step.rule);
  out += ' ';
  out += to_string(step.subgoal);
  if (step.guard) out += " guard";
  out += " =>";
  if (step.rule == Rule::kLogic) out += " proved";
  if (step.rule == Rule::kReuse && step.node) out += " reuse " + to_string(*step.node);
  if (step.declaration) out += " decl " + std::to_string(*step.declaration);
  if (step.rule != Rule::kReuse && step.node) out += " -> " + to_string(*step.node);
  if (step.consumer) out += " for " + to_string(*step.consumer);
  out += ' ';
  out += to_string(step.theta);
  return out;
}

std::string to_string(const Trace& trace) {
  std::string out;
  for (const TraceStep& s : trace.steps) out += to_string(s) + "\n";
  return out;
}

void StepNotes::merge(const StepNotes& other) {
  cycle |= other.cycle;
  depth |= other.depth;
  decision_in_dist_query |= other.decision_in_dist_query;
  unordered_decisions |= other.unordered_decisions;
}

GoalState initial_state(const Query& query) {
  GoalState s;
  s.mode = query.kind;
  if (query.kind == Query::Kind::kLogic) {
    for (auto it = query.goals.rbegin(); it != query.goals.rend(); ++it) {
      Subgoal sg;
      sg.prop = *it;
      sg.guard = true;
      s.pending.push_back(std::move(sg));
    }
  } else if (!query.goals.empty()) {
    Subgoal sg;
    sg.prop = query.goals.front();
    s.pending.push_back(std::move(sg));
  }
  for (const Proposition& g : query.goals) {
    for (const std::string& v : g.variables()) {
      auto hash = v.rfind('#');
      if (hash == std::string::npos) continue;
      try {
        s.fresh = std::max<std::size_t>(s.fresh, std::stoul(v.substr(hash + 1)) + 1);
      } catch (const std::exception&) {
      }
    }
  }
  return s;
}

namespace {

// Keeps renamed variables introduced by the logic engine from colliding with
// later renamings.
void bump_fresh(GoalState& s, const Substitution& theta) {
  auto scan = [&](const std::string& v) {
    auto hash = v.rfind('#');
    if (hash == std::string::npos) return;
    try {
      s.fresh = std::max<std::size_t>(s.fresh, std::stoul(v.substr(hash + 1)) + 1);
    } catch (const std::exception&) {
    }
  };
  for (const auto& [var, term] : theta.bindings()) {
    scan(var);
    if (term.is_variable()) scan(term.name());
  }
}

Influence rename_influence(const Influence& inf, std::size_t suffix) {
  return std::visit(
      [&](const auto& x) -> Influence {
        using T = std::decay_t<decltype(x)>;
        T r = x;
        if constexpr (std::is_same_v<T, LogicClause>) {
          r.head = rename_apart(x.head, suffix);
          r.body = rename_apart(x.body, suffix);
        } else if constexpr (std::is_same_v<T, Prior>) {
          r.dist.subject = rename_apart(x.dist.subject, suffix);
        } else if constexpr (std::is_same_v<T, ProbInfluence>) {
          r.subject = rename_apart(x.subject, suffix);
          r.conditions = rename_apart(x.conditions, suffix);
          r.cpt.subject = r.subject;
          r.cpt.row_axes = rename_apart(x.cpt.row_axes, suffix);
        } else if constexpr (std::is_same_v<T, InfoInfluence>) {
          r.decision = rename_apart(x.decision, suffix);
          r.observed = rename_apart(x.observed, suffix);
        } else {
          r.subject = rename_apart(x.subject, suffix);
          r.conditions = rename_apart(x.conditions, suffix);
          r.vtable.row_axes = rename_apart(x.vtable.row_axes, suffix);
        }
        return r;
      },
      inf);
}

const Proposition& subject_of(const Influence& inf) {
  return std::visit(
      [](const auto& x) -> const Proposition& {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, LogicClause>) {
          return x.head;
        } else if constexpr (std::is_same_v<T, Prior>) {
          return x.dist.subject;
        } else if constexpr (std::is_same_v<T, InfoInfluence>) {
          return x.decision;
        } else {
          return x.subject;
        }
      },
      inf);
}

// Unifier that instantiates `subgoal` to exactly the influence subject:
// narrowing an AltSet of the subgoal to a single member is not a match.
std::optional<Substitution> match_subject(const Proposition& subgoal, const Proposition& subject) {
  auto theta = unify(subgoal, subject);
  if (!theta) return std::nullopt;
  if (apply(*theta, subgoal) != apply(*theta, subject)) return std::nullopt;
  return theta;
}

// Pushes an influence body, first condition on top. Restricted conditions
// feed axes of `consumer` in order; the others become guards.
void push_conditions(GoalState& s, const std::vector<Proposition>& conditions, NodeId consumer,
                     const std::vector<Proposition>& ancestry) {
  std::vector<Subgoal> body;
  std::size_t axis = 0;
  for (const Proposition& c : conditions) {
    Subgoal sg;
    sg.prop = c;
    sg.ancestry = ancestry;
    if (c.is_restricted()) {
      sg.consumer = consumer;
      sg.axis = axis++;
    } else {
      sg.guard = true;
    }
    body.push_back(std::move(sg));
  }
  s.axes[consumer].assign(axis, AxisSlot{});
  for (auto it = body.rbegin(); it != body.rend(); ++it) s.pending.push_back(std::move(*it));
}

void resolve_axis(GoalState& s, const Subgoal& sg, AxisSlot slot) {
  if (sg.consumer) s.axes.at(*sg.consumer).at(sg.axis) = slot;
}

TraceStep trace_step(Rule rule, const Subgoal& sg, const Proposition& p, const GoalState& s,
                     Substitution theta) {
  TraceStep t;
  t.rule = rule;
  t.subgoal = p;
  t.consumer = sg.consumer;
  t.guard = sg.guard && s.mode != Query::Kind::kLogic;
  t.depth = sg.ancestry.size();
  t.theta = std::move(theta);
  return t;
}

std::vector<Proposition> extend(std::vector<Proposition> ancestry, const Proposition& p) {
  ancestry.push_back(p);
  return ancestry;
}

// Rule i. Restricted positions are proved with fresh variables; a proof that
// settles them on one member fixes the consumer's axis to that outcome.
void logic_candidates(const GoalState& base, const Subgoal& sg, const Proposition& p,
                      const KnowledgeBase& kb, const ProofConfig& cfg, StepNotes& notes,
                      std::vector<GoalState>& out) {
  const Proposition expanded = sg.guard ? p : expand_restricted(p, kb);
  std::size_t fresh = base.fresh;
  Proposition q = p;
  std::vector<std::size_t> positions = expanded.restricted_positions();
  for (std::size_t i : positions) {
    if (q.args[i].is_alt_set()) q.args[i] = Term::variable("alt#" + std::to_string(fresh++));
  }
  AnswerStream stream = prove({q}, kb, ProofConfig{cfg.depth_limit, std::nullopt});
  std::vector<Substitution> answers = stream.all();
  if (stream.depth_limited()) notes.depth = true;

  const std::vector<std::string> own = p.variables();
  for (const Substitution& sigma : answers) {
    std::vector<std::size_t> digits;
    std::vector<std::size_t> sizes;
    bool settled = true;
    for (std::size_t i : positions) {
      const Term& alt = expanded.args[i];
      Term t = apply(sigma, q.args[i]);
      auto idx = t.is_constant() ? alt.index_of(t.name()) : std::nullopt;
      if (!idx) {
        settled = false;
        break;
      }
      digits.push_back(*idx);
      sizes.push_back(alt.members().size());
    }
    if (!settled) continue;
    Substitution step_theta = sigma.restricted_to(own);
    GoalState next = base;
    next.fresh = fresh;
    bump_fresh(next, sigma);
    next.theta = compose(base.theta, step_theta);
    if (!positions.empty()) {
      AxisSlot slot;
      slot.state = AxisSlot::State::kFixed;
      slot.outcome = joint_index(digits, sizes);
      resolve_axis(next, sg, slot);
    }
    next.trace.steps.push_back(trace_step(Rule::kLogic, sg, p, base, step_theta));
    out.push_back(std::move(next));
  }
}

std::size_t declaration_number(const KnowledgeBase& kb, std::size_t influence_index) {
  const auto& order = kb.declaration_order();
  for (std::size_t k = 0; k < order.size(); ++k) {
    if (order[k].kind == KnowledgeBase::DeclKind::kInfluence && order[k].index == influence_index) {
      return k + 1;
    }
  }
  return 0;
}

// Places a freshly instantiated node: wires it to the subgoal's consumer, or
// makes it the query node at the root.
void place_node(GoalState& s, const Subgoal& sg, Node node) {
  NodeId id = node.id;
  s.diagram.insert(std::move(node));
  if (sg.consumer) {
    s.diagram.connect(id, *sg.consumer);
    AxisSlot slot;
    slot.state = AxisSlot::State::kParent;
    slot.parent = id;
    resolve_axis(s, sg, slot);
  } else if (!s.query_node) {
    s.query_node = id;
  }
}

std::vector<GoalState> expand(const GoalState& state, const KnowledgeBase& kb,
                              const ProofConfig& cfg, StepNotes& notes) {
  std::vector<GoalState> out;
  if (state.pending.empty()) return out;
  GoalState base = state;
  Subgoal sg = base.pending.back();
  base.pending.pop_back();
  const Proposition p = apply(base.theta, sg.prop);

  for (const Proposition& a : sg.ancestry) {
    if (apply(base.theta, a) == p) return out;
  }
  if (sg.ancestry.size() >= cfg.depth_limit) {
    notes.depth = true;
    return out;
  }

  if (sg.guard) {
    logic_candidates(base, sg, p, kb, cfg, notes, out);
    return out;
  }

  const bool decide_root =
      base.mode == Query::Kind::kDecide && !sg.consumer && sg.ancestry.empty();
  const Proposition expanded = expand_restricted(p, kb);
  if (!decide_root && expanded.is_restricted() && expanded.has_variables()) {
    if (sg.delayed) return out;
    sg.delayed = true;
    base.pending.insert(base.pending.begin(), std::move(sg));
    return expand(base, kb, cfg, notes);
  }

  const std::vector<std::string> own = p.variables();
  const std::vector<Proposition> ancestry = extend(sg.ancestry, p);

  if (decide_root) {
    if (base.diagram.value_node()) return out;
    for (std::size_t k = 0; k < kb.influences().size(); ++k) {
      if (!std::holds_alternative<ValueInfluence>(kb.influences()[k])) continue;
      GoalState next = base;
      Influence renamed = rename_influence(kb.influences()[k], next.fresh++);
      const auto& v = std::get<ValueInfluence>(renamed);
      auto theta = match_subject(p, v.subject);
      if (!theta) continue;
      Node node = instantiate_influence(renamed, *theta, next.diagram.next_id());
      NodeId id = node.id;
      next.diagram.insert(std::move(node));
      next.query_node = id;
      next.theta = compose(base.theta, *theta);
      push_conditions(next, apply_all(*theta, v.conditions), id, ancestry);
      TraceStep t = trace_step(Rule::kValue, sg, p, base, theta->restricted_to(own));
      t.declaration = declaration_number(kb, k);
      t.node = id;
      next.trace.steps.push_back(std::move(t));
      out.push_back(std::move(next));
    }
    return out;
  }

  // A logical proof settles the subgoal; no model is built for it.
  logic_candidates(base, sg, p, kb, cfg, notes, out);
  if (!out.empty()) return out;

  if (sg.consumer) {
    if (auto match = find_unifying_node(base.diagram, p)) {
      GoalState next = base;
      try {
        next.diagram.connect(match->first, *sg.consumer);
      } catch (const CycleError&) {
        notes.cycle = true;
        return out;
      } catch (const DiagramError&) {
        return out;
      }
      AxisSlot slot;
      slot.state = AxisSlot::State::kParent;
      slot.parent = match->first;
      resolve_axis(next, sg, slot);
      Substitution step_theta = match->second.restricted_to(own);
      next.theta = compose(base.theta, step_theta);
      TraceStep t = trace_step(Rule::kReuse, sg, p, base, step_theta);
      t.node = match->first;
      next.trace.steps.push_back(std::move(t));
      out.push_back(std::move(next));
      return out;
    }
  }

  auto try_influences = [&](auto tag, Rule rule) {
    using T = decltype(tag);
    for (std::size_t k = 0; k < kb.influences().size(); ++k) {
      if (!std::holds_alternative<T>(kb.influences()[k])) continue;
      GoalState next = base;
      Influence renamed = rename_influence(kb.influences()[k], next.fresh++);
      auto theta = match_subject(p, subject_of(renamed));
      if (!theta) continue;
      if constexpr (std::is_same_v<T, InfoInfluence>) {
        if (base.mode != Query::Kind::kDecide) {
          notes.decision_in_dist_query = true;
          continue;
        }
        if (apply(*theta, subject_of(renamed)).has_variables()) continue;
        next = attach_decision(std::get<InfoInfluence>(renamed), *theta, std::move(next), sg);
      } else {
        Node node;
        try {
          node = instantiate_influence(renamed, *theta, next.diagram.next_id());
        } catch (const ConstructionError&) {
          continue;
        }
        NodeId id = node.id;
        place_node(next, sg, std::move(node));
        next.theta = compose(base.theta, *theta);
        if constexpr (std::is_same_v<T, ProbInfluence>) {
          push_conditions(next, apply_all(*theta, std::get<ProbInfluence>(renamed).conditions), id,
                          ancestry);
        } else {
          next.axes[id];
        }
      }
      TraceStep t = trace_step(rule, sg, p, base, theta->restricted_to(own));
      t.declaration = declaration_number(kb, k);
      t.node = NodeId{next.diagram.next_id().value - 1};
      next.trace.steps.push_back(std::move(t));
      out.push_back(std::move(next));
    }
  };
  try_influences(Prior{}, Rule::kPrior);
  try_influences(ProbInfluence{}, Rule::kChain);
  try_influences(InfoInfluence{}, Rule::kInfo);
  return out;
}

std::vector<std::size_t> kept_rows(const std::vector<Proposition>& axes,
                                   const std::vector<AxisSlot>& slots) {
  std::vector<std::size_t> sizes;
  std::vector<std::size_t> open_sizes;
  for (std::size_t k = 0; k < axes.size(); ++k) {
    sizes.push_back(axes[k].outcome_count());
    if (slots[k].state != AxisSlot::State::kFixed) open_sizes.push_back(sizes.back());
  }
  std::size_t count = 1;
  for (std::size_t s : open_sizes) count *= s;
  std::vector<std::size_t> rows;
  for (std::size_t r = 0; r < count; ++r) {
    std::vector<std::size_t> open = joint_digits(r, open_sizes);
    std::vector<std::size_t> full;
    std::size_t o = 0;
    for (std::size_t k = 0; k < axes.size(); ++k) {
      full.push_back(slots[k].state == AxisSlot::State::kFixed ? slots[k].outcome : open[o++]);
    }
    rows.push_back(joint_index(full, sizes));
  }
  return rows;
}

ConstructionFailure fail(FailureKind kind, std::string detail) {
  return ConstructionFailure{kind, std::move(detail)};
}

}  // namespace

std::vector<GoalState> step(const GoalState& state, const KnowledgeBase& kb,
                            const ProofConfig& cfg, StepNotes* notes) {
  StepNotes local;
  std::vector<GoalState> out = expand(state, kb, cfg, local);
  for (std::size_t k = 0; k < out.size(); ++k) out[k].trace.steps.back().candidate = k;
  if (notes) notes->merge(local);
  return out;
}

Node instantiate_influence(const Influence& inf, const Substitution& theta, NodeId id) {
  return std::visit(
      [&](const auto& x) -> Node {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, Prior>) {
          Proposition label = apply(theta, x.dist.subject);
          if (label.has_variables()) {
            throw ConstructionError("floundering: " + to_string(label) + " is not ground");
          }
          return make_chance_node(id, ConditionalTable{label, {}, {x.dist.probs}});
        } else if constexpr (std::is_same_v<T, ProbInfluence>) {
          Proposition label = apply(theta, x.subject);
          if (label.has_variables()) {
            throw ConstructionError("floundering: " + to_string(label) + " is not ground");
          }
          return make_chance_node(id, ConditionalTable{label, apply_all(theta, x.cpt.row_axes), x.cpt.rows});
        } else if constexpr (std::is_same_v<T, ValueInfluence>) {
          return make_value_node(id, apply(theta, x.subject),
                                 ValueTable{apply_all(theta, x.vtable.row_axes), x.vtable.values});
        } else {
          throw ConstructionError(std::string(influence_keyword(inf)) +
                                  " influences do not instantiate to nodes");
        }
      },
      inf);
}

GoalState attach_decision(const InfoInfluence& inf, const Substitution& theta, GoalState state,
                          const Subgoal& subgoal) {
  if (state.mode != Query::Kind::kDecide) {
    throw ConstructionError("informational influence outside a decision query");
  }
  Proposition p = apply(state.theta, subgoal.prop);
  Proposition label = apply(theta, inf.decision);
  if (label.has_variables()) {
    throw ConstructionError("floundering: " + to_string(label) + " is not ground");
  }
  Node node = make_decision_node(state.diagram.next_id(), label);
  NodeId id = node.id;
  place_node(state, subgoal, std::move(node));
  state.theta = compose(state.theta, theta);
  push_conditions(state, apply_all(theta, inf.observed), id, extend(subgoal.ancestry, p));
  return state;
}

ConstructionOutcome finalize(const GoalState& state, const Query& query) {
  if (!state.pending.empty()) throw ConstructionError("finalize with pending subgoals");
  const Substitution& theta = state.theta;
  InfluenceDiagram out;
  try {
    for (NodeId id : topological_order(state.diagram)) {
      const Node& n = state.diagram.node(id);
      const std::vector<AxisSlot>& slots = state.axes.at(id);
      std::vector<NodeId> parents;
      std::vector<Proposition> parent_labels;
      for (const AxisSlot& s : slots) {
        if (s.state == AxisSlot::State::kOpen) return fail(FailureKind::kExhausted, "unresolved axis");
        if (s.state == AxisSlot::State::kParent) {
          parents.push_back(s.parent);
          parent_labels.push_back(out.node(s.parent).label);
        }
      }
      auto check_axes = [&](const std::vector<Proposition>& axes) {
        std::size_t j = 0;
        for (std::size_t k = 0; k < axes.size(); ++k) {
          if (slots[k].state != AxisSlot::State::kParent) continue;
          if (apply(theta, axes[k]) != parent_labels[j++]) return false;
        }
        return true;
      };
      if (n.is_chance()) {
        const ConditionalTable& t = n.table();
        if (t.row_axes.size() != slots.size() || !check_axes(t.row_axes)) {
          return fail(FailureKind::kExhausted, "axis mismatch at " + to_string(id));
        }
        ConditionalTable sliced{n.label, parent_labels, {}};
        for (std::size_t r : kept_rows(t.row_axes, slots)) sliced.rows.push_back(t.rows[r]);
        out.insert(make_chance_node(id, std::move(sliced), parents));
      } else if (n.is_decision()) {
        out.insert(make_decision_node(id, n.label, parents));
      } else {
        const ValueTable& v = n.values();
        if (v.row_axes.size() != slots.size() || !check_axes(v.row_axes)) {
          return fail(FailureKind::kExhausted, "axis mismatch at " + to_string(id));
        }
        ValueTable sliced{parent_labels, {}};
        for (std::size_t r : kept_rows(v.row_axes, slots)) sliced.values.push_back(v.values[r]);
        out.insert(make_value_node(id, apply(theta, n.label), std::move(sliced), parents));
      }
    }
    validate(out);
  } catch (const DiagramError& e) {
    return fail(FailureKind::kExhausted, e.what());
  }

  std::vector<NodeId> decisions;
  for (NodeId id : topological_order(out)) {
    if (out.node(id).is_decision()) decisions.push_back(id);
  }
  for (std::size_t k = 1; k < decisions.size(); ++k) {
    if (!out.reaches(decisions[k - 1], decisions[k])) {
      return fail(FailureKind::kUnorderedDecisions,
                  to_string(decisions[k - 1]) + " and " + to_string(decisions[k]) +
                      " are not ordered by information");
    }
  }

  ConstructionResult r;
  r.query_node = state.query_node;
  r.answer = theta.restricted_to(query.variables());
  r.trace = state.trace;
  r.kind = out.empty()           ? ResultKind::kLogical
           : out.value_node()    ? ResultKind::kDecision
                                 : ResultKind::kProbabilistic;
  r.diagram = std::move(out);
  return r;
}

std::vector<ConstructionResult> enumerate_models(const Query& query, const KnowledgeBase& kb,
                                                 std::size_t limit, const ProofConfig& cfg,
                                                 ConstructionFailure* failure) {
  std::vector<ConstructionResult> results;
  StepNotes notes;
  // Each level holds untried candidates in reverse order.
  std::vector<std::vector<GoalState>> stack;
  stack.push_back({initial_state(query)});
  while (!stack.empty() && results.size() < limit) {
    if (stack.back().empty()) {
      stack.pop_back();
      continue;
    }
    GoalState s = std::move(stack.back().back());
    stack.back().pop_back();
    if (s.pending.empty()) {
      ConstructionOutcome outcome = finalize(s, query);
      if (auto* r = std::get_if<ConstructionResult>(&outcome)) {
        bool seen = std::any_of(results.begin(), results.end(), [&](const ConstructionResult& o) {
          return o.answer == r->answer && structurally_equal(o.diagram, r->diagram);
        });
        if (!seen) results.push_back(std::move(*r));
      } else if (std::get<ConstructionFailure>(outcome).kind == FailureKind::kUnorderedDecisions) {
        notes.unordered_decisions = true;
      }
      continue;
    }
    std::vector<GoalState> next = step(s, kb, cfg, &notes);
    std::reverse(next.begin(), next.end());
    stack.push_back(std::move(next));
  }
  if (results.empty() && failure) {
    if (notes.unordered_decisions) {
      *failure = fail(FailureKind::kUnorderedDecisions, "decisions are not totally ordered");
    } else if (notes.decision_in_dist_query) {
      *failure = fail(FailureKind::kDecisionInDistQuery,
                      "an informational influence was needed to answer a distribution query");
    } else if (notes.cycle) {
      *failure = fail(FailureKind::kCycle, "every completion needs a cycle");
    } else if (notes.depth) {
      *failure = fail(FailureKind::kDepth, "depth limit reached");
    } else {
      *failure = fail(FailureKind::kExhausted, "no model");
    }
  }
  return results;
}

ConstructionOutcome construct(const Query& query, const KnowledgeBase& kb, const ProofConfig& cfg) {
  ConstructionFailure failure;
  std::vector<ConstructionResult> results = enumerate_models(query, kb, 1, cfg, &failure);
  if (results.empty()) return failure;
  return std::move(results.front());
}

ConstructionOutcome replay(const Query& query, const KnowledgeBase& kb, const Trace& trace,
                           const ProofConfig& cfg) {
  GoalState s = initial_state(query);
  for (const TraceStep& t : trace.steps) {
    std::vector<GoalState> next = step(s, kb, cfg);
    if (t.candidate >= next.size()) return fail(FailureKind::kExhausted, "trace does not replay");
    s = std::move(next[t.candidate]);
  }
  if (!s.pending.empty()) return fail(FailureKind::kExhausted, "trace ends with pending subgoals");
  return finalize(s, query);
}

}  // namespace kbmc
