#include "kbmc/logic_engine.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <string>

namespace kbmc {

namespace {

struct Clause {
  Proposition head;
  std::vector<Proposition> body;
};

// Facts and logic clauses, in declaration order.
std::vector<Clause> horn_clauses(const KnowledgeBase& kb) {
  std::vector<Clause> out;
  for (const KnowledgeBase::DeclRef& ref : kb.declaration_order()) {
    if (ref.kind == KnowledgeBase::DeclKind::kFact) {
      out.push_back({kb.facts()[ref.index], {}});
    } else if (ref.kind == KnowledgeBase::DeclKind::kInfluence) {
      if (const auto* c = std::get_if<LogicClause>(&kb.influences()[ref.index])) {
        out.push_back({c->head, c->body});
      }
    }
  }
  return out;
}

// First suffix that cannot collide with a renamed variable already present
// in the goal.
std::size_t first_free_suffix(const std::vector<Proposition>& goal) {
  std::size_t next = 0;
  for (const Proposition& p : goal) {
    for (const std::string& v : p.variables()) {
      auto hash = v.rfind('#');
      if (hash == std::string::npos) continue;
      try {
        next = std::max<std::size_t>(next, std::stoul(v.substr(hash + 1)) + 1);
      } catch (const std::exception&) {
      }
    }
  }
  return next;
}

struct Goal {
  Proposition prop;
  std::size_t depth = 0;
};

struct Frame {
  // Pending goals; back() is solved next.
  std::vector<Goal> goals;
  Substitution theta;
  std::size_t next_clause = 0;
};

}  // namespace

struct AnswerStream::State {
  std::vector<Clause> clauses;
  std::map<Symbol, std::vector<std::size_t>> by_relation;
  std::vector<std::string> goal_vars;
  ProofConfig cfg;
  std::vector<Frame> stack;
  std::set<std::map<std::string, Term>> seen;
  std::size_t produced = 0;
  std::size_t suffix = 0;
  bool depth_limited = false;
};

AnswerStream::AnswerStream(std::vector<Proposition> goal, const KnowledgeBase& kb,
                           ProofConfig cfg)
    : state_(std::make_unique<State>()) {
  State& s = *state_;
  s.cfg = cfg;
  s.clauses = horn_clauses(kb);
  for (std::size_t i = 0; i < s.clauses.size(); ++i) {
    s.by_relation[s.clauses[i].head.relation].push_back(i);
  }
  for (const Proposition& g : goal) {
    for (const std::string& v : g.variables()) {
      if (std::find(s.goal_vars.begin(), s.goal_vars.end(), v) == s.goal_vars.end()) {
        s.goal_vars.push_back(v);
      }
    }
  }
  s.suffix = first_free_suffix(goal);
  Frame root;
  for (auto it = goal.rbegin(); it != goal.rend(); ++it) root.goals.push_back({*it, 0});
  s.stack.push_back(std::move(root));
}

AnswerStream::~AnswerStream() = default;
AnswerStream::AnswerStream(AnswerStream&&) noexcept = default;
AnswerStream& AnswerStream::operator=(AnswerStream&&) noexcept = default;

bool AnswerStream::depth_limited() const { return state_->depth_limited; }

std::optional<Substitution> AnswerStream::next() {
  State& s = *state_;
  if (s.cfg.solution_limit && s.produced >= *s.cfg.solution_limit) return std::nullopt;
  static const std::vector<std::size_t> kNoClauses;

  while (!s.stack.empty()) {
    Frame& top = s.stack.back();
    if (top.goals.empty()) {
      Substitution answer = top.theta.restricted_to(s.goal_vars);
      s.stack.pop_back();
      if (s.seen.insert(answer.bindings()).second) {
        ++s.produced;
        return answer;
      }
      continue;
    }
    const Goal& goal = top.goals.back();
    if (goal.depth >= s.cfg.depth_limit) {
      s.depth_limited = true;
      s.stack.pop_back();
      continue;
    }
    auto it = s.by_relation.find(goal.prop.relation);
    const std::vector<std::size_t>& candidates =
        it == s.by_relation.end() ? kNoClauses : it->second;

    bool expanded = false;
    while (top.next_clause < candidates.size()) {
      const Clause& clause = s.clauses[candidates[top.next_clause++]];
      std::size_t suffix = s.suffix++;
      Proposition head = rename_apart(clause.head, suffix);
      auto theta = unify(goal.prop, head, top.theta);
      if (!theta) continue;
      Frame child;
      child.goals.assign(top.goals.begin(), top.goals.end() - 1);
      std::vector<Proposition> body = rename_apart(clause.body, suffix);
      for (auto b = body.rbegin(); b != body.rend(); ++b) {
        child.goals.push_back({std::move(*b), goal.depth + 1});
      }
      child.theta = std::move(*theta);
      s.stack.push_back(std::move(child));
      expanded = true;
      break;
    }
    if (!expanded) s.stack.pop_back();
  }
  return std::nullopt;
}

std::vector<Substitution> AnswerStream::all() {
  std::vector<Substitution> out;
  while (auto a = next()) out.push_back(std::move(*a));
  return out;
}

AnswerStream prove(std::vector<Proposition> goal, const KnowledgeBase& kb, ProofConfig cfg) {
  return AnswerStream(std::move(goal), kb, cfg);
}

namespace {

void join(const std::vector<Proposition>& body, std::size_t i, const Substitution& theta,
          const std::map<Symbol, std::vector<Proposition>>& known,
          const std::function<void(const Substitution&)>& emit) {
  if (i == body.size()) {
    emit(theta);
    return;
  }
  auto it = known.find(body[i].relation);
  if (it == known.end()) return;
  for (const Proposition& fact : it->second) {
    if (auto next = unify(body[i], fact, theta)) join(body, i + 1, *next, known, emit);
  }
}

}  // namespace

std::set<Proposition> derivable_facts(const KnowledgeBase& kb, std::size_t bound) {
  std::set<Proposition> known;
  std::vector<Clause> rules;
  for (const Clause& c : horn_clauses(kb)) {
    if (c.body.empty() && c.head.is_ground()) {
      known.insert(c.head);
    } else if (!c.body.empty()) {
      rules.push_back(c);
    }
  }
  for (std::size_t round = 0; round < bound; ++round) {
    std::map<Symbol, std::vector<Proposition>> by_relation;
    for (const Proposition& p : known) by_relation[p.relation].push_back(p);
    std::set<Proposition> fresh;
    for (const Clause& rule : rules) {
      join(rule.body, 0, Substitution{}, by_relation, [&](const Substitution& theta) {
        Proposition head = apply(theta, rule.head);
        if (head.is_ground() && !known.count(head)) fresh.insert(std::move(head));
      });
    }
    if (fresh.empty()) break;
    known.insert(fresh.begin(), fresh.end());
  }
  return known;
}

}  // namespace kbmc
