// Knowledge base: domain declarations, facts and influences.

#ifndef KBMC_KNOWLEDGE_BASE_HPP_
#define KBMC_KNOWLEDGE_BASE_HPP_

#include <cstddef>
#include <string>
#include <variant>
#include <vector>

#include "kbmc/term.hpp"

namespace kbmc {

struct SourceSpan {
  std::string file;
  int line = 0;
  int column = 0;

  friend bool operator==(const SourceSpan&, const SourceSpan&) = default;
};

std::string to_string(const SourceSpan& span);

// Declares which argument positions of a relation are restricted, and to
// which alternative set.
struct DomainDecl {
  struct Position {
    std::size_t index = 0;  // 0-based argument position
    std::vector<Symbol> members;

    friend bool operator==(const Position&, const Position&) = default;
  };

  Symbol relation;
  std::size_t arity = 0;
  std::vector<Position> restricted;

  const Position* find(std::size_t index) const;
  friend bool operator==(const DomainDecl&, const DomainDecl&) = default;
};

// head <- body
struct LogicClause {
  Proposition head;
  std::vector<Proposition> body;

  friend bool operator==(const LogicClause&, const LogicClause&) = default;
};

struct Prior {
  Distribution dist;

  const Proposition& subject() const { return dist.subject; }
  friend bool operator==(const Prior&, const Prior&) = default;
};

// subject |p conditions. The restricted conditions are the table axes (in
// declaration order); the unrestricted ones are deterministic guards.
struct ProbInfluence {
  Proposition subject;
  std::vector<Proposition> conditions;
  ConditionalTable cpt;

  std::vector<Proposition> guards() const;
  friend bool operator==(const ProbInfluence&, const ProbInfluence&) = default;
};

// decision |i observed
struct InfoInfluence {
  Proposition decision;
  std::vector<Proposition> observed;

  friend bool operator==(const InfoInfluence&, const InfoInfluence&) = default;
};

// subject |v conditions, where subject carries exactly one value variable.
struct ValueInfluence {
  Proposition subject;
  std::vector<Proposition> conditions;
  ValueTable vtable;

  std::vector<Proposition> guards() const;
  friend bool operator==(const ValueInfluence&, const ValueInfluence&) = default;
};

using Influence =
    std::variant<LogicClause, Prior, ProbInfluence, InfoInfluence, ValueInfluence>;

const char* influence_keyword(const Influence& inf);

class KnowledgeBase {
 public:
  enum class DeclKind { kDomain, kFact, kInfluence };
  struct DeclRef {
    DeclKind kind;
    std::size_t index;

    friend bool operator==(const DeclRef&, const DeclRef&) = default;
  };

  void add_domain(DomainDecl decl, SourceSpan span = {});
  void add_fact(Proposition fact, SourceSpan span = {});
  void add_influence(Influence inf, SourceSpan span = {});

  const std::vector<DomainDecl>& domains() const { return domains_; }
  const std::vector<Proposition>& facts() const { return facts_; }
  const std::vector<Influence>& influences() const { return influences_; }
  // Every declaration, in the order it was added.
  const std::vector<DeclRef>& declaration_order() const { return order_; }
  const SourceSpan& span_of(std::size_t declaration) const { return spans_.at(declaration); }
  std::size_t declaration_count() const { return order_.size(); }

  const DomainDecl* find_domain(const Symbol& relation) const;

  // Source spans are diagnostics only and do not take part in equality.
  friend bool operator==(const KnowledgeBase& a, const KnowledgeBase& b) {
    return a.domains_ == b.domains_ && a.facts_ == b.facts_ &&
           a.influences_ == b.influences_ && a.order_ == b.order_;
  }

 private:
  std::vector<DomainDecl> domains_;
  std::vector<Proposition> facts_;
  std::vector<Influence> influences_;
  std::vector<DeclRef> order_;
  std::vector<SourceSpan> spans_;
};

// Replaces every variable standing in a restricted position (per `kb`'s
// domain declarations) with the declared AltSet.
Proposition expand_restricted(const Proposition& prop, const KnowledgeBase& kb);

// Violations of the structural invariants (facts ground, restricted positions
// matching their domain declaration, tables well formed). Empty when valid.
std::vector<std::string> check_invariants(const KnowledgeBase& kb);

}  // namespace kbmc

#endif  // KBMC_KNOWLEDGE_BASE_HPP_
