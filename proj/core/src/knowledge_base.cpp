#include "kbmc/knowledge_base.hpp"

#include <algorithm>

namespace kbmc {

std::string to_string(const SourceSpan& span) {
  return (span.file.empty() ? std::string("<input>") : span.file) + ":" +
         std::to_string(span.line) + ":" + std::to_string(span.column);
}

const DomainDecl::Position* DomainDecl::find(std::size_t index) const {
  for (const Position& p : restricted) {
    if (p.index == index) return &p;
  }
  return nullptr;
}

namespace {

std::vector<Proposition> unrestricted_of(const std::vector<Proposition>& props) {
  std::vector<Proposition> out;
  for (const Proposition& p : props) {
    if (!p.is_restricted()) out.push_back(p);
  }
  return out;
}

}  // namespace

std::vector<Proposition> ProbInfluence::guards() const {
  return unrestricted_of(conditions);
}

std::vector<Proposition> ValueInfluence::guards() const {
  return unrestricted_of(conditions);
}

const char* influence_keyword(const Influence& inf) {
  struct Visitor {
    const char* operator()(const LogicClause&) const { return "logic"; }
    const char* operator()(const Prior&) const { return "prior"; }
    const char* operator()(const ProbInfluence&) const { return "prob"; }
    const char* operator()(const InfoInfluence&) const { return "info"; }
    const char* operator()(const ValueInfluence&) const { return "value"; }
  };
  return std::visit(Visitor{}, inf);
}

void KnowledgeBase::add_domain(DomainDecl decl, SourceSpan span) {
  order_.push_back({DeclKind::kDomain, domains_.size()});
  spans_.push_back(std::move(span));
  domains_.push_back(std::move(decl));
}

void KnowledgeBase::add_fact(Proposition fact, SourceSpan span) {
  order_.push_back({DeclKind::kFact, facts_.size()});
  spans_.push_back(std::move(span));
  facts_.push_back(std::move(fact));
}

void KnowledgeBase::add_influence(Influence inf, SourceSpan span) {
  order_.push_back({DeclKind::kInfluence, influences_.size()});
  spans_.push_back(std::move(span));
  influences_.push_back(std::move(inf));
}

const DomainDecl* KnowledgeBase::find_domain(const Symbol& relation) const {
  for (const DomainDecl& d : domains_) {
    if (d.relation == relation) return &d;
  }
  return nullptr;
}

Proposition expand_restricted(const Proposition& prop, const KnowledgeBase& kb) {
  const DomainDecl* domain = kb.find_domain(prop.relation);
  if (!domain || domain->arity != prop.arity()) return prop;
  Proposition out = prop;
  for (const DomainDecl::Position& pos : domain->restricted) {
    if (out.args[pos.index].is_variable()) {
      out.args[pos.index] = Term::alt_set(pos.members);
    }
  }
  return out;
}

namespace {

// Restricted positions must carry exactly the declared AltSet; AltSets may
// not appear anywhere else.
std::string check_restriction(const Proposition& prop, const KnowledgeBase& kb) {
  const DomainDecl* domain = kb.find_domain(prop.relation);
  for (std::size_t i = 0; i < prop.args.size(); ++i) {
    const Term& t = prop.args[i];
    const DomainDecl::Position* pos =
        domain && domain->arity == prop.arity() ? domain->find(i) : nullptr;
    if (t.is_alt_set()) {
      if (!pos) return to_string(prop) + ": position " + std::to_string(i + 1) + " is not restricted";
      if (pos->members != t.members()) {
        return to_string(prop) + ": alternative set differs from the domain declaration";
      }
    } else if (t.is_constant() && pos) {
      if (std::find(pos->members.begin(), pos->members.end(), t.name()) ==
          pos->members.end()) {
        return to_string(prop) + ": '" + t.name() + "' is not an alternative of position " +
               std::to_string(i + 1);
      }
    }
  }
  if (domain && domain->arity != prop.arity()) {
    return to_string(prop) + ": arity " + std::to_string(prop.arity()) +
           " does not match declared arity " + std::to_string(domain->arity);
  }
  return {};
}

void note(std::vector<std::string>& out, std::string msg) {
  if (!msg.empty()) out.push_back(std::move(msg));
}

}  // namespace

std::vector<std::string> check_invariants(const KnowledgeBase& kb) {
  std::vector<std::string> out;
  for (const Proposition& f : kb.facts()) {
    if (!f.is_ground()) out.push_back("fact " + to_string(f) + " is not ground");
    note(out, check_restriction(f, kb));
  }
  for (const Influence& inf : kb.influences()) {
    if (const auto* c = std::get_if<LogicClause>(&inf)) {
      note(out, check_restriction(c->head, kb));
      for (const Proposition& b : c->body) note(out, check_restriction(b, kb));
    } else if (const auto* p = std::get_if<Prior>(&inf)) {
      note(out, check_restriction(p->subject(), kb));
      if (!p->subject().is_restricted()) {
        out.push_back("prior subject " + to_string(p->subject()) + " is not restricted");
      } else {
        ConditionalTable t{p->subject(), {}, {p->dist.probs}};
        note(out, t.check());
      }
    } else if (const auto* pi = std::get_if<ProbInfluence>(&inf)) {
      note(out, check_restriction(pi->subject, kb));
      for (const Proposition& c : pi->conditions) note(out, check_restriction(c, kb));
      note(out, pi->cpt.check());
    } else if (const auto* ii = std::get_if<InfoInfluence>(&inf)) {
      note(out, check_restriction(ii->decision, kb));
      if (!ii->decision.is_restricted()) {
        out.push_back("decision " + to_string(ii->decision) + " is not restricted");
      }
      for (const Proposition& o : ii->observed) note(out, check_restriction(o, kb));
    } else if (const auto* vi = std::get_if<ValueInfluence>(&inf)) {
      for (const Proposition& c : vi->conditions) note(out, check_restriction(c, kb));
      if (vi->subject.variables().size() != 1) {
        out.push_back("value subject " + to_string(vi->subject) +
                      " must carry exactly one variable");
      }
      note(out, vi->vtable.check());
    }
  }
  return out;
}

}  // namespace kbmc
