#include "kbmc/substitution.hpp"

#include <algorithm>

namespace kbmc {

const Term* Substitution::lookup(const std::string& var) const {
  auto it = bindings_.find(var);
  return it == bindings_.end() ? nullptr : &it->second;
}

void Substitution::bind(const std::string& var, Term term) {
  if (term.is_variable() && term.name() == var) return;
  bindings_.insert_or_assign(var, std::move(term));
}

Term Substitution::resolve(const Term& term) const {
  Term t = term;
  while (t.is_variable()) {
    const Term* next = lookup(t.name());
    if (!next) break;
    t = *next;
  }
  return t;
}

Substitution Substitution::restricted_to(std::span<const std::string> vars) const {
  Substitution out;
  for (const std::string& v : vars) {
    if (const Term* t = lookup(v)) out.bindings_.emplace(v, *t);
  }
  return out;
}

Term apply(const Substitution& theta, const Term& term) {
  if (term.is_variable()) {
    if (const Term* t = theta.lookup(term.name())) return *t;
  }
  return term;
}

Proposition apply(const Substitution& theta, const Proposition& prop) {
  Proposition out{prop.relation, {}};
  out.args.reserve(prop.args.size());
  for (const Term& t : prop.args) out.args.push_back(apply(theta, t));
  return out;
}

std::vector<Proposition> apply_all(const Substitution& theta,
                               std::span<const Proposition> props) {
  std::vector<Proposition> out;
  out.reserve(props.size());
  for (const Proposition& p : props) out.push_back(apply(theta, p));
  return out;
}

Substitution compose(const Substitution& first, const Substitution& second) {
  Substitution out;
  for (const auto& [var, term] : first.bindings()) {
    out.bind(var, apply(second, term));
  }
  for (const auto& [var, term] : second.bindings()) {
    if (!first.binds(var)) out.bind(var, term);
  }
  return out;
}

namespace {

struct Resolved {
  Term term;
  // Last variable on the chain, when the chain ended in a binding.
  std::optional<std::string> via;
};

Resolved walk(const Substitution& theta, const Term& term) {
  Resolved r{term, std::nullopt};
  while (r.term.is_variable()) {
    const Term* next = theta.lookup(r.term.name());
    if (!next) break;
    r.via = r.term.name();
    r.term = *next;
  }
  return r;
}

bool unify_terms(const Term& a, const Term& b, Substitution& theta) {
  Resolved ra = walk(theta, a);
  Resolved rb = walk(theta, b);
  const Term& x = ra.term;
  const Term& y = rb.term;

  // Terms are flat, so the occurs check reduces to never binding a variable
  // to itself, which bind() already refuses.
  if (x.is_variable() && y.is_variable()) {
    if (x.name() != y.name()) theta.bind(y.name(), x);
    return true;
  }
  if (x.is_variable()) {
    theta.bind(x.name(), y);
    return true;
  }
  if (y.is_variable()) {
    theta.bind(y.name(), x);
    return true;
  }
  if (x.is_constant() && y.is_constant()) return x.name() == y.name();
  if (x.is_alt_set() && y.is_alt_set()) return x.members() == y.members();

  // Constant against AltSet: membership, narrowing a bound variable if any.
  const Resolved& set_side = x.is_alt_set() ? ra : rb;
  const Term& constant = x.is_constant() ? x : y;
  if (!set_side.term.contains(constant.name())) return false;
  if (set_side.via) theta.bind(*set_side.via, constant);
  return true;
}

Substitution normalize(const Substitution& theta) {
  Substitution out;
  for (const auto& [var, term] : theta.bindings()) {
    out.bind(var, theta.resolve(term));
  }
  return out;
}

}  // namespace

std::optional<Substitution> unify(const Proposition& p, const Proposition& q,
                                  const Substitution& in) {
  if (p.relation != q.relation || p.args.size() != q.args.size()) {
    return std::nullopt;
  }
  Substitution theta = in;
  for (std::size_t i = 0; i < p.args.size(); ++i) {
    if (!unify_terms(p.args[i], q.args[i], theta)) return std::nullopt;
  }
  return normalize(theta);
}

bool equal_up_to_narrowing(const Proposition& a, const Proposition& b) {
  if (a.relation != b.relation || a.args.size() != b.args.size()) return false;
  for (std::size_t i = 0; i < a.args.size(); ++i) {
    const Term& x = a.args[i];
    const Term& y = b.args[i];
    if (x == y) continue;
    if (x.is_alt_set() && y.is_constant() && x.contains(y.name())) continue;
    if (y.is_alt_set() && x.is_constant() && y.contains(x.name())) continue;
    return false;
  }
  return true;
}

Proposition rename_apart(const Proposition& prop, std::size_t suffix) {
  Proposition out = prop;
  const std::string tag = "#" + std::to_string(suffix);
  for (Term& t : out.args) {
    if (t.is_variable()) {
      t = Term::variable(t.name() + tag);
    }
  }
  return out;
}

std::vector<Proposition> rename_apart(std::span<const Proposition> props,
                                      std::size_t suffix) {
  std::vector<Proposition> out;
  out.reserve(props.size());
  for (const Proposition& p : props) out.push_back(rename_apart(p, suffix));
  return out;
}

std::string to_string(const Substitution& theta) {
  std::string out = "{";
  bool first = true;
  for (const auto& [var, term] : theta.bindings()) {
    if (!first) out += ", ";
    first = false;
    out += "?" + var + "/" + to_string(term);
  }
  return out + "}";
}

}  // namespace kbmc
