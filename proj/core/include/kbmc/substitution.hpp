// Substitutions and unification over flat propositions.

#ifndef KBMC_SUBSTITUTION_HPP_
#define KBMC_SUBSTITUTION_HPP_

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kbmc/term.hpp"

namespace kbmc {

// Mapping from variable names to terms. Bindings are kept in name order so
// that rendering and iteration are deterministic.
class Substitution {
 public:
  Substitution() = default;
  Substitution(std::initializer_list<std::pair<const std::string, Term>> init)
      : bindings_(init) {}

  bool empty() const { return bindings_.empty(); }
  std::size_t size() const { return bindings_.size(); }
  bool binds(const std::string& var) const { return bindings_.count(var) != 0; }
  const Term* lookup(const std::string& var) const;
  const std::map<std::string, Term>& bindings() const { return bindings_; }

  // Adds or replaces a binding. Binding a variable to itself is a no-op.
  void bind(const std::string& var, Term term);

  // Follows variable-to-variable chains to the final term.
  Term resolve(const Term& term) const;

  // Keeps only bindings for the given variables.
  Substitution restricted_to(std::span<const std::string> vars) const;

  friend bool operator==(const Substitution&, const Substitution&) = default;

 private:
  std::map<std::string, Term> bindings_;
};

// Single-pass replacement of bound variables.
Term apply(const Substitution& theta, const Term& term);
Proposition apply(const Substitution& theta, const Proposition& prop);
// Named apart from apply() so that std::apply is never found by ADL.
std::vector<Proposition> apply_all(const Substitution& theta,
                                   std::span<const Proposition> props);

// apply(compose(a, b), p) == apply(b, apply(a, p)).
Substitution compose(const Substitution& first, const Substitution& second);

// Most general unifier extending `in`, or nullopt. AltSets behave like typed
// wildcards: a variable binds to an AltSet, two AltSets unify only when equal
// as ordered sets, and a constant unifies with an AltSet containing it. When
// that AltSet was reached through a variable binding the variable is narrowed
// to the constant. The result is normalized (idempotent).
std::optional<Substitution> unify(const Proposition& p, const Proposition& q,
                                  const Substitution& in = {});

// True when `a` and `b` agree position by position, allowing an AltSet to
// stand against one of its own members. This is the equality unify()
// guarantees between apply(result, p) and apply(result, q).
bool equal_up_to_narrowing(const Proposition& a, const Proposition& b);

// Renames every variable `v` in `props` to `v#<suffix>`.
std::vector<Proposition> rename_apart(std::span<const Proposition> props,
                                      std::size_t suffix);
Proposition rename_apart(const Proposition& prop, std::size_t suffix);

std::string to_string(const Substitution& theta);

}  // namespace kbmc

#endif  // KBMC_SUBSTITUTION_HPP_
