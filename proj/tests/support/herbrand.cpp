#include "herbrand.hpp"

#include <functional>
#include <variant>

namespace kbmc::testing {

namespace {

struct Pattern {
  std::string relation;
  // Either "?name" for a variable or a constant symbol.
  std::vector<std::string> args;
};

Pattern pattern_of(const Proposition& p) {
  Pattern out{p.relation, {}};
  for (const Term& t : p.args) out.args.push_back(t.is_variable() ? "?" + t.name() : t.name());
  return out;
}

bool is_var(const std::string& s) { return !s.empty() && s[0] == '?'; }

bool match(const Pattern& pat, const Atom& atom, Binding& b) {
  if (atom.size() != pat.args.size() + 1 || atom[0] != pat.relation) return false;
  for (std::size_t i = 0; i < pat.args.size(); ++i) {
    const std::string& a = pat.args[i];
    const std::string& c = atom[i + 1];
    if (!is_var(a)) {
      if (a != c) return false;
      continue;
    }
    auto it = b.find(a);
    if (it == b.end()) {
      b.emplace(a, c);
    } else if (it->second != c) {
      return false;
    }
  }
  return true;
}

void join(const std::vector<Pattern>& body, std::size_t i, const Binding& b,
          const std::set<Atom>& model, const std::function<void(const Binding&)>& emit) {
  if (i == body.size()) {
    emit(b);
    return;
  }
  for (const Atom& atom : model) {
    Binding next = b;
    if (match(body[i], atom, next)) join(body, i + 1, next, model, emit);
  }
}

}  // namespace

std::set<Atom> least_model(const KnowledgeBase& kb) {
  std::set<Atom> model;
  for (const Proposition& f : kb.facts()) {
    Atom a{f.relation};
    for (const Term& t : f.args) a.push_back(t.name());
    model.insert(a);
  }
  std::vector<std::pair<Pattern, std::vector<Pattern>>> rules;
  for (const Influence& inf : kb.influences()) {
    if (const auto* c = std::get_if<LogicClause>(&inf)) {
      std::vector<Pattern> body;
      for (const Proposition& p : c->body) body.push_back(pattern_of(p));
      rules.emplace_back(pattern_of(c->head), body);
    }
  }
  for (bool changed = true; changed;) {
    changed = false;
    std::set<Atom> derived;
    for (const auto& [head, body] : rules) {
      join(body, 0, {}, model, [&](const Binding& b) {
        Atom a{head.relation};
        for (const std::string& s : head.args) {
          if (!is_var(s)) {
            a.push_back(s);
          } else if (auto it = b.find(s); it != b.end()) {
            a.push_back(it->second);
          } else {
            return;
          }
        }
        derived.insert(a);
      });
    }
    for (const Atom& a : derived) changed |= model.insert(a).second;
  }
  return model;
}

std::set<Binding> model_answers(const std::vector<Proposition>& goals, const std::set<Atom>& model) {
  std::vector<Pattern> body;
  for (const Proposition& g : goals) body.push_back(pattern_of(g));
  std::set<Binding> out;
  join(body, 0, {}, model, [&](const Binding& b) {
    Binding stripped;
    for (const auto& [k, v] : b) stripped.emplace(k.substr(1), v);
    out.insert(stripped);
  });
  return out;
}

}  // namespace kbmc::testing
