#include "kbmc/term.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace kbmc {

Term Term::constant(Symbol symbol) {
  return Term(Kind::kConstant, std::move(symbol), {});
}

Term Term::variable(std::string name) {
  return Term(Kind::kVariable, std::move(name), {});
}

Term Term::alt_set(std::vector<Symbol> members) {
  if (members.size() < 2) {
    throw std::invalid_argument("alternative set needs at least two members");
  }
  for (std::size_t i = 0; i < members.size(); ++i) {
    for (std::size_t j = i + 1; j < members.size(); ++j) {
      if (members[i] == members[j]) {
        throw std::invalid_argument("duplicate member '" + members[i] +
                                    "' in alternative set");
      }
    }
  }
  return Term(Kind::kAltSet, {}, std::move(members));
}

std::optional<std::size_t> Term::index_of(const Symbol& symbol) const {
  auto it = std::find(members_.begin(), members_.end(), symbol);
  if (it == members_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - members_.begin());
}

bool Proposition::is_ground() const {
  return std::all_of(args.begin(), args.end(),
                     [](const Term& t) { return t.is_constant(); });
}

bool Proposition::is_restricted() const {
  return std::any_of(args.begin(), args.end(),
                     [](const Term& t) { return t.is_alt_set(); });
}

bool Proposition::has_variables() const {
  return std::any_of(args.begin(), args.end(),
                     [](const Term& t) { return t.is_variable(); });
}

std::vector<std::size_t> Proposition::restricted_positions() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i].is_alt_set()) out.push_back(i);
  }
  return out;
}

std::vector<std::string> Proposition::variables() const {
  std::vector<std::string> out;
  for (const Term& t : args) {
    if (t.is_variable() &&
        std::find(out.begin(), out.end(), t.name()) == out.end()) {
      out.push_back(t.name());
    }
  }
  return out;
}

std::size_t Proposition::outcome_count() const {
  std::size_t n = 1;
  for (const Term& t : args) {
    if (t.is_alt_set()) n *= t.members().size();
  }
  return n;
}

Proposition make_proposition(Symbol relation, std::vector<Term> args) {
  return Proposition{std::move(relation), std::move(args)};
}

Proposition Outcome::ground() const {
  Proposition p = base;
  std::size_t k = 0;
  for (Term& t : p.args) {
    if (t.is_alt_set()) t = Term::constant(choice.at(k++));
  }
  return p;
}

std::string Outcome::label() const {
  std::string out;
  for (std::size_t i = 0; i < choice.size(); ++i) {
    if (i) out += ',';
    out += choice[i];
  }
  return out;
}

std::vector<Outcome> outcomes_of(const Proposition& restricted) {
  std::vector<std::size_t> positions = restricted.restricted_positions();
  std::vector<std::size_t> sizes;
  for (std::size_t pos : positions) {
    sizes.push_back(restricted.args[pos].members().size());
  }
  std::size_t total = restricted.outcome_count();
  std::vector<Outcome> out;
  out.reserve(total);
  for (std::size_t idx = 0; idx < total; ++idx) {
    std::vector<std::size_t> digits = joint_digits(idx, sizes);
    Outcome o{restricted, {}};
    for (std::size_t k = 0; k < positions.size(); ++k) {
      o.choice.push_back(restricted.args[positions[k]].members()[digits[k]]);
    }
    out.push_back(std::move(o));
  }
  return out;
}

std::vector<std::string> outcome_labels(const Proposition& restricted) {
  std::vector<std::string> out;
  for (const Outcome& o : outcomes_of(restricted)) out.push_back(o.label());
  return out;
}

std::vector<JointOutcome> alternative_outcomes(std::span<const Proposition> props) {
  std::vector<std::vector<Outcome>> per;
  std::vector<std::size_t> sizes;
  for (const Proposition& p : props) {
    per.push_back(outcomes_of(p));
    sizes.push_back(per.back().size());
  }
  std::size_t total = joint_outcome_count(props);
  std::vector<JointOutcome> out;
  out.reserve(total);
  for (std::size_t idx = 0; idx < total; ++idx) {
    std::vector<std::size_t> digits = joint_digits(idx, sizes);
    JointOutcome joint;
    for (std::size_t k = 0; k < per.size(); ++k) joint.push_back(per[k][digits[k]]);
    out.push_back(std::move(joint));
  }
  return out;
}

std::size_t joint_outcome_count(std::span<const Proposition> props) {
  std::size_t n = 1;
  for (const Proposition& p : props) n *= p.outcome_count();
  return n;
}

std::size_t joint_index(std::span<const std::size_t> per_axis,
                        std::span<const std::size_t> axis_sizes) {
  std::size_t idx = 0;
  for (std::size_t k = 0; k < axis_sizes.size(); ++k) {
    idx = idx * axis_sizes[k] + per_axis[k];
  }
  return idx;
}

std::vector<std::size_t> joint_digits(std::size_t index,
                                      std::span<const std::size_t> axis_sizes) {
  std::vector<std::size_t> digits(axis_sizes.size());
  for (std::size_t k = axis_sizes.size(); k-- > 0;) {
    digits[k] = index % axis_sizes[k];
    index /= axis_sizes[k];
  }
  return digits;
}

double Distribution::sum() const {
  return std::accumulate(probs.begin(), probs.end(), 0.0);
}

const std::vector<double>& ConditionalTable::row(
    std::span<const std::size_t> per_axis) const {
  std::vector<std::size_t> sizes;
  for (const Proposition& a : row_axes) sizes.push_back(a.outcome_count());
  return rows.at(joint_index(per_axis, sizes));
}

namespace {

std::string check_row(const std::vector<double>& row, std::size_t width,
                      std::size_t r) {
  if (row.size() != width) {
    return "row " + std::to_string(r) + " has " + std::to_string(row.size()) +
           " entries, expected " + std::to_string(width);
  }
  double sum = 0.0;
  for (double p : row) {
    if (!(p >= 0.0 && p <= 1.0)) {
      return "row " + std::to_string(r) + " has a probability outside [0,1]";
    }
    sum += p;
  }
  if (std::fabs(sum - 1.0) > kRowSumTolerance) {
    return "row " + std::to_string(r) + " sums to " + std::to_string(sum);
  }
  return {};
}

}  // namespace

std::string ConditionalTable::check() const {
  if (!subject.is_restricted()) return "subject is not restricted";
  for (const Proposition& a : row_axes) {
    if (!a.is_restricted()) return "row axis " + to_string(a) + " is not restricted";
  }
  if (rows.size() != row_count()) {
    return "table has " + std::to_string(rows.size()) + " rows, expected " +
           std::to_string(row_count());
  }
  for (std::size_t r = 0; r < rows.size(); ++r) {
    std::string err = check_row(rows[r], width(), r);
    if (!err.empty()) return err;
  }
  return {};
}

std::string ValueTable::check() const {
  for (const Proposition& a : row_axes) {
    if (!a.is_restricted()) return "row axis " + to_string(a) + " is not restricted";
  }
  if (values.size() != row_count()) {
    return "value table has " + std::to_string(values.size()) +
           " entries, expected " + std::to_string(row_count());
  }
  for (double v : values) {
    if (!std::isfinite(v)) return "value table has a non-finite entry";
  }
  return {};
}

std::string to_string(const Term& term) {
  switch (term.kind()) {
    case Term::Kind::kConstant:
      return term.name();
    case Term::Kind::kVariable:
      return "?" + term.name();
    case Term::Kind::kAltSet: {
      std::string out = "{";
      for (std::size_t i = 0; i < term.members().size(); ++i) {
        if (i) out += ", ";
        out += term.members()[i];
      }
      return out + "}";
    }
  }
  return {};
}

std::string to_string(const Proposition& prop) {
  std::string out = "(" + prop.relation;
  for (const Term& t : prop.args) out += " " + to_string(t);
  return out + ")";
}

std::string to_string(std::span<const Proposition> conjunction) {
  std::string out;
  for (std::size_t i = 0; i < conjunction.size(); ++i) {
    if (i) out += ", ";
    out += to_string(conjunction[i]);
  }
  return out;
}

}  // namespace kbmc
