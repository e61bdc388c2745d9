// Terms, propositions and the outcome tables built over restricted
// propositions.
//
// A proposition is a relation applied to flat terms: object constants,
// variables, or alternative-value sets (AltSets). An AltSet in an argument
// position restricts that position to a mutually exclusive, collectively
// exhaustive set of symbols; such a proposition is "restricted" and its
// alternative outcomes are the ground instances obtained by choosing one
// member per restricted position.

#ifndef KBMC_TERM_HPP_
#define KBMC_TERM_HPP_

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace kbmc {

using Symbol = std::string;

class Term {
 public:
  enum class Kind : std::uint8_t { kConstant, kVariable, kAltSet };

  static Term constant(Symbol symbol);
  static Term variable(std::string name);
  // Throws std::invalid_argument unless there are at least two distinct
  // members.
  static Term alt_set(std::vector<Symbol> members);

  Kind kind() const { return kind_; }
  bool is_constant() const { return kind_ == Kind::kConstant; }
  bool is_variable() const { return kind_ == Kind::kVariable; }
  bool is_alt_set() const { return kind_ == Kind::kAltSet; }

  // Constant symbol or variable name; empty for AltSets.
  const std::string& name() const { return name_; }
  const std::vector<Symbol>& members() const { return members_; }

  std::optional<std::size_t> index_of(const Symbol& symbol) const;
  bool contains(const Symbol& symbol) const { return index_of(symbol).has_value(); }

  friend bool operator==(const Term&, const Term&) = default;
  friend auto operator<=>(const Term&, const Term&) = default;

 private:
  Term(Kind kind, std::string name, std::vector<Symbol> members)
      : kind_(kind), name_(std::move(name)), members_(std::move(members)) {}

  Kind kind_ = Kind::kConstant;
  std::string name_;
  std::vector<Symbol> members_;
};

struct Proposition {
  Symbol relation;
  std::vector<Term> args;

  std::size_t arity() const { return args.size(); }
  bool is_ground() const;
  bool is_restricted() const;
  bool has_variables() const;
  std::vector<std::size_t> restricted_positions() const;
  // Variable names in first-occurrence order.
  std::vector<std::string> variables() const;
  // Product of AltSet sizes; 1 for an unrestricted proposition.
  std::size_t outcome_count() const;

  friend bool operator==(const Proposition&, const Proposition&) = default;
  friend auto operator<=>(const Proposition&, const Proposition&) = default;
};

Proposition make_proposition(Symbol relation, std::vector<Term> args);

// One ground alternative of a restricted proposition.
struct Outcome {
  Proposition base;
  // One member per restricted position of `base`, left to right.
  std::vector<Symbol> choice;

  Proposition ground() const;
  // Choices joined with ","; a single-position outcome is just its member.
  std::string label() const;

  friend bool operator==(const Outcome&, const Outcome&) = default;
};

using JointOutcome = std::vector<Outcome>;

std::vector<Outcome> outcomes_of(const Proposition& restricted);
std::vector<std::string> outcome_labels(const Proposition& restricted);

// Cross product of the alternative outcomes of `props`, left-to-right
// argument order with the rightmost position varying fastest. The empty
// product has exactly one (empty) joint outcome.
std::vector<JointOutcome> alternative_outcomes(std::span<const Proposition> props);
std::size_t joint_outcome_count(std::span<const Proposition> props);

// Row-major index of a joint outcome given one outcome index per axis.
std::size_t joint_index(std::span<const std::size_t> per_axis,
                        std::span<const std::size_t> axis_sizes);
std::vector<std::size_t> joint_digits(std::size_t index,
                                      std::span<const std::size_t> axis_sizes);

inline constexpr double kRowSumTolerance = 1e-6;

struct Distribution {
  Proposition subject;
  std::vector<double> probs;

  std::vector<Outcome> outcomes() const { return outcomes_of(subject); }
  double sum() const;

  friend bool operator==(const Distribution&, const Distribution&) = default;
};

// Conditional distribution of `subject` given its restricted conditions.
// rows[r] is the distribution over subject outcomes for joint condition
// outcome r (rightmost axis fastest).
struct ConditionalTable {
  Proposition subject;
  std::vector<Proposition> row_axes;
  std::vector<std::vector<double>> rows;

  std::size_t width() const { return subject.outcome_count(); }
  std::size_t row_count() const { return joint_outcome_count(row_axes); }
  const std::vector<double>& row(std::span<const std::size_t> per_axis) const;
  // Empty string when well formed; otherwise a description of the defect.
  std::string check() const;

  friend bool operator==(const ConditionalTable&, const ConditionalTable&) = default;
};

// Utility for every joint outcome of the row axes.
struct ValueTable {
  std::vector<Proposition> row_axes;
  std::vector<double> values;

  std::size_t row_count() const { return joint_outcome_count(row_axes); }
  std::string check() const;

  friend bool operator==(const ValueTable&, const ValueTable&) = default;
};

std::string to_string(const Term& term);
std::string to_string(const Proposition& prop);
std::string to_string(std::span<const Proposition> conjunction);

}  // namespace kbmc

#endif  // KBMC_TERM_HPP_
