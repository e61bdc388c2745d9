// Decision policies, shared by the evaluator and the enumeration oracle.

#ifndef KBMC_POLICY_HPP_
#define KBMC_POLICY_HPP_

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "kbmc/diagram.hpp"
#include "kbmc/term.hpp"

namespace kbmc {

// Two expected values closer than this are a tie; ties go to the
// earliest-declared alternative.
inline constexpr double kTieTolerance = 1e-9;

struct DecisionRule {
  NodeId decision;
  Proposition label;
  std::vector<Symbol> alternatives;
  // Informational parents, in parent order, and their labels.
  std::vector<NodeId> context;
  std::vector<Proposition> context_axes;
  // Index into `alternatives` per joint context outcome (row-major).
  std::vector<std::size_t> choice;

  const Symbol& chosen(std::size_t context_row) const {
    return alternatives.at(choice.at(context_row));
  }
  friend bool operator==(const DecisionRule&, const DecisionRule&) = default;
};

using Policy = std::map<NodeId, DecisionRule>;

// A rule for `decision` choosing `fill` everywhere.
DecisionRule constant_rule(const InfluenceDiagram& d, NodeId decision, std::size_t fill = 0);

// One line per context row: "<context outcomes> -> <alternative>".
std::string to_string(const DecisionRule& rule);
std::string to_string(const Policy& policy);

}  // namespace kbmc

#endif  // KBMC_POLICY_HPP_
