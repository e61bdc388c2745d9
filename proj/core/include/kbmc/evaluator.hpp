// Exact solution of influence diagrams by graph transformations: arc
// reversal, barren-node removal, expectation of a chance node into the value
// node, and maximization of a decision node into the value node.

#ifndef KBMC_EVALUATOR_HPP_
#define KBMC_EVALUATOR_HPP_

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "kbmc/diagram.hpp"
#include "kbmc/policy.hpp"
#include "kbmc/term.hpp"

namespace kbmc {

// A transformation whose preconditions do not hold.
class EvaluationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SolveReport {
  // One applied transformation per line, e.g. "reverse n0 -> n1".
  std::vector<std::string> operations;
};

std::string to_string(const SolveReport& report);

// Bayes-rule reversal of the chance arc i -> j. Afterwards j's parents are
// its old parents minus i followed by i's parents it lacked; i's parents are
// its old parents, then j's old parents it lacked, then j. Conditioning rows
// with zero probability become uniform and are noted in `log`.
InfluenceDiagram reverse_arc(const InfluenceDiagram& d, NodeId i, NodeId j,
                             std::vector<std::string>* log = nullptr);

// Deletes a chance or decision node without successors.
InfluenceDiagram remove_barren(const InfluenceDiagram& d, NodeId n,
                               std::optional<NodeId> protect = std::nullopt);

// Replaces the value table by its expectation over chance node n, whose only
// successor must be the value node. The value node inherits n's parents.
InfluenceDiagram remove_chance_into_value(const InfluenceDiagram& d, NodeId n);

// Maximizes the value table over decision n. Requires the value node to be
// n's only successor and every other value parent to be observed by n.
std::pair<InfluenceDiagram, DecisionRule> remove_decision(const InfluenceDiagram& d, NodeId n);

struct DistributionSolution {
  Distribution distribution;
  SolveReport report;
};

struct DecisionSolution {
  Policy policy;
  double expected_value = 0.0;
  SolveReport report;
};

// Marginal of query_node in a diagram of chance nodes only.
DistributionSolution solve_distribution(const InfluenceDiagram& d, NodeId query_node);

// Optimal policy and its expected value. Throws EvaluationError when no
// removal sequence applies (decisions not totally ordered by their
// information).
DecisionSolution solve_decision(const InfluenceDiagram& d);

}  // namespace kbmc

#endif  // KBMC_EVALUATOR_HPP_
