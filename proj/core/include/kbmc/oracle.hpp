// Brute-force semantics of influence diagrams: full joint enumeration and
// exhaustive policy search. Independent of the evaluator; used as ground
// truth in tests and by the hidden `kbmc oracle` command.

#ifndef KBMC_ORACLE_HPP_
#define KBMC_ORACLE_HPP_

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "kbmc/diagram.hpp"
#include "kbmc/policy.hpp"

namespace kbmc {

class OracleLimitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::size_t kOracleLimit = 1'000'000;

struct JointEntry {
  // Outcome index per chance and decision node, in id order.
  std::vector<std::pair<NodeId, std::size_t>> assignment;
  double probability = 0.0;
};

struct JointTable {
  std::vector<NodeId> nodes;
  std::vector<JointEntry> entries;

  double total() const;
};

// Every assignment to the chance nodes (and decisions, fixed by `policy`),
// with the chain-rule product of table entries. Assignments in which a
// decision disagrees with the policy are omitted. Throws OracleLimitError
// past kOracleLimit assignments or std::invalid_argument if a decision has no
// rule.
JointTable enumerate_joint(const InfluenceDiagram& d, const std::optional<Policy>& policy = {});

Distribution oracle_distribution(const InfluenceDiagram& d, NodeId node);

// Expected value of the value node under `policy`.
double oracle_expected_value(const InfluenceDiagram& d, const Policy& policy);

// Scores every total policy and keeps the first best one, enumerating each
// decision's context rows in order and alternatives in declaration order.
std::pair<Policy, double> oracle_policy(const InfluenceDiagram& d);

}  // namespace kbmc

#endif  // KBMC_ORACLE_HPP_
