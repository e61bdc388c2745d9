#include "kbmc/oracle.hpp"

#include <map>
#include <stdexcept>

namespace kbmc {

double JointTable::total() const {
  double t = 0.0;
  for (const JointEntry& e : entries) t += e.probability;
  return t;
}

namespace {

struct Layout {
  std::vector<NodeId> nodes;            // chance and decision nodes, id order
  std::map<NodeId, std::size_t> slot;   // position in `nodes`
  std::vector<std::size_t> sizes;
  std::size_t total = 1;
};

Layout layout_of(const InfluenceDiagram& d) {
  Layout l;
  for (const auto& [id, node] : d.nodes()) {
    if (node.is_value()) continue;
    l.slot[id] = l.nodes.size();
    l.nodes.push_back(id);
    std::size_t n = node.is_chance() ? node.table().width() : node.alternatives().size();
    l.sizes.push_back(n);
    if (l.total > kOracleLimit / n) throw OracleLimitError("joint space exceeds 10^6 assignments");
    l.total *= n;
  }
  return l;
}

std::size_t context_row(const Layout& l, const std::vector<NodeId>& parents,
                        const std::vector<std::size_t>& digits) {
  std::size_t r = 0;
  for (NodeId p : parents) {
    std::size_t s = l.slot.at(p);
    r = r * l.sizes[s] + digits[s];
  }
  return r;
}

bool advance(std::vector<std::size_t>& digits, const std::vector<std::size_t>& sizes) {
  for (std::size_t k = digits.size(); k-- > 0;) {
    if (++digits[k] < sizes[k]) return true;
    digits[k] = 0;
  }
  return false;
}

double chain_product(const InfluenceDiagram& d, const Layout& l,
                     const std::vector<std::size_t>& digits) {
  double p = 1.0;
  for (std::size_t k = 0; k < l.nodes.size(); ++k) {
    const Node& n = d.node(l.nodes[k]);
    if (!n.is_chance()) continue;
    p *= n.table().rows[context_row(l, n.parents, digits)][digits[k]];
  }
  return p;
}

double value_at(const InfluenceDiagram& d, const Layout& l, const std::vector<std::size_t>& digits) {
  const Node& v = d.node(*d.value_node());
  return v.values().values[context_row(l, v.parents, digits)];
}

}  // namespace

JointTable enumerate_joint(const InfluenceDiagram& d, const std::optional<Policy>& policy) {
  Layout l = layout_of(d);
  for (NodeId id : l.nodes) {
    if (d.node(id).is_decision() && (!policy || !policy->count(id))) {
      throw std::invalid_argument("no rule fixes decision " + to_string(id));
    }
  }
  JointTable out;
  out.nodes = l.nodes;
  std::vector<std::size_t> digits(l.nodes.size(), 0);
  do {
    bool consistent = true;
    for (std::size_t k = 0; k < l.nodes.size() && consistent; ++k) {
      const Node& n = d.node(l.nodes[k]);
      if (!n.is_decision()) continue;
      const DecisionRule& rule = policy->at(n.id);
      consistent = rule.choice.at(context_row(l, n.parents, digits)) == digits[k];
    }
    if (!consistent) continue;
    JointEntry e;
    for (std::size_t k = 0; k < l.nodes.size(); ++k) e.assignment.emplace_back(l.nodes[k], digits[k]);
    e.probability = chain_product(d, l, digits);
    out.entries.push_back(std::move(e));
  } while (advance(digits, l.sizes));
  return out;
}

Distribution oracle_distribution(const InfluenceDiagram& d, NodeId node) {
  const Node& target = d.node(node);
  if (!target.is_chance()) throw std::invalid_argument(to_string(node) + " is not a chance node");
  JointTable joint = enumerate_joint(d);
  std::size_t pos = 0;
  while (joint.nodes[pos] != node) ++pos;
  Distribution out{target.label, std::vector<double>(target.table().width(), 0.0)};
  for (const JointEntry& e : joint.entries) out.probs[e.assignment[pos].second] += e.probability;
  return out;
}

double oracle_expected_value(const InfluenceDiagram& d, const Policy& policy) {
  if (!d.value_node()) throw std::invalid_argument("diagram has no value node");
  Layout l = layout_of(d);
  JointTable joint = enumerate_joint(d, policy);
  double eu = 0.0;
  std::vector<std::size_t> digits(l.nodes.size());
  for (const JointEntry& e : joint.entries) {
    for (std::size_t k = 0; k < digits.size(); ++k) digits[k] = e.assignment[k].second;
    eu += e.probability * value_at(d, l, digits);
  }
  return eu;
}

std::pair<Policy, double> oracle_policy(const InfluenceDiagram& d) {
  if (!d.value_node()) throw std::invalid_argument("diagram has no value node");
  Layout l = layout_of(d);

  // One policy digit per (decision, context row); alternatives are digit values.
  struct Decision {
    std::size_t slot;
    std::size_t first_digit;
    std::size_t contexts;
  };
  std::vector<Decision> decisions;
  std::vector<std::size_t> digit_sizes;
  std::size_t policies = 1;
  Policy shape;
  for (std::size_t k = 0; k < l.nodes.size(); ++k) {
    const Node& n = d.node(l.nodes[k]);
    if (!n.is_decision()) continue;
    DecisionRule rule = constant_rule(d, n.id);
    Decision dec{k, digit_sizes.size(), rule.choice.size()};
    for (std::size_t c = 0; c < dec.contexts; ++c) {
      if (policies > kOracleLimit / l.sizes[k]) throw OracleLimitError("policy space exceeds 10^6");
      policies *= l.sizes[k];
      digit_sizes.push_back(l.sizes[k]);
    }
    decisions.push_back(dec);
    shape.emplace(n.id, std::move(rule));
  }

  // Group the weighted value of every joint assignment by the policy digits it
  // is consistent with: key = (digit index, required value) per decision.
  std::map<std::vector<std::pair<std::size_t, std::size_t>>, double> grouped;
  std::vector<std::size_t> digits(l.nodes.size(), 0);
  do {
    std::vector<std::pair<std::size_t, std::size_t>> key;
    for (const Decision& dec : decisions) {
      const Node& n = d.node(l.nodes[dec.slot]);
      key.emplace_back(dec.first_digit + context_row(l, n.parents, digits), digits[dec.slot]);
    }
    grouped[key] += chain_product(d, l, digits) * value_at(d, l, digits);
  } while (advance(digits, l.sizes));
  std::vector<std::pair<std::vector<std::pair<std::size_t, std::size_t>>, double>> terms(
      grouped.begin(), grouped.end());

  std::vector<std::size_t> candidate(digit_sizes.size(), 0);
  std::vector<std::size_t> best;
  double best_eu = 0.0;
  bool scored = false;
  do {
    double eu = 0.0;
    for (const auto& [key, w] : terms) {
      bool match = true;
      for (const auto& [digit, value] : key) match = match && candidate[digit] == value;
      if (match) eu += w;
    }
    if (!scored || eu > best_eu + kTieTolerance) {
      best = candidate;
      best_eu = eu;
      scored = true;
    }
  } while (advance(candidate, digit_sizes));

  for (const Decision& dec : decisions) {
    DecisionRule& rule = shape.at(l.nodes[dec.slot]);
    for (std::size_t c = 0; c < dec.contexts; ++c) rule.choice[c] = best[dec.first_digit + c];
  }
  return {std::move(shape), best_eu};
}

}  // namespace kbmc
