#include "kbmc/policy.hpp"

namespace kbmc {

DecisionRule constant_rule(const InfluenceDiagram& d, NodeId decision, std::size_t fill) {
  const Node& n = d.node(decision);
  DecisionRule rule;
  rule.decision = decision;
  rule.label = n.label;
  rule.alternatives = n.alternatives();
  rule.context = n.parents;
  for (NodeId p : n.parents) rule.context_axes.push_back(d.node(p).label);
  rule.choice.assign(joint_outcome_count(rule.context_axes), fill);
  return rule;
}

std::string to_string(const DecisionRule& rule) {
  std::vector<std::size_t> sizes;
  std::vector<std::vector<std::string>> names;
  for (const Proposition& axis : rule.context_axes) {
    sizes.push_back(axis.outcome_count());
    names.push_back(outcome_labels(axis));
  }
  std::string out;
  for (std::size_t r = 0; r < rule.choice.size(); ++r) {
    std::vector<std::size_t> digits = joint_digits(r, sizes);
    std::string ctx;
    for (std::size_t k = 0; k < digits.size(); ++k) {
      if (k) ctx += " ";
      ctx += names[k][digits[k]];
    }
    if (ctx.empty()) ctx = "-";
    out += ctx + " -> " + rule.chosen(r) + "\n";
  }
  return out;
}

std::string to_string(const Policy& policy) {
  std::string out;
  for (const auto& [id, rule] : policy) {
    out += to_string(rule.label) + "\n";
    std::string body = to_string(rule);
    std::size_t start = 0;
    while (start < body.size()) {
      std::size_t end = body.find('\n', start);
      out += "  " + body.substr(start, end - start + 1);
      start = end + 1;
    }
  }
  return out;
}

}  // namespace kbmc
