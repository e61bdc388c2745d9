#include "random_diagram.hpp"

#include <algorithm>
#include <string>
#include <vector>

namespace kbmc::testing {

namespace {

std::size_t uniform(std::mt19937& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

Proposition restricted(const std::string& relation, const std::string& prefix, std::size_t n) {
  std::vector<Symbol> members;
  for (std::size_t k = 0; k < n; ++k) members.push_back(prefix + std::to_string(k));
  return make_proposition(relation, {Term::alt_set(members)});
}

std::vector<double> positive_row(std::mt19937& rng, std::size_t width) {
  std::uniform_real_distribution<double> u(0.05, 1.0);
  std::vector<double> row(width);
  double sum = 0.0;
  for (double& x : row) sum += (x = u(rng));
  for (double& x : row) x /= sum;
  return row;
}

std::vector<NodeId> choose_parents(std::mt19937& rng, const std::vector<NodeId>& pool,
                                   std::size_t max) {
  std::vector<NodeId> out;
  for (NodeId id : pool) {
    if (out.size() < max && uniform(rng, 0, 9) < 4) out.push_back(id);
  }
  return out;
}

}  // namespace

InfluenceDiagram random_diagram(std::mt19937& rng, const DiagramShape& shape) {
  InfluenceDiagram d;
  std::size_t chance = uniform(rng, shape.min_chance, shape.max_chance);
  std::size_t decision_at = shape.decision ? uniform(rng, 0, chance) : chance + 1;
  std::vector<NodeId> chance_ids;
  std::optional<NodeId> decision;
  std::uint32_t next = 0;

  auto add_decision = [&] {
    NodeId id{next++};
    std::vector<NodeId> observed = choose_parents(rng, chance_ids, 2);
    d.insert(make_decision_node(id, restricted("d", "a", uniform(rng, 2, 4)), observed));
    decision = id;
  };

  for (std::size_t k = 0; k < chance; ++k) {
    if (k == decision_at) add_decision();
    std::vector<NodeId> pool = chance_ids;
    if (decision) pool.push_back(*decision);
    std::vector<NodeId> parents = choose_parents(rng, pool, 3);
    ConditionalTable t;
    t.subject = restricted("c" + std::to_string(k), "o", uniform(rng, 2, 3));
    for (NodeId p : parents) t.row_axes.push_back(d.node(p).label);
    for (std::size_t r = 0; r < t.row_count(); ++r) t.rows.push_back(positive_row(rng, t.width()));
    NodeId id{next++};
    d.insert(make_chance_node(id, std::move(t), parents));
    chance_ids.push_back(id);
  }
  if (shape.decision && !decision) add_decision();

  if (shape.value) {
    std::vector<NodeId> parents = choose_parents(rng, chance_ids, 2);
    if (parents.empty()) parents.push_back(chance_ids[uniform(rng, 0, chance_ids.size() - 1)]);
    if (decision) parents.push_back(*decision);
    std::sort(parents.begin(), parents.end());
    ValueTable v;
    for (NodeId p : parents) v.row_axes.push_back(d.node(p).label);
    for (std::size_t r = 0; r < v.row_count(); ++r) {
      v.values.push_back(static_cast<double>(uniform(rng, 0, 100)));
    }
    d.insert(make_value_node(NodeId{next++}, make_proposition("u", {Term::variable("v")}),
                             std::move(v), parents));
  }
  return d;
}

std::optional<std::pair<NodeId, NodeId>> random_reversible_arc(std::mt19937& rng,
                                                               const InfluenceDiagram& d) {
  std::vector<std::pair<NodeId, NodeId>> eligible;
  for (const auto& [j, child] : d.nodes()) {
    if (!child.is_chance()) continue;
    for (NodeId i : child.parents) {
      if (!d.node(i).is_chance()) continue;
      bool indirect = false;
      for (NodeId s : d.successors(i)) indirect = indirect || (s != j && d.reaches(s, j));
      if (!indirect) eligible.emplace_back(i, j);
    }
  }
  if (eligible.empty()) return std::nullopt;
  return eligible[uniform(rng, 0, eligible.size() - 1)];
}

Policy random_policy(std::mt19937& rng, const InfluenceDiagram& d) {
  Policy out;
  for (const auto& [id, node] : d.nodes()) {
    if (!node.is_decision()) continue;
    DecisionRule rule = constant_rule(d, id);
    for (std::size_t& c : rule.choice) c = uniform(rng, 0, rule.alternatives.size() - 1);
    out.emplace(id, std::move(rule));
  }
  return out;
}

}  // namespace kbmc::testing
