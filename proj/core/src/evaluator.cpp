#include "kbmc/evaluator.hpp"

#include <algorithm>
#include <limits>
#include <set>

namespace kbmc {

std::string to_string(const SolveReport& report) {
  std::string out;
  for (const std::string& line : report.operations) out += line + "\n";
  return out;
}

namespace {

// Outcome index per node, indexed by NodeId::value.
using Assignment = std::vector<std::size_t>;

std::size_t card(const InfluenceDiagram& d, NodeId id) { return d.node(id).outcome_count(); }

std::size_t row_index(const InfluenceDiagram& d, const std::vector<NodeId>& parents,
                      const Assignment& a) {
  std::size_t idx = 0;
  for (NodeId p : parents) idx = idx * card(d, p) + a[p.value];
  return idx;
}

std::size_t space_size(const InfluenceDiagram& d, const std::vector<NodeId>& ids) {
  std::size_t n = 1;
  for (NodeId id : ids) n *= card(d, id);
  return n;
}

// Calls f() once per joint outcome of `ids`, with `a` holding the outcome.
// Rightmost id varies fastest.
template <typename F>
void for_each_outcome(const InfluenceDiagram& d, const std::vector<NodeId>& ids, Assignment& a,
                      F&& f) {
  for (NodeId id : ids) a[id.value] = 0;
  while (true) {
    f();
    std::size_t k = ids.size();
    while (k > 0) {
      --k;
      if (++a[ids[k].value] < card(d, ids[k])) break;
      a[ids[k].value] = 0;
      if (k == 0) return;
    }
    if (ids.empty()) return;
  }
}

std::vector<Proposition> labels(const InfluenceDiagram& d, const std::vector<NodeId>& ids) {
  std::vector<Proposition> out;
  for (NodeId id : ids) out.push_back(d.node(id).label);
  return out;
}

bool contains(const std::vector<NodeId>& v, NodeId id) {
  return std::find(v.begin(), v.end(), id) != v.end();
}

// `front` followed by the members of `rest` it lacks, skipping `drop`.
std::vector<NodeId> merge(std::vector<NodeId> front, const std::vector<NodeId>& rest,
                          std::optional<NodeId> drop = std::nullopt) {
  if (drop) front.erase(std::remove(front.begin(), front.end(), *drop), front.end());
  for (NodeId id : rest) {
    if (id != drop && !contains(front, id)) front.push_back(id);
  }
  return front;
}

NodeId require_value_node(const InfluenceDiagram& d) {
  if (!d.value_node()) throw EvaluationError("diagram has no value node");
  return *d.value_node();
}

bool only_successor_is(const InfluenceDiagram& d, NodeId n, NodeId target) {
  std::vector<NodeId> s = d.successors(n);
  return s.size() == 1 && s.front() == target;
}

// Size of the parent set the node's children end up sharing once all of its
// arcs are reversed.
std::size_t reversal_cost(const InfluenceDiagram& d, NodeId x) {
  std::set<NodeId> u(d.node(x).parents.begin(), d.node(x).parents.end());
  for (NodeId c : d.successors(x)) {
    for (NodeId p : d.node(c).parents) u.insert(p);
  }
  u.erase(x);
  return u.size();
}

NodeId earliest_child(const InfluenceDiagram& d, NodeId x, bool chance_only) {
  for (NodeId id : topological_order(d)) {
    const Node& n = d.node(id);
    if (contains(n.parents, x) && (!chance_only || n.is_chance())) return id;
  }
  throw EvaluationError(to_string(x) + " has no child to reverse");
}

std::string arrow(NodeId a, NodeId b) { return to_string(a) + " -> " + to_string(b); }

}  // namespace

InfluenceDiagram reverse_arc(const InfluenceDiagram& d, NodeId i, NodeId j,
                             std::vector<std::string>* log) {
  const Node& ni = d.node(i);
  const Node& nj = d.node(j);
  if (!ni.is_chance() || !nj.is_chance()) {
    throw EvaluationError("reversal " + arrow(i, j) + ": both ends must be chance nodes");
  }
  if (!contains(nj.parents, i)) throw EvaluationError("no arc " + arrow(i, j));
  for (NodeId s : d.successors(i)) {
    if (s != j && d.reaches(s, j)) {
      throw EvaluationError("reversal " + arrow(i, j) + ": another path exists");
    }
  }

  const std::vector<NodeId> new_j_parents = merge(nj.parents, ni.parents, i);
  std::vector<NodeId> new_i_parents = merge(ni.parents, nj.parents, i);
  new_i_parents.push_back(j);

  const std::size_t wi = card(d, i);
  const std::size_t wj = card(d, j);
  const std::size_t rows = space_size(d, new_j_parents);
  std::vector<std::vector<double>> j_rows(rows, std::vector<double>(wj, 0.0));
  std::vector<std::vector<double>> i_rows(rows * wj, std::vector<double>(wi, 0.0));

  Assignment a(d.next_id().value, 0);
  std::vector<double> joint(wi * wj);
  for_each_outcome(d, new_j_parents, a, [&] {
    for (std::size_t xi = 0; xi < wi; ++xi) {
      a[i.value] = xi;
      double pi = ni.table().rows[row_index(d, ni.parents, a)][xi];
      const std::vector<double>& pj = nj.table().rows[row_index(d, nj.parents, a)];
      for (std::size_t xj = 0; xj < wj; ++xj) joint[xi * wj + xj] = pi * pj[xj];
    }
    std::vector<double>& jr = j_rows[row_index(d, new_j_parents, a)];
    for (std::size_t xj = 0; xj < wj; ++xj) {
      double m = 0.0;
      for (std::size_t xi = 0; xi < wi; ++xi) m += joint[xi * wj + xj];
      jr[xj] = m;
    }
    for (std::size_t xj = 0; xj < wj; ++xj) {
      a[j.value] = xj;
      std::size_t r = row_index(d, new_i_parents, a);
      std::vector<double>& ir = i_rows[r];
      if (jr[xj] > 0.0) {
        for (std::size_t xi = 0; xi < wi; ++xi) ir[xi] = joint[xi * wj + xj] / jr[xj];
      } else {
        std::fill(ir.begin(), ir.end(), 1.0 / static_cast<double>(wi));
        if (log) log->push_back("  uniform " + to_string(i) + " row " + std::to_string(r));
      }
    }
  });

  Node new_j = nj;
  new_j.parents = new_j_parents;
  new_j.body = ConditionalTable{nj.label, labels(d, new_j_parents), std::move(j_rows)};
  Node new_i = ni;
  new_i.parents = new_i_parents;
  new_i.body = ConditionalTable{ni.label, labels(d, new_i_parents), std::move(i_rows)};

  InfluenceDiagram out = d;
  out.replace(std::move(new_j));
  out.replace(std::move(new_i));
  return out;
}

InfluenceDiagram remove_barren(const InfluenceDiagram& d, NodeId n, std::optional<NodeId> protect) {
  const Node& node = d.node(n);
  if (node.is_value()) throw EvaluationError("value node " + to_string(n) + " cannot be barren-removed");
  if (protect == n) throw EvaluationError(to_string(n) + " is protected");
  if (!d.successors(n).empty()) throw EvaluationError(to_string(n) + " is not barren");
  InfluenceDiagram out = d;
  out.erase(n);
  return out;
}

InfluenceDiagram remove_chance_into_value(const InfluenceDiagram& d, NodeId n) {
  NodeId v = require_value_node(d);
  const Node& node = d.node(n);
  if (!node.is_chance()) throw EvaluationError(to_string(n) + " is not a chance node");
  if (!only_successor_is(d, n, v)) {
    throw EvaluationError(to_string(n) + " has successors besides the value node");
  }
  const Node& value = d.node(v);
  const std::vector<NodeId> new_parents = merge(value.parents, node.parents, n);
  std::vector<double> out_values(space_size(d, new_parents), 0.0);

  Assignment a(d.next_id().value, 0);
  for_each_outcome(d, new_parents, a, [&] {
    const std::vector<double>& p = node.table().rows[row_index(d, node.parents, a)];
    double acc = 0.0;
    for (std::size_t x = 0; x < p.size(); ++x) {
      a[n.value] = x;
      acc += p[x] * value.values().values[row_index(d, value.parents, a)];
    }
    out_values[row_index(d, new_parents, a)] = acc;
  });

  Node new_value = value;
  new_value.parents = new_parents;
  new_value.body = ValueTable{labels(d, new_parents), std::move(out_values)};
  InfluenceDiagram out = d;
  out.replace(std::move(new_value));
  out.erase(n);
  return out;
}

std::pair<InfluenceDiagram, DecisionRule> remove_decision(const InfluenceDiagram& d, NodeId n) {
  NodeId v = require_value_node(d);
  const Node& node = d.node(n);
  if (!node.is_decision()) throw EvaluationError(to_string(n) + " is not a decision node");
  if (!only_successor_is(d, n, v)) {
    throw EvaluationError(to_string(n) + " has successors besides the value node");
  }
  const Node& value = d.node(v);
  std::vector<NodeId> rest = value.parents;
  rest.erase(std::remove(rest.begin(), rest.end(), n), rest.end());
  for (NodeId p : rest) {
    if (!contains(node.parents, p)) {
      throw EvaluationError(to_string(n) + " does not observe value parent " + to_string(p));
    }
  }

  const std::size_t alts = node.outcome_count();
  const std::vector<double>& table = value.values().values;
  Assignment a(d.next_id().value, 0);
  // First alternative within tolerance of the maximum.
  auto best = [&](double& best_value) {
    double top = -std::numeric_limits<double>::infinity();
    std::vector<double> vals(alts);
    for (std::size_t x = 0; x < alts; ++x) {
      a[n.value] = x;
      vals[x] = table[row_index(d, value.parents, a)];
      top = std::max(top, vals[x]);
    }
    for (std::size_t x = 0; x < alts; ++x) {
      if (vals[x] >= top - kTieTolerance) {
        best_value = vals[x];
        return x;
      }
    }
    best_value = top;
    return std::size_t{0};
  };

  std::vector<double> out_values(space_size(d, rest), 0.0);
  for_each_outcome(d, rest, a, [&] {
    double bv = 0.0;
    best(bv);
    out_values[row_index(d, rest, a)] = bv;
  });

  DecisionRule rule = constant_rule(d, n);
  for_each_outcome(d, node.parents, a, [&] {
    double bv = 0.0;
    rule.choice[row_index(d, node.parents, a)] = best(bv);
  });

  Node new_value = value;
  new_value.parents = rest;
  new_value.body = ValueTable{labels(d, rest), std::move(out_values)};
  InfluenceDiagram out = d;
  out.replace(std::move(new_value));
  out.erase(n);
  return {std::move(out), std::move(rule)};
}

DistributionSolution solve_distribution(const InfluenceDiagram& d, NodeId query_node) {
  validate(d);
  if (!d.contains(query_node)) throw EvaluationError("query node " + to_string(query_node) + " missing");
  for (const auto& [id, node] : d.nodes()) {
    if (!node.is_chance()) throw EvaluationError("distribution query over a diagram with " +
                                                 std::string(to_string(node.kind())) + " nodes");
  }
  InfluenceDiagram cur = d;
  SolveReport report;
  while (cur.size() > 1) {
    std::optional<NodeId> barren;
    for (NodeId id : cur.ids()) {
      if (id != query_node && cur.successors(id).empty()) {
        barren = id;
        break;
      }
    }
    if (barren) {
      cur = remove_barren(cur, *barren, query_node);
      report.operations.push_back("barren " + to_string(*barren));
      continue;
    }
    std::optional<NodeId> pick;
    std::size_t pick_cost = 0;
    for (NodeId id : cur.ids()) {
      if (id == query_node) continue;
      std::size_t cost = reversal_cost(cur, id);
      if (!pick || cost < pick_cost) {
        pick = id;
        pick_cost = cost;
      }
    }
    while (!cur.successors(*pick).empty()) {
      NodeId child = earliest_child(cur, *pick, false);
      report.operations.push_back("reverse " + arrow(*pick, child));
      cur = reverse_arc(cur, *pick, child, &report.operations);
    }
  }
  const Node& q = cur.node(query_node);
  return {Distribution{q.label, q.table().rows.at(0)}, std::move(report)};
}

DecisionSolution solve_decision(const InfluenceDiagram& d) {
  validate(d);
  const NodeId v = require_value_node(d);
  InfluenceDiagram cur = d;
  DecisionSolution out;
  std::vector<std::string>& log = out.report.operations;

  while (cur.size() > 1) {
    std::optional<NodeId> barren;
    for (NodeId id : cur.ids()) {
      if (id != v && cur.successors(id).empty()) {
        barren = id;
        break;
      }
    }
    if (barren) {
      if (cur.node(*barren).is_decision()) out.policy[*barren] = constant_rule(cur, *barren);
      cur = remove_barren(cur, *barren);
      log.push_back("barren " + to_string(*barren));
      continue;
    }

    std::optional<NodeId> expect;
    for (NodeId id : cur.ids()) {
      const Node& n = cur.node(id);
      if (!n.is_chance() || !only_successor_is(cur, id, v)) continue;
      if (!expect || n.parents.size() < cur.node(*expect).parents.size()) expect = id;
    }
    if (expect) {
      cur = remove_chance_into_value(cur, *expect);
      log.push_back("expect " + to_string(*expect) + " into " + to_string(v));
      continue;
    }

    bool maximized = false;
    std::vector<NodeId> order = topological_order(cur);
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      const Node& n = cur.node(*it);
      if (!n.is_decision() || !only_successor_is(cur, *it, v)) continue;
      bool observed = true;
      for (NodeId p : cur.node(v).parents) {
        if (p != *it && !contains(n.parents, p)) observed = false;
      }
      if (!observed) continue;
      auto [next, rule] = remove_decision(cur, *it);
      log.push_back("maximize " + to_string(*it) + " into " + to_string(v));
      out.policy[*it] = std::move(rule);
      cur = std::move(next);
      maximized = true;
      break;
    }
    if (maximized) continue;

    std::optional<NodeId> pick;
    std::size_t pick_cost = 0;
    for (NodeId id : cur.ids()) {
      const Node& n = cur.node(id);
      if (!n.is_chance()) continue;
      bool chance_child = false;
      bool decision_child = false;
      for (NodeId s : cur.successors(id)) {
        chance_child |= cur.node(s).is_chance();
        decision_child |= cur.node(s).is_decision();
      }
      if (!chance_child || decision_child) continue;
      std::size_t cost = reversal_cost(cur, id);
      if (!pick || cost < pick_cost) {
        pick = id;
        pick_cost = cost;
      }
    }
    if (!pick) throw EvaluationError("no applicable removal; decisions are not ordered by information");
    for (;;) {
      bool any = false;
      for (NodeId s : cur.successors(*pick)) any |= cur.node(s).is_chance();
      if (!any) break;
      NodeId child = earliest_child(cur, *pick, true);
      log.push_back("reverse " + arrow(*pick, child));
      cur = reverse_arc(cur, *pick, child, &log);
    }
  }
  out.expected_value = cur.node(v).values().values.at(0);
  return out;
}

}  // namespace kbmc
