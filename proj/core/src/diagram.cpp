#include "kbmc/diagram.hpp"

#include <algorithm>
#include <cstdio>
#include <queue>
#include <set>
#include <sstream>

namespace kbmc {

std::string to_string(NodeId id) { return "n" + std::to_string(id.value); }

const char* to_string(NodeKind kind) {
  switch (kind) {
    case NodeKind::kChance:
      return "chance";
    case NodeKind::kDecision:
      return "decision";
    case NodeKind::kValue:
      return "value";
  }
  return "?";
}

const ConditionalTable& Node::table() const {
  if (!is_chance()) throw std::logic_error(to_string(id) + " is not a chance node");
  return std::get<ConditionalTable>(body);
}

ConditionalTable& Node::table() {
  if (!is_chance()) throw std::logic_error(to_string(id) + " is not a chance node");
  return std::get<ConditionalTable>(body);
}

const ValueTable& Node::values() const {
  if (!is_value()) throw std::logic_error(to_string(id) + " is not a value node");
  return std::get<ValueTable>(body);
}

ValueTable& Node::values() {
  if (!is_value()) throw std::logic_error(to_string(id) + " is not a value node");
  return std::get<ValueTable>(body);
}

const std::vector<Symbol>& Node::alternatives() const {
  if (!is_decision()) throw std::logic_error(to_string(id) + " is not a decision node");
  return std::get<DecisionAlternatives>(body).alternatives;
}

std::size_t Node::outcome_count() const {
  switch (kind()) {
    case NodeKind::kChance:
      return label.outcome_count();
    case NodeKind::kDecision:
      return alternatives().size();
    case NodeKind::kValue:
      return 1;
  }
  return 1;
}

Node make_chance_node(NodeId id, ConditionalTable table, std::vector<NodeId> parents) {
  Proposition label = table.subject;
  return Node{id, std::move(label), std::move(table), std::move(parents)};
}

Node make_decision_node(NodeId id, Proposition label, std::vector<NodeId> parents) {
  DecisionAlternatives alts{outcome_labels(label)};
  return Node{id, std::move(label), std::move(alts), std::move(parents)};
}

Node make_value_node(NodeId id, Proposition label, ValueTable values,
                     std::vector<NodeId> parents) {
  return Node{id, std::move(label), std::move(values), std::move(parents)};
}

namespace {

std::vector<NodeId> kahn(const std::map<NodeId, Node>& nodes) {
  std::map<NodeId, std::size_t> indegree;
  std::map<NodeId, std::vector<NodeId>> children;
  for (const auto& [id, node] : nodes) {
    indegree[id] += 0;
    for (NodeId p : node.parents) {
      ++indegree[id];
      children[p].push_back(id);
    }
  }
  std::priority_queue<NodeId, std::vector<NodeId>, std::greater<>> ready;
  for (const auto& [id, deg] : indegree) {
    if (deg == 0) ready.push(id);
  }
  std::vector<NodeId> order;
  while (!ready.empty()) {
    NodeId id = ready.top();
    ready.pop();
    order.push_back(id);
    for (NodeId c : children[id]) {
      if (--indegree[c] == 0) ready.push(c);
    }
  }
  return order;
}

void require_acyclic(const std::map<NodeId, Node>& nodes) {
  if (kahn(nodes).size() != nodes.size()) throw CycleError("arc would create a directed cycle");
}

std::vector<Proposition> labels_of(const std::map<NodeId, Node>& nodes,
                                   const std::vector<NodeId>& ids) {
  std::vector<Proposition> out;
  out.reserve(ids.size());
  for (NodeId id : ids) out.push_back(nodes.at(id).label);
  return out;
}

}  // namespace

const Node& InfluenceDiagram::node(NodeId id) const {
  auto it = nodes_.find(id);
  if (it == nodes_.end()) throw DiagramError("no node " + to_string(id));
  return it->second;
}

std::vector<NodeId> InfluenceDiagram::ids() const {
  std::vector<NodeId> out;
  out.reserve(nodes_.size());
  for (const auto& [id, node] : nodes_) out.push_back(id);
  return out;
}

std::vector<NodeId> InfluenceDiagram::successors(NodeId id) const {
  std::vector<NodeId> out;
  for (const auto& [cid, node] : nodes_) {
    if (std::find(node.parents.begin(), node.parents.end(), id) != node.parents.end()) {
      out.push_back(cid);
    }
  }
  return out;
}

bool InfluenceDiagram::reaches(NodeId from, NodeId to) const {
  std::set<NodeId> seen;
  std::vector<NodeId> frontier = successors(from);
  while (!frontier.empty()) {
    NodeId n = frontier.back();
    frontier.pop_back();
    if (n == to) return true;
    if (!seen.insert(n).second) continue;
    for (NodeId s : successors(n)) frontier.push_back(s);
  }
  return false;
}

void InfluenceDiagram::check_node(const Node& node) const {
  switch (node.kind()) {
    case NodeKind::kChance: {
      const ConditionalTable& t = std::get<ConditionalTable>(node.body);
      if (t.subject != node.label) {
        throw DiagramError(to_string(node.id) + ": table subject differs from label");
      }
      if (!node.label.is_restricted() || node.label.has_variables()) {
        throw DiagramError(to_string(node.id) + ": chance label must be restricted and ground");
      }
      if (std::string err = t.check(); !err.empty()) {
        throw DiagramError(to_string(node.id) + ": " + err);
      }
      break;
    }
    case NodeKind::kDecision: {
      if (!node.label.is_restricted() || node.label.has_variables()) {
        throw DiagramError(to_string(node.id) + ": decision label must be restricted and ground");
      }
      if (node.alternatives() != outcome_labels(node.label)) {
        throw DiagramError(to_string(node.id) + ": alternatives differ from label outcomes");
      }
      break;
    }
    case NodeKind::kValue: {
      if (std::string err = std::get<ValueTable>(node.body).check(); !err.empty()) {
        throw DiagramError(to_string(node.id) + ": " + err);
      }
      break;
    }
  }
  std::set<NodeId> seen;
  for (NodeId p : node.parents) {
    if (p == node.id) throw CycleError("self-arc on " + to_string(p));
    if (!nodes_.count(p)) throw DiagramError(to_string(node.id) + ": unknown parent " + to_string(p));
    if (!seen.insert(p).second) {
      throw DiagramError(to_string(node.id) + ": duplicate parent " + to_string(p));
    }
    if (nodes_.at(p).is_value()) {
      throw DiagramError(to_string(node.id) + ": value node cannot be a parent");
    }
  }
}

void InfluenceDiagram::insert(Node node) {
  if (nodes_.count(node.id)) throw DiagramError("duplicate node id " + to_string(node.id));
  if (node.is_value() && value_node_) throw DiagramError("diagram already has a value node");
  check_node(node);
  NodeId id = node.id;
  bool value = node.is_value();
  nodes_.emplace(id, std::move(node));
  if (value) value_node_ = id;
  next_id_ = std::max(next_id_, id.value + 1);
}

void InfluenceDiagram::connect(NodeId from, NodeId to) {
  if (from == to) throw CycleError("self-arc on " + to_string(from));
  const Node& src = node(from);
  Node& dst = nodes_.at(node(to).id);
  if (src.is_value()) throw DiagramError("value node cannot have successors");
  if (std::find(dst.parents.begin(), dst.parents.end(), from) != dst.parents.end()) {
    throw DiagramError("duplicate arc " + to_string(from) + " -> " + to_string(to));
  }
  if (reaches(to, from)) {
    throw CycleError("arc " + to_string(from) + " -> " + to_string(to) + " closes a cycle");
  }
  dst.parents.push_back(from);
}

void InfluenceDiagram::erase(NodeId id) {
  node(id);
  if (!successors(id).empty()) throw DiagramError("cannot erase " + to_string(id) + ": has successors");
  nodes_.erase(id);
  if (value_node_ == id) value_node_.reset();
}

void InfluenceDiagram::replace(Node n) {
  auto it = nodes_.find(n.id);
  if (it == nodes_.end()) throw DiagramError("no node " + to_string(n.id));
  if (n.is_value() != it->second.is_value()) {
    throw DiagramError("replace cannot change whether " + to_string(n.id) + " is the value node");
  }
  check_node(n);
  std::map<NodeId, Node> candidate = nodes_;
  candidate.at(n.id) = n;
  require_acyclic(candidate);
  if (n.is_value()) {
    for (const auto& [cid, c] : candidate) {
      if (std::find(c.parents.begin(), c.parents.end(), n.id) != c.parents.end()) {
        throw DiagramError("value node cannot have successors");
      }
    }
  }
  it->second = std::move(n);
}

InfluenceDiagram add_node(const InfluenceDiagram& d, Node n) {
  InfluenceDiagram out = d;
  out.insert(std::move(n));
  return out;
}

InfluenceDiagram add_arc(const InfluenceDiagram& d, NodeId from, NodeId to) {
  InfluenceDiagram out = d;
  out.connect(from, to);
  return out;
}

std::vector<NodeId> predecessors(const InfluenceDiagram& d, NodeId id) {
  return d.node(id).parents;
}

std::vector<NodeId> successors(const InfluenceDiagram& d, NodeId id) {
  d.node(id);
  return d.successors(id);
}

std::vector<NodeId> topological_order(const InfluenceDiagram& d) {
  std::vector<NodeId> order = kahn(d.nodes());
  if (order.size() != d.size()) throw CycleError("diagram contains a directed cycle");
  return order;
}

std::optional<std::pair<NodeId, Substitution>> find_unifying_node(
    const InfluenceDiagram& d, const Proposition& p) {
  for (const auto& [id, node] : d.nodes()) {
    if (node.is_value() || node.label.relation != p.relation) continue;
    auto theta = unify(p, node.label);
    if (!theta) continue;
    if (apply(*theta, p) != node.label) continue;
    bool binds_label = false;
    for (const std::string& v : node.label.variables()) binds_label |= theta->binds(v);
    if (binds_label) continue;
    return std::make_pair(id, std::move(*theta));
  }
  return std::nullopt;
}

void validate(const InfluenceDiagram& d) {
  const auto& nodes = d.nodes();
  std::size_t value_nodes = 0;
  for (const auto& [id, node] : nodes) {
    if (node.id != id) throw DiagramError("node stored under wrong id " + to_string(id));
    std::set<NodeId> seen;
    for (NodeId p : node.parents) {
      if (!nodes.count(p)) throw DiagramError(to_string(id) + ": unknown parent " + to_string(p));
      if (!seen.insert(p).second) throw DiagramError(to_string(id) + ": duplicate parent");
    }
    switch (node.kind()) {
      case NodeKind::kChance: {
        const ConditionalTable& t = node.table();
        if (t.subject != node.label) throw DiagramError(to_string(id) + ": subject differs from label");
        if (node.label.has_variables() || !node.label.is_restricted()) {
          throw DiagramError(to_string(id) + ": chance label must be restricted and ground");
        }
        if (t.row_axes != labels_of(nodes, node.parents)) {
          throw DiagramError(to_string(id) + ": table axes do not match parents");
        }
        if (std::string err = t.check(); !err.empty()) throw DiagramError(to_string(id) + ": " + err);
        break;
      }
      case NodeKind::kDecision:
        if (node.label.has_variables() || !node.label.is_restricted()) {
          throw DiagramError(to_string(id) + ": decision label must be restricted and ground");
        }
        if (node.alternatives() != outcome_labels(node.label)) {
          throw DiagramError(to_string(id) + ": alternatives differ from label outcomes");
        }
        break;
      case NodeKind::kValue: {
        ++value_nodes;
        if (d.value_node() != id) throw DiagramError("value node not registered");
        const ValueTable& v = node.values();
        if (v.row_axes != labels_of(nodes, node.parents)) {
          throw DiagramError(to_string(id) + ": value axes do not match parents");
        }
        if (std::string err = v.check(); !err.empty()) throw DiagramError(to_string(id) + ": " + err);
        if (!d.successors(id).empty()) throw DiagramError("value node has successors");
        break;
      }
    }
    for (NodeId p : node.parents) {
      if (nodes.at(p).is_value()) throw DiagramError("value node has successors");
    }
  }
  if (value_nodes > 1) throw DiagramError("more than one value node");
  if (value_nodes == 0 && d.value_node()) throw DiagramError("dangling value node reference");
  require_acyclic(nodes);
}

bool structurally_equal(const InfluenceDiagram& a, const InfluenceDiagram& b) {
  if (a.size() != b.size()) return false;
  auto signature = [](const InfluenceDiagram& d, const Node& n) {
    return std::make_tuple(n.label, n.body, labels_of(d.nodes(), n.parents));
  };
  std::vector<bool> used(b.size(), false);
  std::vector<const Node*> bn;
  for (const auto& [id, node] : b.nodes()) bn.push_back(&node);
  for (const auto& [id, node] : a.nodes()) {
    auto sig = signature(a, node);
    bool found = false;
    for (std::size_t k = 0; k < bn.size() && !found; ++k) {
      if (!used[k] && signature(b, *bn[k]) == sig) {
        used[k] = true;
        found = true;
      }
    }
    if (!found) return false;
  }
  return true;
}

namespace {

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string row_label(const std::vector<Proposition>& axes, std::size_t r) {
  if (axes.empty()) return "-";
  std::vector<std::size_t> sizes;
  for (const Proposition& a : axes) sizes.push_back(a.outcome_count());
  std::vector<std::size_t> digits = joint_digits(r, sizes);
  std::string out;
  for (std::size_t k = 0; k < axes.size(); ++k) {
    if (k) out += " ";
    out += outcome_labels(axes[k])[digits[k]];
  }
  return out;
}

}  // namespace

std::string to_dot(const InfluenceDiagram& d) {
  std::ostringstream out;
  out << "digraph influence {\n";
  for (const auto& [id, node] : d.nodes()) {
    const char* shape = node.is_chance() ? "ellipse" : node.is_decision() ? "box" : "diamond";
    out << "  " << to_string(id) << " [label=\"" << escape(to_string(node.label))
        << "\", shape=" << shape << "];\n";
  }
  for (const auto& [id, node] : d.nodes()) {
    for (NodeId p : node.parents) {
      out << "  " << to_string(p) << " -> " << to_string(id);
      if (node.is_decision()) out << " [style=dashed]";
      out << ";\n";
    }
  }
  out << "}\n";
  return out.str();
}

std::string dump(const InfluenceDiagram& d) {
  std::ostringstream out;
  for (const auto& [id, node] : d.nodes()) {
    out << to_string(id) << ' ' << to_string(node.kind()) << ' ' << to_string(node.label);
    out << " parents:";
    if (node.parents.empty()) out << " none";
    for (NodeId p : node.parents) out << ' ' << to_string(p);
    out << '\n';
    switch (node.kind()) {
      case NodeKind::kChance: {
        const ConditionalTable& t = node.table();
        out << "  | " ;
        std::vector<std::string> names = outcome_labels(node.label);
        for (std::size_t k = 0; k < names.size(); ++k) out << (k ? " " : "") << names[k];
        out << '\n';
        for (std::size_t r = 0; r < t.rows.size(); ++r) {
          out << "  " << row_label(t.row_axes, r) << " |";
          for (double p : t.rows[r]) out << ' ' << fixed6(p);
          out << '\n';
        }
        break;
      }
      case NodeKind::kDecision: {
        out << "  alternatives:";
        for (const Symbol& a : node.alternatives()) out << ' ' << a;
        out << '\n';
        break;
      }
      case NodeKind::kValue: {
        const ValueTable& v = node.values();
        for (std::size_t r = 0; r < v.values.size(); ++r) {
          out << "  " << row_label(v.row_axes, r) << " | " << fixed6(v.values[r]) << '\n';
        }
        break;
      }
    }
  }
  return out.str();
}

}  // namespace kbmc
