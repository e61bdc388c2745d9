// Influence diagrams: chance, decision and value nodes over restricted
// propositions.
//
// Arcs are stored on the child as an ordered parent list. For chance and
// value nodes the parent order is the table-axis order; for decision nodes
// parents are informational (observed before the decision is taken).

#ifndef KBMC_DIAGRAM_HPP_
#define KBMC_DIAGRAM_HPP_

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "kbmc/substitution.hpp"
#include "kbmc/term.hpp"

namespace kbmc {

struct NodeId {
  std::uint32_t value = 0;

  friend auto operator<=>(const NodeId&, const NodeId&) = default;
};

std::string to_string(NodeId id);

enum class NodeKind { kChance, kDecision, kValue };

const char* to_string(NodeKind kind);

struct DecisionAlternatives {
  std::vector<Symbol> alternatives;

  friend bool operator==(const DecisionAlternatives&, const DecisionAlternatives&) = default;
};

struct Node {
  NodeId id;
  // Ground except for AltSets (a value node's label keeps its value variable).
  Proposition label;
  std::variant<ConditionalTable, DecisionAlternatives, ValueTable> body;
  std::vector<NodeId> parents;

  NodeKind kind() const { return static_cast<NodeKind>(body.index()); }
  bool is_chance() const { return kind() == NodeKind::kChance; }
  bool is_decision() const { return kind() == NodeKind::kDecision; }
  bool is_value() const { return kind() == NodeKind::kValue; }

  // Throw std::logic_error when called on the wrong kind.
  const ConditionalTable& table() const;
  ConditionalTable& table();
  const ValueTable& values() const;
  ValueTable& values();
  const std::vector<Symbol>& alternatives() const;

  // Number of outcomes (chance, decision); 1 for the value node.
  std::size_t outcome_count() const;

  friend bool operator==(const Node&, const Node&) = default;
};

Node make_chance_node(NodeId id, ConditionalTable table, std::vector<NodeId> parents = {});
Node make_decision_node(NodeId id, Proposition label, std::vector<NodeId> parents = {});
Node make_value_node(NodeId id, Proposition label, ValueTable values,
                     std::vector<NodeId> parents = {});

class DiagramError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class CycleError : public DiagramError {
 public:
  using DiagramError::DiagramError;
};

class InfluenceDiagram {
 public:
  bool empty() const { return nodes_.empty(); }
  std::size_t size() const { return nodes_.size(); }
  bool contains(NodeId id) const { return nodes_.count(id) != 0; }
  const Node& node(NodeId id) const;
  // Ordered by id, i.e. creation order.
  const std::map<NodeId, Node>& nodes() const { return nodes_; }
  std::vector<NodeId> ids() const;
  std::optional<NodeId> value_node() const { return value_node_; }
  NodeId next_id() const { return NodeId{next_id_}; }

  std::vector<NodeId> successors(NodeId id) const;
  // True when a directed path of length >= 1 leads from `from` to `to`.
  bool reaches(NodeId from, NodeId to) const;

  // In-place updates; each leaves the diagram unchanged when it throws.
  // Inserting checks the label against the table dimensions, the uniqueness
  // of ids and of the value node, and that parents resolve without cycles.
  void insert(Node node);
  void connect(NodeId from, NodeId to);
  void erase(NodeId id);
  // Replaces a node (same id) wholesale, e.g. after a table transformation.
  void replace(Node node);

 private:
  void check_node(const Node& node) const;
  void check_acyclic_with(const Node& node) const;

  std::map<NodeId, Node> nodes_;
  std::optional<NodeId> value_node_;
  std::uint32_t next_id_ = 0;
};

// Value-semantics updates.
InfluenceDiagram add_node(const InfluenceDiagram& d, Node n);
InfluenceDiagram add_arc(const InfluenceDiagram& d, NodeId from, NodeId to);

std::vector<NodeId> predecessors(const InfluenceDiagram& d, NodeId id);
std::vector<NodeId> successors(const InfluenceDiagram& d, NodeId id);
// Kahn's algorithm; ties broken by creation order.
std::vector<NodeId> topological_order(const InfluenceDiagram& d);

// Earliest-created node whose label unifies with `p` without instantiating
// the label itself: no variable of the label is bound and no AltSet of the
// label is narrowed to a constant.
std::optional<std::pair<NodeId, Substitution>> find_unifying_node(
    const InfluenceDiagram& d, const Proposition& p);

// Full invariant check: acyclic, at most one value node without successors,
// chance tables dimensioned by (and axis-labelled with) their parents, value
// tables total over joint parent outcomes, decision nodes without tables.
// Throws DiagramError describing the first violation.
void validate(const InfluenceDiagram& d);

// Equality up to NodeId numbering: nodes are matched by label.
bool structurally_equal(const InfluenceDiagram& a, const InfluenceDiagram& b);

std::string to_dot(const InfluenceDiagram& d);
// Plain-text listing of nodes, kinds, parents and tables (6 decimals).
std::string dump(const InfluenceDiagram& d);

}  // namespace kbmc

#endif  // KBMC_DIAGRAM_HPP_
