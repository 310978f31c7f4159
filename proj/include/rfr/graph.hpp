#pragma once

#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rfr/date.hpp"

namespace rfr {

enum class NodeKind { Asset, MacroIndicator, NewsEntity };
enum class EdgeKind { Correlation, Semantic, Knowledge };

std::string_view to_string(NodeKind kind);
std::string_view to_string(EdgeKind kind);
NodeKind node_kind_from_string(std::string_view text);
EdgeKind edge_kind_from_string(std::string_view text);

// Unordered entity pair, stored with u < v.
struct EdgeId {
  std::string u;
  std::string v;

  EdgeId() = default;
  EdgeId(std::string a, std::string b);

  bool touches(const std::string& node) const { return u == node || v == node; }
  const std::string& other(const std::string& node) const { return u == node ? v : u; }

  auto operator<=>(const EdgeId&) const = default;
};

struct Node {
  std::string id;
  NodeKind kind = NodeKind::Asset;

  auto operator<=>(const Node&) const = default;
};

struct TypedEdge {
  EdgeId ends;
  EdgeKind kind = EdgeKind::Correlation;
  double weight = 0.0;

  bool operator==(const TypedEdge&) const = default;
};

class WeightedGraph;

// Daily heterogeneous graph. Undirected, no self-loops, at most one edge per
// pair and kind, every weight finite and strictly positive. The constructor
// validates and canonicalizes (nodes sorted by id, edges by pair then kind);
// instances are immutable afterwards.
class FinGraph {
 public:
  FinGraph() = default;
  FinGraph(Date date, std::vector<Node> nodes, std::vector<TypedEdge> edges);

  Date date() const { return date_; }
  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<TypedEdge>& edges() const { return edges_; }

  std::optional<NodeKind> kind_of(const std::string& id) const;
  bool has_node(const std::string& id) const { return kind_of(id).has_value(); }
  std::vector<std::string> assets() const;

  // Simple weighted view in which each pair carries the maximum weight over
  // its kinds. This is what curvature and flow operate on.
  WeightedGraph collapse() const;

  bool operator==(const FinGraph&) const = default;

 private:
  Date date_;
  std::vector<Node> nodes_;
  std::vector<TypedEdge> edges_;
};

// Simple undirected weighted graph over dense indices. Node ids are kept
// sorted so index order equals lexicographic id order.
class WeightedGraph {
 public:
  struct Edge {
    int u = 0;  // u < v
    int v = 0;
    double weight = 0.0;
  };
  struct Incidence {
    int neighbor = 0;
    int edge = 0;
  };

  WeightedGraph() = default;
  // Validates like FinGraph; duplicate pairs are rejected.
  WeightedGraph(std::vector<std::string> ids, const std::vector<std::pair<EdgeId, double>>& edges);

  std::size_t node_count() const { return ids_.size(); }
  std::size_t edge_count() const { return edges_.size(); }
  const std::vector<std::string>& ids() const { return ids_; }
  const std::string& id(int node) const { return ids_[static_cast<std::size_t>(node)]; }
  std::optional<int> index_of(std::string_view id) const;

  const std::vector<Edge>& edges() const { return edges_; }
  const Edge& edge(int e) const { return edges_[static_cast<std::size_t>(e)]; }
  EdgeId edge_id(int e) const;
  std::optional<int> find_edge(int u, int v) const;

  const std::vector<Incidence>& incident(int node) const {
    return adjacency_[static_cast<std::size_t>(node)];
  }
  std::size_t degree(int node) const { return incident(node).size(); }

  std::vector<double> weights() const;
  double total_weight() const;
  // Same topology, new weights (one per edge, in edge order).
  WeightedGraph with_weights(const std::vector<double>& weights) const;

  // Hop distances from `source`; -1 for unreachable nodes. Stops expanding
  // past `max_depth` when given.
  std::vector<int> hop_distances(int source, int max_depth = -1) const;

 private:
  std::vector<std::string> ids_;
  std::vector<Edge> edges_;
  std::vector<std::vector<Incidence>> adjacency_;
};

}  // namespace rfr
