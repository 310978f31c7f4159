#include "rfr/graph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <set>

#include "rfr/errors.hpp"

namespace rfr {

std::string_view to_string(NodeKind kind) {
  switch (kind) {
    case NodeKind::Asset:
      return "asset";
    case NodeKind::MacroIndicator:
      return "macro";
    case NodeKind::NewsEntity:
      return "news";
  }
  return "asset";
}

std::string_view to_string(EdgeKind kind) {
  switch (kind) {
    case EdgeKind::Correlation:
      return "correlation";
    case EdgeKind::Semantic:
      return "semantic";
    case EdgeKind::Knowledge:
      return "knowledge";
  }
  return "correlation";
}

NodeKind node_kind_from_string(std::string_view text) {
  if (text == "asset") return NodeKind::Asset;
  if (text == "macro") return NodeKind::MacroIndicator;
  if (text == "news") return NodeKind::NewsEntity;
  throw DataError("unknown node kind '" + std::string(text) + "'");
}

EdgeKind edge_kind_from_string(std::string_view text) {
  if (text == "correlation") return EdgeKind::Correlation;
  if (text == "semantic") return EdgeKind::Semantic;
  if (text == "knowledge") return EdgeKind::Knowledge;
  throw DataError("unknown edge kind '" + std::string(text) + "'");
}

EdgeId::EdgeId(std::string a, std::string b) {
  if (b < a) std::swap(a, b);
  u = std::move(a);
  v = std::move(b);
}

namespace {

void check_weight(const EdgeId& e, double w) {
  if (!std::isfinite(w) || !(w > 0.0)) {
    throw DataError("edge (" + e.u + ", " + e.v + ") has non-positive or non-finite weight");
  }
  if (e.u == e.v) throw DataError("self-loop on " + e.u);
}

}  // namespace

FinGraph::FinGraph(Date date, std::vector<Node> nodes, std::vector<TypedEdge> edges)
    : date_(date), nodes_(std::move(nodes)), edges_(std::move(edges)) {
  std::sort(nodes_.begin(), nodes_.end(),
            [](const Node& a, const Node& b) { return a.id < b.id; });
  for (std::size_t i = 1; i < nodes_.size(); ++i) {
    if (nodes_[i].id == nodes_[i - 1].id) throw DataError("duplicate node " + nodes_[i].id);
  }
  for (auto& e : edges_) {
    e.ends = EdgeId(e.ends.u, e.ends.v);
    check_weight(e.ends, e.weight);
    if (!has_node(e.ends.u) || !has_node(e.ends.v)) {
      throw DataError("edge (" + e.ends.u + ", " + e.ends.v + ") references an unknown node");
    }
  }
  std::sort(edges_.begin(), edges_.end(), [](const TypedEdge& a, const TypedEdge& b) {
    return std::tie(a.ends, a.kind) < std::tie(b.ends, b.kind);
  });
  for (std::size_t i = 1; i < edges_.size(); ++i) {
    if (edges_[i].ends == edges_[i - 1].ends && edges_[i].kind == edges_[i - 1].kind) {
      throw DataError("duplicate " + std::string(to_string(edges_[i].kind)) + " edge (" +
                      edges_[i].ends.u + ", " + edges_[i].ends.v + ")");
    }
  }
}

std::optional<NodeKind> FinGraph::kind_of(const std::string& id) const {
  auto it = std::lower_bound(nodes_.begin(), nodes_.end(), id,
                             [](const Node& n, const std::string& key) { return n.id < key; });
  if (it == nodes_.end() || it->id != id) return std::nullopt;
  return it->kind;
}

std::vector<std::string> FinGraph::assets() const {
  std::vector<std::string> out;
  for (const auto& n : nodes_) {
    if (n.kind == NodeKind::Asset) out.push_back(n.id);
  }
  return out;
}

WeightedGraph FinGraph::collapse() const {
  std::vector<std::string> ids;
  ids.reserve(nodes_.size());
  for (const auto& n : nodes_) ids.push_back(n.id);
  std::vector<std::pair<EdgeId, double>> merged;
  for (const auto& e : edges_) {
    if (!merged.empty() && merged.back().first == e.ends) {
      merged.back().second = std::max(merged.back().second, e.weight);
    } else {
      merged.emplace_back(e.ends, e.weight);
    }
  }
  return WeightedGraph(std::move(ids), merged);
}

WeightedGraph::WeightedGraph(std::vector<std::string> ids,
                             const std::vector<std::pair<EdgeId, double>>& edges)
    : ids_(std::move(ids)) {
  std::sort(ids_.begin(), ids_.end());
  for (std::size_t i = 1; i < ids_.size(); ++i) {
    if (ids_[i] == ids_[i - 1]) throw DataError("duplicate node " + ids_[i]);
  }
  adjacency_.resize(ids_.size());
  std::vector<std::pair<EdgeId, double>> sorted = edges;
  for (auto& [e, w] : sorted) e = EdgeId(e.u, e.v);
  std::sort(sorted.begin(), sorted.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const auto& [e, w] = sorted[i];
    check_weight(e, w);
    if (i > 0 && sorted[i - 1].first == e) {
      throw DataError("duplicate edge (" + e.u + ", " + e.v + ")");
    }
    const auto u = index_of(e.u);
    const auto v = index_of(e.v);
    if (!u || !v) throw DataError("edge (" + e.u + ", " + e.v + ") references an unknown node");
    const int idx = static_cast<int>(edges_.size());
    edges_.push_back({*u, *v, w});
    adjacency_[static_cast<std::size_t>(*u)].push_back({*v, idx});
    adjacency_[static_cast<std::size_t>(*v)].push_back({*u, idx});
  }
  for (auto& inc : adjacency_) {
    std::sort(inc.begin(), inc.end(),
              [](const Incidence& a, const Incidence& b) { return a.neighbor < b.neighbor; });
  }
}

std::optional<int> WeightedGraph::index_of(std::string_view id) const {
  auto it = std::lower_bound(ids_.begin(), ids_.end(), id);
  if (it == ids_.end() || *it != id) return std::nullopt;
  return static_cast<int>(it - ids_.begin());
}

EdgeId WeightedGraph::edge_id(int e) const {
  const auto& ed = edge(e);
  return EdgeId(id(ed.u), id(ed.v));
}

std::optional<int> WeightedGraph::find_edge(int u, int v) const {
  const auto& inc = incident(u);
  auto it = std::lower_bound(inc.begin(), inc.end(), v,
                             [](const Incidence& a, int key) { return a.neighbor < key; });
  if (it == inc.end() || it->neighbor != v) return std::nullopt;
  return it->edge;
}

std::vector<double> WeightedGraph::weights() const {
  std::vector<double> out;
  out.reserve(edges_.size());
  for (const auto& e : edges_) out.push_back(e.weight);
  return out;
}

double WeightedGraph::total_weight() const {
  double sum = 0.0;
  for (const auto& e : edges_) sum += e.weight;
  return sum;
}

WeightedGraph WeightedGraph::with_weights(const std::vector<double>& weights) const {
  if (weights.size() != edges_.size()) throw ComputeError("weight vector size mismatch");
  WeightedGraph out = *this;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (!std::isfinite(weights[i]) || !(weights[i] > 0.0)) {
      throw ComputeError("edge (" + ids_[static_cast<std::size_t>(edges_[i].u)] + ", " +
                         ids_[static_cast<std::size_t>(edges_[i].v)] +
                         ") received a non-positive or non-finite weight");
    }
    out.edges_[i].weight = weights[i];
  }
  return out;
}

std::vector<int> WeightedGraph::hop_distances(int source, int max_depth) const {
  std::vector<int> dist(ids_.size(), -1);
  std::deque<int> queue{source};
  dist[static_cast<std::size_t>(source)] = 0;
  while (!queue.empty()) {
    const int x = queue.front();
    queue.pop_front();
    const int dx = dist[static_cast<std::size_t>(x)];
    if (max_depth >= 0 && dx >= max_depth) continue;
    for (const auto& inc : incident(x)) {
      auto& dn = dist[static_cast<std::size_t>(inc.neighbor)];
      if (dn < 0) {
        dn = dx + 1;
        queue.push_back(inc.neighbor);
      }
    }
  }
  return dist;
}

}  // namespace rfr
