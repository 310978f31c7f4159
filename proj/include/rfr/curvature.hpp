#pragma once

#include <map>
#include <string_view>
#include <utility>
#include <vector>

#include "rfr/date.hpp"
#include "rfr/graph.hpp"

namespace rfr {

enum class CurvatureKind { Ollivier, Forman };

std::string_view to_string(CurvatureKind kind);
CurvatureKind curvature_kind_from_string(std::string_view text);

inline constexpr double kDefaultIdleness = 0.5;

// Lazy random-walk measure: `p_idle` stays on the base node, the rest is
// split over its neighbors in proportion to edge weight.
struct NeighborhoodMeasure {
  int base = 0;
  double p_idle = kDefaultIdleness;
  std::vector<std::pair<int, double>> mass;  // (node, probability), sorted by node
};

NeighborhoodMeasure neighborhood_measure(const WeightedGraph& graph, int node,
                                         double p_idle = kDefaultIdleness);

// Exact W1 between two measures under the unweighted hop metric of `graph`.
// Throws ComputeError if a pair of support nodes is disconnected.
double wasserstein1(const NeighborhoodMeasure& mu, const NeighborhoodMeasure& nu,
                    const WeightedGraph& graph);

// kappa = 1 - W1(mu_u, mu_v) / d(u, v), with d = 1 on an edge.
double ollivier_curvature(const WeightedGraph& graph, int edge, double p_idle = kDefaultIdleness);

// Weighted Forman curvature with unit node weights:
//   F(e) = 2 - sum_{e' ~ u, e' != e} sqrt(w_e / w_e') - sum_{e' ~ v, e' != e} sqrt(w_e / w_e')
// which is 4 - deg(u) - deg(v) for unit weights. `augmented` adds unit-weight
// triangle faces (4 - deg(u) - deg(v) + 3 t(e) when unweighted).
double forman_curvature(const WeightedGraph& graph, int edge, bool augmented = false);

struct CurvatureOptions {
  CurvatureKind kind = CurvatureKind::Ollivier;
  double p_idle = kDefaultIdleness;
  bool augmented_forman = false;
};

// Curvature of every edge, in edge order. Failures are collected and reported
// together with the edge identities.
std::vector<double> edge_curvatures(const WeightedGraph& graph, const CurvatureOptions& options);

struct CurvatureMap {
  Date date;
  CurvatureKind kind = CurvatureKind::Ollivier;
  std::map<EdgeId, double> values;

  bool operator==(const CurvatureMap&) const = default;
};

CurvatureMap curvature_map(const WeightedGraph& graph, Date date, const CurvatureOptions& options);
CurvatureMap curvature_map(const FinGraph& graph, const CurvatureOptions& options);

}  // namespace rfr
