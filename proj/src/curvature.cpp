#include "rfr/curvature.hpp"

#include <algorithm>
#include <climits>
#include <cmath>
#include <set>
#include <string>

#include "rfr/errors.hpp"
#include "rfr/transport.hpp"

namespace rfr {

std::string_view to_string(CurvatureKind kind) {
  return kind == CurvatureKind::Ollivier ? "ollivier" : "forman";
}

CurvatureKind curvature_kind_from_string(std::string_view text) {
  if (text == "ollivier") return CurvatureKind::Ollivier;
  if (text == "forman") return CurvatureKind::Forman;
  throw ConfigError("unknown curvature kind '" + std::string(text) +
                    "' (expected ollivier or forman)");
}

NeighborhoodMeasure neighborhood_measure(const WeightedGraph& graph, int node, double p_idle) {
  if (!(p_idle >= 0.0 && p_idle < 1.0)) throw ConfigError("p_idle must lie in [0, 1)");
  if (node < 0 || static_cast<std::size_t>(node) >= graph.node_count()) {
    throw ComputeError("measure requested for a node outside the graph");
  }
  NeighborhoodMeasure mu;
  mu.base = node;
  mu.p_idle = p_idle;
  const auto& inc = graph.incident(node);
  if (inc.empty()) {
    mu.mass.emplace_back(node, 1.0);
    return mu;
  }
  double total = 0.0;
  for (const auto& i : inc) total += graph.edge(i.edge).weight;
  // Incidence lists are sorted by neighbor, so inserting the base node keeps
  // the support ordered.
  bool placed = p_idle == 0.0;
  for (const auto& i : inc) {
    if (!placed && node < i.neighbor) {
      mu.mass.emplace_back(node, p_idle);
      placed = true;
    }
    mu.mass.emplace_back(i.neighbor, (1.0 - p_idle) * graph.edge(i.edge).weight / total);
  }
  if (!placed) mu.mass.emplace_back(node, p_idle);
  return mu;
}

double wasserstein1(const NeighborhoodMeasure& mu, const NeighborhoodMeasure& nu,
                    const WeightedGraph& graph) {
  // Mass shared by both measures stays in place at zero cost; only the
  // difference has to be moved.
  std::vector<std::pair<int, double>> sources, sinks;
  std::size_t a = 0, b = 0;
  while (a < mu.mass.size() || b < nu.mass.size()) {
    const int na = a < mu.mass.size() ? mu.mass[a].first : INT_MAX;
    const int nb = b < nu.mass.size() ? nu.mass[b].first : INT_MAX;
    double diff;
    int node;
    if (na == nb) {
      diff = mu.mass[a++].second - nu.mass[b++].second;
      node = na;
    } else if (na < nb) {
      diff = mu.mass[a++].second;
      node = na;
    } else {
      diff = -nu.mass[b++].second;
      node = nb;
    }
    if (diff > 0.0) sources.emplace_back(node, diff);
    if (diff < 0.0) sinks.emplace_back(node, -diff);
  }
  if (sources.empty() || sinks.empty()) return 0.0;

  std::vector<double> supply, demand;
  for (const auto& s : sources) supply.push_back(s.second);
  for (const auto& s : sinks) demand.push_back(s.second);
  // Rounding can leave the two totals a hair apart; rescale the demand side.
  const double ts = [&] { double t = 0; for (double x : supply) t += x; return t; }();
  const double td = [&] { double t = 0; for (double x : demand) t += x; return t; }();
  if (ts != td) {
    for (double& d : demand) d *= ts / td;
  }

  std::vector<std::vector<double>> cost(sources.size(), std::vector<double>(sinks.size()));
  for (std::size_t i = 0; i < sources.size(); ++i) {
    const auto dist = graph.hop_distances(sources[i].first);
    for (std::size_t j = 0; j < sinks.size(); ++j) {
      const int d = dist[static_cast<std::size_t>(sinks[j].first)];
      if (d < 0) {
        throw ComputeError("transport supports " + graph.id(sources[i].first) + " and " +
                           graph.id(sinks[j].first) + " are disconnected");
      }
      cost[i][j] = static_cast<double>(d);
    }
  }
  return solve_transport(supply, demand, cost).cost;
}

double ollivier_curvature(const WeightedGraph& graph, int edge, double p_idle) {
  const auto& e = graph.edge(edge);
  const auto mu = neighborhood_measure(graph, e.u, p_idle);
  const auto nu = neighborhood_measure(graph, e.v, p_idle);
  return 1.0 - wasserstein1(mu, nu, graph);
}

double forman_curvature(const WeightedGraph& graph, int edge, bool augmented) {
  const auto& e = graph.edge(edge);
  const double we = e.weight;
  std::set<int> common;
  if (augmented) {
    for (const auto& i : graph.incident(e.u)) {
      if (i.neighbor != e.v && graph.find_edge(e.v, i.neighbor)) common.insert(i.neighbor);
    }
  }
  double sum = 0.0;
  for (const int end : {e.u, e.v}) {
    for (const auto& i : graph.incident(end)) {
      if (i.edge == edge || common.count(i.neighbor)) continue;
      sum += std::sqrt(we / graph.edge(i.edge).weight);
    }
  }
  double kappa = 2.0 - sum;
  // Unit-weight faces contribute w_e * (w_e / w_f) each.
  kappa += static_cast<double>(common.size()) * we * we;
  return kappa;
}

std::vector<double> edge_curvatures(const WeightedGraph& graph, const CurvatureOptions& options) {
  std::vector<double> out(graph.edge_count(), 0.0);
  std::string failures;
  for (std::size_t e = 0; e < graph.edge_count(); ++e) {
    const int idx = static_cast<int>(e);
    try {
      out[e] = options.kind == CurvatureKind::Ollivier
                   ? ollivier_curvature(graph, idx, options.p_idle)
                   : forman_curvature(graph, idx, options.augmented_forman);
    } catch (const ComputeError& err) {
      const auto id = graph.edge_id(idx);
      failures += "\n  (" + id.u + ", " + id.v + "): " + err.what();
    }
  }
  if (!failures.empty()) throw ComputeError("curvature failed on edges:" + failures);
  return out;
}

CurvatureMap curvature_map(const WeightedGraph& graph, Date date, const CurvatureOptions& options) {
  CurvatureMap map;
  map.date = date;
  map.kind = options.kind;
  const auto values = edge_curvatures(graph, options);
  for (std::size_t e = 0; e < values.size(); ++e) {
    map.values.emplace(graph.edge_id(static_cast<int>(e)), values[e]);
  }
  return map;
}

CurvatureMap curvature_map(const FinGraph& graph, const CurvatureOptions& options) {
  return curvature_map(graph.collapse(), graph.date(), options);
}

}  // namespace rfr
