#include "rfr/rca.hpp"

#include <algorithm>
#include <cmath>

#include "rfr/errors.hpp"

namespace rfr {

std::optional<double> avg_curv_change(const WeightedGraph& graph, int node, const DeltaMap& delta) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& inc : graph.incident(node)) {
    auto it = delta.find(graph.edge_id(inc.edge));
    if (it == delta.end()) continue;
    sum += it->second;
    ++n;
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

std::set<std::string> UnstableZone::nodes() const {
  std::set<std::string> out;
  for (const auto& [id, _] : avg_change) out.insert(id);
  return out;
}

UnstableZone unstable_zone(const WeightedGraph& graph, Date date, const DeltaMap& delta,
                           double theta) {
  UnstableZone zone;
  zone.date = date;
  for (std::size_t v = 0; v < graph.node_count(); ++v) {
    const auto avg = avg_curv_change(graph, static_cast<int>(v), delta);
    if (avg && *avg < theta) zone.avg_change.emplace(graph.id(static_cast<int>(v)), *avg);
  }
  return zone;
}

std::string_view to_string(StopReason reason) {
  switch (reason) {
    case StopReason::ReachedTarget:
      return "reached_target";
    case StopReason::HopLimit:
      return "hop_limit";
    case StopReason::DecayStop:
      return "decay_stop";
  }
  return "decay_stop";
}

StopReason stop_reason_from_string(std::string_view text) {
  if (text == "reached_target") return StopReason::ReachedTarget;
  if (text == "hop_limit") return StopReason::HopLimit;
  if (text == "decay_stop") return StopReason::DecayStop;
  throw DataError("unknown stop reason '" + std::string(text) + "'");
}

namespace {

struct Partial {
  std::vector<int> nodes;
  double cumulative = 0.0;
};

bool better(const Partial& a, const Partial& b) {
  if (a.cumulative != b.cumulative) return a.cumulative > b.cumulative;
  if (a.nodes.size() != b.nodes.size()) return a.nodes.size() < b.nodes.size();
  return a.nodes < b.nodes;  // index order is id order
}

}  // namespace

RcaOutcome backward_search(const WeightedGraph& graph, const std::string& asset,
                           const std::set<std::string>& targets, const DeltaMap& delta,
                           const RcaParams& params) {
  if (params.max_hops < 1) throw ConfigError("RCA max hops must be at least 1");
  if (!(params.decay_floor > 0.0)) throw ConfigError("RCA decay floor must be positive");
  const auto start = graph.index_of(asset);
  if (!start) throw DataError("RCA asset " + asset + " is not in the graph");

  const double threshold = std::abs(params.theta);
  // |delta| per edge when the edge may be traversed, negative otherwise.
  std::vector<double> magnitude(graph.edge_count(), -1.0);
  std::vector<double> signed_delta(graph.edge_count(), 0.0);
  for (std::size_t e = 0; e < graph.edge_count(); ++e) {
    auto it = delta.find(graph.edge_id(static_cast<int>(e)));
    if (it == delta.end()) continue;
    const double m = std::abs(it->second);
    signed_delta[e] = it->second;
    if (m > threshold && !(m < params.decay_floor)) magnitude[e] = m;
  }
  std::vector<char> is_target(graph.node_count(), 0);
  for (const auto& t : targets) {
    if (auto idx = graph.index_of(t); idx && *idx != *start) is_target[static_cast<std::size_t>(*idx)] = 1;
  }

  std::optional<Partial> best;
  bool hop_limited = false;
  std::vector<Partial> frontier{Partial{{*start}, 0.0}};
  for (int depth = 1; depth <= params.max_hops && !frontier.empty(); ++depth) {
    std::vector<Partial> next;
    for (const auto& p : frontier) {
      for (const auto& inc : graph.incident(p.nodes.back())) {
        const double m = magnitude[static_cast<std::size_t>(inc.edge)];
        if (m < 0.0) continue;
        if (std::find(p.nodes.begin(), p.nodes.end(), inc.neighbor) != p.nodes.end()) continue;
        Partial child{p.nodes, p.cumulative + m};
        child.nodes.push_back(inc.neighbor);
        if (is_target[static_cast<std::size_t>(inc.neighbor)]) {
          if (!best || better(child, *best)) best = std::move(child);
        } else if (depth < params.max_hops) {
          next.push_back(std::move(child));
        } else {
          for (const auto& ext : graph.incident(inc.neighbor)) {
            if (magnitude[static_cast<std::size_t>(ext.edge)] >= 0.0 &&
                std::find(child.nodes.begin(), child.nodes.end(), ext.neighbor) == child.nodes.end()) {
              hop_limited = true;
              break;
            }
          }
        }
      }
    }
    frontier = std::move(next);
  }

  RcaOutcome out;
  if (!best) {
    out.reason = hop_limited ? StopReason::HopLimit : StopReason::DecayStop;
    return out;
  }
  RcaPath path;
  for (std::size_t i = 0; i < best->nodes.size(); ++i) {
    path.nodes.push_back(graph.id(best->nodes[i]));
    if (i == 0) continue;
    const int e = *graph.find_edge(best->nodes[i - 1], best->nodes[i]);
    path.edges.emplace_back(graph.edge_id(e), signed_delta[static_cast<std::size_t>(e)]);
  }
  path.cumulative = best->cumulative;
  out.path = std::move(path);
  out.reason = StopReason::ReachedTarget;
  return out;
}

std::map<std::string, RcaOutcome> rca_report(const WeightedGraph& graph,
                                             const std::vector<std::string>& top_assets,
                                             const UnstableZone& zone,
                                             const std::set<std::string>& perturbed,
                                             const DeltaMap& delta, const RcaParams& params) {
  std::set<std::string> targets = zone.nodes();
  targets.insert(perturbed.begin(), perturbed.end());
  std::map<std::string, RcaOutcome> out;
  for (const auto& asset : top_assets) {
    RcaOutcome outcome = backward_search(graph, asset, targets, delta, params);
    if (outcome.path) {
      const auto& terminal = outcome.path->nodes.back();
      const bool unstable = zone.avg_change.count(terminal) > 0;
      const bool shocked = perturbed.count(terminal) > 0;
      outcome.terminal_kind = unstable && shocked ? "both" : (shocked ? "perturbed" : "unstable");
    }
    out.emplace(asset, std::move(outcome));
  }
  return out;
}

std::optional<double> rca_fidelity(const std::vector<RcaTrial>& trials) {
  if (trials.empty()) return std::nullopt;
  std::size_t hits = 0;
  for (const auto& trial : trials) {
    const bool hit = std::any_of(trial.reports.begin(), trial.reports.end(), [&](const auto& kv) {
      return kv.second.path && trial.perturbed.count(kv.second.path->nodes.back()) > 0;
    });
    if (hit) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(trials.size());
}

}  // namespace rfr
