#pragma once

#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "rfr/date.hpp"
#include "rfr/graph.hpp"

namespace rfr {

using DeltaMap = std::map<EdgeId, double>;

struct RcaParams {
  double theta = -0.05;      // curvature-change threshold
  int max_hops = 6;          // h_max
  double decay_floor = 0.01;  // epsilon

  // Disables the unstable zone (no node can fall below it).
  static constexpr double kDisabledTheta = -std::numeric_limits<double>::infinity();
};

// Signed mean of the curvature shift over the node's incident edges; empty
// for a node with no incident edge in `delta`.
std::optional<double> avg_curv_change(const WeightedGraph& graph, int node, const DeltaMap& delta);

struct UnstableZone {
  Date date;
  std::map<std::string, double> avg_change;  // only the listed nodes
  std::set<std::string> nodes() const;
};

// Nodes whose avg_curv_change is strictly below theta.
UnstableZone unstable_zone(const WeightedGraph& graph, Date date, const DeltaMap& delta,
                           double theta);

enum class StopReason { ReachedTarget, HopLimit, DecayStop };

std::string_view to_string(StopReason reason);
StopReason stop_reason_from_string(std::string_view text);

struct RcaPath {
  std::vector<std::string> nodes;                   // asset first, terminal last
  std::vector<std::pair<EdgeId, double>> edges;     // signed delta per traversed edge
  double cumulative = 0.0;                          // sum of |delta| along the path
};

struct RcaOutcome {
  std::optional<RcaPath> path;
  StopReason reason = StopReason::DecayStop;
  // "unstable", "perturbed" or "both"; empty without a path.
  std::string terminal_kind;
};

// Breadth-first search from `asset` over edges with |delta| > |theta| (and not
// below the decay floor), keeping simple paths of at most max_hops edges. A
// path ends at the first target it reaches. Returns the reaching path with the
// largest cumulative |delta|, ties broken by fewer hops and then by the
// lexicographic node sequence.
RcaOutcome backward_search(const WeightedGraph& graph, const std::string& asset,
                           const std::set<std::string>& targets, const DeltaMap& delta,
                           const RcaParams& params);

// One entry per asset; targets are the unstable zone plus `perturbed`.
std::map<std::string, RcaOutcome> rca_report(const WeightedGraph& graph,
                                             const std::vector<std::string>& top_assets,
                                             const UnstableZone& zone,
                                             const std::set<std::string>& perturbed,
                                             const DeltaMap& delta, const RcaParams& params);

struct RcaTrial {
  std::map<std::string, RcaOutcome> reports;
  std::set<std::string> perturbed;  // ground truth
};

// Fraction of trials where some returned path ends at a truly perturbed
// node; empty when there are no trials.
std::optional<double> rca_fidelity(const std::vector<RcaTrial>& trials);

}  // namespace rfr
