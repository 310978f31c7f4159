#include "rfr/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "rfr/errors.hpp"

namespace rfr {

TransportPlan solve_transport(std::span<const double> supply, std::span<const double> demand,
                              const std::vector<std::vector<double>>& cost) {
  const std::size_t m = supply.size();
  const std::size_t n = demand.size();
  if (cost.size() != m) throw ComputeError("transport cost matrix has wrong row count");
  for (const auto& row : cost) {
    if (row.size() != n) throw ComputeError("transport cost matrix has wrong column count");
  }
  for (double s : supply) {
    if (!(s >= 0.0) || !std::isfinite(s)) throw ComputeError("negative or non-finite supply");
  }
  for (double d : demand) {
    if (!(d >= 0.0) || !std::isfinite(d)) throw ComputeError("negative or non-finite demand");
  }
  const double total_supply = std::accumulate(supply.begin(), supply.end(), 0.0);
  const double total_demand = std::accumulate(demand.begin(), demand.end(), 0.0);
  if (std::abs(total_supply - total_demand) > 1e-9 * std::max(1.0, total_supply)) {
    throw ComputeError("unbalanced transport problem");
  }

  TransportPlan plan;
  plan.flow.assign(m, std::vector<double>(n, 0.0));
  std::vector<double> left(supply.begin(), supply.end());
  std::vector<double> need(demand.begin(), demand.end());
  const double eps = 1e-14 * std::max(1.0, total_supply);
  constexpr double kInf = std::numeric_limits<double>::infinity();

  // Residual nodes: sources [0, m), sinks [m, m + n).
  const std::size_t nodes = m + n;
  std::vector<double> dist(nodes);
  std::vector<long> pred(nodes);
  const std::size_t max_augmentations = 64 * nodes * nodes + 64;

  for (std::size_t round = 0;; ++round) {
    bool pending = false;
    for (double l : left) pending = pending || l > eps;
    if (!pending) break;
    if (round >= max_augmentations) throw ComputeError("transport solver failed to converge");

    std::fill(dist.begin(), dist.end(), kInf);
    std::fill(pred.begin(), pred.end(), -1);
    for (std::size_t i = 0; i < m; ++i) {
      if (left[i] > eps) dist[i] = 0.0;
    }
    // Bellman-Ford; the residual network may carry negative backward arcs.
    for (std::size_t pass = 0; pass < nodes; ++pass) {
      bool changed = false;
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          if (cost[i][j] < 0.0) continue;
          const std::size_t sink = m + j;
          if (dist[i] < kInf && dist[i] + cost[i][j] < dist[sink] - 1e-12) {
            dist[sink] = dist[i] + cost[i][j];
            pred[sink] = static_cast<long>(i);
            changed = true;
          }
          if (plan.flow[i][j] > eps && dist[sink] < kInf &&
              dist[sink] - cost[i][j] < dist[i] - 1e-12) {
            dist[i] = dist[sink] - cost[i][j];
            pred[i] = static_cast<long>(sink);
            changed = true;
          }
        }
      }
      if (!changed) break;
    }

    std::size_t target = nodes;
    for (std::size_t j = 0; j < n; ++j) {
      if (need[j] > eps && dist[m + j] < kInf && (target == nodes || dist[m + j] < dist[target])) {
        target = m + j;
      }
    }
    if (target == nodes) throw ComputeError("transport problem is infeasible");

    // Walk back to the originating source and find the bottleneck.
    double amount = need[target - m];
    std::size_t node = target;
    while (pred[node] >= 0) {
      const auto prev = static_cast<std::size_t>(pred[node]);
      if (node < m) amount = std::min(amount, plan.flow[node][prev - m]);  // backward arc
      node = prev;
    }
    amount = std::min(amount, left[node]);
    left[node] -= amount;
    need[target - m] -= amount;
    node = target;
    while (pred[node] >= 0) {
      const auto prev = static_cast<std::size_t>(pred[node]);
      if (node >= m) {
        plan.flow[prev][node - m] += amount;
      } else {
        plan.flow[node][prev - m] -= amount;
      }
      node = prev;
    }
  }

  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (plan.flow[i][j] > 0.0) plan.cost += plan.flow[i][j] * cost[i][j];
    }
  }
  return plan;
}

}  // namespace rfr
