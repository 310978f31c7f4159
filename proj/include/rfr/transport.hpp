#pragma once

#include <span>
#include <vector>

namespace rfr {

struct TransportPlan {
  double cost = 0.0;
  // flow[i][j]: mass moved from source i to sink j.
  std::vector<std::vector<double>> flow;
};

// Exact balanced transportation problem: minimize sum c_ij x_ij subject to
// row sums = supply, column sums = demand, x >= 0. Solved by successive
// shortest augmenting paths on the residual network. Supplies and demands must
// be non-negative with equal totals (relative tolerance 1e-9); a negative cost
// entry marks a forbidden cell. Throws ComputeError when no feasible plan
// exists.
TransportPlan solve_transport(std::span<const double> supply, std::span<const double> demand,
                              const std::vector<std::vector<double>>& cost);

}  // namespace rfr
