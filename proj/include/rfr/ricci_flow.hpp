#pragma once

#include <map>
#include <span>
#include <vector>

#include "rfr/curvature.hpp"
#include "rfr/graph.hpp"

namespace rfr {

struct FlowConfig {
  double step = 0.1;  // eta
  int iterations = 50;
  bool renormalize = true;
  // Reuse the initial curvature for every step instead of recomputing it.
  bool frozen_curvature = false;
  CurvatureOptions curvature;
};

// One explicit Euler step of dw/dt = -kappa * w:  w' = w * (1 - step * kappa).
// Throws ComputeError naming the edge when step * |kappa| >= 1.
std::vector<double> flow_step(const WeightedGraph& graph, std::span<const double> curvature,
                              double step);

// Scales all weights by one factor so they sum to `target_total`.
std::vector<double> renormalize_weights(std::span<const double> weights, double target_total);

struct FlowState {
  std::vector<double> weights;    // per edge, in edge order
  std::vector<double> curvature;  // curvature at these weights
};

struct FlowTrace {
  WeightedGraph graph;            // initial weights and topology
  Date date;
  std::vector<FlowState> states;  // states[0] is the input, states[k] after k steps
  CurvatureMap initial;
  CurvatureMap final;
  std::map<EdgeId, double> delta;  // final - initial, keyed like the graph edges
};

// Iterates (curvature -> flow_step -> optional renormalization) and records
// every state. With zero iterations the delta is identically zero.
FlowTrace simulate_flow(const WeightedGraph& graph, Date date, const FlowConfig& config);
FlowTrace simulate_flow(const FinGraph& graph, const FlowConfig& config);

struct CurvatureShift {
  std::map<EdgeId, double> delta;  // on the intersection of the edge sets
  std::vector<EdgeId> born;        // only in `curr`
  std::vector<EdgeId> died;        // only in `prev`
};

// curr - prev between two snapshots of the same curvature kind.
CurvatureShift cross_day_shift(const CurvatureMap& prev, const CurvatureMap& curr);

}  // namespace rfr
