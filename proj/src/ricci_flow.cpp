#include "rfr/ricci_flow.hpp"

#include <cmath>
#include <string>

#include "rfr/errors.hpp"

namespace rfr {

std::vector<double> flow_step(const WeightedGraph& graph, std::span<const double> curvature,
                              double step) {
  if (!(step > 0.0)) throw ConfigError("flow step size must be positive");
  if (curvature.size() != graph.edge_count()) throw ComputeError("curvature vector size mismatch");
  std::vector<double> out(graph.edge_count());
  for (std::size_t e = 0; e < out.size(); ++e) {
    const double kappa = curvature[e];
    if (!(step * std::abs(kappa) < 1.0)) {
      const auto id = graph.edge_id(static_cast<int>(e));
      throw ComputeError("flow step " + std::to_string(step) + " too large for edge (" + id.u +
                         ", " + id.v + ") with curvature " + std::to_string(kappa));
    }
    out[e] = graph.edge(static_cast<int>(e)).weight * (1.0 - step * kappa);
  }
  return out;
}

std::vector<double> renormalize_weights(std::span<const double> weights, double target_total) {
  double total = 0.0;
  for (double w : weights) total += w;
  if (!(total > 0.0)) throw ComputeError("cannot renormalize weights with non-positive total");
  std::vector<double> out(weights.begin(), weights.end());
  if (total == target_total) return out;
  const double factor = target_total / total;
  for (double& w : out) w *= factor;
  return out;
}

namespace {

std::map<EdgeId, double> as_map(const WeightedGraph& graph, const std::vector<double>& values) {
  std::map<EdgeId, double> out;
  for (std::size_t e = 0; e < values.size(); ++e) {
    out.emplace(graph.edge_id(static_cast<int>(e)), values[e]);
  }
  return out;
}

}  // namespace

FlowTrace simulate_flow(const WeightedGraph& graph, Date date, const FlowConfig& config) {
  if (graph.edge_count() == 0) throw ComputeError("Ricci flow needs at least one edge");
  if (config.iterations < 0) throw ConfigError("flow iterations must be non-negative");
  if (!(config.step > 0.0)) throw ConfigError("flow step size must be positive");

  FlowTrace trace;
  trace.graph = graph;
  trace.date = date;
  const double initial_total = graph.total_weight();

  WeightedGraph current = graph;
  std::vector<double> kappa = edge_curvatures(current, config.curvature);
  const std::vector<double> initial_kappa = kappa;
  trace.states.push_back({current.weights(), kappa});

  for (int it = 1; it <= config.iterations; ++it) {
    std::vector<double> w = flow_step(current, kappa, config.step);
    if (config.renormalize) w = renormalize_weights(w, initial_total);
    for (std::size_t e = 0; e < w.size(); ++e) {
      if (!std::isfinite(w[e]) || !(w[e] > 0.0)) {
        throw ComputeError("Ricci flow produced a non-finite or non-positive weight at iteration " +
                           std::to_string(it));
      }
    }
    current = current.with_weights(w);
    if (!config.frozen_curvature || it == config.iterations) {
      kappa = edge_curvatures(current, config.curvature);
    }
    trace.states.push_back({std::move(w), kappa});
  }

  trace.initial = CurvatureMap{date, config.curvature.kind, as_map(graph, initial_kappa)};
  trace.final = CurvatureMap{date, config.curvature.kind, as_map(graph, kappa)};
  for (const auto& [edge, k0] : trace.initial.values) {
    trace.delta.emplace(edge, trace.final.values.at(edge) - k0);
  }
  return trace;
}

FlowTrace simulate_flow(const FinGraph& graph, const FlowConfig& config) {
  return simulate_flow(graph.collapse(), graph.date(), config);
}

CurvatureShift cross_day_shift(const CurvatureMap& prev, const CurvatureMap& curr) {
  if (prev.kind != curr.kind) {
    throw DataError("cannot compare " + std::string(to_string(prev.kind)) + " curvature with " +
                    std::string(to_string(curr.kind)) + " curvature");
  }
  CurvatureShift shift;
  for (const auto& [edge, k] : curr.values) {
    auto it = prev.values.find(edge);
    if (it == prev.values.end()) {
      shift.born.push_back(edge);
    } else {
      shift.delta.emplace(edge, k - it->second);
    }
  }
  for (const auto& [edge, _] : prev.values) {
    if (!curr.values.count(edge)) shift.died.push_back(edge);
  }
  return shift;
}

}  // namespace rfr
