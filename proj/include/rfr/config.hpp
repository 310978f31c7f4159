#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rfr/curvature.hpp"
#include "rfr/date.hpp"
#include "rfr/graph_builder.hpp"
#include "rfr/rca.hpp"
#include "rfr/ricci_flow.hpp"
#include "rfr/scoring.hpp"

namespace rfr {

// Input files; relative paths are resolved against the config file location.
struct DataPaths {
  std::string prices;
  std::string sentiment;
  std::string macro;
  std::string knowledge;
  std::string embeddings;
  std::string comentions;
};

enum class ShiftSource { Flow, CrossDay };

struct ShockConfig {
  std::string mode = "shock";  // "shock" or "control" (no perturbation)
  double multiplier = 3.0;
  double sentiment_delta = -0.5;
  int targets_per_trial = 1;
  std::vector<std::string> targets;  // fixed targets; empty means sampled
};

struct EvalConfig {
  std::optional<Date> date;  // defaults to the last date with a full forward horizon
  int trials = 20;
  std::uint64_t seed = 7;
  ShockConfig shock;
};

// Every tunable of the pipeline. Defaults are the published settings.
struct PipelineConfig {
  std::string run_name = "default";
  DataPaths data;
  std::vector<std::string> universe;
  std::optional<Date> train_end;
  std::optional<Date> start;
  std::optional<Date> end;

  int history_window = 252;  // W
  int correlation_window = static_cast<int>(kCorrelationWindow);
  int graph_top_k = 10;
  std::optional<double> min_edge_weight;

  CurvatureKind curvature = CurvatureKind::Ollivier;
  double p_idle = kDefaultIdleness;
  bool augmented_forman = false;

  int flow_iters = 50;
  double eta = 0.1;
  bool renormalize = true;
  bool frozen_curvature = false;

  int horizon = 5;  // H
  ScoringForm scoring = ScoringForm::Alpha;
  double alpha = 0.7;
  double lambda = 1.0;
  int k = 10;  // recommendation size

  double theta = -0.05;
  int h_max = 6;
  double epsilon = 0.01;
  ShiftSource shift_source = ShiftSource::Flow;
  bool cross_day_shift = false;  // also emit shifts between snapshots H days apart

  EvalConfig eval;

  // Directory the data paths are relative to. Not part of the hash.
  std::filesystem::path base_dir;

  std::filesystem::path resolve(const std::string& path) const;

  // Throws ConfigError for any value outside its module's domain.
  void validate() const;

  FlowConfig flow_config() const;
  CurvatureOptions curvature_options() const;
  RcaParams rca_params() const;
  ScoringOptions scoring_options() const;
  AssemblyOptions assembly_options() const;
};

nlohmann::json to_json(const PipelineConfig& config);
// Unknown keys are rejected. Missing keys keep their defaults.
PipelineConfig config_from_json(const nlohmann::json& j);
PipelineConfig load_config(const std::filesystem::path& path);

// Applies `overrides` (a flat or nested object of config keys) on top of
// `base` and re-validates.
PipelineConfig with_overrides(const PipelineConfig& base, const nlohmann::json& overrides);

// SHA-256 of the canonical JSON serialization.
std::string config_hash(const PipelineConfig& config);

}  // namespace rfr
