#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "rfr/config.hpp"
#include "rfr/market_data.hpp"
#include "rfr/pipeline.hpp"

namespace rfr {

struct ShockSpec {
  std::set<std::string> targets;
  double multiplier = 3.0;        // > 1
  double sentiment_delta = -0.5;  // <= 0
  std::uint64_t seed = 0;
  // Trailing frames whose returns are disturbed.
  std::size_t window = kCorrelationWindow;

  // Throws ConfigError on an empty target set or a multiplier <= 1.
  void validate() const;
};

// Copy of `frames` with the shock applied to the last `window` frames. For each
// target: realised_vol is multiplied by the multiplier, sentiment is shifted by
// the delta and clamped to [-1, 1], and seeded zero-mean noise uncorrelated with
// the original returns is added so that the population std of the window's
// returns grows by exactly the multiplier. Features are re-normalized when
// `stats` is given. Non-targets are untouched. Throws DataError for a target
// absent from the window.
std::vector<MarketFrame> inject_shock(std::span<const MarketFrame> frames, const ShockSpec& spec,
                                      const NormalizationStats* stats = nullptr);

// DCG over the first `k` ranked items with gain / log2(position + 1), divided
// by the DCG of the ideal ordering of `gains`. 0 when every gain is 0.
double ndcg_at_k(const std::vector<std::string>& ranking, const std::map<std::string, double>& gains,
                 std::size_t k);
inline double ndcg_at_10(const std::vector<std::string>& ranking,
                         const std::map<std::string, double>& gains) {
  return ndcg_at_k(ranking, gains, 10);
}

// Sum of the next `horizon` daily log returns after `date`, for each asset
// present on all of those frames.
std::map<std::string, double> forward_returns(std::span<const MarketFrame> frames, Date date,
                                              int horizon);

// Gain 4 for the top fifth of forward returns down to 0 for the bottom fifth
// (ties ordered by asset id).
std::map<std::string, double> quintile_gains(const std::map<std::string, double>& forward);

// Population std across trials of the mean of each trial's top-10 scores.
// `top_scores[t]` holds trial t's scores in rank order. Needs >= 2 trials.
double top10_volatility(const std::vector<std::vector<double>>& top_scores);

// Mean over trials of the population std within each top-10 list.
double within_list_volatility(const std::vector<std::vector<double>>& top_scores);

struct TrialResult {
  int id = 0;
  std::uint64_t shock_seed = 0;
  std::set<std::string> targets;
  std::vector<std::string> baseline_ranking;
  std::vector<std::string> perturbed_ranking;
  std::vector<ScoreEntry> perturbed_scores;
  std::map<std::string, RcaOutcome> rca;
  double ndcg = 0.0;
  bool hit = false;
  std::optional<std::string> error;
  std::optional<DayResult> day;  // perturbed run, for artifact export
};

struct MetricsReport {
  Date date;
  std::string mode;
  int trials = 0;
  int failed_trials = 0;
  double ndcg_at_10 = 0.0;           // mean over completed trials
  double baseline_ndcg_at_10 = 0.0;  // unperturbed ranking
  std::optional<double> top10_volatility;
  std::optional<double> within_list_volatility;
  std::optional<double> rca_fidelity;
  std::string config_hash;
};

struct ProtocolResult {
  MetricsReport metrics;
  DayResult baseline;
  std::vector<TrialResult> trials;
};

// Last frame date with `horizon` forward frames, or config.eval.date.
Date evaluation_date(const PipelineConfig& config, const Dataset& data);

// Baseline run once, then per trial: sample targets (seeded), inject the shock,
// rerun the day and collect ranking, scores and RCA. Control mode skips the
// injection so the perturbed run equals the baseline.
ProtocolResult run_protocol(const PipelineConfig& config, const Dataset& data);

nlohmann::json metrics_json(const MetricsReport& report);
std::string trials_csv(const ProtocolResult& result);
std::string summary_markdown(const ProtocolResult& result);

// metrics.json, trials.csv, summary.md, baseline/ and trials/<id>/ under `dir`.
void write_protocol(const ProtocolResult& result, const std::filesystem::path& dir,
                    const PipelineConfig& config);

struct SweepRow {
  double value = 0.0;
  MetricsReport metrics;
};

struct SweepResult {
  std::string parameter;  // "alpha" or "theta"
  std::vector<SweepRow> rows;
};

// One run_protocol per value with every other setting fixed.
SweepResult sensitivity_sweep(const PipelineConfig& config, const Dataset& data,
                              const std::string& parameter, const std::vector<double>& values);

std::string sweep_markdown(const SweepResult& sweep);
std::string sweep_csv(const SweepResult& sweep, const std::string& config_hash);

// Deterministic helpers over mt19937_64 (the standard distributions are not
// portable across library implementations).
double uniform01(std::mt19937_64& rng);
double standard_normal(std::mt19937_64& rng);
std::vector<std::string> sample_without_replacement(std::vector<std::string> pool, std::size_t n,
                                                    std::mt19937_64& rng);

}  // namespace rfr
