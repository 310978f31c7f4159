#pragma once

#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rfr/date.hpp"
#include "rfr/graph.hpp"
#include "rfr/market_data.hpp"
#include "rfr/rca.hpp"

namespace rfr {

struct ReturnForecast {
  std::string asset;
  int horizon = 5;
  double r_hat = 0.0;
};

// Pluggable base forecaster. Returns nothing when the asset lacks history.
class Forecaster {
 public:
  virtual ~Forecaster() = default;
  virtual std::string_view name() const = 0;
  virtual std::optional<ReturnForecast> forecast(std::span<const MarketFrame> trailing,
                                                 const std::string& asset,
                                                 int horizon) const = 0;
};

// r_hat = horizon * mean of the asset's last `horizon` daily log returns.
std::optional<ReturnForecast> momentum_forecast(std::span<const MarketFrame> trailing,
                                                const std::string& asset, int horizon);

class MomentumForecaster final : public Forecaster {
 public:
  std::string_view name() const override { return "momentum"; }
  std::optional<ReturnForecast> forecast(std::span<const MarketFrame> trailing,
                                         const std::string& asset, int horizon) const override {
    return momentum_forecast(trailing, asset, horizon);
  }
};

struct RiskExposure {
  std::string asset;
  double raw = 0.0;         // sum of |delta| over incident edges
  double normalized = 0.0;  // raw / max raw of the day, 0 when all are 0
};

double raw_risk_exposure(const WeightedGraph& graph, const std::string& asset, const DeltaMap& delta);

// Exposure of each asset, normalized by the day's maximum.
std::vector<RiskExposure> risk_exposures(const WeightedGraph& graph,
                                         const std::vector<std::string>& assets,
                                         const DeltaMap& delta);

// s = alpha * r_hat - (1 - alpha) * risk, alpha in [0, 1].
double score(double r_hat, double normalized_risk, double alpha);

// s = r_hat - lambda * rho with raw exposure rho, lambda > 0.
double lambda_score(double r_hat, double raw_risk, double lambda);

enum class ScoringForm { Alpha, Lambda };

std::string_view to_string(ScoringForm form);
ScoringForm scoring_form_from_string(std::string_view text);

struct ScoringOptions {
  ScoringForm form = ScoringForm::Alpha;
  double alpha = 0.7;
  double lambda = 1.0;
};

struct ScoreEntry {
  std::string asset;
  double r_hat = 0.0;
  double risk = 0.0;  // normalized (alpha form) or raw (lambda form)
  double score = 0.0;
  int rank = 0;       // 1-based
};

struct ScoreBoard {
  Date date;
  ScoringForm form = ScoringForm::Alpha;
  double alpha = 0.7;
  double lambda = 1.0;
  std::vector<ScoreEntry> entries;  // in rank order
  std::vector<std::pair<std::string, std::string>> excluded;  // (asset, reason)
};

// Scores every asset with a forecast; the rest are listed as excluded. Entries
// are sorted by score descending, ties by asset id.
// Assets missing from `exposures` carry zero risk.
ScoreBoard build_scoreboard(Date date,
                            const std::map<std::string, std::optional<ReturnForecast>>& forecasts,
                            const std::vector<RiskExposure>& exposures,
                            const ScoringOptions& options);

// Orders entries and assigns ranks.
void rank_entries(std::vector<ScoreEntry>& entries);

// The K best assets (fewer when the board is smaller).
std::vector<std::string> top_k(const ScoreBoard& board, int k);

}  // namespace rfr
