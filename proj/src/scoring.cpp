#include "rfr/scoring.hpp"

#include <algorithm>
#include <cmath>

#include <spdlog/spdlog.h>

#include "rfr/errors.hpp"

namespace rfr {

std::optional<ReturnForecast> momentum_forecast(std::span<const MarketFrame> trailing,
                                                const std::string& asset, int horizon) {
  if (horizon < 1) throw ConfigError("forecast horizon must be at least 1");
  std::vector<double> returns;
  for (auto it = trailing.rbegin();
       it != trailing.rend() && returns.size() < static_cast<std::size_t>(horizon); ++it) {
    if (const auto* day = it->find(asset)) returns.push_back(day->raw.log_return);
  }
  if (returns.size() < static_cast<std::size_t>(horizon)) return std::nullopt;
  double sum = 0.0;
  for (auto it = returns.rbegin(); it != returns.rend(); ++it) sum += *it;
  const double mean = sum / static_cast<double>(horizon);
  return ReturnForecast{asset, horizon, mean * static_cast<double>(horizon)};
}

double raw_risk_exposure(const WeightedGraph& graph, const std::string& asset,
                         const DeltaMap& delta) {
  const auto node = graph.index_of(asset);
  if (!node) throw DataError("asset " + asset + " is not in the graph");
  double rho = 0.0;
  for (const auto& inc : graph.incident(*node)) {
    auto it = delta.find(graph.edge_id(inc.edge));
    if (it != delta.end()) rho += std::abs(it->second);
  }
  return rho;
}

std::vector<RiskExposure> risk_exposures(const WeightedGraph& graph,
                                         const std::vector<std::string>& assets,
                                         const DeltaMap& delta) {
  std::vector<RiskExposure> out;
  double max_raw = 0.0;
  for (const auto& a : assets) {
    out.push_back({a, raw_risk_exposure(graph, a, delta), 0.0});
    max_raw = std::max(max_raw, out.back().raw);
  }
  if (max_raw > 0.0) {
    for (auto& r : out) r.normalized = r.raw / max_raw;
  }
  return out;
}

double score(double r_hat, double normalized_risk, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("alpha must lie in [0, 1]");
  return alpha * r_hat - (1.0 - alpha) * normalized_risk;
}

double lambda_score(double r_hat, double raw_risk, double lambda) {
  if (!(lambda > 0.0)) throw ConfigError("lambda must be positive");
  return r_hat - lambda * raw_risk;
}

std::string_view to_string(ScoringForm form) {
  return form == ScoringForm::Alpha ? "alpha" : "lambda";
}

ScoringForm scoring_form_from_string(std::string_view text) {
  if (text == "alpha") return ScoringForm::Alpha;
  if (text == "lambda") return ScoringForm::Lambda;
  throw ConfigError("unknown scoring form '" + std::string(text) + "' (expected alpha or lambda)");
}

void rank_entries(std::vector<ScoreEntry>& entries) {
  std::sort(entries.begin(), entries.end(), [](const ScoreEntry& a, const ScoreEntry& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.asset < b.asset;
  });
  for (std::size_t i = 0; i < entries.size(); ++i) entries[i].rank = static_cast<int>(i) + 1;
}

ScoreBoard build_scoreboard(Date date,
                            const std::map<std::string, std::optional<ReturnForecast>>& forecasts,
                            const std::vector<RiskExposure>& exposures,
                            const ScoringOptions& options) {
  ScoreBoard board;
  board.date = date;
  board.form = options.form;
  board.alpha = options.alpha;
  board.lambda = options.lambda;
  std::map<std::string, const RiskExposure*> by_asset;
  for (const auto& r : exposures) by_asset[r.asset] = &r;
  for (const auto& [asset, forecast] : forecasts) {
    if (!forecast) {
      board.excluded.emplace_back(asset, "insufficient history for a forecast");
      spdlog::debug("{}: {} excluded from ranking (no forecast)", date.str(), asset);
      continue;
    }
    auto it = by_asset.find(asset);
    const double raw = it == by_asset.end() ? 0.0 : it->second->raw;
    const double normalized = it == by_asset.end() ? 0.0 : it->second->normalized;
    ScoreEntry entry;
    entry.asset = asset;
    entry.r_hat = forecast->r_hat;
    if (options.form == ScoringForm::Alpha) {
      entry.risk = normalized;
      entry.score = score(entry.r_hat, normalized, options.alpha);
    } else {
      entry.risk = raw;
      entry.score = lambda_score(entry.r_hat, raw, options.lambda);
    }
    board.entries.push_back(std::move(entry));
  }
  rank_entries(board.entries);
  return board;
}

std::vector<std::string> top_k(const ScoreBoard& board, int k) {
  if (k < 1) throw ConfigError("K must be at least 1");
  const std::size_t n = std::min(board.entries.size(), static_cast<std::size_t>(k));
  if (n < static_cast<std::size_t>(k)) {
    spdlog::debug("{}: requested top {} but only {} assets are ranked", board.date.str(), k, n);
  }
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(board.entries[i].asset);
  return out;
}

}  // namespace rfr
