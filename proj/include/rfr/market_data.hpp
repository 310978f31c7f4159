#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rfr/date.hpp"

namespace rfr {

struct PriceRecord {
  Date date;
  std::string ticker;
  double close = 0.0;
  long long volume = 0;
};

struct SentimentRecord {
  Date date;
  std::string ticker;
  double polarity = 0.0;
};

struct MacroRecord {
  Date date;
  std::string indicator_id;
  double value = 0.0;
};

// CSV loaders. Each validates the header, the per-row invariants and the
// uniqueness of the key; errors carry the offending line number. Output is
// sorted by (date, id).
std::vector<PriceRecord> load_prices(const std::filesystem::path& path);
std::vector<SentimentRecord> load_sentiment(const std::filesystem::path& path);
std::vector<MacroRecord> load_macro(const std::filesystem::path& path);

struct LogReturns {
  std::map<std::pair<Date, std::string>, double> values;
  // Tickers with a single trading day; they contribute no return rows.
  std::vector<std::string> insufficient_history;
};

// ln(close_t / close_{t-1}) over each ticker's consecutive trading days.
LogReturns compute_log_returns(std::span<const PriceRecord> prices);

inline constexpr std::size_t kVolatilityWindow = 30;

// Population standard deviation over the trailing `window` returns. Entry i is
// empty until `window` returns are available.
std::vector<std::optional<double>> rolling_volatility(std::span<const double> returns,
                                                      std::size_t window = kVolatilityWindow);

// Mean polarity for (date, ticker); 0 when nothing was recorded.
double aggregate_sentiment(std::span<const SentimentRecord> records, Date date,
                           std::string_view ticker);

enum class EntityKind { Asset, MacroIndicator };

std::string_view to_string(EntityKind kind);
EntityKind entity_kind_from_string(std::string_view text);

// Untransformed per-day values. For macro indicators `log_return` holds the
// first difference of the indicator value and volume is zero.
struct RawFeatures {
  double close = 0.0;
  double log_return = 0.0;
  std::optional<double> realised_vol;
  double volume = 0.0;
  double sentiment = 0.0;
};

// Model-facing features: z-scored with training statistics, sentiment kept in
// [-1, 1]. A volatility that is not yet defined maps to 0.
struct FeatureVector {
  double log_return = 0.0;
  double realised_vol = 0.0;
  double volume_z = 0.0;
  double sentiment = 0.0;
};

struct EntityDay {
  EntityKind kind = EntityKind::Asset;
  RawFeatures raw;
  FeatureVector features;
};

struct MarketFrame {
  Date date;
  std::map<std::string, EntityDay> entities;

  const EntityDay* find(const std::string& id) const;
};

struct FeatureStats {
  double mean = 0.0;
  double std = 1.0;

  // Zero std yields 0 so a degenerate feature stays rank-neutral.
  double z(double x) const { return std > 0.0 ? (x - mean) / std : 0.0; }
};

struct EntityStats {
  FeatureStats log_return;
  FeatureStats realised_vol;
  FeatureStats volume;
};

struct NormalizationStats {
  Date train_end;
  std::map<std::string, EntityStats> per_entity;
};

FeatureVector normalize(const RawFeatures& raw, const EntityStats& stats);

// Price, sentiment and macro inputs aligned on the trading calendar (the
// distinct price dates). A ticker-day with no price is forward-filled for up to
// `kForwardFillLimit` consecutive days and absent afterwards.
struct MarketPanel {
  struct Series {
    EntityKind kind = EntityKind::Asset;
    std::vector<std::optional<RawFeatures>> days;  // parallel to calendar
  };

  std::vector<Date> calendar;
  std::map<std::string, Series> series;

  std::optional<std::size_t> index_of(Date date) const;
};

inline constexpr int kForwardFillLimit = 5;

// `universe` lists the asset tickers to keep; empty means every ticker in the
// price file. Throws DataError if a universe ticker has no prices at all.
MarketPanel align_market(std::span<const PriceRecord> prices,
                         std::span<const SentimentRecord> sentiments,
                         std::span<const MacroRecord> macros,
                         const std::vector<std::string>& universe);

// Per-entity mean/std of each z-scored feature over calendar days <= train_end.
NormalizationStats training_stats(const MarketPanel& panel, Date train_end);

// One frame per calendar day on which at least one entity has a return.
std::vector<MarketFrame> build_frames(const MarketPanel& panel, const NormalizationStats& stats);

std::vector<MarketFrame> build_frames(std::span<const PriceRecord> prices,
                                      std::span<const SentimentRecord> sentiments,
                                      std::span<const MacroRecord> macros,
                                      const std::vector<std::string>& universe,
                                      const NormalizationStats& stats);

// Frames restricted to [from, to]. Throws DataError when `from` precedes the
// first frame.
std::vector<MarketFrame> frames_in_range(const std::vector<MarketFrame>& frames, Date from,
                                         Date to);

}  // namespace rfr
