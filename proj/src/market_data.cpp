#include "rfr/market_data.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "rfr/csv.hpp"
#include "rfr/errors.hpp"

namespace rfr {

namespace {

Date parse_date_field(const csv::Row& row, std::size_t col, const std::filesystem::path& path) {
  try {
    return Date::parse(row.fields[col]);
  } catch (const DataError& e) {
    throw DataError(path.string() + ":" + std::to_string(row.line) + ": " + e.what());
  }
}

void require_id(const csv::Row& row, std::size_t col, const std::filesystem::path& path) {
  if (row.fields[col].empty()) {
    throw DataError(path.string() + ":" + std::to_string(row.line) + ": empty entity id");
  }
}

[[noreturn]] void fail_row(const std::filesystem::path& path, std::size_t line,
                           const std::string& what) {
  throw DataError(path.string() + ":" + std::to_string(line) + ": " + what);
}

struct Moments {
  double mean = 0.0;
  double std = 0.0;
};

Moments population_moments(std::span<const double> xs) {
  if (xs.empty()) return {};
  double sum = 0.0;
  for (double x : xs) sum += x;
  const double mean = sum / static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / static_cast<double>(xs.size()))};
}

}  // namespace

std::vector<PriceRecord> load_prices(const std::filesystem::path& path) {
  const auto table = csv::read(path, {"date", "ticker", "close", "volume"});
  std::vector<PriceRecord> out;
  out.reserve(table.rows.size());
  for (const auto& row : table.rows) {
    PriceRecord rec;
    rec.date = parse_date_field(row, 0, path);
    require_id(row, 1, path);
    rec.ticker = row.fields[1];
    try {
      rec.close = csv::parse_double(row.fields[2], row.line, "close");
      rec.volume = csv::parse_int(row.fields[3], row.line, "volume");
    } catch (const DataError& e) {
      throw DataError(path.string() + ": " + e.what());
    }
    if (!(rec.close > 0.0)) fail_row(path, row.line, "non-positive close " + row.fields[2]);
    if (rec.volume < 0) fail_row(path, row.line, "negative volume " + row.fields[3]);
    out.push_back(std::move(rec));
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return std::tie(a.date, a.ticker) < std::tie(b.date, b.ticker);
  });
  for (std::size_t i = 1; i < out.size(); ++i) {
    if (out[i].date == out[i - 1].date && out[i].ticker == out[i - 1].ticker) {
      throw DataError(path.string() + ": duplicate price for (" + out[i].date.str() + ", " +
                      out[i].ticker + ")");
    }
  }
  return out;
}

std::vector<SentimentRecord> load_sentiment(const std::filesystem::path& path) {
  const auto table = csv::read(path, {"date", "ticker", "polarity"});
  std::vector<SentimentRecord> out;
  out.reserve(table.rows.size());
  for (const auto& row : table.rows) {
    SentimentRecord rec;
    rec.date = parse_date_field(row, 0, path);
    require_id(row, 1, path);
    rec.ticker = row.fields[1];
    try {
      rec.polarity = csv::parse_double(row.fields[2], row.line, "polarity");
    } catch (const DataError& e) {
      throw DataError(path.string() + ": " + e.what());
    }
    if (rec.polarity < -1.0 || rec.polarity > 1.0) {
      fail_row(path, row.line, "polarity " + row.fields[2] + " outside [-1, 1]");
    }
    out.push_back(std::move(rec));
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return std::tie(a.date, a.ticker) < std::tie(b.date, b.ticker);
  });
  return out;
}

std::vector<MacroRecord> load_macro(const std::filesystem::path& path) {
  const auto table = csv::read(path, {"date", "indicator_id", "value"});
  std::vector<MacroRecord> out;
  out.reserve(table.rows.size());
  for (const auto& row : table.rows) {
    MacroRecord rec;
    rec.date = parse_date_field(row, 0, path);
    require_id(row, 1, path);
    rec.indicator_id = row.fields[1];
    try {
      rec.value = csv::parse_double(row.fields[2], row.line, "value");
    } catch (const DataError& e) {
      throw DataError(path.string() + ": " + e.what());
    }
    out.push_back(std::move(rec));
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return std::tie(a.date, a.indicator_id) < std::tie(b.date, b.indicator_id);
  });
  for (std::size_t i = 1; i < out.size(); ++i) {
    if (out[i].date == out[i - 1].date && out[i].indicator_id == out[i - 1].indicator_id) {
      throw DataError(path.string() + ": indicator " + out[i].indicator_id +
                      " has more than one value on " + out[i].date.str());
    }
  }
  return out;
}

LogReturns compute_log_returns(std::span<const PriceRecord> prices) {
  std::map<std::string, std::vector<const PriceRecord*>> by_ticker;
  for (const auto& p : prices) by_ticker[p.ticker].push_back(&p);
  LogReturns out;
  for (auto& [ticker, recs] : by_ticker) {
    std::sort(recs.begin(), recs.end(),
              [](const PriceRecord* a, const PriceRecord* b) { return a->date < b->date; });
    if (recs.size() < 2) {
      out.insufficient_history.push_back(ticker);
      continue;
    }
    for (std::size_t i = 1; i < recs.size(); ++i) {
      out.values[{recs[i]->date, ticker}] = std::log(recs[i]->close / recs[i - 1]->close);
    }
  }
  return out;
}

std::vector<std::optional<double>> rolling_volatility(std::span<const double> returns,
                                                      std::size_t window) {
  if (window < 2) throw ConfigError("volatility window must be at least 2");
  std::vector<std::optional<double>> out(returns.size());
  for (std::size_t i = window - 1; i < returns.size(); ++i) {
    out[i] = population_moments(returns.subspan(i + 1 - window, window)).std;
  }
  return out;
}

double aggregate_sentiment(std::span<const SentimentRecord> records, Date date,
                           std::string_view ticker) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& r : records) {
    if (r.date == date && r.ticker == ticker) {
      sum += r.polarity;
      ++n;
    }
  }
  return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

std::string_view to_string(EntityKind kind) {
  switch (kind) {
    case EntityKind::Asset:
      return "asset";
    case EntityKind::MacroIndicator:
      return "macro";
  }
  return "asset";
}

EntityKind entity_kind_from_string(std::string_view text) {
  if (text == "asset") return EntityKind::Asset;
  if (text == "macro") return EntityKind::MacroIndicator;
  throw DataError("unknown entity kind '" + std::string(text) + "'");
}

const EntityDay* MarketFrame::find(const std::string& id) const {
  auto it = entities.find(id);
  return it == entities.end() ? nullptr : &it->second;
}

FeatureVector normalize(const RawFeatures& raw, const EntityStats& stats) {
  FeatureVector f;
  f.log_return = stats.log_return.z(raw.log_return);
  f.realised_vol = raw.realised_vol ? stats.realised_vol.z(*raw.realised_vol) : 0.0;
  f.volume_z = stats.volume.z(raw.volume);
  f.sentiment = std::clamp(raw.sentiment, -1.0, 1.0);
  return f;
}

std::optional<std::size_t> MarketPanel::index_of(Date date) const {
  auto it = std::lower_bound(calendar.begin(), calendar.end(), date);
  if (it == calendar.end() || *it != date) return std::nullopt;
  return static_cast<std::size_t>(it - calendar.begin());
}

namespace {

// Fills realised_vol from the entity's own trailing sequence of returns.
void attach_volatility(MarketPanel::Series& series) {
  std::vector<double> rets;
  std::vector<std::size_t> where;
  for (std::size_t i = 0; i < series.days.size(); ++i) {
    if (series.days[i]) {
      rets.push_back(series.days[i]->log_return);
      where.push_back(i);
    }
  }
  const auto vols = rolling_volatility(rets, kVolatilityWindow);
  for (std::size_t k = 0; k < where.size(); ++k) series.days[where[k]]->realised_vol = vols[k];
}

}  // namespace

MarketPanel align_market(std::span<const PriceRecord> prices,
                         std::span<const SentimentRecord> sentiments,
                         std::span<const MacroRecord> macros,
                         const std::vector<std::string>& universe) {
  MarketPanel panel;
  std::set<Date> days;
  std::map<std::string, std::map<Date, const PriceRecord*>> by_ticker;
  for (const auto& p : prices) {
    days.insert(p.date);
    by_ticker[p.ticker][p.date] = &p;
  }
  panel.calendar.assign(days.begin(), days.end());

  std::vector<std::string> tickers = universe;
  if (tickers.empty()) {
    for (const auto& [t, _] : by_ticker) tickers.push_back(t);
  }
  std::sort(tickers.begin(), tickers.end());
  tickers.erase(std::unique(tickers.begin(), tickers.end()), tickers.end());

  std::map<std::pair<Date, std::string>, std::pair<double, std::size_t>> sentiment_sums;
  for (const auto& s : sentiments) {
    auto& acc = sentiment_sums[{s.date, s.ticker}];
    acc.first += s.polarity;
    acc.second += 1;
  }
  auto sentiment_of = [&](Date d, const std::string& t) {
    auto it = sentiment_sums.find({d, t});
    return it == sentiment_sums.end() ? 0.0
                                      : it->second.first / static_cast<double>(it->second.second);
  };

  const std::size_t n_days = panel.calendar.size();
  for (const auto& ticker : tickers) {
    auto found = by_ticker.find(ticker);
    if (found == by_ticker.end()) throw DataError("ticker " + ticker + " has no prices");
    const auto& quotes = found->second;

    MarketPanel::Series series;
    series.kind = EntityKind::Asset;
    series.days.resize(n_days);
    std::optional<double> prev_close;  // close on the previous calendar day, if present
    double last_volume = 0.0;
    int filled = 0;
    for (std::size_t i = 0; i < n_days; ++i) {
      const Date d = panel.calendar[i];
      std::optional<double> close;
      double volume = 0.0;
      if (auto q = quotes.find(d); q != quotes.end()) {
        close = q->second->close;
        volume = static_cast<double>(q->second->volume);
        filled = 0;
      } else if (prev_close && filled < kForwardFillLimit) {
        close = prev_close;
        volume = last_volume;
        ++filled;
      }
      if (close && prev_close) {
        RawFeatures raw;
        raw.close = *close;
        raw.log_return = std::log(*close / *prev_close);
        raw.volume = volume;
        raw.sentiment = sentiment_of(d, ticker);
        series.days[i] = raw;
      }
      prev_close = close;
      last_volume = volume;
    }
    attach_volatility(series);
    panel.series.emplace(ticker, std::move(series));
  }

  std::map<std::string, std::vector<const MacroRecord*>> by_indicator;
  for (const auto& m : macros) by_indicator[m.indicator_id].push_back(&m);
  for (auto& [id, recs] : by_indicator) {
    if (panel.series.count(id)) {
      throw DataError("macro indicator id " + id + " collides with an asset ticker");
    }
    std::sort(recs.begin(), recs.end(),
              [](const MacroRecord* a, const MacroRecord* b) { return a->date < b->date; });
    MarketPanel::Series series;
    series.kind = EntityKind::MacroIndicator;
    series.days.resize(n_days);
    std::size_t next = 0;
    std::optional<double> as_of, prev;
    for (std::size_t i = 0; i < n_days; ++i) {
      while (next < recs.size() && recs[next]->date <= panel.calendar[i]) {
        as_of = recs[next]->value;
        ++next;
      }
      if (as_of && prev) {
        RawFeatures raw;
        raw.close = *as_of;
        raw.log_return = *as_of - *prev;
        series.days[i] = raw;
      }
      prev = as_of;
    }
    attach_volatility(series);
    panel.series.emplace(id, std::move(series));
  }
  return panel;
}

NormalizationStats training_stats(const MarketPanel& panel, Date train_end) {
  NormalizationStats stats;
  stats.train_end = train_end;
  for (const auto& [id, series] : panel.series) {
    std::vector<double> rets, vols, volumes;
    for (std::size_t i = 0; i < series.days.size() && panel.calendar[i] <= train_end; ++i) {
      if (!series.days[i]) continue;
      rets.push_back(series.days[i]->log_return);
      volumes.push_back(series.days[i]->volume);
      if (series.days[i]->realised_vol) vols.push_back(*series.days[i]->realised_vol);
    }
    EntityStats es;
    auto to_stats = [](const Moments& m) { return FeatureStats{m.mean, m.std}; };
    es.log_return = to_stats(population_moments(rets));
    es.realised_vol = to_stats(population_moments(vols));
    es.volume = to_stats(population_moments(volumes));
    stats.per_entity.emplace(id, es);
  }
  return stats;
}

std::vector<MarketFrame> build_frames(const MarketPanel& panel, const NormalizationStats& stats) {
  std::vector<MarketFrame> frames;
  for (std::size_t i = 0; i < panel.calendar.size(); ++i) {
    MarketFrame frame;
    frame.date = panel.calendar[i];
    for (const auto& [id, series] : panel.series) {
      if (!series.days[i]) continue;
      auto st = stats.per_entity.find(id);
      if (st == stats.per_entity.end()) {
        throw DataError("no normalization statistics for entity " + id);
      }
      EntityDay day;
      day.kind = series.kind;
      day.raw = *series.days[i];
      day.features = normalize(day.raw, st->second);
      frame.entities.emplace(id, day);
    }
    if (!frame.entities.empty()) frames.push_back(std::move(frame));
  }
  return frames;
}

std::vector<MarketFrame> build_frames(std::span<const PriceRecord> prices,
                                      std::span<const SentimentRecord> sentiments,
                                      std::span<const MacroRecord> macros,
                                      const std::vector<std::string>& universe,
                                      const NormalizationStats& stats) {
  return build_frames(align_market(prices, sentiments, macros, universe), stats);
}

std::vector<MarketFrame> frames_in_range(const std::vector<MarketFrame>& frames, Date from,
                                         Date to) {
  if (frames.empty() || from < frames.front().date) {
    throw DataError("requested date " + from.str() + " precedes the available history" +
                    (frames.empty() ? std::string() : " (first frame " + frames.front().date.str() + ")"));
  }
  std::vector<MarketFrame> out;
  for (const auto& f : frames) {
    if (f.date >= from && f.date <= to) out.push_back(f);
  }
  return out;
}

}  // namespace rfr
