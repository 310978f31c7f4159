#include "rfr/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>

#include <spdlog/spdlog.h>

#include "rfr/digest.hpp"
#include "rfr/errors.hpp"

namespace rfr {

using nlohmann::json;
namespace fs = std::filesystem;

Dataset load_dataset(const PipelineConfig& config) {
  Dataset data;
  auto path_of = [&](const std::string& p) { return config.resolve(p); };
  auto digest = [&](const char* name, const std::string& p) {
    if (!p.empty()) data.digests[name] = sha256_file(path_of(p));
  };
  digest("prices", config.data.prices);
  digest("sentiment", config.data.sentiment);
  digest("macro", config.data.macro);
  digest("knowledge", config.data.knowledge);
  digest("embeddings", config.data.embeddings);
  digest("comentions", config.data.comentions);

  const auto prices = load_prices(path_of(config.data.prices));
  std::vector<SentimentRecord> sentiment;
  if (!config.data.sentiment.empty()) sentiment = load_sentiment(path_of(config.data.sentiment));
  std::vector<MacroRecord> macro;
  if (!config.data.macro.empty()) macro = load_macro(path_of(config.data.macro));
  data.panel = align_market(prices, sentiment, macro, config.universe);

  Date train_end;
  if (config.train_end) {
    train_end = *config.train_end;
  } else {
    // The warm-up window doubles as the training period: the first W returns
    // end at calendar day W.
    const auto& cal = data.panel.calendar;
    if (cal.size() < 2) throw DataError("price data needs at least two trading days");
    train_end = cal[std::min(cal.size() - 1, static_cast<std::size_t>(config.history_window))];
  }
  data.stats = training_stats(data.panel, train_end);
  data.frames = build_frames(data.panel, data.stats);
  if (data.frames.empty()) throw DataError("price data yields no return frames");

  if (!config.data.embeddings.empty()) {
    data.sources.embeddings = EmbeddingTable::load(path_of(config.data.embeddings));
  }
  if (!config.data.comentions.empty()) {
    data.sources.comentions = load_comentions(path_of(config.data.comentions));
  }
  if (!config.data.knowledge.empty()) {
    data.sources.knowledge = load_knowledge(path_of(config.data.knowledge));
  }
  spdlog::debug("dataset: {} frames from {} to {}", data.frames.size(),
                data.frames.front().date.str(), data.frames.back().date.str());
  return data;
}

std::size_t frame_index(std::span<const MarketFrame> frames, Date date) {
  auto it = std::lower_bound(frames.begin(), frames.end(), date,
                             [](const MarketFrame& f, Date d) { return f.date < d; });
  if (it == frames.end() || it->date != date) {
    throw DataError(date.str() + " is not a trading day of the dataset");
  }
  return static_cast<std::size_t>(it - frames.begin());
}

void require_warmup(const PipelineConfig& config, std::span<const MarketFrame> frames,
                    std::size_t index) {
  const auto need = static_cast<std::size_t>(config.history_window);
  if (index + 1 < need) {
    throw DataError(frames[index].date.str() + " is inside the history warm-up: W=" +
                    std::to_string(need) + " trailing frames are required, " +
                    std::to_string(index + 1) + " available");
  }
}

std::vector<Date> eligible_dates(const PipelineConfig& config, std::span<const MarketFrame> frames) {
  std::vector<Date> out;
  const auto need = static_cast<std::size_t>(config.history_window);
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const Date d = frames[i].date;
    if (config.start && d < *config.start) continue;
    if (config.end && d > *config.end) continue;
    if (i + 1 < need) continue;
    out.push_back(d);
  }
  return out;
}

ScoreBoard score_day(const PipelineConfig& config, std::span<const MarketFrame> frames,
                     const FinGraph& graph, const DeltaMap& delta, Date date) {
  const std::size_t index = frame_index(frames, date);
  const auto trailing = frames.first(index + 1);
  const WeightedGraph wg = graph.collapse();
  const MomentumForecaster forecaster;
  std::map<std::string, std::optional<ReturnForecast>> forecasts;
  std::vector<std::string> assets;
  for (const auto& id : graph.assets()) {
    assets.push_back(id);
    forecasts[id] = forecaster.forecast(trailing, id, config.horizon);
  }
  return build_scoreboard(date, forecasts, risk_exposures(wg, assets, delta),
                          config.scoring_options());
}

namespace {

template <typename F>
auto stage(const char* name, std::vector<std::pair<std::string, double>>& timings, F&& body) {
  const auto t0 = std::chrono::steady_clock::now();
  try {
    if constexpr (std::is_void_v<decltype(body())>) {
      body();
      timings.emplace_back(name, std::chrono::duration<double, std::milli>(
                                     std::chrono::steady_clock::now() - t0)
                                     .count());
    } else {
      auto out = body();
      timings.emplace_back(name, std::chrono::duration<double, std::milli>(
                                     std::chrono::steady_clock::now() - t0)
                                     .count());
      return out;
    }
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

}  // namespace

DayResult run_day(const PipelineConfig& config, std::span<const MarketFrame> frames,
                  const GraphSources& sources, Date date, const std::set<std::string>& perturbed) {
  DayResult day;
  day.date = date;
  const std::size_t index = stage("history", day.stage_ms, [&] {
    const std::size_t i = frame_index(frames, date);
    require_warmup(config, frames, i);
    return i;
  });
  const auto history = frames.first(index + 1);
  day.frame = history.back();
  const AssemblyOptions assembly = config.assembly_options();

  stage("graph", day.stage_ms, [&] {
    GraphBuild build = build_graph(history, date, sources, assembly);
    day.graph = std::move(build.graph);
    day.skipped = std::move(build.skipped);
    if (day.graph.edges().empty()) throw ComputeError("graph for " + date.str() + " has no edges");
  });
  const WeightedGraph wg = day.graph.collapse();

  stage("curvature", day.stage_ms, [&] {
    day.curvature = curvature_map(wg, date, config.curvature_options());
  });

  stage("flow", day.stage_ms, [&] {
    day.flow = simulate_flow(wg, date, config.flow_config());
    day.delta.date = date;
    if (config.shift_source == ShiftSource::Flow) {
      day.delta.source = "flow";
      day.delta.delta = day.flow.delta;
      return;
    }
    // Shift against the snapshot `horizon` frames earlier.
    const auto h = static_cast<std::size_t>(config.horizon);
    if (index < h) throw DataError("no snapshot " + std::to_string(h) + " frames before " + date.str());
    require_warmup(config, frames, index - h);
    const auto prev_history = frames.first(index - h + 1);
    const GraphBuild prev = build_graph(prev_history, prev_history.back().date, sources, assembly);
    const CurvatureMap prev_curv =
        curvature_map(prev.graph.collapse(), prev_history.back().date, config.curvature_options());
    CurvatureShift shift = cross_day_shift(prev_curv, day.curvature);
    day.delta.source = "cross_day";
    day.delta.delta = std::move(shift.delta);
    day.delta.born = std::move(shift.born);
    day.delta.died = std::move(shift.died);
  });

  stage("zone", day.stage_ms, [&] {
    day.zone = unstable_zone(wg, date, day.delta.delta, config.theta);
  });

  stage("score", day.stage_ms, [&] {
    day.board = score_day(config, frames, day.graph, day.delta.delta, date);
  });

  stage("top_k", day.stage_ms, [&] { day.top = top_k(day.board, config.k); });

  stage("rca", day.stage_ms, [&] {
    day.rca.date = date;
    day.rca.perturbed = perturbed;
    day.rca.reports =
        rca_report(wg, day.top, day.zone, perturbed, day.delta.delta, config.rca_params());
  });
  return day;
}

std::map<std::string, std::string> write_day(const DayResult& day, const fs::path& dir,
                                             const PipelineConfig& config) {
  const std::string hash = config_hash(config);
  std::map<std::string, std::string> digests;
  auto put = [&](const char* name, const std::string& content) {
    write_atomic(dir / name, content);
    digests[name] = sha256_hex(content);
  };
  put(DayFiles::kFrame, dump(frame_json(day.frame, hash)));
  put(DayFiles::kGraph, dump(graph_json(day.graph, hash)));
  put(DayFiles::kCurvature, curvature_csv(day.curvature, hash));
  put(DayFiles::kFlow, dump(flow_json(day.flow, hash)));
  put(DayFiles::kDelta, delta_csv(day.delta, hash));
  put(DayFiles::kZone, dump(zone_json(day.zone, config.theta, hash)));
  put(DayFiles::kScoreboard, scoreboard_csv(day.board, hash));
  put(DayFiles::kRanking, ranking_csv(day.board, config.k, hash));
  put(DayFiles::kRca, dump(rca_json(day.rca, hash)));
  put(DayFiles::kRcaDot, rca_dot(day.rca));
  return digests;
}

RangeResult run_range(const PipelineConfig& config, const Dataset& data,
                      const std::vector<Date>& dates, const fs::path& run_dir) {
  if (!std::is_sorted(dates.begin(), dates.end())) {
    throw ConfigError("run_range dates must be sorted ascending");
  }
  const std::string hash = config_hash(config);
  RangeResult result;
  json days = json::array();
  json timing_days = json::array();
  std::map<std::size_t, CurvatureMap> snapshots;  // frame index -> curvature

  for (const Date date : dates) {
    const fs::path rel = fs::path("days") / date.str();
    json entry{{"date", date.str()}, {"dir", rel.generic_string()}};
    json t{{"date", date.str()}};
    try {
      DayResult day = run_day(config, data.frames, data.sources, date);
      const auto digests = write_day(day, run_dir / rel, config);
      entry["status"] = "ok";
      entry["outputs"] = digests;
      json stages = json::object();
      for (const auto& [name, ms] : day.stage_ms) stages[name] = ms;
      t["stages_ms"] = std::move(stages);
      snapshots[frame_index(data.frames, date)] = std::move(day.curvature);
    } catch (const StageError& e) {
      spdlog::error("{}: stage {} failed: {}", date.str(), e.stage(), e.what());
      entry["status"] = "failed";
      entry["stage"] = e.stage();
      entry["error"] = e.what();
      result.failures.emplace_back(date, e.what());
    } catch (const std::exception& e) {
      spdlog::error("{}: {}", date.str(), e.what());
      entry["status"] = "failed";
      entry["stage"] = "write";
      entry["error"] = e.what();
      result.failures.emplace_back(date, std::string("write: ") + e.what());
    }
    days.push_back(std::move(entry));
    timing_days.push_back(std::move(t));
  }

  json cross = json::array();
  if (config.cross_day_shift) {
    const auto h = static_cast<std::size_t>(config.horizon);
    for (const auto& [index, curr] : snapshots) {
      if (index < h) continue;
      auto prev = snapshots.find(index - h);
      if (prev == snapshots.end()) continue;
      CurvatureShift shift = cross_day_shift(prev->second, curr);
      DeltaTable table{curr.date, "cross_day", std::move(shift.delta), std::move(shift.born),
                       std::move(shift.died)};
      const std::string content = delta_csv(table, hash);
      const fs::path rel = fs::path("cross_day") / (curr.date.str() + ".csv");
      write_atomic(run_dir / rel, content);
      cross.push_back({{"date", curr.date.str()},
                       {"prev", prev->second.date.str()},
                       {"file", rel.generic_string()},
                       {"sha256", sha256_hex(content)}});
    }
  }

  result.manifest = {{"schema", "manifest"},
                     {"schema_version", kSchemaVersion},
                     {"config_hash", hash},
                     {"config", to_json(config)},
                     {"inputs", data.digests},
                     {"days", std::move(days)},
                     {"cross_day", std::move(cross)},
                     {"failed_days", result.failures.size()}};
  result.timing = {{"schema", "timing"},
                   {"schema_version", kSchemaVersion},
                   {"config_hash", hash},
                   {"days", std::move(timing_days)}};
  write_atomic(run_dir / "manifest.json", dump(result.manifest));
  write_atomic(run_dir / "timing.json", dump(result.timing));
  return result;
}

fs::path default_run_dir(const PipelineConfig& config) {
  const char* root = std::getenv("RFR_RUN_ROOT");
  return fs::path(root && *root ? root : "runs") / config.run_name;
}

}  // namespace rfr
