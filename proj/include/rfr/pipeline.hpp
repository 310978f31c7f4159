#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "rfr/artifacts.hpp"
#include "rfr/config.hpp"
#include "rfr/graph_builder.hpp"
#include "rfr/market_data.hpp"

namespace rfr {

// A stage of run_day failed; `stage` names it, what() carries the cause.
class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, const std::string& cause)
      : std::runtime_error(stage + ": " + cause), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitConfig = 2,
  kExitData = 3,
  kExitStage = 4,
  kExitPartial = 5,
};

struct Dataset {
  MarketPanel panel;
  NormalizationStats stats;
  std::vector<MarketFrame> frames;
  GraphSources sources;
  // Input name -> SHA-256 of the file, for the manifest.
  std::map<std::string, std::string> digests;
};

// Loads every configured input. Training statistics cover frames up to
// `train_end`, or the first `history_window` frames when it is unset.
Dataset load_dataset(const PipelineConfig& config);

// Index of `date` in `frames`; throws DataError when it is not a frame date.
std::size_t frame_index(std::span<const MarketFrame> frames, Date date);

// Throws DataError naming the warm-up requirement when fewer than
// history_window frames end at `index`.
void require_warmup(const PipelineConfig& config, std::span<const MarketFrame> frames,
                    std::size_t index);

// Frame dates within [start, end] that satisfy the warm-up.
std::vector<Date> eligible_dates(const PipelineConfig& config, std::span<const MarketFrame> frames);

struct DayResult {
  Date date;
  MarketFrame frame;
  FinGraph graph;
  std::vector<SkippedPair> skipped;
  CurvatureMap curvature;  // on the day's graph before any flow
  FlowTrace flow;
  DeltaTable delta;        // the shift used for the zone, risk and RCA
  UnstableZone zone;
  ScoreBoard board;
  std::vector<std::string> top;
  RcaBundle rca;
  std::vector<std::pair<std::string, double>> stage_ms;  // wall time per stage
};

// Graph -> curvature -> flow -> unstable zone -> score -> top-K -> RCA on the
// frames ending at `date`. `perturbed` adds externally flagged RCA targets.
// Stage failures are rethrown as StageError.
DayResult run_day(const PipelineConfig& config, std::span<const MarketFrame> frames,
                  const GraphSources& sources, Date date,
                  const std::set<std::string>& perturbed = {});

// Scores computed from a graph and a shift; shared by run_day and the `score`
// subcommand.
ScoreBoard score_day(const PipelineConfig& config, std::span<const MarketFrame> frames,
                     const FinGraph& graph, const DeltaMap& delta, Date date);

struct DayFiles {
  static constexpr const char* kFrame = "frame.json";
  static constexpr const char* kGraph = "graph.json";
  static constexpr const char* kCurvature = "curvature.csv";
  static constexpr const char* kFlow = "flow.json";
  static constexpr const char* kDelta = "delta.csv";
  static constexpr const char* kZone = "zone.json";
  static constexpr const char* kScoreboard = "scoreboard.csv";
  static constexpr const char* kRanking = "ranking.csv";
  static constexpr const char* kRca = "rca.json";
  static constexpr const char* kRcaDot = "rca.dot";
};

// Writes every artifact of the day under `dir`. Returns file name -> digest.
std::map<std::string, std::string> write_day(const DayResult& day, const std::filesystem::path& dir,
                                             const PipelineConfig& config);

struct RangeResult {
  nlohmann::json manifest;
  nlohmann::json timing;
  std::vector<std::pair<Date, std::string>> failures;  // (date, "stage: cause")
  int exit_code() const { return failures.empty() ? kExitOk : kExitPartial; }
};

// run_day for each date (ascending), writing under `run_dir/days/<date>/`,
// then `manifest.json` and `timing.json` in `run_dir`. A failing day is
// recorded and the run continues.
RangeResult run_range(const PipelineConfig& config, const Dataset& data,
                      const std::vector<Date>& dates, const std::filesystem::path& run_dir);

// $RFR_RUN_ROOT (default ./runs) / run_name.
std::filesystem::path default_run_dir(const PipelineConfig& config);

}  // namespace rfr
