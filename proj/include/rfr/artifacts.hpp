#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "rfr/curvature.hpp"
#include "rfr/graph.hpp"
#include "rfr/market_data.hpp"
#include "rfr/rca.hpp"
#include "rfr/ricci_flow.hpp"
#include "rfr/scoring.hpp"

namespace rfr {

inline constexpr int kSchemaVersion = 1;

// Every artifact names its schema and the hash of the config that produced it.
// JSON files carry `schema`, `schema_version` and `config_hash` members; CSV
// files start with a `# schema=<name>/<version> config_hash=<hash> ...` line.
struct Stamp {
  std::string schema;
  int version = kSchemaVersion;
  std::string config_hash;
  std::map<std::string, std::string> extra;  // further key=value pairs of the CSV stamp line
};

// Writes to a sibling temp file and renames it over `path`.
void write_atomic(const std::filesystem::path& path, std::string_view content);
std::string read_file(const std::filesystem::path& path);

// Throws DataError with the expected schema when `stamp` does not match.
void expect_schema(const Stamp& stamp, std::string_view schema, const std::filesystem::path& path);

// Throws DataError unless all hashes agree.
void expect_same_hash(const std::vector<std::pair<std::filesystem::path, std::string>>& inputs);

template <typename T>
struct Stamped {
  T value;
  Stamp stamp;
};

// One document per day: entity id -> kind, raw values and model features.
nlohmann::json frame_json(const MarketFrame& frame, const std::string& config_hash);

nlohmann::json graph_json(const FinGraph& graph, const std::string& config_hash);
FinGraph graph_from_json(const nlohmann::json& j);
Stamped<FinGraph> read_graph(const std::filesystem::path& path);

std::string curvature_csv(const CurvatureMap& map, const std::string& config_hash);
Stamped<CurvatureMap> read_curvature(const std::filesystem::path& path);

nlohmann::json flow_json(const FlowTrace& trace, const std::string& config_hash);
Stamped<FlowTrace> read_flow(const std::filesystem::path& path);

struct DeltaTable {
  Date date;
  std::string source;  // "flow" or "cross_day"
  DeltaMap delta;
  std::vector<EdgeId> born;
  std::vector<EdgeId> died;
};

std::string delta_csv(const DeltaTable& table, const std::string& config_hash);
Stamped<DeltaTable> read_delta(const std::filesystem::path& path);

nlohmann::json zone_json(const UnstableZone& zone, double theta, const std::string& config_hash);
Stamped<UnstableZone> read_zone(const std::filesystem::path& path);

std::string scoreboard_csv(const ScoreBoard& board, const std::string& config_hash);
Stamped<ScoreBoard> read_scoreboard(const std::filesystem::path& path);

std::string ranking_csv(const ScoreBoard& board, int k, const std::string& config_hash);

struct Ranking {
  Date date;
  std::vector<std::string> assets;  // best first
};
Stamped<Ranking> read_ranking(const std::filesystem::path& path);

struct RcaBundle {
  Date date;
  std::set<std::string> perturbed;
  std::map<std::string, RcaOutcome> reports;
};

nlohmann::json rca_json(const RcaBundle& bundle, const std::string& config_hash);
Stamped<RcaBundle> read_rca(const std::filesystem::path& path);

// One cluster per asset holding its RCA path; terminals are highlighted.
std::string rca_dot(const RcaBundle& bundle);

nlohmann::json read_json(const std::filesystem::path& path);
Stamp json_stamp(const nlohmann::json& j);
// Serialized JSON as written to disk (two-space indent, trailing newline).
std::string dump(const nlohmann::json& j);

std::string stamp_line(const Stamp& stamp);
Stamp parse_stamp(const std::vector<std::string>& comments, const std::filesystem::path& path);

}  // namespace rfr
