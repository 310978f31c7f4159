#include "rfr/artifacts.hpp"

#include <fstream>
#include <sstream>
#include <system_error>

#include "rfr/csv.hpp"
#include "rfr/errors.hpp"

namespace rfr {

using nlohmann::json;
namespace fs = std::filesystem;

void write_atomic(const fs::path& path, std::string_view content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write '" + tmp.string() + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw DataError("short write to '" + tmp.string() + "'");
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw DataError("cannot move '" + tmp.string() + "' into place: " + ec.message());
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void expect_schema(const Stamp& stamp, std::string_view schema, const fs::path& path) {
  if (stamp.schema != schema || stamp.version != kSchemaVersion) {
    throw DataError("'" + path.string() + "' has schema " + stamp.schema + "/" +
                    std::to_string(stamp.version) + ", expected " + std::string(schema) + "/" +
                    std::to_string(kSchemaVersion));
  }
}

void expect_same_hash(const std::vector<std::pair<fs::path, std::string>>& inputs) {
  for (std::size_t i = 1; i < inputs.size(); ++i) {
    if (inputs[i].second != inputs[0].second) {
      throw DataError("inputs come from different configs: '" + inputs[0].first.string() +
                      "' has config_hash " + inputs[0].second + " but '" +
                      inputs[i].first.string() + "' has " + inputs[i].second);
    }
  }
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

json read_json(const fs::path& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw DataError("'" + path.string() + "' is not valid JSON: " + e.what());
  }
}

namespace {

json stamped(std::string_view schema, const std::string& hash) {
  json j;
  j["schema"] = schema;
  j["schema_version"] = kSchemaVersion;
  j["config_hash"] = hash;
  return j;
}

template <typename F>
auto parse_json_as(const fs::path& path, std::string_view schema, F&& body) {
  const json j = read_json(path);
  Stamp stamp = json_stamp(j);
  expect_schema(stamp, schema, path);
  try {
    return Stamped<decltype(body(j))>{body(j), stamp};
  } catch (const json::exception& e) {
    throw DataError("'" + path.string() + "' is malformed: " + e.what());
  }
}

std::string fmt(double v) { return csv::format_double(v); }

csv::Table read_stamped_csv(const fs::path& path, std::string_view schema,
                            const std::vector<std::string>& header, Stamp& stamp) {
  csv::Table table = csv::read(path, header);
  stamp = parse_stamp(table.comments, path);
  expect_schema(stamp, schema, path);
  return table;
}

const std::string& extra(const Stamp& stamp, const std::string& key, const fs::path& path) {
  auto it = stamp.extra.find(key);
  if (it == stamp.extra.end()) {
    throw DataError("'" + path.string() + "' stamp lacks '" + key + "'");
  }
  return it->second;
}

}  // namespace

Stamp json_stamp(const json& j) {
  Stamp s;
  if (!j.is_object() || !j.contains("schema") || !j.contains("schema_version")) {
    s.schema = "<none>";
    s.version = 0;
    return s;
  }
  s.schema = j.at("schema").get<std::string>();
  s.version = j.at("schema_version").get<int>();
  s.config_hash = j.value("config_hash", "");
  return s;
}

std::string stamp_line(const Stamp& stamp) {
  std::string line = "# schema=" + stamp.schema + "/" + std::to_string(stamp.version) +
                     " config_hash=" + stamp.config_hash;
  for (const auto& [k, v] : stamp.extra) line += " " + k + "=" + v;
  return line + "\n";
}

Stamp parse_stamp(const std::vector<std::string>& comments, const fs::path& path) {
  Stamp s;
  s.schema = "<none>";
  s.version = 0;
  if (comments.empty()) return s;
  std::istringstream in(comments.front());
  std::string token;
  while (in >> token) {
    const auto eq = token.find('=');
    if (eq == std::string::npos) continue;
    const std::string key = token.substr(0, eq);
    const std::string value = token.substr(eq + 1);
    if (key == "schema") {
      const auto slash = value.rfind('/');
      if (slash == std::string::npos) throw DataError("'" + path.string() + "' has a bad stamp");
      s.schema = value.substr(0, slash);
      s.version = static_cast<int>(csv::parse_int(value.substr(slash + 1), 1, "schema version"));
    } else if (key == "config_hash") {
      s.config_hash = value;
    } else {
      s.extra[key] = value;
    }
  }
  return s;
}

// frames

json frame_json(const MarketFrame& frame, const std::string& config_hash) {
  json j = stamped("frame", config_hash);
  j["date"] = frame.date.str();
  json entities = json::object();
  for (const auto& [id, day] : frame.entities) {
    const auto& r = day.raw;
    const auto& f = day.features;
    entities[id] = {{"kind", std::string(to_string(day.kind))},
                    {"raw",
                     {{"close", r.close},
                      {"log_return", r.log_return},
                      {"realised_vol", r.realised_vol ? json(*r.realised_vol) : json(nullptr)},
                      {"volume", r.volume},
                      {"sentiment", r.sentiment}}},
                    {"features",
                     {{"log_return", f.log_return},
                      {"realised_vol", f.realised_vol},
                      {"volume_z", f.volume_z},
                      {"sentiment", f.sentiment}}}};
  }
  j["entities"] = std::move(entities);
  return j;
}

// graph

json graph_json(const FinGraph& graph, const std::string& config_hash) {
  json j = stamped("graph", config_hash);
  j["date"] = graph.date().str();
  json nodes = json::array();
  for (const auto& n : graph.nodes()) nodes.push_back({n.id, std::string(to_string(n.kind))});
  json edges = json::array();
  for (const auto& e : graph.edges()) {
    edges.push_back({e.ends.u, e.ends.v, std::string(to_string(e.kind)), e.weight});
  }
  j["nodes"] = std::move(nodes);
  j["edges"] = std::move(edges);
  return j;
}

FinGraph graph_from_json(const json& j) {
  std::vector<Node> nodes;
  for (const auto& n : j.at("nodes")) {
    nodes.push_back({n.at(0).get<std::string>(), node_kind_from_string(n.at(1).get<std::string>())});
  }
  std::vector<TypedEdge> edges;
  for (const auto& e : j.at("edges")) {
    edges.push_back({EdgeId(e.at(0).get<std::string>(), e.at(1).get<std::string>()),
                     edge_kind_from_string(e.at(2).get<std::string>()), e.at(3).get<double>()});
  }
  return FinGraph(Date::parse(j.at("date").get<std::string>()), std::move(nodes),
                  std::move(edges));
}

Stamped<FinGraph> read_graph(const fs::path& path) {
  return parse_json_as(path, "graph", [](const json& j) { return graph_from_json(j); });
}

// curvature

std::string curvature_csv(const CurvatureMap& map, const std::string& config_hash) {
  std::string out = stamp_line({"curvature", kSchemaVersion, config_hash, {{"date", map.date.str()}}});
  out += "u,v,kind,kappa\n";
  const std::string kind(to_string(map.kind));
  for (const auto& [e, k] : map.values) out += e.u + "," + e.v + "," + kind + "," + fmt(k) + "\n";
  return out;
}

Stamped<CurvatureMap> read_curvature(const fs::path& path) {
  Stamp stamp;
  const auto table = read_stamped_csv(path, "curvature", {"u", "v", "kind", "kappa"}, stamp);
  CurvatureMap map;
  map.date = Date::parse(extra(stamp, "date", path));
  bool first = true;
  for (const auto& row : table.rows) {
    const CurvatureKind kind = curvature_kind_from_string(row.fields[2]);
    if (first) {
      map.kind = kind;
      first = false;
    } else if (kind != map.kind) {
      throw DataError(path.string() + ":" + std::to_string(row.line) + ": mixed curvature kinds");
    }
    map.values[EdgeId(row.fields[0], row.fields[1])] =
        csv::parse_double(row.fields[3], row.line, "kappa");
  }
  return {std::move(map), stamp};
}

// flow

json flow_json(const FlowTrace& trace, const std::string& config_hash) {
  json j = stamped("flow", config_hash);
  j["date"] = trace.date.str();
  j["kind"] = std::string(to_string(trace.initial.kind));
  j["nodes"] = trace.graph.ids();
  json iters = json::array();
  for (std::size_t k = 0; k < trace.states.size(); ++k) {
    const auto& s = trace.states[k];
    json edges = json::array();
    for (std::size_t e = 0; e < s.weights.size(); ++e) {
      const EdgeId id = trace.graph.edge_id(static_cast<int>(e));
      edges.push_back({id.u, id.v, s.weights[e], s.curvature[e]});
    }
    iters.push_back({{"iter", k}, {"edges", std::move(edges)}});
  }
  j["iterations"] = std::move(iters);
  return j;
}

Stamped<FlowTrace> read_flow(const fs::path& path) {
  return parse_json_as(path, "flow", [&](const json& j) {
    FlowTrace trace;
    trace.date = Date::parse(j.at("date").get<std::string>());
    const CurvatureKind kind = curvature_kind_from_string(j.at("kind").get<std::string>());
    const auto& iters = j.at("iterations");
    if (iters.empty()) throw DataError("'" + path.string() + "' has no iterations");
    std::vector<std::pair<EdgeId, double>> edges;
    for (const auto& e : iters.at(0).at("edges")) {
      edges.emplace_back(EdgeId(e.at(0).get<std::string>(), e.at(1).get<std::string>()),
                         e.at(2).get<double>());
    }
    trace.graph = WeightedGraph(j.at("nodes").get<std::vector<std::string>>(), edges);
    for (const auto& it : iters) {
      FlowState s;
      const auto& es = it.at("edges");
      if (es.size() != trace.graph.edge_count()) {
        throw DataError("'" + path.string() + "' iterations disagree on the edge set");
      }
      for (std::size_t e = 0; e < es.size(); ++e) {
        if (EdgeId(es[e].at(0).get<std::string>(), es[e].at(1).get<std::string>()) !=
            trace.graph.edge_id(static_cast<int>(e))) {
          throw DataError("'" + path.string() + "' iterations disagree on the edge order");
        }
        s.weights.push_back(es[e].at(2).get<double>());
        s.curvature.push_back(es[e].at(3).get<double>());
      }
      trace.states.push_back(std::move(s));
    }
    auto as_map = [&](const FlowState& s) {
      CurvatureMap m{trace.date, kind, {}};
      for (std::size_t e = 0; e < s.curvature.size(); ++e) {
        m.values[trace.graph.edge_id(static_cast<int>(e))] = s.curvature[e];
      }
      return m;
    };
    trace.initial = as_map(trace.states.front());
    trace.final = as_map(trace.states.back());
    for (const auto& [e, k0] : trace.initial.values) trace.delta[e] = trace.final.values.at(e) - k0;
    return trace;
  });
}

// delta

std::string delta_csv(const DeltaTable& table, const std::string& config_hash) {
  std::string out = stamp_line({"delta", kSchemaVersion, config_hash,
                                {{"date", table.date.str()}, {"source", table.source}}});
  for (const auto& e : table.born) out += "# born " + e.u + " " + e.v + "\n";
  for (const auto& e : table.died) out += "# died " + e.u + " " + e.v + "\n";
  out += "u,v,delta_kappa\n";
  for (const auto& [e, d] : table.delta) out += e.u + "," + e.v + "," + fmt(d) + "\n";
  return out;
}

Stamped<DeltaTable> read_delta(const fs::path& path) {
  Stamp stamp;
  const auto table = read_stamped_csv(path, "delta", {"u", "v", "delta_kappa"}, stamp);
  DeltaTable out;
  out.date = Date::parse(extra(stamp, "date", path));
  out.source = extra(stamp, "source", path);
  for (std::size_t i = 1; i < table.comments.size(); ++i) {
    std::istringstream in(table.comments[i]);
    std::string tag, u, v;
    in >> tag >> u >> v;
    if (tag == "born") out.born.emplace_back(u, v);
    if (tag == "died") out.died.emplace_back(u, v);
  }
  for (const auto& row : table.rows) {
    out.delta[EdgeId(row.fields[0], row.fields[1])] =
        csv::parse_double(row.fields[2], row.line, "delta_kappa");
  }
  return {std::move(out), stamp};
}

// unstable zone

json zone_json(const UnstableZone& zone, double theta, const std::string& config_hash) {
  json j = stamped("zone", config_hash);
  j["date"] = zone.date.str();
  j["theta"] = theta;
  json nodes = json::array();
  for (const auto& [id, v] : zone.avg_change) nodes.push_back({{"id", id}, {"avg_change", v}});
  j["nodes"] = std::move(nodes);
  return j;
}

Stamped<UnstableZone> read_zone(const fs::path& path) {
  return parse_json_as(path, "zone", [](const json& j) {
    UnstableZone z;
    z.date = Date::parse(j.at("date").get<std::string>());
    for (const auto& n : j.at("nodes")) {
      z.avg_change[n.at("id").get<std::string>()] = n.at("avg_change").get<double>();
    }
    return z;
  });
}

// scoreboard and ranking

std::string scoreboard_csv(const ScoreBoard& board, const std::string& config_hash) {
  std::string out = stamp_line({"scoreboard", kSchemaVersion, config_hash,
                                {{"date", board.date.str()},
                                 {"form", std::string(to_string(board.form))},
                                 {"alpha", fmt(board.alpha)},
                                 {"lambda", fmt(board.lambda)}}});
  for (const auto& [asset, reason] : board.excluded) out += "# excluded " + asset + " " + reason + "\n";
  out += "date,asset,r_hat,risk,score,rank\n";
  for (const auto& e : board.entries) {
    out += board.date.str() + "," + e.asset + "," + fmt(e.r_hat) + "," + fmt(e.risk) + "," +
           fmt(e.score) + "," + std::to_string(e.rank) + "\n";
  }
  return out;
}

Stamped<ScoreBoard> read_scoreboard(const fs::path& path) {
  Stamp stamp;
  const auto table = read_stamped_csv(
      path, "scoreboard", {"date", "asset", "r_hat", "risk", "score", "rank"}, stamp);
  ScoreBoard b;
  b.form = scoring_form_from_string(extra(stamp, "form", path));
  b.alpha = csv::parse_double(extra(stamp, "alpha", path), 1, "alpha");
  b.lambda = csv::parse_double(extra(stamp, "lambda", path), 1, "lambda");
  for (std::size_t i = 1; i < table.comments.size(); ++i) {
    const std::string& c = table.comments[i];
    if (c.rfind("excluded ", 0) != 0) continue;
    const auto rest = c.substr(9);
    const auto sp = rest.find(' ');
    b.excluded.emplace_back(rest.substr(0, sp), sp == std::string::npos ? "" : rest.substr(sp + 1));
  }
  b.date = Date::parse(extra(stamp, "date", path));
  for (const auto& row : table.rows) {
    if (Date::parse(row.fields[0]) != b.date) {
      throw DataError(path.string() + ":" + std::to_string(row.line) + ": date differs from the stamp");
    }
    b.entries.push_back({row.fields[1], csv::parse_double(row.fields[2], row.line, "r_hat"),
                         csv::parse_double(row.fields[3], row.line, "risk"),
                         csv::parse_double(row.fields[4], row.line, "score"),
                         static_cast<int>(csv::parse_int(row.fields[5], row.line, "rank"))});
  }
  return {std::move(b), stamp};
}

std::string ranking_csv(const ScoreBoard& board, int k, const std::string& config_hash) {
  std::string out =
      stamp_line({"ranking", kSchemaVersion, config_hash, {{"date", board.date.str()}, {"k", std::to_string(k)}}});
  out += "rank,asset,score\n";
  const auto top = top_k(board, k);
  for (std::size_t i = 0; i < top.size(); ++i) {
    out += std::to_string(board.entries[i].rank) + "," + board.entries[i].asset + "," +
           fmt(board.entries[i].score) + "\n";
  }
  return out;
}

Stamped<Ranking> read_ranking(const fs::path& path) {
  Stamp stamp;
  const auto table = read_stamped_csv(path, "ranking", {"rank", "asset", "score"}, stamp);
  Ranking r;
  r.date = Date::parse(extra(stamp, "date", path));
  for (const auto& row : table.rows) r.assets.push_back(row.fields[1]);
  return {std::move(r), stamp};
}

// RCA

json rca_json(const RcaBundle& bundle, const std::string& config_hash) {
  json j = stamped("rca", config_hash);
  j["date"] = bundle.date.str();
  j["perturbed"] = bundle.perturbed;
  json reports = json::array();
  for (const auto& [asset, outcome] : bundle.reports) {
    json r;
    r["asset"] = asset;
    r["reason"] = std::string(to_string(outcome.reason));
    if (outcome.path) {
      r["path"] = outcome.path->nodes;
      json edges = json::array();
      for (const auto& [e, d] : outcome.path->edges) edges.push_back({e.u, e.v, d});
      r["edges"] = std::move(edges);
      r["cumulative"] = outcome.path->cumulative;
      r["terminal_kind"] = outcome.terminal_kind;
    } else {
      r["path"] = nullptr;
      r["edges"] = json::array();
      r["cumulative"] = nullptr;
      r["terminal_kind"] = nullptr;
    }
    reports.push_back(std::move(r));
  }
  j["reports"] = std::move(reports);
  return j;
}

Stamped<RcaBundle> read_rca(const fs::path& path) {
  return parse_json_as(path, "rca", [](const json& j) {
    RcaBundle b;
    b.date = Date::parse(j.at("date").get<std::string>());
    b.perturbed = j.at("perturbed").get<std::set<std::string>>();
    for (const auto& r : j.at("reports")) {
      RcaOutcome o;
      o.reason = stop_reason_from_string(r.at("reason").get<std::string>());
      if (!r.at("path").is_null()) {
        RcaPath p;
        p.nodes = r.at("path").get<std::vector<std::string>>();
        for (const auto& e : r.at("edges")) {
          p.edges.emplace_back(EdgeId(e.at(0).get<std::string>(), e.at(1).get<std::string>()),
                               e.at(2).get<double>());
        }
        p.cumulative = r.at("cumulative").get<double>();
        o.path = std::move(p);
        o.terminal_kind = r.at("terminal_kind").get<std::string>();
      }
      b.reports[r.at("asset").get<std::string>()] = std::move(o);
    }
    return b;
  });
}

std::string rca_dot(const RcaBundle& bundle) {
  auto q = [](const std::string& s) { return "\"" + s + "\""; };
  std::string out = "graph rca {\n  label=" + q("RCA " + bundle.date.str()) + ";\n  node [shape=ellipse];\n";
  int cluster = 0;
  for (const auto& [asset, outcome] : bundle.reports) {
    out += "  subgraph cluster_" + std::to_string(cluster) + " {\n    label=" +
           q(asset + " (" + std::string(to_string(outcome.reason)) + ")") + ";\n";
    const std::string prefix = "c" + std::to_string(cluster) + "_";
    if (!outcome.path) {
      out += "    " + q(prefix + asset) + " [label=" + q(asset) + ", shape=box];\n";
    } else {
      const auto& nodes = outcome.path->nodes;
      for (std::size_t i = 0; i < nodes.size(); ++i) {
        std::string attrs = "label=" + q(nodes[i]);
        if (i == 0) attrs += ", shape=box";
        if (i + 1 == nodes.size()) {
          attrs += bundle.perturbed.count(nodes[i]) ? ", style=filled, fillcolor=salmon"
                                                    : ", style=filled, fillcolor=khaki";
        }
        out += "    " + q(prefix + nodes[i]) + " [" + attrs + "];\n";
      }
      for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
        out += "    " + q(prefix + nodes[i]) + " -- " + q(prefix + nodes[i + 1]) +
               " [label=" + q(fmt(outcome.path->edges[i].second)) + "];\n";
      }
    }
    out += "  }\n";
    ++cluster;
  }
  out += "}\n";
  return out;
}

}  // namespace rfr
