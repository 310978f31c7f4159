#include "rfr/graph_builder.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include <spdlog/spdlog.h>

#include "rfr/csv.hpp"
#include "rfr/errors.hpp"

namespace rfr {

namespace {

// Two-pass Pearson; empty when either series has zero variance.
std::optional<double> pearson(const std::vector<double>& x, const std::vector<double>& y) {
  // A constant series leaves rounding residue in its deviations, so test it directly.
  auto constant = [](const std::vector<double>& v) {
    return std::adjacent_find(v.begin(), v.end(), std::not_equal_to<>()) == v.end();
  };
  if (constant(x) || constant(y)) return std::nullopt;
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx <= 0.0 || syy <= 0.0) return std::nullopt;
  return sxy / std::sqrt(sxx * syy);
}

void log_skipped(const EdgeSet& set, std::string_view what) {
  for (const auto& s : set.skipped) {
    spdlog::debug("{}: skipped ({}, {}): {}", what, s.pair.u, s.pair.v, s.reason);
  }
}

}  // namespace

EdgeSet correlation_edges(std::span<const MarketFrame> trailing,
                          const std::vector<std::string>& universe, std::size_t length) {
  if (length < 2) throw ConfigError("correlation window must be at least 2");
  if (trailing.size() < length) {
    throw DataError("correlation needs " + std::to_string(length) + " trailing frames, got " +
                    std::to_string(trailing.size()));
  }
  const auto window = trailing.last(length);
  std::vector<std::string> ids = universe;
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());

  // Entities present on every day of the window, with their return series.
  std::map<std::string, std::vector<double>> series;
  EdgeSet out;
  for (const auto& id : ids) {
    std::vector<double> r;
    r.reserve(window.size());
    for (const auto& frame : window) {
      if (const auto* day = frame.find(id)) r.push_back(day->raw.log_return);
    }
    if (r.size() == window.size()) series.emplace(id, std::move(r));
  }
  for (auto a = series.begin(); a != series.end(); ++a) {
    for (auto b = std::next(a); b != series.end(); ++b) {
      const auto rho = pearson(a->second, b->second);
      if (!rho) {
        out.skipped.push_back({EdgeId(a->first, b->first), "zero-variance return series"});
        continue;
      }
      const double w = std::abs(*rho);
      if (!(w > 0.0)) {
        out.skipped.push_back({EdgeId(a->first, b->first), "zero correlation"});
        continue;
      }
      out.edges.push_back({EdgeId(a->first, b->first), EdgeKind::Correlation, w});
    }
  }
  return out;
}

EmbeddingTable::EmbeddingTable(std::map<std::string, std::vector<double>> vectors)
    : vectors_(std::move(vectors)) {
  for (const auto& [id, v] : vectors_) {
    if (v.empty()) throw DataError("embedding for " + id + " is empty");
    if (dimension_ == 0) dimension_ = v.size();
    if (v.size() != dimension_) {
      throw DataError("embedding for " + id + " has dimension " + std::to_string(v.size()) +
                      ", expected " + std::to_string(dimension_));
    }
    for (double x : v) {
      if (!std::isfinite(x)) throw DataError("embedding for " + id + " has a non-finite entry");
    }
  }
}

EmbeddingTable EmbeddingTable::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::map<std::string, std::vector<double>> vectors;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ss(line);
    std::string id;
    if (!(ss >> id) || id.front() == '#') continue;
    std::vector<double> v;
    std::string tok;
    while (ss >> tok) {
      try {
        v.push_back(csv::parse_double(tok, lineno, "embedding value"));
      } catch (const DataError& e) {
        throw DataError(path.string() + ": " + e.what());
      }
    }
    if (!vectors.emplace(id, std::move(v)).second) {
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": duplicate embedding for " +
                      id);
    }
  }
  return EmbeddingTable(std::move(vectors));
}

const std::vector<double>* EmbeddingTable::find(const std::string& id) const {
  auto it = vectors_.find(id);
  return it == vectors_.end() ? nullptr : &it->second;
}

std::vector<CoMention> load_comentions(const std::filesystem::path& path) {
  const auto table = csv::read(path, {"date", "entity_a", "entity_b"});
  std::vector<CoMention> out;
  for (const auto& row : table.rows) {
    try {
      out.push_back({Date::parse(row.fields[0]), row.fields[1], row.fields[2]});
    } catch (const DataError& e) {
      throw DataError(path.string() + ":" + std::to_string(row.line) + ": " + e.what());
    }
  }
  return out;
}

EdgeSet semantic_edges(const EmbeddingTable& embeddings, std::span<const CoMention> comentions) {
  std::set<EdgeId> pairs;
  for (const auto& c : comentions) {
    if (c.a != c.b) pairs.insert(EdgeId(c.a, c.b));
  }
  EdgeSet out;
  for (const auto& pair : pairs) {
    const auto* x = embeddings.find(pair.u);
    const auto* y = embeddings.find(pair.v);
    if (!x || !y) {
      out.skipped.push_back({pair, "missing embedding"});
      continue;
    }
    double dot = 0.0, nx = 0.0, ny = 0.0;
    for (std::size_t i = 0; i < x->size(); ++i) {
      dot += (*x)[i] * (*y)[i];
      nx += (*x)[i] * (*x)[i];
      ny += (*y)[i] * (*y)[i];
    }
    if (nx == 0.0 || ny == 0.0) {
      out.skipped.push_back({pair, "zero-norm embedding"});
      continue;
    }
    // sqrt(n * n) == n exactly, so identical vectors weigh 1.
    const double cos = std::min(1.0, dot / std::sqrt(nx * ny));
    if (cos > 0.0) out.edges.push_back({pair, EdgeKind::Semantic, cos});
  }
  return out;
}

std::vector<KnowledgeLink> load_knowledge(const std::filesystem::path& path) {
  const auto table = csv::read(path);
  const std::vector<std::string> base{"src", "dst", "relation", "weight"};
  const std::vector<std::string> ranged{"src", "dst", "relation", "weight", "valid_from",
                                        "valid_to"};
  if (table.header != base && table.header != ranged) {
    throw DataError(path.string() + ": header must be src,dst,relation,weight[,valid_from,valid_to]");
  }
  std::vector<KnowledgeLink> out;
  for (const auto& row : table.rows) {
    KnowledgeLink link;
    link.src = row.fields[0];
    link.dst = row.fields[1];
    link.relation = row.fields[2];
    try {
      link.weight = csv::parse_double(row.fields[3], row.line, "weight");
      if (row.fields.size() == 6) {
        if (!row.fields[4].empty()) link.valid_from = Date::parse(row.fields[4]);
        if (!row.fields[5].empty()) link.valid_to = Date::parse(row.fields[5]);
      }
    } catch (const DataError& e) {
      throw DataError(path.string() + ":" + std::to_string(row.line) + ": " + e.what());
    }
    if (!(link.weight > 0.0) || link.weight > 1.0) {
      throw DataError(path.string() + ":" + std::to_string(row.line) + ": link weight " +
                      row.fields[3] + " outside (0, 1]");
    }
    if (link.src.empty() || link.dst.empty() || link.src == link.dst) {
      throw DataError(path.string() + ":" + std::to_string(row.line) + ": invalid endpoints");
    }
    out.push_back(std::move(link));
  }
  return out;
}

EdgeSet knowledge_edges(std::span<const KnowledgeLink> links, Date date,
                        const std::vector<std::string>& universe) {
  const std::set<std::string> known(universe.begin(), universe.end());
  std::map<EdgeId, double> best;
  EdgeSet out;
  for (const auto& link : links) {
    if ((link.valid_from && date < *link.valid_from) || (link.valid_to && date > *link.valid_to)) {
      continue;
    }
    EdgeId pair(link.src, link.dst);
    if (!known.count(link.src) || !known.count(link.dst)) {
      out.skipped.push_back({pair, "endpoint not in universe"});
      continue;
    }
    auto [it, inserted] = best.emplace(pair, link.weight);
    if (!inserted) it->second = std::max(it->second, link.weight);
  }
  for (const auto& [pair, w] : best) out.edges.push_back({pair, EdgeKind::Knowledge, w});
  return out;
}

namespace {

// Indices into `edges` kept by the per-node top-k rule.
std::set<std::size_t> select_top_k(const std::vector<TypedEdge>& edges, int top_k) {
  std::map<std::string, std::vector<std::size_t>> incident;
  for (std::size_t i = 0; i < edges.size(); ++i) {
    incident[edges[i].ends.u].push_back(i);
    incident[edges[i].ends.v].push_back(i);
  }
  std::set<std::size_t> kept;
  for (auto& [node, idx] : incident) {
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      if (edges[a].weight != edges[b].weight) return edges[a].weight > edges[b].weight;
      return edges[a].ends.other(node) < edges[b].ends.other(node);
    });
    const std::size_t keep = std::min(idx.size(), static_cast<std::size_t>(top_k));
    kept.insert(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(keep));
  }
  return kept;
}

}  // namespace

FinGraph assemble_graph(Date date, std::vector<Node> nodes, const EdgeSet& correlation,
                        const EdgeSet& semantic, const EdgeSet& knowledge,
                        const AssemblyOptions& options) {
  if (options.top_k < 1) throw ConfigError("top_k must be at least 1");
  std::vector<TypedEdge> survivors;
  for (const EdgeSet* set : {&correlation, &semantic, &knowledge}) {
    std::vector<TypedEdge> candidates;
    for (const auto& e : set->edges) {
      if (e.ends.u == e.ends.v || !(e.weight > 0.0)) continue;
      if (options.min_weight && e.weight < *options.min_weight) continue;
      candidates.push_back(e);
    }
    for (std::size_t i : select_top_k(candidates, options.top_k)) survivors.push_back(candidates[i]);
  }
  return FinGraph(date, std::move(nodes), std::move(survivors));
}

GraphBuild build_graph(std::span<const MarketFrame> history, Date date,
                       const GraphSources& sources, const AssemblyOptions& options) {
  if (history.empty() || history.back().date != date) {
    throw DataError("no market frame for " + date.str());
  }
  const std::size_t length = options.correlation_window;
  if (history.size() < length) {
    throw DataError("graph for " + date.str() + " needs " + std::to_string(length) +
                    " trailing frames, only " + std::to_string(history.size()) + " available");
  }
  const auto window = history.last(length);
  const MarketFrame& today = history.back();

  std::map<std::string, NodeKind> kinds;
  std::vector<std::string> market_ids;
  for (const auto& [id, day] : today.entities) {
    kinds[id] = day.kind == EntityKind::Asset ? NodeKind::Asset : NodeKind::MacroIndicator;
    market_ids.push_back(id);
  }

  const Date window_start = window.front().date;
  std::vector<CoMention> recent;
  for (const auto& c : sources.comentions) {
    if (c.date >= window_start && c.date <= date) recent.push_back(c);
  }

  std::vector<std::string> universe = market_ids;
  for (const auto& [id, _] : sources.embeddings.vectors()) {
    if (!kinds.count(id)) universe.push_back(id);
  }

  EdgeSet corr = correlation_edges(window, market_ids, length);
  EdgeSet sem = semantic_edges(sources.embeddings, recent);
  EdgeSet knw = knowledge_edges(sources.knowledge, date, universe);
  log_skipped(corr, "correlation");
  log_skipped(sem, "semantic");
  log_skipped(knw, "knowledge");

  // News entities enter the node set only through an edge.
  for (const EdgeSet* set : {&sem, &knw}) {
    for (const auto& e : set->edges) {
      for (const auto* id : {&e.ends.u, &e.ends.v}) {
        if (!kinds.count(*id)) kinds[*id] = NodeKind::NewsEntity;
      }
    }
  }
  std::vector<Node> nodes;
  for (const auto& [id, kind] : kinds) nodes.push_back({id, kind});

  GraphBuild out{assemble_graph(date, std::move(nodes), corr, sem, knw, options), {}};
  for (const EdgeSet* set : {&corr, &sem, &knw}) {
    out.skipped.insert(out.skipped.end(), set->skipped.begin(), set->skipped.end());
  }
  return out;
}

}  // namespace rfr
