#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rfr/date.hpp"
#include "rfr/graph.hpp"
#include "rfr/market_data.hpp"

namespace rfr {

inline constexpr std::size_t kCorrelationWindow = 30;

// Entities skipped while building one edge set, with the reason.
struct SkippedPair {
  EdgeId pair;
  std::string reason;
};

struct EdgeSet {
  std::vector<TypedEdge> edges;
  std::vector<SkippedPair> skipped;
};

// |Pearson correlation| of log returns over the trailing `window` frames, for
// every pair of `universe` entities present on all of them. Pairs with a
// zero-variance series are skipped. Throws DataError if fewer than `window`
// frames are given.
EdgeSet correlation_edges(std::span<const MarketFrame> trailing,
                          const std::vector<std::string>& universe,
                          std::size_t window = kCorrelationWindow);

class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  // Throws DataError on dimension mismatch, non-finite entries or duplicates.
  explicit EmbeddingTable(std::map<std::string, std::vector<double>> vectors);

  // Whitespace-separated: entity id followed by d_e floats per line.
  static EmbeddingTable load(const std::filesystem::path& path);

  std::size_t dimension() const { return dimension_; }
  const std::vector<double>* find(const std::string& id) const;
  const std::map<std::string, std::vector<double>>& vectors() const { return vectors_; }

 private:
  std::size_t dimension_ = 0;
  std::map<std::string, std::vector<double>> vectors_;
};

struct CoMention {
  Date date;
  std::string a;
  std::string b;
};

std::vector<CoMention> load_comentions(const std::filesystem::path& path);

// max(0, cosine similarity) for each co-mentioned pair; pairs with a
// non-positive similarity produce no edge.
EdgeSet semantic_edges(const EmbeddingTable& embeddings, std::span<const CoMention> comentions);

struct KnowledgeLink {
  std::string src;
  std::string dst;
  std::string relation;
  double weight = 1.0;  // (0, 1]
  std::optional<Date> valid_from;
  std::optional<Date> valid_to;
};

// `src,dst,relation,weight` with optional trailing `valid_from,valid_to`
// columns (empty cells mean unbounded).
std::vector<KnowledgeLink> load_knowledge(const std::filesystem::path& path);

// One edge per link valid on `date` whose endpoints are both in `universe`;
// duplicate pairs keep the maximum weight.
EdgeSet knowledge_edges(std::span<const KnowledgeLink> links, Date date,
                        const std::vector<std::string>& universe);

struct AssemblyOptions {
  int top_k = 10;
  std::size_t correlation_window = kCorrelationWindow;
  // Optional global floor applied before the per-node selection.
  std::optional<double> min_weight;
};

// Per node and per kind keep the top_k heaviest incident edges (ties broken by
// neighbor id); an edge survives if either endpoint keeps it.
FinGraph assemble_graph(Date date, std::vector<Node> nodes, const EdgeSet& correlation,
                        const EdgeSet& semantic, const EdgeSet& knowledge,
                        const AssemblyOptions& options);

struct GraphSources {
  EmbeddingTable embeddings;
  std::vector<CoMention> comentions;
  std::vector<KnowledgeLink> knowledge;
};

struct GraphBuild {
  FinGraph graph;
  std::vector<SkippedPair> skipped;
};

// Builds G_t for the last frame of `history` (which must end at `date`). The
// semantic edges use co-mentions dated within the correlation window.
GraphBuild build_graph(std::span<const MarketFrame> history, Date date,
                       const GraphSources& sources, const AssemblyOptions& options);

}  // namespace rfr
