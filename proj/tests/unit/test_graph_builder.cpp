#include <cmath>
#include <random>

#include <doctest.h>

#include "../oracles/oracles.hpp"
#include "helpers.hpp"
#include "rfr/errors.hpp"
#include "rfr/graph_builder.hpp"

using namespace rfr;

namespace {

// One frame per return index, entity -> log return.
std::vector<MarketFrame> frames_of(const std::map<std::string, std::vector<double>>& returns) {
  const std::size_t n = returns.begin()->second.size();
  std::vector<MarketFrame> out(n);
  const auto start = std::chrono::sys_days{std::chrono::year{2024} / 1 / 1};
  for (std::size_t i = 0; i < n; ++i) {
    out[i].date = Date(start + std::chrono::days{static_cast<int>(i)});
    for (const auto& [id, r] : returns) {
      EntityDay d;
      d.raw.log_return = r[i];
      out[i].entities.emplace(id, d);
    }
  }
  return out;
}

double weight_of(const EdgeSet& set, const std::string& a, const std::string& b) {
  for (const auto& e : set.edges)
    if (e.ends == EdgeId(a, b)) return e.weight;
  return -1.0;
}

}  // namespace

TEST_SUITE("graph_builder") {

TEST_CASE("correlation of identical and mirrored series") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0.0, 0.01);
  std::vector<double> a(30);
  for (double& x : a) x = n(rng);
  std::vector<double> neg(a);
  for (double& x : neg) x = -x;
  auto frames = frames_of({{"A", a}, {"B", a}, {"C", neg}});
  auto set = correlation_edges(frames, {"A", "B", "C"});
  CHECK(weight_of(set, "A", "B") == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(weight_of(set, "A", "C") == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(oracle::pearson(a, neg) == doctest::Approx(-1.0).epsilon(1e-14));
}

TEST_CASE("correlation matches the two-pass formula") {
  std::mt19937_64 rng(99);
  std::normal_distribution<double> n(0.0, 0.02);
  std::map<std::string, std::vector<double>> r;
  for (const char* id : {"A", "B", "C", "D"}) {
    std::vector<double> v(30);
    for (double& x : v) x = n(rng);
    r[id] = v;
  }
  auto set = correlation_edges(frames_of(r), {"A", "B", "C", "D"});
  CHECK(set.edges.size() == 6);
  for (const auto& e : set.edges) {
    const double ref = std::abs(oracle::pearson(r[e.ends.u], r[e.ends.v]));
    CHECK(std::abs(e.weight - ref) <= 1e-12);
    CHECK(e.weight >= 0.0);
    CHECK(e.weight <= 1.0);
  }
}

TEST_CASE("zero variance pair is skipped and short windows are rejected") {
  std::vector<double> flat(30, 0.001), moving(30);
  for (std::size_t i = 0; i < 30; ++i) moving[i] = 0.001 * static_cast<double>(i % 3);
  auto frames = frames_of({{"A", flat}, {"B", moving}});
  auto set = correlation_edges(frames, {"A", "B"});
  CHECK(set.edges.empty());
  REQUIRE(set.skipped.size() == 1);
  CHECK(set.skipped[0].pair == EdgeId("A", "B"));
  std::span<const MarketFrame> shorter(frames.data(), 29);
  CHECK_THROWS_AS(correlation_edges(shorter, {"A", "B"}), DataError);
}

TEST_CASE("semantic edges") {
  EmbeddingTable t({{"A", {1.0, 2.0, 0.0}},
                    {"B", {1.0, 2.0, 0.0}},
                    {"C", {0.0, 0.0, 3.0}},
                    {"D", {2.0, 4.0, 0.0}},
                    {"Z", {0.0, 0.0, 0.0}}});
  const Date d(2024, 1, 2);
  std::vector<CoMention> cm{{d, "A", "B"}, {d, "A", "C"}, {d, "A", "D"}, {d, "A", "Z"}, {d, "B", "A"}};
  auto set = semantic_edges(t, cm);
  CHECK(weight_of(set, "A", "B") == 1.0);
  CHECK(weight_of(set, "A", "C") == -1.0);  // orthogonal, dropped
  CHECK(weight_of(set, "A", "D") == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(weight_of(set, "A", "Z") == -1.0);
  CHECK(set.edges.size() == 2);
  CHECK_THROWS_AS(EmbeddingTable({{"A", {1.0}}, {"B", {1.0, 2.0}}}), DataError);
}

TEST_CASE("knowledge edges") {
  const Date d(2024, 1, 10);
  std::vector<KnowledgeLink> links{{"NVDA", "TSM", "supplier_of", 0.9, {}, {}},
                                   {"TSM", "NVDA", "partner_of", 0.4, {}, {}},
                                   {"NVDA", "XYZ", "partner_of", 0.5, {}, {}},
                                   {"AMD", "TSM", "supplier_of", 0.7, Date(2024, 2, 1), {}}};
  auto set = knowledge_edges(links, d, {"NVDA", "TSM", "AMD"});
  REQUIRE(set.edges.size() == 1);
  CHECK(set.edges[0].weight == 0.9);
  CHECK(set.edges[0].ends == EdgeId("NVDA", "TSM"));
  REQUIRE(set.skipped.size() == 1);
  CHECK(set.skipped[0].pair == EdgeId("NVDA", "XYZ"));
  CHECK(knowledge_edges(links, Date(2024, 2, 1), {"NVDA", "TSM", "AMD"}).edges.size() == 2);
}

TEST_CASE("top-k assembly") {
  const Date d(2024, 1, 2);
  std::vector<Node> nodes{{"A", NodeKind::Asset}, {"B", NodeKind::Asset},
                          {"C", NodeKind::Asset}, {"D", NodeKind::Asset}};
  EdgeSet corr{{{EdgeId("A", "B"), EdgeKind::Correlation, 0.9},
                {EdgeId("A", "C"), EdgeKind::Correlation, 0.5},
                {EdgeId("A", "D"), EdgeKind::Correlation, 0.2}},
               {}};
  AssemblyOptions opt;
  SUBCASE("heaviest two per node, union over endpoints") {
    opt.top_k = 2;
    auto g = assemble_graph(d, nodes, corr, {}, {}, opt);
    // D keeps its only edge, so A-D survives through D.
    CHECK(g.edges().size() == 3);
    opt.top_k = 1;
    auto g1 = assemble_graph(d, nodes, corr, {}, {}, opt);
    // A keeps A-B; B, C, D each keep their single edge.
    CHECK(g1.edges().size() == 3);
  }
  SUBCASE("only A's view: leaves dropped") {
    EdgeSet star{{{EdgeId("A", "B"), EdgeKind::Correlation, 0.9},
                  {EdgeId("A", "C"), EdgeKind::Correlation, 0.5},
                  {EdgeId("A", "D"), EdgeKind::Correlation, 0.2},
                  {EdgeId("B", "C"), EdgeKind::Correlation, 0.95},
                  {EdgeId("B", "D"), EdgeKind::Correlation, 0.96},
                  {EdgeId("C", "D"), EdgeKind::Correlation, 0.97}},
                 {}};
    opt.top_k = 2;
    auto g = assemble_graph(d, nodes, star, {}, {}, opt);
    bool has_ad = false, has_ac = false;
    for (const auto& e : g.edges()) {
      has_ad |= e.ends == EdgeId("A", "D");
      has_ac |= e.ends == EdgeId("A", "C");
    }
    CHECK(has_ac);  // kept by A (0.9, 0.5)
    CHECK_FALSE(has_ad);
  }
  SUBCASE("top_k above degree keeps everything") {
    opt.top_k = 10;
    CHECK(assemble_graph(d, nodes, corr, {}, {}, opt).edges().size() == 3);
  }
  SUBCASE("kinds are kept side by side") {
    EdgeSet know{{{EdgeId("A", "B"), EdgeKind::Knowledge, 0.3}}, {}};
    opt.top_k = 1;
    auto g = assemble_graph(d, nodes, corr, {}, know, opt);
    CHECK(g.edges().size() == 4);
    // collapse keeps the max weight per pair
    auto wg = g.collapse();
    CHECK(wg.edge_count() == 3);
    CHECK(wg.edge(*wg.find_edge(0, 1)).weight == 0.9);
  }
  SUBCASE("top_k zero is rejected") {
    opt.top_k = 0;
    CHECK_THROWS_AS(assemble_graph(d, nodes, corr, {}, {}, opt), ConfigError);
  }
}

TEST_CASE("graph invariants") {
  const Date d(2024, 1, 2);
  CHECK_THROWS(FinGraph(d, {{"A", NodeKind::Asset}}, {{EdgeId("A", "A"), EdgeKind::Correlation, 1.0}}));
  CHECK_THROWS(FinGraph(d, {{"A", NodeKind::Asset}, {"B", NodeKind::Asset}},
                        {{EdgeId("A", "B"), EdgeKind::Correlation, 0.0}}));
  CHECK_THROWS(FinGraph(d, {{"A", NodeKind::Asset}}, {{EdgeId("A", "B"), EdgeKind::Correlation, 1.0}}));
  CHECK_THROWS(FinGraph(d, {{"A", NodeKind::Asset}, {"B", NodeKind::Asset}},
                        {{EdgeId("A", "B"), EdgeKind::Correlation, 0.5},
                         {EdgeId("B", "A"), EdgeKind::Correlation, 0.6}}));
}

TEST_CASE("fixture graph build") {
  const auto dir = testing::data_dir() / "fixture";
  auto prices = load_prices(dir / "prices.csv");
  auto panel = align_market(prices, load_sentiment(dir / "sentiment.csv"), load_macro(dir / "macro.csv"), {});
  auto frames = build_frames(panel, training_stats(panel, panel.calendar[30]));
  GraphSources src;
  src.embeddings = EmbeddingTable::load(dir / "embeddings.txt");
  src.comentions = load_comentions(dir / "comentions.csv");
  src.knowledge = load_knowledge(dir / "knowledge.csv");
  std::span<const MarketFrame> hist(frames.data(), 31);
  auto build = build_graph(hist, hist.back().date, src, AssemblyOptions{});
  const auto& g = build.graph;
  CHECK(g.kind_of("AAA") == NodeKind::Asset);
  CHECK(g.kind_of("RATE") == NodeKind::MacroIndicator);
  CHECK(g.kind_of("OPEC") == NodeKind::NewsEntity);
  CHECK(g.assets().size() == 6);
  for (const auto& e : g.edges()) {
    CHECK(e.weight > 0.0);
    CHECK(e.ends.u < e.ends.v);
  }
  CHECK_THROWS_AS(build_graph(hist, Date(2030, 1, 1), src, AssemblyOptions{}), DataError);
}

}
