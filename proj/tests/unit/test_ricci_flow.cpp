#include <cmath>
#include <random>

#include <doctest.h>

#include "helpers.hpp"
#include "rfr/errors.hpp"
#include "rfr/ricci_flow.hpp"

using namespace rfr;
using testing::graph_of;

namespace {

WeightedGraph barbell() {
  std::vector<std::pair<std::string, std::string>> e;
  for (int base : {0, 4})
    for (int i = 0; i < 4; ++i)
      for (int j = i + 1; j < 4; ++j) e.emplace_back(std::to_string(base + i), std::to_string(base + j));
  e.emplace_back("3", "4");
  return graph_of(e);
}

FlowConfig ollivier_flow(int iters = 50, double eta = 0.1) {
  FlowConfig c;
  c.step = eta;
  c.iterations = iters;
  c.curvature.kind = CurvatureKind::Ollivier;
  return c;
}

}  // namespace

TEST_SUITE("ricci_flow") {

TEST_CASE("Euler step arithmetic") {
  auto g = graph_of({{"a", "b"}});
  std::vector<double> zero{0.0}, pos{0.5}, neg{-0.5};
  CHECK(flow_step(g, zero, 0.1)[0] == 1.0);
  CHECK(flow_step(g, pos, 0.1)[0] == doctest::Approx(0.95).epsilon(1e-15));
  CHECK(flow_step(g, neg, 0.1)[0] == doctest::Approx(1.05).epsilon(1e-15));
  std::vector<double> big{-12.0};
  try {
    flow_step(g, big, 0.1);
    FAIL("expected ComputeError");
  } catch (const ComputeError& e) {
    const std::string what = e.what();
    CHECK(what.find("(a, b)") != std::string::npos);
    CHECK(what.find("-12") != std::string::npos);
  }
}

TEST_CASE("renormalization") {
  std::vector<double> w{1.0, 2.0, 3.0};
  CHECK(renormalize_weights(w, 6.0) == w);
  std::vector<double> doubled{2.0, 4.0, 6.0};
  CHECK(renormalize_weights(doubled, 6.0) == w);
  std::vector<double> one{1.7};
  CHECK(renormalize_weights(one, 1.0)[0] == 1.0);
}

TEST_CASE("zero iterations leave delta at zero") {
  auto g = barbell();
  auto t = simulate_flow(g, Date(2024, 1, 2), ollivier_flow(0));
  CHECK(t.states.size() == 1);
  for (const auto& [_, d] : t.delta) CHECK(d == 0.0);
}

TEST_CASE("K3 under Forman is a fixed point") {
  auto g = graph_of({{"a", "b"}, {"b", "c"}, {"a", "c"}});
  FlowConfig c;
  c.curvature.kind = CurvatureKind::Forman;
  auto t = simulate_flow(g, Date(2024, 1, 2), c);
  for (const auto& s : t.states)
    for (double w : s.weights) CHECK(w == 1.0);
  for (const auto& [_, d] : t.delta) CHECK(d == 0.0);
}

TEST_CASE("barbell matches the scripted reference") {
  // Frozen from tests/oracles/barbell_flow.py (networkx hop metric, scipy LP).
  const double clique_k0 = 0.6666666666666666, clique_k = 0.5641992422459502;
  const double attach_k0 = 0.41666666666666663, attach_k = 0.26619003849002665;
  const double bridge_k0 = -0.5, bridge_k = 0.2014298845299205;
  const double bridge_w = 5.0800452218528385, attach_w = 1.1255400340446633, clique_w = 0.1944524289798634;

  auto g = barbell();
  auto t = simulate_flow(g, Date(2024, 1, 2), ollivier_flow());
  REQUIRE(t.states.size() == 51);
  const auto& last = t.states.back();
  for (std::size_t e = 0; e < g.edge_count(); ++e) {
    const auto id = g.edge_id(static_cast<int>(e));
    const bool bridge = id == EdgeId("3", "4");
    const bool attach = !bridge && (id.touches("3") || id.touches("4"));
    const double k0 = bridge ? bridge_k0 : attach ? attach_k0 : clique_k0;
    const double k = bridge ? bridge_k : attach ? attach_k : clique_k;
    const double w = bridge ? bridge_w : attach ? attach_w : clique_w;
    CHECK(std::abs(t.initial.values.at(id) - k0) <= 1e-9);
    CHECK(std::abs(t.final.values.at(id) - k) <= 1e-9);
    CHECK(std::abs(t.delta.at(id) - (k - k0)) <= 1e-9);
    CHECK(std::abs(last.weights[e] - w) <= 1e-9);
  }
  // The bridge starts negatively curved and gains the most.
  CHECK(t.delta.at(EdgeId("3", "4")) > 0.7);
}

TEST_CASE("renormalized flow keeps the total") {
  std::mt19937_64 rng(8);
  for (int rep = 0; rep < 5; ++rep) {
    auto g = testing::random_connected(7, 0.4, rng);
    const double total = g.total_weight();
    auto t = simulate_flow(g, Date(2024, 1, 2), ollivier_flow(20));
    for (const auto& s : t.states) {
      double sum = 0.0;
      for (double w : s.weights) sum += w;
      CHECK(std::abs(sum - total) <= 1e-9 * total);
    }
  }
}

TEST_CASE("frozen curvature reuses the first curvature") {
  auto g = barbell();
  auto c = ollivier_flow(5);
  c.frozen_curvature = true;
  auto t = simulate_flow(g, Date(2024, 1, 2), c);
  for (int i = 1; i < 5; ++i) CHECK(t.states[static_cast<std::size_t>(i)].curvature == t.states[0].curvature);
  // Without renormalization the weights are w0 * (1 - eta k0)^n exactly.
  c.renormalize = false;
  auto u = simulate_flow(g, Date(2024, 1, 2), c);
  for (std::size_t e = 0; e < g.edge_count(); ++e) {
    const double k0 = u.states[0].curvature[e];
    CHECK(u.states.back().weights[e] == doctest::Approx(std::pow(1.0 - 0.1 * k0, 5)).epsilon(1e-12));
  }
  // The final map is recomputed on the final weights.
  CHECK(u.final.values != u.initial.values);
}

TEST_CASE("flow is deterministic") {
  auto g = barbell();
  auto a = simulate_flow(g, Date(2024, 1, 2), ollivier_flow(10));
  auto b = simulate_flow(g, Date(2024, 1, 2), ollivier_flow(10));
  REQUIRE(a.states.size() == b.states.size());
  for (std::size_t i = 0; i < a.states.size(); ++i) {
    CHECK(a.states[i].weights == b.states[i].weights);
    CHECK(a.states[i].curvature == b.states[i].curvature);
  }
}

TEST_CASE("bad configurations") {
  auto g = barbell();
  CHECK_THROWS_AS(simulate_flow(g, Date(2024, 1, 2), ollivier_flow(5, 0.0)), ConfigError);
  CHECK_THROWS_AS(simulate_flow(g, Date(2024, 1, 2), ollivier_flow(-1)), ConfigError);
  CHECK_THROWS_AS(simulate_flow(WeightedGraph({"a"}, {}), Date(2024, 1, 2), ollivier_flow()), ComputeError);
}

TEST_CASE("cross-day shift") {
  CurvatureMap prev{Date(2024, 1, 2), CurvatureKind::Ollivier, {{EdgeId("a", "b"), 0.2}, {EdgeId("a", "c"), 0.1}}};
  CurvatureMap curr{Date(2024, 1, 3), CurvatureKind::Ollivier, {{EdgeId("a", "b"), -0.1}, {EdgeId("b", "c"), 0.4}}};
  auto same = cross_day_shift(prev, prev);
  for (const auto& [_, d] : same.delta) CHECK(d == 0.0);
  CHECK(same.born.empty());
  auto s = cross_day_shift(prev, curr);
  CHECK(s.delta.size() == 1);
  CHECK(s.delta.at(EdgeId("a", "b")) == doctest::Approx(-0.3).epsilon(1e-15));
  CHECK(s.died == std::vector<EdgeId>{EdgeId("a", "c")});
  CHECK(s.born == std::vector<EdgeId>{EdgeId("b", "c")});
  curr.kind = CurvatureKind::Forman;
  CHECK_THROWS_AS(cross_day_shift(prev, curr), DataError);
}

}
