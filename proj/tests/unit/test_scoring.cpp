#include <cmath>
#include <random>

#include <doctest.h>

#include "helpers.hpp"
#include "rfr/errors.hpp"
#include "rfr/scoring.hpp"

using namespace rfr;

namespace {

std::vector<MarketFrame> frames_for(const std::string& asset, const std::vector<double>& r) {
  std::vector<MarketFrame> out(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) {
    out[i].date = Date(2024, 1, static_cast<unsigned>(i + 1));
    EntityDay d;
    d.raw.log_return = r[i];
    out[i].entities.emplace(asset, d);
  }
  return out;
}

std::map<std::string, std::optional<ReturnForecast>> forecasts(const std::map<std::string, double>& r) {
  std::map<std::string, std::optional<ReturnForecast>> out;
  for (const auto& [a, x] : r) out[a] = ReturnForecast{a, 5, x};
  return out;
}

std::vector<std::string> order(const ScoreBoard& b) {
  std::vector<std::string> out;
  for (const auto& e : b.entries) out.push_back(e.asset);
  return out;
}

}  // namespace

TEST_SUITE("scoring") {

TEST_CASE("momentum forecast") {
  auto constant = frames_for("A", std::vector<double>(10, 0.003));
  CHECK(momentum_forecast(constant, "A", 5)->r_hat == doctest::Approx(0.015).epsilon(1e-14));
  auto flat = frames_for("A", std::vector<double>(10, 0.0));
  CHECK(momentum_forecast(flat, "A", 5)->r_hat == 0.0);
  auto mixed = frames_for("A", {0.5, 0.01, -0.01, 0.01, -0.01, 0.02});
  CHECK(momentum_forecast(mixed, "A", 5)->r_hat == doctest::Approx(0.02).epsilon(1e-13));
  auto short_history = frames_for("A", {0.01, 0.02});
  CHECK_FALSE(momentum_forecast(short_history, "A", 5).has_value());
  CHECK_FALSE(momentum_forecast(mixed, "B", 5).has_value());
  CHECK_THROWS_AS(momentum_forecast(mixed, "A", 0), ConfigError);
}

TEST_CASE("risk exposure") {
  auto g = testing::graph_of({{"a", "x"}, {"a", "y"}, {"b", "x"}});
  DeltaMap zero{{EdgeId("a", "x"), 0.0}, {EdgeId("a", "y"), 0.0}, {EdgeId("b", "x"), 0.0}};
  for (const auto& r : risk_exposures(g, {"a", "b"}, zero)) {
    CHECK(r.raw == 0.0);
    CHECK(r.normalized == 0.0);
  }
  DeltaMap d{{EdgeId("a", "x"), -0.1}, {EdgeId("a", "y"), 0.2}, {EdgeId("b", "x"), 0.15}, {EdgeId("x", "y"), 0.45}};
  CHECK(raw_risk_exposure(g, "a", d) == doctest::Approx(0.3).epsilon(1e-15));
  auto g2 = testing::graph_of({{"a", "x"}, {"a", "y"}, {"b", "x"}, {"x", "y"}});
  auto ex = risk_exposures(g2, {"a", "x"}, d);
  // x: 0.1 + 0.15 + 0.45 = 0.7 is the max; a: 0.3
  CHECK(ex[0].normalized == doctest::Approx(0.3 / 0.7).epsilon(1e-14));
  CHECK(ex[1].normalized == 1.0);
  CHECK_THROWS_AS(raw_risk_exposure(g, "nope", d), DataError);
}

TEST_CASE("normalized exposure ratio") {
  auto g = testing::graph_of({{"a", "x"}, {"b", "x"}});
  DeltaMap d{{EdgeId("a", "x"), 0.3}, {EdgeId("b", "x"), 0.6}};
  auto ex = risk_exposures(g, {"a", "b"}, d);
  CHECK(ex[0].normalized == 0.5);
}

TEST_CASE("score forms") {
  CHECK(score(0.03, 0.9, 1.0) == 0.03);
  CHECK(score(0.03, 0.9, 0.0) == -0.9);
  CHECK(score(0.02, 0.5, 0.7) == doctest::Approx(-0.136).epsilon(1e-14));
  CHECK_THROWS_AS(score(0.02, 0.5, 1.1), ConfigError);
  CHECK(lambda_score(0.02, 0.0, 1.0) == 0.02);
  CHECK(lambda_score(0.02, 0.3, 1.0) == doctest::Approx(-0.28).epsilon(1e-14));
  CHECK(lambda_score(0.01, 0.1, 2.0) > lambda_score(0.01, 0.2, 2.0));
  CHECK_THROWS_AS(lambda_score(0.02, 0.3, 0.0), ConfigError);
}

TEST_CASE("top-k selection") {
  ScoringOptions opt;
  opt.alpha = 1.0;
  auto b = build_scoreboard(Date(2024, 1, 2), forecasts({{"a", 0.3}, {"b", 0.1}, {"c", 0.2}}), {}, opt);
  CHECK(top_k(b, 2) == std::vector<std::string>{"a", "c"});
  CHECK(top_k(b, 10) == std::vector<std::string>{"a", "c", "b"});
  CHECK(b.entries[2].rank == 3);
  auto tie = build_scoreboard(Date(2024, 1, 2), forecasts({{"z", 0.1}, {"m", 0.1}, {"a", 0.1}}), {}, opt);
  CHECK(top_k(tie, 3) == std::vector<std::string>{"a", "m", "z"});
  CHECK_THROWS_AS(top_k(b, 0), ConfigError);
}

TEST_CASE("missing forecasts are excluded") {
  auto f = forecasts({{"a", 0.1}});
  f["b"] = std::nullopt;
  auto board = build_scoreboard(Date(2024, 1, 2), f, {}, ScoringOptions{});
  CHECK(board.entries.size() == 1);
  REQUIRE(board.excluded.size() == 1);
  CHECK(board.excluded[0].first == "b");
}

TEST_CASE("lambda form uses raw exposure") {
  ScoringOptions opt;
  opt.form = ScoringForm::Lambda;
  opt.lambda = 2.0;
  std::vector<RiskExposure> ex{{"a", 0.2, 0.5}, {"b", 0.4, 1.0}};
  auto board = build_scoreboard(Date(2024, 1, 2), forecasts({{"a", 0.1}, {"b", 0.1}}), ex, opt);
  CHECK(board.entries[0].asset == "a");
  CHECK(board.entries[0].score == doctest::Approx(0.1 - 0.4));
  CHECK(board.entries[0].risk == 0.2);
}

TEST_CASE("boundaries and scaling on random boards") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-0.05, 0.05), dk(-0.5, 0.5);
  for (int rep = 0; rep < 30; ++rep) {
    auto g = testing::random_connected(10, 0.3, rng);
    DeltaMap d;
    for (std::size_t e = 0; e < g.edge_count(); ++e) d[g.edge_id(static_cast<int>(e))] = dk(rng);
    std::map<std::string, double> r;
    for (const auto& id : g.ids()) r[id] = u(rng);
    const auto ex = risk_exposures(g, g.ids(), d);

    ScoringOptions opt;
    opt.alpha = 1.0;
    auto by_return = order(build_scoreboard(Date(2024, 1, 2), forecasts(r), ex, opt));
    std::vector<std::string> expect = g.ids();
    std::stable_sort(expect.begin(), expect.end(), [&](auto& a, auto& b) { return r[a] > r[b]; });
    CHECK(by_return == expect);

    opt.alpha = 0.0;
    auto by_risk = order(build_scoreboard(Date(2024, 1, 2), forecasts(r), ex, opt));
    std::map<std::string, double> risk;
    for (const auto& e : ex) risk[e.asset] = e.normalized;
    expect = g.ids();
    std::stable_sort(expect.begin(), expect.end(), [&](auto& a, auto& b) { return risk[a] < risk[b]; });
    CHECK(by_risk == expect);

    opt.alpha = 0.7;
    auto base = order(build_scoreboard(Date(2024, 1, 2), forecasts(r), ex, opt));
    for (double c : {0.5, 2.0, 7.3}) {
      DeltaMap scaled = d;
      for (auto& [_, v] : scaled) v *= c;
      auto again = order(build_scoreboard(Date(2024, 1, 2), forecasts(r), risk_exposures(g, g.ids(), scaled), opt));
      CHECK(again == base);
    }
  }
}

}
