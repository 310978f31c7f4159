#include <cmath>

#include <doctest.h>

#include "helpers.hpp"
#include "rfr/errors.hpp"
#include "rfr/market_data.hpp"

using namespace rfr;

TEST_SUITE("market_data") {

TEST_CASE("price row maps field by field") {
  testing::TempDir dir;
  auto p = dir.write("p.csv", "date,ticker,close,volume\n2022-03-08,NVDA,229.36,61000000\n");
  auto rows = load_prices(p);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].date == Date(2022, 3, 8));
  CHECK(rows[0].ticker == "NVDA");
  CHECK(rows[0].close == 229.36);
  CHECK(rows[0].volume == 61000000);
}

TEST_CASE("header only gives no rows") {
  testing::TempDir dir;
  CHECK(load_prices(dir.write("p.csv", "date,ticker,close,volume\n")).empty());
}

TEST_CASE("negative close is rejected with its line") {
  testing::TempDir dir;
  auto p = dir.write("p.csv", "date,ticker,close,volume\n2022-03-08,NVDA,10,1\n2022-03-09,NVDA,-5.0,1\n");
  try {
    load_prices(p);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find(":3:") != std::string::npos);
  }
}

TEST_CASE("bad header, duplicates and malformed dates") {
  testing::TempDir dir;
  CHECK_THROWS_AS(load_prices(dir.write("a.csv", "day,ticker,close,volume\n")), DataError);
  CHECK_THROWS_AS(load_prices(dir.write("b.csv", "date,ticker,close,volume\n2022-01-03,A,1,1\n2022-01-03,A,2,1\n")),
                  DataError);
  CHECK_THROWS_AS(load_prices(dir.write("c.csv", "date,ticker,close,volume\n2022-02-30,A,1,1\n")), DataError);
  CHECK_THROWS_AS(load_sentiment(dir.write("d.csv", "date,ticker,polarity\n2022-01-03,A,1.5\n")), DataError);
}

TEST_CASE("log returns") {
  auto rec = [](int day, double close) { return PriceRecord{Date(2024, 1, day), "A", close, 1}; };
  SUBCASE("flat price") {
    std::vector<PriceRecord> p{rec(2, 100), rec(3, 100)};
    auto r = compute_log_returns(p);
    REQUIRE(r.values.size() == 1);
    CHECK(r.values.begin()->second == 0.0);
  }
  SUBCASE("ten percent up") {
    std::vector<PriceRecord> p{rec(2, 100), rec(3, 110)};
    auto r = compute_log_returns(p);
    CHECK(r.values.at({Date(2024, 1, 3), "A"}) == doctest::Approx(0.0953101798043249).epsilon(1e-14));
    CHECK(r.values.at({Date(2024, 1, 3), "A"}) == std::log(1.1));
  }
  SUBCASE("single day is flagged") {
    std::vector<PriceRecord> p{rec(2, 100)};
    auto r = compute_log_returns(p);
    CHECK(r.values.empty());
    CHECK(r.insufficient_history == std::vector<std::string>{"A"});
  }
}

TEST_CASE("rolling volatility") {
  SUBCASE("constant series") {
    std::vector<double> r(40, 0.01);
    auto v = rolling_volatility(r);
    for (std::size_t i = 29; i < r.size(); ++i) {
      REQUIRE(v[i].has_value());
      CHECK(*v[i] == doctest::Approx(0.0).epsilon(1e-15));
    }
    CHECK_FALSE(v[28].has_value());
  }
  SUBCASE("alternating +r/-r") {
    const double r = 0.013;
    std::vector<double> x;
    for (int i = 0; i < 30; ++i) x.push_back(i % 2 ? -r : r);
    auto v = rolling_volatility(x);
    REQUIRE(v.back().has_value());
    CHECK(*v.back() == doctest::Approx(r).epsilon(1e-12));
  }
  SUBCASE("29 returns") {
    std::vector<double> x(29, 0.01);
    for (const auto& v : rolling_volatility(x)) CHECK_FALSE(v.has_value());
  }
}

TEST_CASE("sentiment aggregation") {
  const Date d(2024, 1, 2);
  std::vector<SentimentRecord> two{{d, "A", 0.8}, {d, "A", -0.2}, {d, "B", 1.0}};
  CHECK(aggregate_sentiment(two, d, "A") == doctest::Approx(0.3));
  CHECK(aggregate_sentiment(two, Date(2024, 1, 3), "A") == 0.0);
  std::vector<SentimentRecord> one{{d, "A", -1.0}};
  CHECK(aggregate_sentiment(one, d, "A") == -1.0);
}

TEST_CASE("normalization") {
  RawFeatures raw;
  raw.log_return = 0.02;
  raw.realised_vol = 0.3;
  raw.volume = 5.0;
  raw.sentiment = 0.4;
  SUBCASE("identity stats pass through") {
    EntityStats s;  // mean 0, std 1
    auto f = normalize(raw, s);
    CHECK(f.log_return == 0.02);
    CHECK(f.realised_vol == 0.3);
    CHECK(f.volume_z == 5.0);
    CHECK(f.sentiment == 0.4);
  }
  SUBCASE("value at the training mean") {
    EntityStats s;
    s.log_return = {0.02, 0.5};
    CHECK(normalize(raw, s).log_return == 0.0);
  }
  SUBCASE("zero std gives zero") {
    EntityStats s;
    s.volume = {1.0, 0.0};
    CHECK(normalize(raw, s).volume_z == 0.0);
  }
  SUBCASE("undefined volatility maps to zero") {
    raw.realised_vol.reset();
    CHECK(normalize(raw, EntityStats{}).realised_vol == 0.0);
  }
}

TEST_CASE("frames from the fixture are reproducible") {
  const auto dir = testing::data_dir() / "fixture";
  auto prices = load_prices(dir / "prices.csv");
  auto sent = load_sentiment(dir / "sentiment.csv");
  auto macro = load_macro(dir / "macro.csv");
  auto panel = align_market(prices, sent, macro, {});
  auto stats = training_stats(panel, panel.calendar[30]);
  auto a = build_frames(panel, stats);
  auto b = build_frames(prices, sent, macro, {}, stats);
  REQUIRE(a.size() == b.size());
  CHECK(a.size() == 39);  // the first day has no return
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].date == b[i].date);
    REQUIRE(a[i].entities.size() == b[i].entities.size());
    for (const auto& [id, e] : a[i].entities) {
      const auto& f = b[i].entities.at(id).features;
      CHECK(e.features.log_return == f.log_return);
      CHECK(e.features.volume_z == f.volume_z);
      CHECK(e.features.sentiment >= -1.0);
      CHECK(e.features.sentiment <= 1.0);
    }
  }
  CHECK(a.front().find("RATE") != nullptr);
  CHECK(a.front().find("RATE")->kind == EntityKind::MacroIndicator);
  CHECK_THROWS_AS(frames_in_range(a, Date(2023, 12, 1), Date(2024, 1, 31)), DataError);
}

TEST_CASE("forward fill stops after the limit") {
  std::vector<PriceRecord> p;
  // A trades every day, B stops after day 2.
  for (int d = 1; d <= 12; ++d) {
    const Date date(2024, 1, d);
    p.push_back({date, "A", 100.0 + d, 1});
    if (d <= 2) p.push_back({date, "B", 50.0, 1});
  }
  auto panel = align_market(p, {}, {}, {});
  const auto& b = panel.series.at("B").days;
  for (std::size_t i = 0; i < b.size(); ++i) {
    const bool present = b[i].has_value();
    // day 0 has no previous close, so no return
    CHECK(present == (i >= 1 && i < 2 + static_cast<std::size_t>(kForwardFillLimit)));
  }
  CHECK_THROWS_AS(align_market(p, {}, {}, {"ZZZ"}), DataError);
}

}
