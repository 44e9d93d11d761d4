#include <doctest.h>

#include <random>

#include "narrex/error.hpp"
#include "narrex/escalation.hpp"
#include "support/helpers.hpp"
#include "support/oracles.hpp"

using namespace narrex;

namespace {

Day day(int offset) { return *parse_day("2025-01-01") + std::chrono::days{offset}; }

BundleRates rates_of(std::string name, const std::vector<double>& values, int first_day = 0) {
  BundleRates r;
  r.bundle = std::move(name);
  for (std::size_t i = 0; i < values.size(); ++i) r.rate.points[day(first_day + static_cast<int>(i))] = {values[i], 10};
  return r;
}

}  // namespace

TEST_CASE("match_bundle: at most once per message, token boundaries, phrases") {
  const auto b = make_bundle("military", {"missile", "strike"});
  CHECK(match_bundle(testing::message("1", "Missile strike reported"), b));
  CHECK_FALSE(match_bundle(testing::message("2", "strikingly calm"), b));
  CHECK_FALSE(match_bundle(testing::message("3", "strikes continue"), b));
  const auto phrase = make_bundle("airspace", {"no fly zone"});
  CHECK(match_bundle(testing::message("4", "a no fly zone was declared"), phrase));
  CHECK(match_bundle(testing::message("5", "A No-Fly Zone!"), phrase));
  CHECK_FALSE(match_bundle(testing::message("6", "no zone to fly"), phrase));

  std::vector<Message> ms = {testing::message("7", "missile missile strike strike")};
  const auto rates = daily_bundle_rates(ms, std::vector<KeywordBundle>{b});
  CHECK(rates[0].hits.begin()->second == 1);
  CHECK(rates[0].rate.points.begin()->second.value == 1.0);
}

TEST_CASE("make_bundle normalises and validates patterns") {
  const auto b = make_bundle("x", {"IRGC", "Strait of Hormuz"});
  CHECK(b.patterns == std::vector<std::vector<std::string>>{{"irgc"}, {"strait", "of", "hormuz"}});
  CHECK(b.weight == 1.0);
  CHECK_THROWS_AS(make_bundle("x", {}), UsageError);
  CHECK_THROWS_AS(make_bundle("", {"a"}), UsageError);
  CHECK_THROWS_AS(make_bundle("x", {"!!"}), UsageError);
  CHECK_THROWS_AS(make_bundle("x", {"a"}, 0.0), UsageError);
}

TEST_CASE("default bundles") {
  const auto bundles = default_bundles();
  REQUIRE(bundles.size() == 4);
  std::map<std::string, std::size_t> sizes;
  for (const auto& b : bundles) sizes[b.name] = b.patterns.size();
  CHECK(sizes == std::map<std::string, std::size_t>{{"diplomacy", 6}, {"escalation", 5}, {"military", 7}, {"nuclear", 5}});
}

TEST_CASE("daily rates: arithmetic examples") {
  std::vector<Message> ms;
  for (int i = 0; i < 50; ++i) ms.push_back(testing::message(std::to_string(i), i < 5 ? "ceasefire talks" : "weather", testing::kJan1st2025));
  for (int i = 0; i < 20; ++i) ms.push_back(testing::message("b" + std::to_string(i), "weather", testing::kJan1st2025 + 86400));
  const std::vector<KeywordBundle> bundles = {make_bundle("diplomacy", {"talks", "ceasefire"})};
  const auto rates = daily_bundle_rates(ms, bundles);
  CHECK(rates[0].rate.points.at(day(0)) == DailyPoint{0.1, 50});
  CHECK(rates[0].rate.points.at(day(1)) == DailyPoint{0.0, 20});
  CHECK(rates[0].hits.at(day(0)) == 5);
  CHECK_FALSE(rates[0].rate.points.contains(day(2)));
}

TEST_CASE("daily rates: random corpus matches a brute-force recount, any thread count") {
  std::mt19937 rng(8);
  const std::vector<std::string> words = {"war", "peace", "talks", "no", "fly", "zone", "missile", "the", "nuclear"};
  std::vector<Message> ms;
  for (int i = 0; i < 500; ++i) {
    std::string text;
    for (int j = 0; j < 6; ++j) text += words[rng() % words.size()] + " ";
    ms.push_back(testing::message(std::to_string(i), text, testing::kJan1st2025 + rng() % (15 * 86400)));
  }
  const std::vector<KeywordBundle> bundles = {make_bundle("a", {"war", "missile"}), make_bundle("b", {"no fly zone"}),
                                              make_bundle("c", {"nuclear talks", "peace"})};
  const auto rates = daily_bundle_rates(ms, bundles, 1);
  const auto rates4 = daily_bundle_rates(ms, bundles, 4);
  for (std::size_t b = 0; b < bundles.size(); ++b) {
    CHECK(rates[b].rate == rates4[b].rate);
    std::map<std::int64_t, std::pair<double, double>> count;
    for (const auto& m : ms) {
      auto& c = count[m.created_utc / 86400];
      c.second += 1;
      bool hit = false;
      for (const auto& p : bundles[b].patterns) hit = hit || oracle::contains_phrase(oracle::simple_tokens(m.text), p);
      c.first += hit;
    }
    CHECK(rates[b].rate.size() == count.size());
    for (const auto& [d, c] : count) {
      const double r = rates[b].rate.points.at(Day{std::chrono::days{d}}).value;
      CHECK(std::fabs(r - c.first / c.second) <= 1e-12);
      CHECK(r >= 0.0);
      CHECK(r <= 1.0);
    }
  }
}

TEST_CASE("daily rates: duplicate bundle names rejected") {
  const std::vector<KeywordBundle> bundles = {make_bundle("a", {"x"}), make_bundle("a", {"y"})};
  CHECK_THROWS_AS(daily_bundle_rates(std::vector<Message>{}, bundles), UsageError);
}

TEST_CASE("composite: mean, identity, intersection and order invariance") {
  std::vector<BundleRates> rates = {rates_of("a", {0.1}), rates_of("b", {0.2}), rates_of("c", {0.3}), rates_of("d", {0.4})};
  CHECK(composite_index(rates, Normalization::none).raw.points.at(day(0)).value == doctest::Approx(0.25).epsilon(1e-15));

  const std::vector<BundleRates> single = {rates_of("only", {0.3, 0.1, 0.7})};
  const auto id = composite_index(single, Normalization::none);
  CHECK(id.raw.values() == single[0].rate.values());
  CHECK(id.normalized == id.raw);

  const std::vector<BundleRates> shifted = {rates_of("a", {0.1, 0.2, 0.3}), rates_of("b", {0.5, 0.5}, 1)};
  const auto inter = composite_index(shifted, Normalization::none);
  CHECK(inter.raw.size() == 2);
  CHECK_FALSE(inter.raw.points.contains(day(0)));

  std::mt19937 rng(1);
  std::uniform_real_distribution<double> unif(0, 1);
  std::vector<BundleRates> many;
  for (int b = 0; b < 6; ++b) {
    std::vector<double> v(20);
    for (auto& x : v) x = unif(rng);
    many.push_back(rates_of("bundle" + std::to_string(b), v));
  }
  auto reversed = many;
  std::reverse(reversed.begin(), reversed.end());
  CHECK(composite_index(many, Normalization::minmax).raw == composite_index(reversed, Normalization::minmax).raw);

  CHECK_THROWS_AS(composite_index(std::vector<BundleRates>{}, Normalization::none), UsageError);
}

TEST_CASE("composite: weights") {
  const std::vector<BundleRates> rates = {rates_of("a", {0.2}), rates_of("b", {0.8})};
  const std::vector<double> w = {3.0, 1.0};
  CHECK(composite_index(rates, Normalization::none, w).raw.values()[0] == doctest::Approx(0.35).epsilon(1e-15));
  const std::vector<double> bad = {1.0};
  CHECK_THROWS_AS(composite_index(rates, Normalization::none, bad), UsageError);
}

TEST_CASE("composite: minmax affine map, argmax preserved, degenerate range") {
  const std::vector<BundleRates> rates = {rates_of("a", {0.1, 0.3, 0.2})};
  const auto c = composite_index(rates, Normalization::minmax);
  const auto v = c.normalized.values();
  CHECK(v[0] == 0.0);
  CHECK(v[1] == 1.0);
  CHECK(v[2] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK_FALSE(c.degenerate);

  const std::vector<BundleRates> flat = {rates_of("a", {0.4, 0.4, 0.4})};
  const auto f = composite_index(flat, Normalization::minmax);
  CHECK(f.degenerate);
  CHECK(f.normalized.values() == std::vector<double>{0.0, 0.0, 0.0});
}
