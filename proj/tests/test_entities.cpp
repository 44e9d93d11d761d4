#include <doctest.h>

#include <cmath>
#include <random>

#include "json.hpp"
#include "narrex/entities.hpp"
#include "narrex/error.hpp"
#include "narrex/report_io.hpp"
#include "support/helpers.hpp"
#include "support/oracles.hpp"

using namespace narrex;
using testing::message;

namespace {

Gazetteer small_gazetteer() {
  return Gazetteer::from_json(R"({
    "Iran": {"aliases": ["iran", "iranian"], "category": "gpe"},
    "Tehran": {"aliases": ["tehran"], "category": "gpe"},
    "IRGC": {"aliases": ["irgc", "revolutionary guards"], "category": "org"},
    "Islamic Republic": {"aliases": ["islamic republic"], "category": "org"},
    "Republic": {"aliases": ["republic"], "category": "org"}
  })");
}

class MapExtractor final : public EntityExtractor {
 public:
  explicit MapExtractor(std::map<std::string, std::set<std::string>> m) : m_(std::move(m)) {}
  std::set<std::string> extract(const Message& msg) const override {
    auto it = m_.find(msg.id);
    return it == m_.end() ? std::set<std::string>{} : it->second;
  }

 private:
  std::map<std::string, std::set<std::string>> m_;
};

EntityGraph graph_from(const std::vector<std::set<std::string>>& sets) {
  std::vector<Message> msgs;
  std::map<std::string, std::set<std::string>> m;
  for (std::size_t i = 0; i < sets.size(); ++i) {
    msgs.push_back(message("m" + std::to_string(i), ""));
    m["m" + std::to_string(i)] = sets[i];
  }
  return cooccurrence_counts(msgs, MapExtractor(m));
}

}  // namespace

TEST_CASE("extract_entities: aliases, possessives, longest match") {
  const auto g = small_gazetteer();
  CHECK(extract_entities(message("1", "Iran and the IRGC said"), g) == std::set<std::string>{"IRGC", "Iran"});
  CHECK(extract_entities(message("2", "Tehran's streets were quiet"), g) == std::set<std::string>{"Tehran"});
  CHECK(extract_entities(message("3", "the Islamic Republic fell"), g) == std::set<std::string>{"Islamic Republic"});
  CHECK(extract_entities(message("4", "a republic of sorts"), g) == std::set<std::string>{"Republic"});
  CHECK(extract_entities(message("5", "Iranian, iran, IRAN!"), g) == std::set<std::string>{"Iran"});
  CHECK(extract_entities(message("6", "the Revolutionary Guards"), g) == std::set<std::string>{"IRGC"});
  CHECK(extract_entities(message("7", "Iranians abroad"), g).empty());
  CHECK(extract_entities(message("8", ""), g).empty());
}

TEST_CASE("gazetteer: canonical names match and categories load") {
  const auto g = small_gazetteer();
  CHECK(g.entries().at("IRGC").category == EntityCategory::org);
  CHECK(g.entries().at("Iran").category == EntityCategory::gpe);
  CHECK(extract_entities(message("1", "the republic"), g).size() == 1);
}

TEST_CASE("gazetteer: malformed input is rejected") {
  CHECK_THROWS_AS(Gazetteer::from_json("[1, 2]"), DataError);
  CHECK_THROWS_AS(Gazetteer::from_json("{not json"), DataError);
  CHECK_THROWS_AS(Gazetteer::from_json(R"({"A": {"aliases": "a"}})"), DataError);
  CHECK_THROWS_AS(Gazetteer::from_json(R"({"A": {"aliases": [3]}})"), DataError);
  CHECK_THROWS_AS(Gazetteer::from_json(R"({"A": {"category": "planet"}})"), DataError);
  CHECK_THROWS_WITH_AS(Gazetteer::from_json(R"({"A": {"aliases": ["x"]}, "B": {"aliases": ["x"]}})"),
                       doctest::Contains("maps to both"), DataError);
  Gazetteer g;
  g.add("A", {"alpha"}, EntityCategory::person);
  CHECK_THROWS_AS(g.add("B", {"alpha"}, EntityCategory::person), UsageError);
  CHECK_THROWS_AS(g.add("C", {"!!"}, EntityCategory::person), UsageError);
  CHECK_THROWS_AS(g.add("A", {}, EntityCategory::person), UsageError);
}

TEST_CASE("gazetteer shipped with the project loads") {
  const auto g = Gazetteer::load(std::filesystem::path(NARREX_DATA_DIR) / "gazetteer.json");
  CHECK(g.entries().size() >= 20);
  CHECK(extract_entities(message("1", "Khamenei spoke in Tehran about the U.S."), g) ==
        std::set<std::string>{"Khamenei", "Tehran", "United States"});
}

TEST_CASE("exchange file extractor") {
  const auto ex = ExchangeFileExtractor::parse(
      "{\"id\": \"a\", \"entities\": [{\"text\": \"Iran\", \"category\": \"GPE\"}, {\"text\": \"IRGC\"}]}\n"
      "\n"
      "{\"id\": 7, \"entities\": []}\n");
  CHECK(ex.extract(message("a", "ignored")) == std::set<std::string>{"IRGC", "Iran"});
  CHECK(ex.extract(message("7", "x")).empty());
  CHECK(ex.extract(message("zz", "Iran")).empty());
  CHECK_THROWS_WITH_AS(ExchangeFileExtractor::parse("{\"id\": \"a\"}\n"), doctest::Contains("line 1"), DataError);
  CHECK_THROWS_AS(ExchangeFileExtractor::parse("{\"id\": \"a\", \"entities\": [{\"label\": 1}]}"), DataError);
}

TEST_CASE("cooccurrence counts every pair once per message") {
  const auto g = graph_from({{"A", "B", "C"}, {"A", "B"}, {"C"}, {}});
  CHECK(g.n_messages == 4);
  CHECK(g.nodes == std::map<std::string, std::size_t>{{"A", 2}, {"B", 2}, {"C", 2}});
  REQUIRE(g.edges.size() == 3);
  CHECK(g.edges[0] == EntityEdge{"A", "B", 2, 0.0});
  CHECK(g.edges[1] == EntityEdge{"A", "C", 1, 0.0});
  CHECK(g.edges[2] == EntityEdge{"B", "C", 1, 0.0});
}

TEST_CASE("cooccurrence: clique sizes and date filter") {
  std::vector<std::set<std::string>> sets;
  for (int n = 0; n <= 6; ++n) {
    std::set<std::string> s;
    for (int i = 0; i < n; ++i) s.insert(std::string(1, static_cast<char>('a' + i)));
    sets.push_back(s);
  }
  std::size_t total = 0;
  for (const auto& e : graph_from(sets).edges) total += e.cooccur;
  CHECK(total == 0 + 0 + 1 + 3 + 6 + 10 + 15);

  const auto g = small_gazetteer();
  std::vector<Message> msgs = {message("1", "Iran IRGC", testing::kJan1st2025),
                               message("2", "Iran Tehran", testing::kJan1st2025 + 86400),
                               message("3", "Tehran IRGC", testing::kJan1st2025 + 2 * 86400)};
  const Day d1 = day_of(testing::kJan1st2025 + 86400);
  const auto filtered = cooccurrence_counts(msgs, GazetteerExtractor(g), DateRange{d1, d1 + std::chrono::days{1}});
  CHECK(filtered.n_messages == 2);
  CHECK(filtered.nodes.at("Tehran") == 2);
  CHECK(filtered.nodes.at("IRGC") == 1);
  CHECK(filtered.window->first == d1);
  CHECK(cooccurrence_counts(msgs, GazetteerExtractor(g), std::nullopt, 4) ==
        cooccurrence_counts(msgs, GazetteerExtractor(g)));
}

TEST_CASE("pmi: worked example and dropped edges") {
  // N = 4, A and B each in 2 messages, together in 2: ln((2/4) / (1/2 * 1/2)) = ln 2.
  const auto g = graph_from({{"A", "B"}, {"A", "B"}, {"C", "D"}, {"C", "E"}});
  const auto w = pmi_weights(g, g.n_messages, 2);
  REQUIRE(w.edges.size() == 1);
  CHECK(w.edges[0].a == "A");
  CHECK(w.edges[0].pmi == doctest::Approx(std::log(2.0)).epsilon(1e-15));

  const auto low = pmi_weights(g, g.n_messages, 1);
  CHECK(low.edges.size() == 3);

  // Independence: p_ab = p_a p_b gives pmi 0, which is dropped.
  const auto indep = graph_from({{"A", "B"}, {"A"}, {"B"}, {}});
  CHECK(pmi_weights(indep, 4, 1).edges.empty());
  CHECK_THROWS_AS(pmi_weights(g, 0), UsageError);
}

TEST_CASE("pmi matches the direct formula on random graphs") {
  std::mt19937_64 rng(5);
  std::bernoulli_distribution coin(0.3);
  std::vector<std::set<std::string>> sets(150);
  for (auto& s : sets)
    for (char c = 'a'; c <= 'h'; ++c)
      if (coin(rng)) s.insert(std::string(1, c));
  const auto g = graph_from(sets);
  const auto w = pmi_weights(g, g.n_messages, 2);
  for (const auto& e : w.edges) {
    std::size_t ca = 0, cb = 0, cab = 0;
    for (const auto& s : sets) {
      ca += s.count(e.a);
      cb += s.count(e.b);
      cab += s.count(e.a) && s.count(e.b);
    }
    const double expect = std::log((cab / 150.0) / ((ca / 150.0) * (cb / 150.0)));
    CHECK(e.cooccur == cab);
    CHECK(std::fabs(e.pmi - expect) <= 1e-12);
    CHECK(e.pmi > 0);
  }
}

TEST_CASE("backbone: star graph keeps each leaf's single edge") {
  EntityGraph star;
  star.nodes = {{"hub", 5}, {"x", 1}, {"y", 1}, {"z", 1}, {"w", 1}};
  star.edges = {{"hub", "w", 1, 0.1}, {"hub", "x", 1, 0.4}, {"hub", "y", 1, 0.3}, {"hub", "z", 1, 0.2}};
  // Every leaf keeps its only edge, so nothing is removed even with top_k 1.
  CHECK(backbone_filter(star, 1).edges.size() == 4);

  EntityGraph tri;
  tri.nodes = {{"a", 1}, {"b", 1}, {"c", 1}, {"d", 1}};
  tri.edges = {{"a", "b", 2, 3.0}, {"a", "c", 2, 2.0}, {"b", "c", 2, 1.0}, {"c", "d", 2, 0.5}};
  const auto k1 = backbone_filter(tri, 1);
  std::vector<std::pair<std::string, std::string>> kept;
  for (const auto& e : k1.edges) kept.emplace_back(e.a, e.b);
  CHECK(kept == std::vector<std::pair<std::string, std::string>>{{"a", "b"}, {"a", "c"}, {"c", "d"}});
  CHECK(backbone_filter(tri, 3) == tri);
  CHECK_THROWS_AS(backbone_filter(tri, 0), UsageError);
}

TEST_CASE("backbone agrees with brute force and is idempotent") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.05, 3.0);
  std::uniform_int_distribution<int> cnt(2, 5);
  for (int trial = 0; trial < 30; ++trial) {
    EntityGraph g;
    std::vector<oracle::Edge> edges;
    for (char a = 'a'; a <= 'j'; ++a)
      for (char b = static_cast<char>(a + 1); b <= 'j'; ++b) {
        if (u(rng) < 1.5) continue;
        // Quantized weights force some ties.
        const double pmi = std::round(u(rng) * 4) / 4;
        const auto c = static_cast<std::size_t>(cnt(rng));
        g.edges.push_back({std::string(1, a), std::string(1, b), c, pmi});
        edges.push_back({std::string(1, a), std::string(1, b), c, pmi});
        g.nodes[std::string(1, a)] = 1;
        g.nodes[std::string(1, b)] = 1;
      }
    for (std::size_t k = 1; k <= 4; ++k) {
      const auto once = backbone_filter(g, k);
      std::set<std::pair<std::string, std::string>> got;
      for (const auto& e : once.edges) got.emplace(e.a, e.b);
      CHECK(got == oracle::backbone(edges, k));
      CHECK(backbone_filter(once, k) == once);
    }
  }
}

TEST_CASE("render_graph: empty graph in every format") {
  EntityGraph empty;
  CHECK(render_graph(empty, GraphFormat::dot) == "graph entities {\n}\n");
  CHECK(render_graph(empty, GraphFormat::csv) == "source,target,cooccur,pmi\n");
  const auto doc = nlohmann::json::parse(render_graph(empty, GraphFormat::json));
  CHECK(doc["nodes"].empty());
  CHECK(doc["edges"].empty());
  CHECK(doc["window"].is_null());
}

TEST_CASE("render_graph: two nodes and one edge") {
  EntityGraph g;
  g.nodes = {{"Iran", 3}, {"United States", 2}};
  g.edges = {{"Iran", "United States", 2, 0.5}};
  g.n_messages = 10;
  const auto dot = render_graph(g, GraphFormat::dot);
  CHECK(dot.find("\"Iran\" -- \"United States\"") != std::string::npos);
  std::size_t edge_lines = 0;
  for (std::size_t p = dot.find("--"); p != std::string::npos; p = dot.find("--", p + 2)) ++edge_lines;
  CHECK(edge_lines == 1);
  const auto doc = nlohmann::json::parse(render_graph(g, GraphFormat::json));
  CHECK(doc["nodes"].size() == 2);
  CHECK(doc["edges"][0]["pmi"] == 0.5);
  CHECK(render_graph(g, GraphFormat::csv) == "source,target,cooccur,pmi\nIran,United States,2,0.5\n");
  CHECK(render_graph(g, GraphFormat::dot) == dot);

  testing::TempDir dir;
  export_graph(g, GraphFormat::dot, dir / "g.dot");
  CHECK(io::read_file(dir / "g.dot") == dot);
}
