#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "narrex/corpus.hpp"
#include "narrex/error.hpp"
#include "narrex/report_io.hpp"
#include "narrex/topics.hpp"
#include "support/helpers.hpp"
#include "support/oracles.hpp"

using namespace narrex;

namespace {

Eigen::MatrixXd random_matrix(Eigen::Index r, Eigen::Index c, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Eigen::MatrixXd m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = unif(rng);
  return m;
}

TopicModel model_with(Eigen::MatrixXd w, Eigen::MatrixXd h) {
  TopicModel m;
  m.k = static_cast<std::size_t>(h.rows());
  m.W = std::move(w);
  m.H = std::move(h);
  return m;
}

Vocabulary vocab_of(std::vector<std::string> terms) {
  Vocabulary v;
  v.terms = std::move(terms);
  for (std::size_t i = 0; i < v.terms.size(); ++i) v.index[v.terms[i]] = i;
  v.doc_freq.assign(v.terms.size(), 1);
  v.n_docs = 1;
  return v;
}

oracle::Matrix to_rows(const Eigen::MatrixXd& m) {
  oracle::Matrix out(static_cast<std::size_t>(m.rows()), std::vector<double>(static_cast<std::size_t>(m.cols())));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) out[i][j] = m(i, j);
  return out;
}

}  // namespace

TEST_CASE("nmf: rank-1 2x3 matrix is recovered at k=1") {
  Eigen::MatrixXd v = Eigen::Vector2d(1, 2) * Eigen::RowVector3d(3, 0, 1);
  const SparseRowMatrix sv = v.sparseView();
  const auto model = nmf_fit(sv, NmfOptions{1, 500, 0.0, 3});
  CHECK((v - model.W * model.H).norm() / v.norm() < 1e-6);
}

TEST_CASE("nmf: fixed seed gives bit-identical factors") {
  const SparseRowMatrix v = random_matrix(20, 15, 1).sparseView();
  const auto a = nmf_fit(v, NmfOptions{4, 100, 1e-6, 9});
  const auto b = nmf_fit(v, NmfOptions{4, 100, 1e-6, 9});
  CHECK(a.W == b.W);
  CHECK(a.H == b.H);
  CHECK(a.objective_trace == b.objective_trace);
  const auto c = nmf_fit(v, NmfOptions{4, 100, 1e-6, 10});
  CHECK(a.W != c.W);
}

TEST_CASE("nmf: final error within 5% of an independent multiplicative-update oracle") {
  const Eigen::MatrixXd dense = random_matrix(30, 50, 2);
  const SparseRowMatrix v = dense.sparseView();
  const std::size_t k = 5, iters = 200;
  auto [w0, h0] = nmf_initial_factors(30, 50, k, dense.mean(), 17);
  const auto model = nmf_fit_from(v, w0, h0, NmfOptions{k, iters, 0.0, 17});

  const auto vr = to_rows(dense);
  auto w = to_rows(w0), h = to_rows(h0);
  for (std::size_t i = 0; i < iters; ++i) oracle::mu_step(vr, w, h);
  const double expected = oracle::frobenius_residual(vr, w, h);
  CHECK(std::fabs(model.objective_trace.back() - expected) <= 0.05 * expected);
  CHECK(std::fabs(reconstruction_error(v, model.W, model.H) - expected) <= 1e-6 * expected);
  CHECK(std::fabs(model.objective_trace.front() - oracle::frobenius_residual(vr, to_rows(w0), to_rows(h0))) <= 1e-9);
}

TEST_CASE("nmf: initial factors are scaled uniform draws") {
  auto [w, h] = nmf_initial_factors(40, 60, 4, 0.36, 5);
  const double scale = std::sqrt(0.36 / 4);
  CHECK(w.minCoeff() >= 0.0);
  CHECK(w.maxCoeff() <= scale);
  CHECK(h.maxCoeff() <= scale);
  CHECK(std::fabs(w.mean() - scale / 2) < 0.1 * scale);
}

TEST_CASE("nmf: objective non-increasing and factors non-negative") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Eigen::MatrixXd dense = random_matrix(25, 35, 100 + seed);
    for (Eigen::Index i = 0; i < dense.rows(); ++i) dense(i, (i * 7) % dense.cols()) = 0.0;
    dense.row(3).setZero();
    dense.col(5).setZero();
    const auto model = nmf_fit(SparseRowMatrix(dense.sparseView()), NmfOptions{6, 300, 0.0, seed});
    for (std::size_t i = 1; i < model.objective_trace.size(); ++i)
      CHECK(model.objective_trace[i] <= model.objective_trace[i - 1] + 1e-9);
    CHECK(model.W.minCoeff() >= 0.0);
    CHECK(model.H.minCoeff() >= 0.0);
    CHECK(model.W.allFinite());
    CHECK(model.objective_trace.size() == 301);
  }
}

TEST_CASE("nmf: tolerance stops early") {
  const SparseRowMatrix v = random_matrix(20, 20, 4).sparseView();
  const auto model = nmf_fit(v, NmfOptions{3, 1000, 1e-3, 0});
  CHECK(model.objective_trace.size() < 1001);
  const auto n = model.objective_trace.size();
  const double last = model.objective_trace[n - 1], prev = model.objective_trace[n - 2];
  CHECK((prev - last) / prev < 1e-3);
}

TEST_CASE("nmf: errors") {
  const SparseRowMatrix v = random_matrix(4, 6, 5).sparseView();
  CHECK_THROWS_AS(nmf_fit(v, NmfOptions{0, 10, 0, 0}), UsageError);
  CHECK_THROWS_AS(nmf_fit(v, NmfOptions{5, 10, 0, 0}), UsageError);
  CHECK_NOTHROW(nmf_fit(v, NmfOptions{4, 10, 0, 0}));
  const SparseRowMatrix zero = Eigen::MatrixXd::Zero(4, 6).sparseView();
  CHECK_THROWS_WITH_AS(nmf_fit(zero, NmfOptions{2, 10, 0, 0}), doctest::Contains("degenerate input"), DataError);
  Eigen::MatrixXd neg = random_matrix(4, 6, 6);
  neg(1, 1) = -0.5;
  CHECK_THROWS_AS(nmf_fit(SparseRowMatrix(neg.sparseView()), NmfOptions{2, 10, 0, 0}), DataError);
}

TEST_CASE("top_terms: ordering, ties and range") {
  const auto vocab = vocab_of({"cat", "deal", "nuclear"});
  Eigen::MatrixXd h(2, 3);
  h << 0.01, 0.5, 0.9,
       0.3, 0.3, 0.1;
  const auto model = model_with(Eigen::MatrixXd::Ones(1, 2), h);
  const auto terms = top_terms(model, vocab, 2);
  CHECK(terms[0] == std::vector<std::string>{"nuclear", "deal"});
  CHECK(terms[1] == std::vector<std::string>{"cat", "deal"});
  CHECK_THROWS_AS(top_terms(model, vocab, 4), UsageError);
  CHECK_THROWS_AS(top_terms(model, vocab, 0), UsageError);
}

TEST_CASE("dominant_topic: argmax, tie to lowest id, all-zero unassigned") {
  Eigen::MatrixXd w(3, 3);
  w << 0.1, 0.7, 0.2,
       0.5, 0.5, 0.0,
       0.0, 0.0, 0.0;
  const auto model = model_with(w, Eigen::MatrixXd::Ones(3, 2));
  CHECK(dominant_topic(model, 0) == 1);
  CHECK(dominant_topic(model, 1) == 0);
  CHECK_FALSE(dominant_topic(model, 2).has_value());
  CHECK(dominant_topics(model) == std::vector<std::optional<std::size_t>>{1, 0, std::nullopt});
}

TEST_CASE("topic_volume_series: top_n plus Other") {
  std::vector<Message> ms;
  std::vector<std::optional<std::size_t>> assign;
  for (int i = 0; i < 13; ++i) {
    ms.push_back(testing::message(std::to_string(i), "x", testing::kJan1st2025 + (i % 2) * 86400));
    assign.push_back(i < 10 ? 0 : 1);
  }
  const std::vector<std::string> labels = {"T0", "T1"};
  const auto series = topic_volume_series(assign, ms, 1, labels);
  REQUIRE(series.size() == 2);
  CHECK(series[0].label == "T0");
  CHECK(series[1].label == "Other");
  double other_total = 0, t0_total = 0;
  for (const auto& [d, p] : series[1].series.points) other_total += p.value;
  for (const auto& [d, p] : series[0].series.points) t0_total += p.value;
  CHECK(other_total == 3);
  CHECK(t0_total == 10);

  const auto all = topic_volume_series(assign, ms, 2, labels);
  CHECK(all.size() == 2);
  for (const auto& s : all) CHECK(s.label != "Other");
  CHECK(topic_volume_series(assign, ms, 5, labels).size() == 2);
}

TEST_CASE("topic_volume_series conserves daily assigned counts") {
  std::mt19937 rng(12);
  std::vector<Message> ms;
  std::vector<std::optional<std::size_t>> assign;
  for (int i = 0; i < 400; ++i) {
    ms.push_back(testing::message(std::to_string(i), "x", testing::kJan1st2025 + (rng() % (20 * 86400))));
    if (rng() % 10 == 0)
      assign.push_back(std::nullopt);
    else
      assign.push_back(rng() % 6);
  }
  const std::vector<std::string> labels = {"a", "b", "c", "d", "e", "f"};
  const auto series = topic_volume_series(assign, ms, 3, labels);
  CHECK(series.size() == 4);
  std::vector<Message> assigned;
  for (std::size_t i = 0; i < ms.size(); ++i)
    if (assign[i]) assigned.push_back(ms[i]);
  const auto daily = daily_message_counts(assigned);
  for (const auto& [day, p] : daily.points) {
    double sum = 0;
    for (const auto& s : series)
      if (auto v = s.series.at(day)) sum += *v;
    CHECK(sum == static_cast<double>(p.n));
  }
}

TEST_CASE("topic similarity: identical, orthogonal and single topic") {
  Eigen::MatrixXd h(3, 4);
  h << 1, 2, 0, 0,
       1, 2, 0, 0,
       0, 0, 3, 1;
  const auto model = model_with(Eigen::MatrixXd::Ones(1, 3), h);
  CHECK(topic_cosine(model, 0, 1) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(topic_cosine(model, 0, 2) == 0.0);
  const auto g = topic_similarity_graph(model, 2, 0.1);
  REQUIRE(g.edges.size() == 1);
  CHECK(g.edges[0].a == 0);
  CHECK(g.edges[0].b == 1);
  CHECK(g.edges[0].similarity == doctest::Approx(1.0).epsilon(1e-12));

  const auto single = model_with(Eigen::MatrixXd::Ones(1, 1), Eigen::MatrixXd::Ones(1, 4));
  CHECK(topic_similarity_graph(single, 3, 0.0).edges.empty());
  CHECK_THROWS_AS(topic_similarity_graph(model, 0, 0.1), UsageError);
}

TEST_CASE("topic similarity graph equals a brute-force ranking") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Eigen::MatrixXd h = random_matrix(6, 12, 50 + seed);
    const auto model = model_with(Eigen::MatrixXd::Ones(1, 6), h);
    const double min_sim = 0.75;
    std::set<std::pair<std::size_t, std::size_t>> expected;
    for (std::size_t i = 0; i < 6; ++i) {
      std::vector<std::pair<double, std::size_t>> cand;
      for (std::size_t j = 0; j < 6; ++j) {
        if (j == i) continue;
        const double c = h.row(i).dot(h.row(j)) / (h.row(i).norm() * h.row(j).norm());
        cand.push_back({-c, j});
      }
      std::sort(cand.begin(), cand.end());
      for (std::size_t r = 0; r < 2; ++r)
        if (-cand[r].first >= min_sim) expected.emplace(std::min(i, cand[r].second), std::max(i, cand[r].second));
    }
    const auto g = topic_similarity_graph(model, 2, min_sim);
    std::set<std::pair<std::size_t, std::size_t>> got;
    for (const auto& e : g.edges) {
      got.emplace(e.a, e.b);
      CHECK(e.a < e.b);
      CHECK(e.similarity >= 0.0);
      CHECK(e.similarity <= 1.0);
      CHECK(std::fabs(topic_cosine(model, e.a, e.b) - topic_cosine(model, e.b, e.a)) <= 1e-12);
    }
    CHECK(got == expected);
  }
}

TEST_CASE("topic model and graph export") {
  testing::TempDir dir;
  Eigen::MatrixXd w(2, 2), h(2, 3);
  w << 1, 0, 0.5, 0.25;
  h << 0.9, 0.1, 0, 0, 0.2, 0.8;
  auto model = model_with(w, h);
  const auto vocab = vocab_of({"deal", "talks", "war"});
  write_topic_model(dir.path(), model, vocab, top_terms(model, vocab, 2));
  CHECK(io::read_file(dir / "W.csv") == "doc,t0,t1\n0,1,0\n1,0.5,0.25\n");
  CHECK(io::read_file(dir / "labels.json").find("\"0\"") != std::string::npos);
  const auto g = topic_similarity_graph(model, 1, 0.0, {"first", "second"});
  const auto dot = topic_graph_dot(g);
  CHECK(dot.find("t0 -- t1") != std::string::npos);
  CHECK(dot.find("\"first\"") != std::string::npos);
  CHECK(topic_graph_edges_csv(g) == "topic_a,topic_b,label_a,label_b,similarity\n0,1,first,second," + io::format_number(topic_cosine(model, 0, 1)) + "\n");
}
