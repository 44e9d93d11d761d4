#include "narrex/topics.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

#include "json.hpp"
#include "narrex/error.hpp"
#include "narrex/report_io.hpp"

namespace narrex {
namespace {

constexpr double kEps = 1e-12;
// Above this many cells the objective uses the trace expansion instead of a
// dense residual.
constexpr Eigen::Index kDenseObjectiveCells = Eigen::Index{1} << 18;

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

class Objective {
 public:
  explicit Objective(const SparseRowMatrix& V) : V_(V) {
    if (V.rows() * V.cols() <= kDenseObjectiveCells) {
      dense_ = Eigen::MatrixXd(V);
    } else {
      v_sq_ = V.squaredNorm();
    }
  }

  double operator()(const Eigen::MatrixXd& W, const Eigen::MatrixXd& H) const {
    if (dense_) return (*dense_ - W * H).norm();
    const Eigen::MatrixXd WtV = (V_.transpose() * W).transpose();
    const double cross = WtV.cwiseProduct(H).sum();
    const double model = (W.transpose() * W).cwiseProduct(H * H.transpose()).sum();
    return std::sqrt(std::max(0.0, v_sq_ - 2.0 * cross + model));
  }

 private:
  const SparseRowMatrix& V_;
  std::optional<Eigen::MatrixXd> dense_;
  double v_sq_ = 0.0;
};

void validate_input(const SparseRowMatrix& V, std::size_t k) {
  const auto limit = static_cast<std::size_t>(std::min(V.rows(), V.cols()));
  if (k < 1 || k > limit)
    throw UsageError(fmt::format("topic count k={} outside [1, {}] for a {}x{} matrix", k, limit, V.rows(), V.cols()));
  bool any_positive = false;
  for (Eigen::Index r = 0; r < V.outerSize(); ++r) {
    for (SparseRowMatrix::InnerIterator it(V, r); it; ++it) {
      if (!(it.value() >= 0.0) || !std::isfinite(it.value()))
        throw DataError("NMF input must be finite and non-negative");
      any_positive = any_positive || it.value() > 0.0;
    }
  }
  if (!any_positive) throw DataError("degenerate input: all-zero matrix");
}

double mean_value(const SparseRowMatrix& V) {
  return V.sum() / (static_cast<double>(V.rows()) * static_cast<double>(V.cols()));
}

}  // namespace

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> nmf_initial_factors(Eigen::Index n_rows, Eigen::Index n_cols,
                                                                std::size_t k, double mean_value,
                                                                std::uint64_t seed) {
  const auto kk = static_cast<Eigen::Index>(k);
  const double scale = std::sqrt(mean_value / static_cast<double>(k));
  std::mt19937_64 rng(seed);
  Eigen::MatrixXd W(n_rows, kk);
  Eigen::MatrixXd H(kk, n_cols);
  for (Eigen::Index i = 0; i < n_rows; ++i)
    for (Eigen::Index j = 0; j < kk; ++j) W(i, j) = uniform01(rng) * scale;
  for (Eigen::Index i = 0; i < kk; ++i)
    for (Eigen::Index j = 0; j < n_cols; ++j) H(i, j) = uniform01(rng) * scale;
  return {std::move(W), std::move(H)};
}

TopicModel nmf_fit(const SparseRowMatrix& V, const NmfOptions& options) {
  validate_input(V, options.k);
  auto [W, H] = nmf_initial_factors(V.rows(), V.cols(), options.k, mean_value(V), options.seed);
  return nmf_fit_from(V, std::move(W), std::move(H), options);
}

TopicModel nmf_fit(const DocTermMatrix& V, const NmfOptions& options) { return nmf_fit(V.weights, options); }

TopicModel nmf_fit_from(const SparseRowMatrix& V, Eigen::MatrixXd W, Eigen::MatrixXd H, const NmfOptions& options) {
  validate_input(V, options.k);
  const auto kk = static_cast<Eigen::Index>(options.k);
  if (W.rows() != V.rows() || W.cols() != kk || H.rows() != kk || H.cols() != V.cols())
    throw UsageError("starting factors do not match the input shape");

  const Objective objective(V);
  TopicModel model;
  model.k = options.k;
  model.seed = options.seed;
  model.objective_trace.push_back(objective(W, H));

  for (std::size_t iter = 0; iter < options.max_iter; ++iter) {
    const Eigen::MatrixXd WtV = (V.transpose() * W).transpose();
    const Eigen::MatrixXd WtWH = (W.transpose() * W) * H;
    H.array() *= WtV.array() / (WtWH.array() + kEps);

    const Eigen::MatrixXd VHt = V * H.transpose();
    const Eigen::MatrixXd WHHt = W * (H * H.transpose());
    W.array() *= VHt.array() / (WHHt.array() + kEps);

    const double prev = model.objective_trace.back();
    const double cur = objective(W, H);
    model.objective_trace.push_back(cur);
    if (cur == 0.0 || (prev > 0.0 && (prev - cur) / prev < options.tol)) break;
  }
  model.W = std::move(W);
  model.H = std::move(H);
  return model;
}

double reconstruction_error(const SparseRowMatrix& V, const Eigen::MatrixXd& W, const Eigen::MatrixXd& H) {
  return (Eigen::MatrixXd(V) - W * H).norm();
}

std::vector<std::vector<std::string>> top_terms(const TopicModel& model, const Vocabulary& vocab, std::size_t m) {
  if (m < 1 || m > vocab.size())
    throw UsageError(fmt::format("requested {} top terms from a vocabulary of {}", m, vocab.size()));
  if (static_cast<std::size_t>(model.H.cols()) != vocab.size())
    throw UsageError("topic model and vocabulary sizes differ");
  std::vector<std::vector<std::string>> out(model.k);
  std::vector<std::size_t> order(vocab.size());
  for (std::size_t t = 0; t < model.k; ++t) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    const auto row = static_cast<Eigen::Index>(t);
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(m), order.end(),
                      [&](std::size_t a, std::size_t b) {
                        const double wa = model.H(row, static_cast<Eigen::Index>(a));
                        const double wb = model.H(row, static_cast<Eigen::Index>(b));
                        if (wa != wb) return wa > wb;
                        return a < b;  // vocabulary is sorted, so index order is lexicographic
                      });
    for (std::size_t i = 0; i < m; ++i) out[t].push_back(vocab.terms[order[i]]);
  }
  return out;
}

std::optional<std::size_t> dominant_topic(const TopicModel& model, std::size_t doc) {
  const auto row = model.W.row(static_cast<Eigen::Index>(doc));
  std::optional<std::size_t> best;
  double best_w = 0.0;
  for (Eigen::Index t = 0; t < row.size(); ++t) {
    if (row(t) > best_w) {
      best_w = row(t);
      best = static_cast<std::size_t>(t);
    }
  }
  return best;
}

std::vector<std::optional<std::size_t>> dominant_topics(const TopicModel& model) {
  std::vector<std::optional<std::size_t>> out(static_cast<std::size_t>(model.W.rows()));
  for (std::size_t d = 0; d < out.size(); ++d) out[d] = dominant_topic(model, d);
  return out;
}

std::vector<std::size_t> topic_volumes(std::span<const std::optional<std::size_t>> assignments, std::size_t k) {
  std::vector<std::size_t> volumes(k, 0);
  for (const auto& a : assignments)
    if (a && *a < k) ++volumes[*a];
  return volumes;
}

std::vector<LabeledSeries> topic_volume_series(std::span<const std::optional<std::size_t>> assignments,
                                               std::span<const Message> messages, std::size_t top_n,
                                               std::span<const std::string> topic_labels) {
  if (assignments.size() != messages.size()) throw UsageError("assignments and messages differ in length");
  const std::size_t k = topic_labels.size();
  const auto volumes = topic_volumes(assignments, k);

  std::vector<std::size_t> ranked(k);
  std::iota(ranked.begin(), ranked.end(), std::size_t{0});
  std::stable_sort(ranked.begin(), ranked.end(), [&](std::size_t a, std::size_t b) { return volumes[a] > volumes[b]; });

  const std::size_t kept = std::min(top_n, k);
  std::vector<std::size_t> slot(k, kept);  // index `kept` is "Other"
  for (std::size_t r = 0; r < kept; ++r) slot[ranked[r]] = r;

  std::vector<LabeledSeries> out(kept);
  for (std::size_t r = 0; r < kept; ++r) out[r].label = topic_labels[ranked[r]];
  LabeledSeries other{std::string(kOtherTopicLabel), {}};

  for (std::size_t d = 0; d < messages.size(); ++d) {
    if (!assignments[d] || *assignments[d] >= k) continue;
    const std::size_t s = slot[*assignments[d]];
    auto& series = s == kept ? other.series : out[s].series;
    auto& p = series.points[day_of(messages[d].created_utc)];
    ++p.n;
    p.value = static_cast<double>(p.n);
  }
  if (kept < k) out.push_back(std::move(other));
  return out;
}

double topic_cosine(const TopicModel& model, std::size_t i, std::size_t j) {
  const auto a = model.H.row(static_cast<Eigen::Index>(i));
  const auto b = model.H.row(static_cast<Eigen::Index>(j));
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::clamp(a.dot(b) / (na * nb), 0.0, 1.0);
}

TopicSimilarityGraph topic_similarity_graph(const TopicModel& model, std::size_t neighbors_k, double min_similarity,
                                            std::vector<std::string> labels) {
  if (neighbors_k < 1) throw UsageError("neighbors_k must be >= 1");
  TopicSimilarityGraph graph;
  graph.neighbors_k = neighbors_k;
  graph.min_similarity = min_similarity;
  if (labels.empty())
    for (std::size_t t = 0; t < model.k; ++t) labels.push_back(fmt::format("T{}", t));
  graph.labels = std::move(labels);

  const std::size_t k = model.k;
  Eigen::MatrixXd sim = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i + 1; j < k; ++j) {
      const double s = topic_cosine(model, i, j);
      sim(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = s;
      sim(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = s;
    }

  std::map<std::pair<std::size_t, std::size_t>, double> edges;
  std::vector<std::size_t> others;
  for (std::size_t i = 0; i < k; ++i) {
    others.clear();
    for (std::size_t j = 0; j < k; ++j)
      if (j != i) others.push_back(j);
    std::stable_sort(others.begin(), others.end(), [&](std::size_t a, std::size_t b) {
      return sim(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(a)) >
             sim(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(b));
    });
    for (std::size_t r = 0; r < std::min(neighbors_k, others.size()); ++r) {
      const std::size_t j = others[r];
      const double s = sim(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      if (s < min_similarity) break;
      edges.emplace(std::pair{std::min(i, j), std::max(i, j)}, s);
    }
  }
  for (const auto& [key, s] : edges) graph.edges.push_back({key.first, key.second, s});
  return graph;
}

std::string topic_graph_dot(const TopicSimilarityGraph& graph) {
  std::string out = "graph topics {\n  node [shape=ellipse];\n";
  for (std::size_t i = 0; i < graph.labels.size(); ++i) {
    nlohmann::json label = graph.labels[i];
    out += fmt::format("  t{} [label={}];\n", i, label.dump());
  }
  for (const auto& e : graph.edges)
    out += fmt::format("  t{} -- t{} [weight={}, penwidth={:.3f}];\n", e.a, e.b, io::format_number(e.similarity),
                       0.5 + 4.5 * e.similarity);
  out += "}\n";
  return out;
}

std::string topic_graph_edges_csv(const TopicSimilarityGraph& graph) {
  std::string out = "topic_a,topic_b,label_a,label_b,similarity\n";
  for (const auto& e : graph.edges)
    out += fmt::format("{},{},{},{},{}\n", e.a, e.b, io::csv_field(graph.labels[e.a]), io::csv_field(graph.labels[e.b]),
                       io::format_number(e.similarity));
  return out;
}

void write_topic_model(const std::filesystem::path& dir, const TopicModel& model, const Vocabulary& vocab,
                       const std::vector<std::vector<std::string>>& labels) {
  std::string w = "doc";
  for (std::size_t t = 0; t < model.k; ++t) w += fmt::format(",t{}", t);
  w.push_back('\n');
  for (Eigen::Index d = 0; d < model.W.rows(); ++d) {
    w += std::to_string(d);
    for (Eigen::Index t = 0; t < model.W.cols(); ++t) w += "," + io::format_number(model.W(d, t));
    w.push_back('\n');
  }
  io::write_file(dir / "W.csv", w);

  std::string h = "topic";
  for (const auto& term : vocab.terms) h += "," + io::csv_field(term);
  h.push_back('\n');
  for (Eigen::Index t = 0; t < model.H.rows(); ++t) {
    h += std::to_string(t);
    for (Eigen::Index c = 0; c < model.H.cols(); ++c) h += "," + io::format_number(model.H(t, c));
    h.push_back('\n');
  }
  io::write_file(dir / "H.csv", h);

  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (std::size_t t = 0; t < labels.size(); ++t) j[std::to_string(t)] = labels[t];
  io::write_file(dir / "labels.json", j.dump(2) + "\n");
}

}  // namespace narrex
