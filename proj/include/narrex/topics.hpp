#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "narrex/corpus.hpp"
#include "narrex/daily_series.hpp"
#include "narrex/vectorize.hpp"

namespace narrex {

struct NmfOptions {
  std::size_t k = 20;
  std::size_t max_iter = 400;
  /// Stop once (prev - cur) / prev falls below this.
  double tol = 1e-5;
  std::uint64_t seed = 0;
};

struct TopicModel {
  std::size_t k = 0;
  /// n_docs x k document-topic weights.
  Eigen::MatrixXd W;
  /// k x n_terms topic-term weights.
  Eigen::MatrixXd H;
  /// Frobenius reconstruction error ||V - WH||_F, starting with the
  /// initial factors and then one entry per iteration.
  std::vector<double> objective_trace;
  std::uint64_t seed = 0;
};

/// Seeded uniform(0,1) * sqrt(mean(V) / k) starting factors.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> nmf_initial_factors(Eigen::Index n_rows, Eigen::Index n_cols,
                                                                std::size_t k, double mean_value,
                                                                std::uint64_t seed);

/// Multiplicative-update NMF under the Frobenius objective.
/// Throws UsageError if k is outside [1, min(rows, cols)] and DataError if V
/// is all zero or has negative entries.
TopicModel nmf_fit(const SparseRowMatrix& V, const NmfOptions& options);
TopicModel nmf_fit(const DocTermMatrix& V, const NmfOptions& options);

/// Same updates from caller-provided starting factors.
TopicModel nmf_fit_from(const SparseRowMatrix& V, Eigen::MatrixXd W, Eigen::MatrixXd H, const NmfOptions& options);

/// ||V - WH||_F evaluated entry by entry.
double reconstruction_error(const SparseRowMatrix& V, const Eigen::MatrixXd& W, const Eigen::MatrixXd& H);

/// Per topic, the m highest-weight terms in descending order (ties by term
/// order). Throws UsageError if m is 0 or exceeds the vocabulary size.
std::vector<std::vector<std::string>> top_terms(const TopicModel& model, const Vocabulary& vocab, std::size_t m);

/// Argmax of the document's W row; lowest topic wins ties; nullopt for an
/// all-zero row.
std::optional<std::size_t> dominant_topic(const TopicModel& model, std::size_t doc);

std::vector<std::optional<std::size_t>> dominant_topics(const TopicModel& model);

struct LabeledSeries {
  std::string label;
  DailySeries series;
};

inline constexpr std::string_view kOtherTopicLabel = "Other";

/// Daily assigned-message counts for the top_n topics by total volume,
/// remaining topics folded into "Other". Unassigned documents are skipped.
/// `assignments` is aligned with `messages`.
std::vector<LabeledSeries> topic_volume_series(std::span<const std::optional<std::size_t>> assignments,
                                               std::span<const Message> messages, std::size_t top_n,
                                               std::span<const std::string> topic_labels);

/// Total assigned messages per topic.
std::vector<std::size_t> topic_volumes(std::span<const std::optional<std::size_t>> assignments, std::size_t k);

struct TopicEdge {
  std::size_t a = 0;  // a < b
  std::size_t b = 0;
  double similarity = 0.0;
  friend bool operator==(const TopicEdge&, const TopicEdge&) = default;
};

struct TopicSimilarityGraph {
  std::vector<std::string> labels;  // node labels, indexed by topic id
  std::vector<TopicEdge> edges;     // sorted by (a, b)
  std::size_t neighbors_k = 0;
  double min_similarity = 0.0;
};

/// Cosine similarity between two topic rows of H; 0 if either is all zero.
double topic_cosine(const TopicModel& model, std::size_t i, std::size_t j);

/// Links each topic to its neighbors_k most similar topics (cosine over H
/// rows, ties by lower id) at or above min_similarity.
TopicSimilarityGraph topic_similarity_graph(const TopicModel& model, std::size_t neighbors_k, double min_similarity,
                                            std::vector<std::string> labels = {});

std::string topic_graph_dot(const TopicSimilarityGraph& graph);
std::string topic_graph_edges_csv(const TopicSimilarityGraph& graph);

/// W.csv, H.csv and labels.json.
void write_topic_model(const std::filesystem::path& dir, const TopicModel& model, const Vocabulary& vocab,
                       const std::vector<std::vector<std::string>>& labels);

}  // namespace narrex
