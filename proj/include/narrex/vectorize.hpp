#pragma once

#include <Eigen/SparseCore>

#include <cstddef>
#include <filesystem>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace narrex {

using TokenList = std::vector<std::string>;
using SparseRowMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Lowercase alphabetic tokens in any script. Digits and punctuation split
/// tokens and are dropped, as are tokens shorter than two characters.
TokenList tokenize(std::string_view text);

/// Bundled English stopword list.
const std::set<std::string>& default_stopwords();

struct VocabularyOptions {
  std::size_t min_df = 2;
  double max_df_ratio = 0.95;
  std::set<std::string> stopwords = default_stopwords();
};

struct Vocabulary {
  /// Sorted lexicographically; column id == position.
  std::vector<std::string> terms;
  std::unordered_map<std::string, std::size_t> index;
  /// Aligned with `terms`.
  std::vector<std::size_t> doc_freq;
  std::size_t n_docs = 0;

  std::size_t size() const { return terms.size(); }
  std::optional<std::size_t> find(const std::string& term) const;
};

/// Throws UsageError for invalid options and DataError("empty vocabulary")
/// when every term is filtered out.
Vocabulary build_vocabulary(std::span<const TokenList> docs, const VocabularyOptions& options = {});

/// Smoothed idf: ln((1 + n_docs) / (1 + df)) + 1.
double smoothed_idf(std::size_t n_docs, std::size_t doc_freq);

enum class RowNorm { l2, none };

struct DocTermMatrix {
  std::size_t n_docs = 0;
  std::size_t n_terms = 0;
  SparseRowMatrix weights;
  RowNorm row_norm = RowNorm::l2;
};

/// Raw term counts times smoothed idf, rows optionally L2-normalised.
/// Documents without in-vocabulary tokens become zero rows.
DocTermMatrix tfidf_matrix(std::span<const TokenList> docs, const Vocabulary& vocab, RowNorm norm = RowNorm::l2);

void write_vocabulary_csv(const std::filesystem::path& path, const Vocabulary& vocab);
void write_matrix_triples_csv(const std::filesystem::path& path, const DocTermMatrix& matrix);

}  // namespace narrex
