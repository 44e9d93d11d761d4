#include "narrex/vectorize.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <map>

#include "narrex/error.hpp"
#include "narrex/report_io.hpp"
#include "narrex/text.hpp"

namespace narrex {

TokenList tokenize(std::string_view text) {
  TokenList tokens;
  std::u32string current;
  auto flush = [&] {
    if (current.size() >= 2) tokens.push_back(text::encode_utf8(current));
    current.clear();
  };
  for (char32_t c : text::decode_utf8(text)) {
    if (text::is_letter(c)) {
      current.push_back(text::to_lower(c));
    } else {
      flush();
    }
  }
  flush();
  return tokens;
}

std::optional<std::size_t> Vocabulary::find(const std::string& term) const {
  auto it = index.find(term);
  if (it == index.end()) return std::nullopt;
  return it->second;
}

Vocabulary build_vocabulary(std::span<const TokenList> docs, const VocabularyOptions& options) {
  if (options.min_df < 1) throw UsageError("min_df must be >= 1");
  if (!(options.max_df_ratio > 0.0 && options.max_df_ratio <= 1.0))
    throw UsageError("max_df_ratio must lie in (0, 1]");

  std::map<std::string, std::size_t> df;
  for (const auto& doc : docs) {
    TokenList unique = doc;
    std::sort(unique.begin(), unique.end());
    unique.erase(std::unique(unique.begin(), unique.end()), unique.end());
    for (auto& t : unique) ++df[std::move(t)];
  }

  Vocabulary vocab;
  vocab.n_docs = docs.size();
  const auto n = static_cast<double>(docs.size());
  for (auto& [term, count] : df) {
    if (count < options.min_df) continue;
    if (static_cast<double>(count) / n > options.max_df_ratio) continue;
    if (options.stopwords.contains(term)) continue;
    vocab.index.emplace(term, vocab.terms.size());
    vocab.terms.push_back(term);
    vocab.doc_freq.push_back(count);
  }
  if (vocab.terms.empty()) throw DataError("empty vocabulary");
  return vocab;
}

double smoothed_idf(std::size_t n_docs, std::size_t doc_freq) {
  return std::log((1.0 + static_cast<double>(n_docs)) / (1.0 + static_cast<double>(doc_freq))) + 1.0;
}

DocTermMatrix tfidf_matrix(std::span<const TokenList> docs, const Vocabulary& vocab, RowNorm norm) {
  DocTermMatrix m;
  m.n_docs = docs.size();
  m.n_terms = vocab.size();
  m.row_norm = norm;

  std::vector<double> idf(vocab.size());
  for (std::size_t t = 0; t < vocab.size(); ++t) idf[t] = smoothed_idf(docs.size(), vocab.doc_freq[t]);

  std::vector<Eigen::Triplet<double>> triplets;
  std::map<std::size_t, double> row;
  for (std::size_t d = 0; d < docs.size(); ++d) {
    row.clear();
    for (const auto& token : docs[d]) {
      if (auto col = vocab.find(token)) row[*col] += 1.0;
    }
    double sq = 0.0;
    for (auto& [col, w] : row) {
      w *= idf[col];
      sq += w * w;
    }
    const double scale = (norm == RowNorm::l2 && sq > 0.0) ? 1.0 / std::sqrt(sq) : 1.0;
    for (const auto& [col, w] : row)
      triplets.emplace_back(static_cast<int>(d), static_cast<int>(col), w * scale);
  }
  m.weights.resize(static_cast<Eigen::Index>(m.n_docs), static_cast<Eigen::Index>(m.n_terms));
  m.weights.setFromTriplets(triplets.begin(), triplets.end());
  m.weights.makeCompressed();
  return m;
}

void write_vocabulary_csv(const std::filesystem::path& path, const Vocabulary& vocab) {
  std::string out = "term,index,doc_freq\n";
  for (std::size_t i = 0; i < vocab.size(); ++i)
    out += fmt::format("{},{},{}\n", io::csv_field(vocab.terms[i]), i, vocab.doc_freq[i]);
  io::write_file(path, out);
}

void write_matrix_triples_csv(const std::filesystem::path& path, const DocTermMatrix& matrix) {
  std::string out = "doc,term,weight\n";
  for (Eigen::Index r = 0; r < matrix.weights.outerSize(); ++r)
    for (SparseRowMatrix::InnerIterator it(matrix.weights, r); it; ++it)
      out += fmt::format("{},{},{}\n", it.row(), it.col(), io::format_number(it.value()));
  io::write_file(path, out);
}

}  // namespace narrex
