#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "narrex/corpus.hpp"
#include "narrex/escalation.hpp"

namespace narrex {

struct VectorizeConfig {
  std::size_t min_df = 2;
  double max_df_ratio = 0.95;
  std::vector<std::string> extra_stopwords;
};

struct NmfConfig {
  std::size_t k = 20;
  std::size_t max_iter = 400;
  double tol = 1e-5;
  std::uint64_t seed = 42;
  std::size_t top_terms = 10;
  /// Topics with their own volume series; the rest become "Other".
  std::size_t top_n_series = 8;
};

struct SentimentConfig {
  std::size_t min_daily = 10;
  std::size_t rolling_window = 14;
  std::size_t bins = 40;
};

struct SimilarityConfig {
  std::size_t neighbors_k = 2;
  double min_similarity = 0.1;
};

struct EscalationConfig {
  std::vector<KeywordBundle> bundles = default_bundles();
  Normalization normalization = Normalization::minmax;
  /// Rolling window for the plotted composite; 0 disables smoothing.
  std::size_t smoothing_window = 14;
};

struct CorrelationConfig {
  int max_lag = 14;
  bool zero_fill = false;
  /// Optional `date,value` CSV used instead of the escalation index.
  std::optional<std::filesystem::path> signal;
};

struct EntitiesConfig {
  std::size_t min_cooccur = 2;
  std::size_t backbone_k = 3;
};

struct PipelineConfig {
  std::vector<std::filesystem::path> jsonl;
  std::optional<Platform> platform_hint;
  std::vector<std::filesystem::path> events;
  std::filesystem::path gazetteer;
  std::filesystem::path lexicon;
  /// External NER output replacing the gazetteer extractor when set.
  std::optional<std::filesystem::path> ner_exchange;
  std::filesystem::path output_dir = "narrex_out";
  /// Directory relative input paths were resolved against.
  std::filesystem::path base_dir;

  VectorizeConfig vectorize;
  NmfConfig nmf;
  SentimentConfig sentiment;
  SimilarityConfig similarity;
  EscalationConfig escalation;
  CorrelationConfig correlation;
  EntitiesConfig entities;

  /// Worker threads; never changes results.
  unsigned threads = 1;
};

std::filesystem::path default_data_dir();

/// Parses TOML text. Relative paths resolve against `base_dir`. Throws
/// UsageError on syntax errors, unknown values or out-of-range numbers.
PipelineConfig parse_config(std::string_view toml_text, const std::filesystem::path& base_dir);
PipelineConfig load_config(const std::filesystem::path& path);

/// Range checks plus existence of every referenced input file.
void validate_config(const PipelineConfig& config);

/// Canonical JSON of everything that influences outputs (not output_dir or
/// threads).
std::string canonical_config(const PipelineConfig& config);

}  // namespace narrex
