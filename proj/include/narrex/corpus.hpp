#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "narrex/daily_series.hpp"

namespace narrex {

enum class Platform { telegram, reddit };
enum class MessageKind { message, post, comment };

std::string_view to_string(Platform p);
std::string_view to_string(MessageKind k);
std::optional<Platform> parse_platform(std::string_view s);
std::optional<MessageKind> parse_kind(std::string_view s);

/// One deduplicated, preprocessed platform item.
struct Message {
  std::string id;
  Platform platform = Platform::telegram;
  std::string source;  // channel name or subreddit
  MessageKind kind = MessageKind::message;
  std::int64_t created_utc = 0;
  std::string text;
  /// Character count of `text` after preprocessing.
  std::size_t raw_length = 0;

  friend bool operator==(const Message&, const Message&) = default;
};

struct IngestReport {
  std::size_t lines = 0;
  std::size_t accepted = 0;
  std::size_t blank_lines = 0;
  std::size_t malformed = 0;
  std::size_t empty_after_preprocess = 0;
  std::size_t duplicates_dropped = 0;
  /// 1-based line numbers of malformed lines, capped at 100 entries per file.
  std::vector<std::size_t> malformed_lines;

  IngestReport& operator+=(const IngestReport& other);
};

struct IngestResult {
  std::vector<Message> messages;
  IngestReport report;
};

/// Strips http(s) URLs, collapses whitespace runs and trims.
std::string preprocess_text(std::string_view raw);

/// Parses one JSONL line. Returns nullopt when the line is not a JSON object
/// or lacks a required field (id, platform, source, created_utc, text).
/// `platform_hint` supplies the platform when the record has none.
std::optional<Message> parse_message_line(std::string_view line, std::optional<Platform> platform_hint);

/// Loads one crawler JSONL file. Malformed lines are counted and skipped;
/// repeated (platform, id) pairs keep the first occurrence.
/// Throws IoError if the file cannot be read.
IngestResult ingest_jsonl(const std::filesystem::path& path, std::optional<Platform> platform_hint = std::nullopt);

/// Ingests several files, parsing them concurrently. The result equals
/// sequential ingestion in file-name order, whatever `threads` is.
IngestResult ingest_files(std::vector<std::filesystem::path> paths, std::optional<Platform> platform_hint = std::nullopt,
                          unsigned threads = 1);

struct CdfPoint {
  double value = 0.0;
  double fraction = 0.0;
  friend bool operator==(const CdfPoint&, const CdfPoint&) = default;
};
using Cdf = std::vector<CdfPoint>;

/// Empirical CDF of `raw_length`. Throws DataError on empty input.
Cdf compute_length_cdf(std::span<const Message> messages);

/// Fraction of observations <= x under a step CDF.
double cdf_at(const Cdf& cdf, double x);

struct SourceCount {
  Platform platform = Platform::telegram;
  std::string source;
  std::size_t count = 0;
  friend bool operator==(const SourceCount&, const SourceCount&) = default;
};

struct CorpusStats {
  std::size_t total_items = 0;
  std::map<Platform, std::size_t> per_platform;
  /// Sources ranked by count descending, ties by source name ascending
  /// (then platform).
  std::vector<SourceCount> per_source;
  Cdf length_cdf;
  /// Per platform: CDF over source volumes (fraction of sources with
  /// volume <= v).
  std::map<Platform, Cdf> source_volume_cdf;
};

CorpusStats compute_source_volumes(std::span<const Message> messages);

/// Message count per UTC day; days without messages are absent.
DailySeries daily_message_counts(std::span<const Message> messages,
                                 std::optional<Platform> platform_filter = std::nullopt);

/// CSV writers for the corpus statistics artifacts.
void write_length_cdf_csv(const std::filesystem::path& path, const Cdf& cdf);
void write_source_volumes_csv(const std::filesystem::path& path, const CorpusStats& stats);

/// Canonical JSONL serialisation of messages (used for the ingest cache).
std::string serialize_messages(std::span<const Message> messages);
std::vector<Message> deserialize_messages(std::string_view jsonl);

}  // namespace narrex
