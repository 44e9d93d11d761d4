#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "narrex/corpus.hpp"
#include "narrex/daily_series.hpp"

namespace narrex {

enum class EntityCategory { person, org, gpe };

std::string_view to_string(EntityCategory c);
std::optional<EntityCategory> parse_entity_category(std::string_view s);

struct GazetteerEntry {
  std::vector<std::string> aliases;  // lowercase
  EntityCategory category = EntityCategory::gpe;
};

/// Canonical entity names with their aliases, matched as token sequences.
class Gazetteer {
 public:
  /// Throws UsageError if an alias is empty or claimed by two entities.
  void add(std::string canonical, std::vector<std::string> aliases, EntityCategory category);

  /// Loads `{"Canonical": {"aliases": [...], "category": "gpe"}, ...}`.
  static Gazetteer from_json(std::string_view json_text);
  static Gazetteer load(const std::filesystem::path& path);

  const std::map<std::string, GazetteerEntry>& entries() const { return entries_; }

  /// Longest-match-first scan over word tokens; each canonical reported once.
  std::set<std::string> match(const std::vector<std::string>& tokens) const;

 private:
  std::map<std::string, GazetteerEntry> entries_;
  std::map<std::vector<std::string>, std::string> alias_to_canonical_;
  std::size_t max_alias_tokens_ = 0;
};

/// Pluggable entity extraction.
class EntityExtractor {
 public:
  virtual ~EntityExtractor() = default;
  virtual std::set<std::string> extract(const Message& message) const = 0;
};

class GazetteerExtractor final : public EntityExtractor {
 public:
  explicit GazetteerExtractor(const Gazetteer& gazetteer) : gazetteer_(gazetteer) {}
  std::set<std::string> extract(const Message& message) const override;

 private:
  const Gazetteer& gazetteer_;
};

/// Entities produced by an external NER tool, read from JSONL lines of
/// `{"id": ..., "entities": [{"text": ..., "category": ...}]}`.
/// Messages without a record yield no entities.
class ExchangeFileExtractor final : public EntityExtractor {
 public:
  static ExchangeFileExtractor load(const std::filesystem::path& path);
  static ExchangeFileExtractor parse(std::string_view jsonl);
  std::set<std::string> extract(const Message& message) const override;

 private:
  std::unordered_map<std::string, std::set<std::string>> by_id_;
};

/// Possessives stripped, then gazetteer match over word tokens.
std::set<std::string> extract_entities(const Message& message, const Gazetteer& gazetteer);

struct EntityEdge {
  std::string a;  // a < b
  std::string b;
  std::size_t cooccur = 0;
  double pmi = 0.0;
  friend bool operator==(const EntityEdge&, const EntityEdge&) = default;
};

struct EntityGraph {
  std::map<std::string, std::size_t> nodes;  // entity -> message frequency
  std::vector<EntityEdge> edges;             // sorted by (a, b)
  std::optional<DateRange> window;
  /// Messages considered (after the date filter).
  std::size_t n_messages = 0;

  friend bool operator==(const EntityGraph&, const EntityGraph&) = default;
};

/// Node frequencies and within-message co-occurrence counts. Messages outside
/// `date_filter` are skipped.
EntityGraph cooccurrence_counts(std::span<const Message> messages, const EntityExtractor& extractor,
                                std::optional<DateRange> date_filter = std::nullopt, unsigned threads = 1);

/// pmi = ln((c_ab / N) / ((c_a / N)(c_b / N))). Drops edges below
/// min_cooccur and edges with pmi <= 0. Throws UsageError if n_messages is 0.
EntityGraph pmi_weights(const EntityGraph& graph, std::size_t n_messages, std::size_t min_cooccur = 2);

/// Union over nodes of each node's top_k incident edges by pmi (ties by
/// count desc, then pair); nodes left without edges are removed.
EntityGraph backbone_filter(const EntityGraph& graph, std::size_t top_k = 3);

enum class GraphFormat { dot, json, csv };

std::string render_graph(const EntityGraph& graph, GraphFormat format);
void export_graph(const EntityGraph& graph, GraphFormat format, const std::filesystem::path& path);

}  // namespace narrex
