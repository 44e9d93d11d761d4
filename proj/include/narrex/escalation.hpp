#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "narrex/corpus.hpp"
#include "narrex/daily_series.hpp"

namespace narrex {

struct KeywordBundle {
  std::string name;
  /// Lowercase word or phrase patterns, each pre-split into word tokens.
  std::vector<std::vector<std::string>> patterns;
  double weight = 1.0;
};

/// Normalises patterns to lowercase token sequences. Throws UsageError for an
/// empty name, no patterns, a pattern without word characters or a
/// non-positive weight.
KeywordBundle make_bundle(std::string name, const std::vector<std::string>& patterns, double weight = 1.0);

/// Editorial defaults for the military, nuclear, diplomacy and escalation
/// bundles; replace them through configuration.
std::vector<KeywordBundle> default_bundles();

/// True iff any pattern occurs as a contiguous token run.
bool match_bundle(const std::vector<std::string>& tokens, const KeywordBundle& bundle);
bool match_bundle(const Message& message, const KeywordBundle& bundle);

struct BundleRates {
  std::string bundle;
  /// value = hits / total, n = total messages that day.
  DailySeries rate;
  std::map<Day, std::size_t> hits;
};

/// Fraction of each day's messages that match each bundle. Throws
/// UsageError on duplicate bundle names.
std::vector<BundleRates> daily_bundle_rates(std::span<const Message> messages, std::span<const KeywordBundle> bundles,
                                            unsigned threads = 1);

enum class Normalization { none, minmax };

struct CompositeIndex {
  DailySeries raw;
  /// Equal to `raw` when normalization is none.
  DailySeries normalized;
  Normalization normalization = Normalization::minmax;
  /// Set when minmax met a constant series (all values mapped to 0).
  bool degenerate = false;
};

/// Weighted mean of the bundle rates over the days every bundle covers.
/// `weights` may be empty (all 1) or aligned with `rates`.
CompositeIndex composite_index(std::span<const BundleRates> rates, Normalization normalization,
                               std::span<const double> weights = {});

}  // namespace narrex
