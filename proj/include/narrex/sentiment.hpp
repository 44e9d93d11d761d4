#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "narrex/corpus.hpp"
#include "narrex/daily_series.hpp"

namespace narrex {

struct SentimentScore {
  double compound = 0.0;
  double pos = 0.0;
  double neu = 1.0;
  double neg = 0.0;
};

struct SentimentLexicon {
  std::unordered_map<std::string, double> valence;
  std::unordered_map<std::string, double> boosters;
  std::unordered_set<std::string> negators;
};

/// Default VADER booster/dampener words and negators.
std::unordered_map<std::string, double> default_boosters();
std::unordered_set<std::string> default_negators();

/// Reads a `token<TAB>valence` file (extra columns ignored) and attaches the
/// default boosters and negators. Throws IoError / DataError.
SentimentLexicon load_lexicon(const std::filesystem::path& path);

/// Builds a lexicon from in-memory valences plus the default modifiers.
SentimentLexicon make_lexicon(std::unordered_map<std::string, double> valence);

/// VADER-style scoring: lexicon valence, booster window of three tokens,
/// negation within three preceding tokens, all-caps emphasis, contrastive
/// "but", punctuation emphasis and s / sqrt(s^2 + 15) normalisation.
/// Idioms, "least" and "kind of" handling are not implemented.
SentimentScore score_text(std::string_view text, const SentimentLexicon& lexicon);

/// Scores messages concurrently; output aligned with the input.
std::vector<SentimentScore> score_messages(std::span<const Message> messages, const SentimentLexicon& lexicon,
                                           unsigned threads = 1);

/// Mean compound per UTC day over days with at least min_daily messages.
/// `scores` is aligned with `messages`.
DailySeries daily_sentiment_series(std::span<const Message> messages, std::span<const SentimentScore> scores,
                                   std::size_t min_daily = 10);

/// Trailing calendar-window mean over the days present in the series.
DailySeries rolling_mean(const DailySeries& series, std::size_t window_days = 14);

struct Histogram {
  double lo = -1.0;
  double hi = 1.0;
  std::vector<std::size_t> counts;

  std::size_t bins() const { return counts.size(); }
  std::size_t total() const;
  double bin_center(std::size_t i) const;
};

/// Uniform bins over [-1, 1]; the last bin includes +1.
Histogram sentiment_histogram(std::span<const double> compounds, std::size_t bins = 40);

/// Jensen-Shannon divergence, log base 2, between normalised histograms.
/// Throws UsageError on mismatched binning and DataError on empty input.
double platform_divergence(const Histogram& a, const Histogram& b);

}  // namespace narrex
