#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "narrex/daily_series.hpp"

namespace narrex {

struct EventSeries {
  DailySeries values;
  std::string label;
  std::filesystem::path source_path;
};

/// Reads a `date,count` CSV (header required, ISO-8601 dates). Throws
/// DataError naming the row for bad dates, negative or non-numeric counts,
/// and naming the date for duplicates.
EventSeries load_event_series(const std::filesystem::path& path);

/// Same format with an arbitrary value column name (e.g. an external
/// discourse signal).
DailySeries load_daily_csv(const std::filesystem::path& path, bool allow_negative = true);

/// Sample Pearson correlation. Throws UsageError for fewer than 3 points or
/// mismatched lengths, DataError("undefined correlation") for zero variance.
double pearson(std::span<const double> x, std::span<const double> y);

/// Ranks starting at 1; ties share their average rank.
std::vector<double> average_ranks(std::span<const double> values);

/// Pearson correlation of average ranks.
double spearman(std::span<const double> x, std::span<const double> y);

struct AlignedPairs {
  std::vector<Day> days;  // day of the signal observation
  std::vector<double> signal;
  std::vector<double> events;
};

/// Pairs (signal[t], events[t - lag]) for every t where both exist.
AlignedPairs align_with_lag(const DailySeries& signal, const DailySeries& events, int lag);

/// Fills every calendar day between the earliest and latest day of either
/// series with zero where a series has no value.
std::pair<DailySeries, DailySeries> zero_fill(const DailySeries& a, const DailySeries& b);

inline constexpr std::size_t kMinLagOverlap = 3;

struct LagScanResult {
  /// Lags with at least kMinLagOverlap pairs and a defined correlation.
  std::vector<int> lags;
  std::map<int, double> pearson;
  std::map<int, double> spearman;
  std::map<int, std::size_t> n_overlap;
  int best_lag_pearson = 0;
  int best_lag_spearman = 0;
};

/// Correlates signal[t] with events[t - L] for L in [-max_lag, max_lag], so a
/// negative best lag means the signal leads the events. Best lags maximise
/// |r|, ties going to the smaller |L| and then the more negative L.
/// Throws DataError when no lag has enough overlap.
LagScanResult lag_scan(const DailySeries& signal, const DailySeries& events, int max_lag = 14, unsigned threads = 1);

}  // namespace narrex
