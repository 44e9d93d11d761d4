#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace narrex {

using Day = std::chrono::sys_days;

/// UTC calendar day of a Unix timestamp.
Day day_of(std::int64_t unix_seconds);

/// ISO-8601 "YYYY-MM-DD".
std::string format_day(Day d);

/// Parses "YYYY-MM-DD"; returns nullopt for anything else, including
/// impossible dates such as 2022-02-30.
std::optional<Day> parse_day(std::string_view s);

struct DailyPoint {
  double value = 0.0;
  /// Observations behind `value` (messages, rows, window days).
  std::size_t n = 0;

  friend bool operator==(const DailyPoint&, const DailyPoint&) = default;
};

/// Date-indexed series. Days absent from `points` are missing, not zero.
struct DailySeries {
  std::map<Day, DailyPoint> points;

  bool empty() const { return points.empty(); }
  std::size_t size() const { return points.size(); }
  std::optional<double> at(Day d) const;
  std::vector<double> values() const;

  friend bool operator==(const DailySeries&, const DailySeries&) = default;
};

struct MinMaxResult {
  DailySeries series;
  /// Set when max == min; every value is then mapped to 0.
  bool degenerate = false;
};

/// Affine rescale of the values to [0, 1] over their observed range.
MinMaxResult minmax_normalize(const DailySeries& series);

/// Inclusive day range.
struct DateRange {
  Day first;
  Day last;
  bool contains(Day d) const { return first <= d && d <= last; }
  friend bool operator==(const DateRange&, const DateRange&) = default;
};

}  // namespace narrex
