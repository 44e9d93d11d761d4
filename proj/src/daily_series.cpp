#include "narrex/daily_series.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>

namespace narrex {

Day day_of(std::int64_t unix_seconds) {
  return std::chrono::floor<std::chrono::days>(std::chrono::sys_seconds{std::chrono::seconds{unix_seconds}});
}

std::string format_day(Day d) {
  const std::chrono::year_month_day ymd{d};
  return fmt::format("{:04}-{:02}-{:02}", static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                     static_cast<unsigned>(ymd.day()));
}

std::optional<Day> parse_day(std::string_view s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
  auto field = [&](std::size_t pos, std::size_t len) -> std::optional<int> {
    int v = 0;
    const char* first = s.data() + pos;
    const char* last = first + len;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last) return std::nullopt;
    return v;
  };
  const auto y = field(0, 4);
  const auto m = field(5, 2);
  const auto d = field(8, 2);
  if (!y || !m || !d) return std::nullopt;
  const std::chrono::year_month_day ymd{std::chrono::year{*y}, std::chrono::month{static_cast<unsigned>(*m)},
                                        std::chrono::day{static_cast<unsigned>(*d)}};
  if (!ymd.ok()) return std::nullopt;
  return Day{ymd};
}

std::optional<double> DailySeries::at(Day d) const {
  auto it = points.find(d);
  if (it == points.end()) return std::nullopt;
  return it->second.value;
}

std::vector<double> DailySeries::values() const {
  std::vector<double> out;
  out.reserve(points.size());
  for (const auto& [day, p] : points) out.push_back(p.value);
  return out;
}

MinMaxResult minmax_normalize(const DailySeries& series) {
  MinMaxResult result;
  if (series.empty()) return result;
  auto [lo_it, hi_it] = std::minmax_element(series.points.begin(), series.points.end(),
                                            [](const auto& a, const auto& b) { return a.second.value < b.second.value; });
  const double lo = lo_it->second.value;
  const double range = hi_it->second.value - lo;
  result.degenerate = !(range > 0.0);
  for (const auto& [day, p] : series.points) {
    const double v = result.degenerate ? 0.0 : (p.value - lo) / range;
    result.series.points.emplace(day, DailyPoint{std::clamp(v, 0.0, 1.0), p.n});
  }
  return result;
}

}  // namespace narrex
