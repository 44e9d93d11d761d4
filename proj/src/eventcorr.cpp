#include "narrex/eventcorr.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>

#include "narrex/error.hpp"
#include "narrex/parallel.hpp"
#include "narrex/report_io.hpp"

namespace narrex {
namespace {

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

DailySeries read_two_column_csv(const std::filesystem::path& path, bool allow_negative, bool require_count_header) {
  const auto rows = io::parse_csv(io::read_file(path));
  std::size_t first = 0;
  while (first < rows.size() && rows[first].empty()) ++first;
  if (first == rows.size()) throw DataError(fmt::format("{}: empty file", path.string()));
  const auto& header = rows[first];
  if (header.size() < 2 || trim(header[0]) != "date" || (require_count_header && trim(header[1]) != "count"))
    throw DataError(fmt::format("{}: expected header 'date,{}'", path.string(), require_count_header ? "count" : "value"));

  DailySeries series;
  for (std::size_t r = first + 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.empty()) continue;
    const std::size_t row_no = r + 1;
    if (row.size() < 2) throw DataError(fmt::format("{}: row {}: missing value column", path.string(), row_no));
    const auto date_text = trim(row[0]);
    const auto day = parse_day(date_text);
    if (!day) throw DataError(fmt::format("{}: row {}: unparsable date '{}'", path.string(), row_no, date_text));
    const auto value_text = trim(row[1]);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(value_text.data(), value_text.data() + value_text.size(), v);
    if (value_text.empty() || ec != std::errc{} || ptr != value_text.data() + value_text.size() || !std::isfinite(v))
      throw DataError(fmt::format("{}: row {}: bad value '{}'", path.string(), row_no, value_text));
    if (!allow_negative && v < 0)
      throw DataError(fmt::format("{}: row {}: negative count {}", path.string(), row_no, value_text));
    if (!series.points.emplace(*day, DailyPoint{v, 1}).second)
      throw DataError(fmt::format("{}: duplicate date {}", path.string(), date_text));
  }
  return series;
}

double mean(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

// |a| > |b| with a tolerance that keeps exact ties stable across lags.
bool stronger(double a, double b) { return std::fabs(a) > std::fabs(b) + 1e-15; }

int best_lag(const std::map<int, double>& r) {
  int best = 0;
  bool have = false;
  double best_r = 0.0;
  // Visit lags by |L| ascending, negative first, so ties keep the earliest.
  std::vector<int> lags;
  for (const auto& [lag, v] : r) lags.push_back(lag);
  std::stable_sort(lags.begin(), lags.end(), [](int a, int b) {
    if (std::abs(a) != std::abs(b)) return std::abs(a) < std::abs(b);
    return a < b;
  });
  for (int lag : lags) {
    const double v = r.at(lag);
    if (!have || stronger(v, best_r)) {
      best = lag;
      best_r = v;
      have = true;
    }
  }
  return best;
}

}  // namespace

EventSeries load_event_series(const std::filesystem::path& path) {
  EventSeries e;
  e.values = read_two_column_csv(path, /*allow_negative=*/false, /*require_count_header=*/true);
  e.label = path.stem().string();
  e.source_path = path;
  return e;
}

DailySeries load_daily_csv(const std::filesystem::path& path, bool allow_negative) {
  return read_two_column_csv(path, allow_negative, /*require_count_header=*/false);
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw UsageError("correlation inputs differ in length");
  if (x.size() < 3) throw UsageError("correlation needs at least 3 points");
  const double mx = mean(x);
  const double my = mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) throw DataError("undefined correlation: zero variance");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::vector<double> average_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i + 1;
    while (j < order.size() && values[order[j]] == values[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + 1 + j);  // mean of ranks i+1 .. j
    for (std::size_t t = i; t < j; ++t) ranks[order[t]] = avg;
    i = j;
  }
  return ranks;
}

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw UsageError("correlation inputs differ in length");
  if (x.size() < 3) throw UsageError("correlation needs at least 3 points");
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  return pearson(rx, ry);
}

AlignedPairs align_with_lag(const DailySeries& signal, const DailySeries& events, int lag) {
  AlignedPairs out;
  for (const auto& [day, p] : signal.points) {
    auto it = events.points.find(day - std::chrono::days{lag});
    if (it == events.points.end()) continue;
    out.days.push_back(day);
    out.signal.push_back(p.value);
    out.events.push_back(it->second.value);
  }
  return out;
}

std::pair<DailySeries, DailySeries> zero_fill(const DailySeries& a, const DailySeries& b) {
  if (a.empty() && b.empty()) return {a, b};
  Day first = Day::max(), last = Day::min();
  for (const auto* s : {&a, &b}) {
    if (s->empty()) continue;
    first = std::min(first, s->points.begin()->first);
    last = std::max(last, s->points.rbegin()->first);
  }
  auto fill = [&](const DailySeries& s) {
    DailySeries out = s;
    for (Day d = first; d <= last; d += std::chrono::days{1}) out.points.try_emplace(d, DailyPoint{0.0, 0});
    return out;
  };
  return {fill(a), fill(b)};
}

LagScanResult lag_scan(const DailySeries& signal, const DailySeries& events, int max_lag, unsigned threads) {
  if (max_lag < 1) throw UsageError("max_lag must be >= 1");
  const std::size_t n_lags = 2 * static_cast<std::size_t>(max_lag) + 1;

  struct LagValue {
    bool ok = false;
    double r = 0.0, rho = 0.0;
    std::size_t n = 0;
  };
  std::vector<LagValue> per_lag(n_lags);
  parallel_for(n_lags, threads, [&](std::size_t i) {
    const int lag = static_cast<int>(i) - max_lag;
    const auto pairs = align_with_lag(signal, events, lag);
    if (pairs.signal.size() < kMinLagOverlap) return;
    try {
      per_lag[i] = {true, pearson(pairs.signal, pairs.events), spearman(pairs.signal, pairs.events),
                    pairs.signal.size()};
    } catch (const DataError&) {
      // constant window at this lag: correlation undefined, lag omitted
    }
  });

  LagScanResult result;
  for (std::size_t i = 0; i < n_lags; ++i) {
    if (!per_lag[i].ok) continue;
    const int lag = static_cast<int>(i) - max_lag;
    result.lags.push_back(lag);
    result.pearson[lag] = per_lag[i].r;
    result.spearman[lag] = per_lag[i].rho;
    result.n_overlap[lag] = per_lag[i].n;
  }
  if (result.lags.empty()) throw DataError("no lag has enough overlapping days for a correlation");
  result.best_lag_pearson = best_lag(result.pearson);
  result.best_lag_spearman = best_lag(result.spearman);
  return result;
}

}  // namespace narrex
