#include "narrex/escalation.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <set>

#include "narrex/error.hpp"
#include "narrex/parallel.hpp"
#include "narrex/text.hpp"

namespace narrex {

KeywordBundle make_bundle(std::string name, const std::vector<std::string>& patterns, double weight) {
  if (name.empty()) throw UsageError("keyword bundle needs a name");
  if (patterns.empty()) throw UsageError(fmt::format("keyword bundle '{}' has no patterns", name));
  if (!(weight > 0.0)) throw UsageError(fmt::format("keyword bundle '{}' needs a positive weight", name));
  KeywordBundle bundle{std::move(name), {}, weight};
  for (const auto& p : patterns) {
    auto tokens = text::word_tokens(p);
    if (tokens.empty()) throw UsageError(fmt::format("pattern '{}' in bundle '{}' has no words", p, bundle.name));
    bundle.patterns.push_back(std::move(tokens));
  }
  return bundle;
}

std::vector<KeywordBundle> default_bundles() {
  return {
      make_bundle("military", {"strike", "missile", "troops", "attack", "deployment", "idf", "airstrike"}),
      make_bundle("nuclear", {"nuclear", "enrichment", "uranium", "centrifuge", "iaea"}),
      make_bundle("diplomacy", {"talks", "negotiation", "sanctions", "deal", "ceasefire", "envoy"}),
      make_bundle("escalation", {"escalation", "retaliation", "war", "conflict", "mobilization"}),
  };
}

bool match_bundle(const std::vector<std::string>& tokens, const KeywordBundle& bundle) {
  return std::any_of(bundle.patterns.begin(), bundle.patterns.end(),
                     [&](const auto& pattern) { return text::contains_sequence(tokens, pattern); });
}

bool match_bundle(const Message& message, const KeywordBundle& bundle) {
  return match_bundle(text::word_tokens(message.text), bundle);
}

std::vector<BundleRates> daily_bundle_rates(std::span<const Message> messages, std::span<const KeywordBundle> bundles,
                                            unsigned threads) {
  std::set<std::string> names;
  for (const auto& b : bundles)
    if (!names.insert(b.name).second) throw UsageError(fmt::format("duplicate keyword bundle '{}'", b.name));

  // hits[i * bundles + b]
  std::vector<char> hits(messages.size() * bundles.size(), 0);
  parallel_for(messages.size(), threads, [&](std::size_t i) {
    const auto tokens = text::word_tokens(messages[i].text);
    for (std::size_t b = 0; b < bundles.size(); ++b) hits[i * bundles.size() + b] = match_bundle(tokens, bundles[b]);
  });

  std::map<Day, std::size_t> totals;
  for (const auto& m : messages) ++totals[day_of(m.created_utc)];

  std::vector<BundleRates> out(bundles.size());
  for (std::size_t b = 0; b < bundles.size(); ++b) {
    out[b].bundle = bundles[b].name;
    for (const auto& [day, total] : totals) out[b].hits[day] = 0;
  }
  for (std::size_t i = 0; i < messages.size(); ++i) {
    const Day day = day_of(messages[i].created_utc);
    for (std::size_t b = 0; b < bundles.size(); ++b)
      if (hits[i * bundles.size() + b]) ++out[b].hits[day];
  }
  for (auto& r : out)
    for (const auto& [day, total] : totals)
      r.rate.points.emplace(day, DailyPoint{static_cast<double>(r.hits[day]) / static_cast<double>(total), total});
  return out;
}

CompositeIndex composite_index(std::span<const BundleRates> rates, Normalization normalization,
                               std::span<const double> weights) {
  if (rates.empty()) throw UsageError("composite index needs at least one bundle");
  if (!weights.empty() && weights.size() != rates.size()) throw UsageError("bundle weights do not match bundles");

  // Bundles in name order so the result does not depend on input order.
  std::vector<std::size_t> order(rates.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return rates[a].bundle < rates[b].bundle; });

  double weight_sum = 0.0;
  for (std::size_t i : order) weight_sum += weights.empty() ? 1.0 : weights[i];

  CompositeIndex index;
  index.normalization = normalization;
  for (const auto& [day, first_point] : rates[order.front()].rate.points) {
    double acc = 0.0;
    bool everywhere = true;
    for (std::size_t i : order) {
      auto v = rates[i].rate.at(day);
      if (!v) {
        everywhere = false;
        break;
      }
      acc += (weights.empty() ? 1.0 : weights[i]) * *v;
    }
    if (everywhere) index.raw.points.emplace(day, DailyPoint{acc / weight_sum, first_point.n});
  }
  if (normalization == Normalization::minmax) {
    auto scaled = minmax_normalize(index.raw);
    index.normalized = std::move(scaled.series);
    index.degenerate = scaled.degenerate;
  } else {
    index.normalized = index.raw;
  }
  return index;
}

}  // namespace narrex
