#include "narrex/sentiment.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>

#include "narrex/error.hpp"
#include "narrex/parallel.hpp"
#include "narrex/text.hpp"

namespace narrex {
namespace {

constexpr double kBoostIncr = 0.293;
constexpr double kBoostDecr = -0.293;
constexpr double kCapsIncr = 0.733;
constexpr double kNegationScalar = -0.74;
constexpr double kNormAlpha = 15.0;
constexpr std::string_view kPunctuation = "!\"#$%&'()*+,-./:;<=>?@[\\]^_`{|}~";

std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out)
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c + 32);
  return out;
}

// Python str.isupper() restricted to ASCII cased letters.
bool is_all_caps(std::string_view s) {
  bool has_upper = false;
  for (char c : s) {
    if (c >= 'a' && c <= 'z') return false;
    if (c >= 'A' && c <= 'Z') has_upper = true;
  }
  return has_upper;
}

// Whitespace split, then strip surrounding punctuation unless that leaves two
// or fewer characters (keeps emoticons such as ":)").
std::vector<std::string> sentiment_tokens(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    if (j > i) {
      std::string_view word = text.substr(i, j - i);
      const auto b = word.find_first_not_of(kPunctuation);
      std::string_view stripped;
      if (b != std::string_view::npos) stripped = word.substr(b, word.find_last_not_of(kPunctuation) - b + 1);
      out.emplace_back(text::char_count(stripped) <= 2 ? word : stripped);
    }
    i = j;
  }
  return out;
}

struct Context {
  const SentimentLexicon& lex;
  const std::vector<std::string>& words;
  const std::vector<std::string>& lower;
  bool cap_differential;

  bool in_lexicon(std::size_t i) const { return lex.valence.contains(lower[i]); }

  bool negated(std::size_t i) const {
    return lex.negators.contains(lower[i]) || lower[i].find("n't") != std::string::npos;
  }

  double scalar_inc_dec(std::size_t i, double valence) const {
    auto it = lex.boosters.find(lower[i]);
    if (it == lex.boosters.end()) return 0.0;
    double scalar = valence < 0 ? -it->second : it->second;
    if (is_all_caps(words[i]) && cap_differential) scalar += valence > 0 ? kCapsIncr : -kCapsIncr;
    return scalar;
  }

  double negation_check(double valence, std::size_t distance, std::size_t i) const {
    switch (distance) {
      case 0:
        if (negated(i - 1)) valence *= kNegationScalar;
        break;
      case 1:
        if (lower[i - 2] == "never" && (lower[i - 1] == "so" || lower[i - 1] == "this")) {
          valence *= 1.25;
        } else if (lower[i - 2] == "without" && lower[i - 1] == "doubt") {
        } else if (negated(i - 2)) {
          valence *= kNegationScalar;
        }
        break;
      case 2:
        if ((lower[i - 3] == "never" && (lower[i - 2] == "so" || lower[i - 2] == "this")) ||
            (lower[i - 1] == "so" || lower[i - 1] == "this")) {
          valence *= 1.25;
        } else if (lower[i - 3] == "without" && (lower[i - 2] == "doubt" || lower[i - 1] == "doubt")) {
        } else if (negated(i - 3)) {
          valence *= kNegationScalar;
        }
        break;
    }
    return valence;
  }

  double word_valence(std::size_t i) const {
    const double base = lex.valence.at(lower[i]);
    double valence = base;
    const std::size_t last = words.size() - 1;
    if (lower[i] == "no" && i != last && in_lexicon(i + 1)) valence = 0.0;
    if ((i > 0 && lower[i - 1] == "no") || (i > 1 && lower[i - 2] == "no") ||
        (i > 2 && lower[i - 3] == "no" && (lower[i - 1] == "or" || lower[i - 1] == "nor")))
      valence = base * kNegationScalar;

    if (is_all_caps(words[i]) && cap_differential) valence += valence > 0 ? kCapsIncr : -kCapsIncr;

    for (std::size_t d = 0; d < 3; ++d) {
      if (i > d && !in_lexicon(i - (d + 1))) {
        double s = scalar_inc_dec(i - (d + 1), valence);
        if (d == 1 && s != 0) s *= 0.95;
        if (d == 2 && s != 0) s *= 0.9;
        valence += s;
        valence = negation_check(valence, d, i);
      }
    }
    return valence;
  }
};

double punctuation_amplifier(std::string_view text) {
  const auto bangs = std::min<std::ptrdiff_t>(std::count(text.begin(), text.end(), '!'), 4);
  const auto questions = std::count(text.begin(), text.end(), '?');
  double amp = static_cast<double>(bangs) * 0.292;
  if (questions > 1) amp += questions <= 3 ? static_cast<double>(questions) * 0.18 : 0.96;
  return amp;
}

}  // namespace

std::unordered_map<std::string, double> default_boosters() {
  std::unordered_map<std::string, double> b;
  for (const char* w :
       {"absolutely", "amazingly", "awfully", "completely", "considerable", "considerably", "decidedly", "deeply",
        "effing", "enormous", "enormously", "entirely", "especially", "exceptional", "exceptionally", "extreme",
        "extremely", "fabulously", "flipping", "flippin", "frackin", "fracking", "fricking", "frickin", "frigging",
        "friggin", "fully", "fuckin", "fucking", "fuggin", "fugging", "greatly", "hella", "highly", "hugely",
        "incredible", "incredibly", "intensely", "major", "majorly", "more", "most", "particularly", "purely",
        "quite", "really", "remarkably", "so", "substantially", "thoroughly", "total", "totally", "tremendous",
        "tremendously", "uber", "unbelievably", "unusually", "utter", "utterly", "very"})
    b.emplace(w, kBoostIncr);
  for (const char* w : {"almost", "barely", "hardly", "kinda", "kindof", "kind-of", "less", "little", "marginal",
                        "marginally", "occasional", "occasionally", "partly", "scarce", "scarcely", "slight",
                        "slightly", "somewhat", "sorta", "sortof", "sort-of"})
    b.emplace(w, kBoostDecr);
  return b;
}

std::unordered_set<std::string> default_negators() {
  return {"aint",     "arent",    "cannot",  "cant",     "couldnt",  "darent",    "didnt",    "doesnt",
          "ain't",    "aren't",   "can't",   "couldn't", "daren't",  "didn't",    "doesn't",  "dont",
          "hadnt",    "hasnt",    "havent",  "isnt",     "mightnt",  "mustnt",    "neither",  "don't",
          "hadn't",   "hasn't",   "haven't", "isn't",    "mightn't", "mustn't",   "neednt",   "needn't",
          "never",    "none",     "nope",    "nor",      "not",      "nothing",   "nowhere",  "oughtnt",
          "shant",    "shouldnt", "uhuh",    "wasnt",    "werent",   "oughtn't",  "shan't",   "shouldn't",
          "uh-uh",    "wasn't",   "weren't", "without",  "wont",     "wouldnt",   "won't",    "wouldn't",
          "rarely",   "seldom",   "despite"};
}

SentimentLexicon make_lexicon(std::unordered_map<std::string, double> valence) {
  if (valence.empty()) throw DataError("sentiment lexicon is empty");
  for (const auto& [token, v] : valence)
    if (!std::isfinite(v)) throw DataError(fmt::format("non-finite valence for '{}'", token));
  return SentimentLexicon{std::move(valence), default_boosters(), default_negators()};
}

SentimentLexicon load_lexicon(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot read lexicon {}", path.string()));
  std::unordered_map<std::string, double> valence;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw DataError(fmt::format("{}:{}: expected token<TAB>valence", path.string(), line_no));
    const auto end = line.find('\t', tab + 1);
    const std::string_view number = std::string_view(line).substr(tab + 1, end == std::string::npos ? end : end - tab - 1);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(number.data(), number.data() + number.size(), v);
    if (ec != std::errc{} || ptr != number.data() + number.size())
      throw DataError(fmt::format("{}:{}: bad valence '{}'", path.string(), line_no, number));
    valence[line.substr(0, tab)] = v;
  }
  return make_lexicon(std::move(valence));
}

SentimentScore score_text(std::string_view text, const SentimentLexicon& lexicon) {
  const auto words = sentiment_tokens(text);
  if (words.empty()) return {};
  std::vector<std::string> lower;
  lower.reserve(words.size());
  for (const auto& w : words) lower.push_back(ascii_lower(w));

  const auto caps = static_cast<std::size_t>(std::count_if(words.begin(), words.end(), [](const std::string& w) {
    return is_all_caps(w);
  }));
  const Context ctx{lexicon, words, lower, caps > 0 && caps < words.size()};

  std::vector<double> sentiments(words.size(), 0.0);
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (lexicon.boosters.contains(lower[i])) continue;
    if (ctx.in_lexicon(i)) sentiments[i] = ctx.word_valence(i);
  }

  // Contrastive "but": damp what precedes, stress what follows.
  if (auto but = std::find(lower.begin(), lower.end(), "but"); but != lower.end()) {
    const auto bi = static_cast<std::size_t>(but - lower.begin());
    for (std::size_t i = 0; i < sentiments.size(); ++i) {
      if (i < bi) sentiments[i] *= 0.5;
      if (i > bi) sentiments[i] *= 1.5;
    }
  }

  double sum = 0.0;
  for (double s : sentiments) sum += s;
  const double amp = punctuation_amplifier(text);
  if (sum > 0) sum += amp;
  if (sum < 0) sum -= amp;

  SentimentScore score;
  score.compound = std::clamp(sum / std::sqrt(sum * sum + kNormAlpha), -1.0, 1.0);

  double pos_sum = 0.0, neg_sum = 0.0, neu_count = 0.0;
  for (double s : sentiments) {
    if (s > 0) pos_sum += s + 1.0;
    if (s < 0) neg_sum += s - 1.0;
    if (s == 0) neu_count += 1.0;
  }
  if (pos_sum > std::fabs(neg_sum)) {
    pos_sum += amp;
  } else if (pos_sum < std::fabs(neg_sum)) {
    neg_sum -= amp;
  }
  const double total = pos_sum + std::fabs(neg_sum) + neu_count;
  score.pos = std::fabs(pos_sum / total);
  score.neg = std::fabs(neg_sum / total);
  score.neu = std::fabs(neu_count / total);
  return score;
}

std::vector<SentimentScore> score_messages(std::span<const Message> messages, const SentimentLexicon& lexicon,
                                           unsigned threads) {
  std::vector<SentimentScore> scores(messages.size());
  parallel_for(messages.size(), threads, [&](std::size_t i) { scores[i] = score_text(messages[i].text, lexicon); });
  return scores;
}

DailySeries daily_sentiment_series(std::span<const Message> messages, std::span<const SentimentScore> scores,
                                   std::size_t min_daily) {
  if (min_daily < 1) throw UsageError("min_daily must be >= 1");
  if (messages.size() != scores.size()) throw UsageError("scores and messages differ in length");
  std::map<Day, std::vector<double>> by_day;
  for (std::size_t i = 0; i < messages.size(); ++i) by_day[day_of(messages[i].created_utc)].push_back(scores[i].compound);

  DailySeries series;
  for (auto& [day, values] : by_day) {
    if (values.size() < min_daily) continue;
    // Sorted summation keeps the mean independent of message order.
    std::sort(values.begin(), values.end());
    double sum = 0.0;
    for (double v : values) sum += v;
    series.points.emplace(day, DailyPoint{sum / static_cast<double>(values.size()), values.size()});
  }
  return series;
}

DailySeries rolling_mean(const DailySeries& series, std::size_t window_days) {
  if (window_days < 1) throw UsageError("rolling window must be >= 1 day");
  DailySeries out;
  const std::chrono::days back{static_cast<long>(window_days) - 1};
  for (auto it = series.points.begin(); it != series.points.end(); ++it) {
    // Mean as an offset from the first value in the window, so a constant
    // window reproduces its value exactly.
    const auto first = series.points.lower_bound(it->first - back);
    const double anchor = first->second.value;
    double offset = 0.0;
    std::size_t n = 0;
    for (auto w = first; w != std::next(it); ++w) {
      offset += w->second.value - anchor;
      ++n;
    }
    out.points.emplace(it->first, DailyPoint{anchor + offset / static_cast<double>(n), n});
  }
  return out;
}

std::size_t Histogram::total() const {
  std::size_t t = 0;
  for (auto c : counts) t += c;
  return t;
}

double Histogram::bin_center(std::size_t i) const {
  const double width = (hi - lo) / static_cast<double>(counts.size());
  return lo + width * (static_cast<double>(i) + 0.5);
}

Histogram sentiment_histogram(std::span<const double> compounds, std::size_t bins) {
  if (bins < 2) throw UsageError("histogram needs at least 2 bins");
  Histogram h;
  h.counts.assign(bins, 0);
  const double span = h.hi - h.lo;
  const auto n = static_cast<double>(bins);
  auto edge = [&](std::size_t i) { return h.lo + span * static_cast<double>(i) / n; };
  for (double x : compounds) {
    x = std::clamp(x, h.lo, h.hi);
    auto idx = std::min(static_cast<std::size_t>(std::max(std::floor((x - h.lo) / span * n), 0.0)), bins - 1);
    // Settle rounding at bin edges against the explicit edge values.
    if (idx > 0 && x < edge(idx)) --idx;
    if (idx + 1 < bins && x >= edge(idx + 1)) ++idx;
    ++h.counts[idx];
  }
  return h;
}

double platform_divergence(const Histogram& a, const Histogram& b) {
  if (a.bins() != b.bins() || a.lo != b.lo || a.hi != b.hi) throw UsageError("histograms use different binning");
  const double ta = static_cast<double>(a.total());
  const double tb = static_cast<double>(b.total());
  if (ta == 0.0 || tb == 0.0) throw DataError("divergence of an empty histogram");
  double kl_a = 0.0, kl_b = 0.0;
  for (std::size_t i = 0; i < a.bins(); ++i) {
    const double p = static_cast<double>(a.counts[i]) / ta;
    const double q = static_cast<double>(b.counts[i]) / tb;
    const double m = 0.5 * (p + q);
    if (p > 0) kl_a += p * std::log2(p / m);
    if (q > 0) kl_b += q * std::log2(q / m);
  }
  return std::clamp(0.5 * kl_a + 0.5 * kl_b, 0.0, 1.0);
}

}  // namespace narrex
