#include "narrex/corpus.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <utility>

#include "json.hpp"
#include "narrex/error.hpp"
#include "narrex/parallel.hpp"
#include "narrex/report_io.hpp"
#include "narrex/text.hpp"

namespace narrex {

using nlohmann::json;

std::string_view to_string(Platform p) { return p == Platform::telegram ? "telegram" : "reddit"; }

std::string_view to_string(MessageKind k) {
  switch (k) {
    case MessageKind::message: return "message";
    case MessageKind::post: return "post";
    case MessageKind::comment: return "comment";
  }
  return "message";
}

std::optional<Platform> parse_platform(std::string_view s) {
  if (s == "telegram") return Platform::telegram;
  if (s == "reddit") return Platform::reddit;
  return std::nullopt;
}

std::optional<MessageKind> parse_kind(std::string_view s) {
  if (s == "message") return MessageKind::message;
  if (s == "post") return MessageKind::post;
  if (s == "comment") return MessageKind::comment;
  return std::nullopt;
}

IngestReport& IngestReport::operator+=(const IngestReport& other) {
  lines += other.lines;
  accepted += other.accepted;
  blank_lines += other.blank_lines;
  malformed += other.malformed;
  empty_after_preprocess += other.empty_after_preprocess;
  duplicates_dropped += other.duplicates_dropped;
  malformed_lines.insert(malformed_lines.end(), other.malformed_lines.begin(), other.malformed_lines.end());
  return *this;
}

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

bool starts_with_ci(std::string_view s, std::size_t pos, std::string_view prefix) {
  if (pos + prefix.size() > s.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    char c = s[pos + i];
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c + 32);
    if (c != prefix[i]) return false;
  }
  return true;
}

std::optional<std::string> string_field(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) return std::nullopt;
  if (it->is_string()) return it->get<std::string>();
  if (it->is_number_integer()) return std::to_string(it->get<std::int64_t>());
  return std::nullopt;
}

std::optional<std::int64_t> timestamp_field(const json& obj) {
  auto it = obj.find("created_utc");
  if (it == obj.end()) return std::nullopt;
  if (it->is_number_integer()) return it->get<std::int64_t>();
  if (it->is_number_float()) {
    const double v = it->get<double>();
    if (!std::isfinite(v)) return std::nullopt;
    return static_cast<std::int64_t>(std::floor(v));
  }
  if (it->is_string()) {
    const auto s = it->get<std::string>();
    if (s.empty() || !std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; })) return std::nullopt;
    return std::stoll(s);
  }
  return std::nullopt;
}

struct ParsedLine {
  enum class Status { ok, blank, malformed, empty_text } status = Status::blank;
  Message message;
};

ParsedLine classify_line(std::string_view line, std::optional<Platform> hint) {
  ParsedLine out;
  const bool blank = std::all_of(line.begin(), line.end(), is_space);
  if (blank) return out;
  auto msg = parse_message_line(line, hint);
  if (!msg) {
    out.status = ParsedLine::Status::malformed;
    return out;
  }
  out.status = msg->text.empty() ? ParsedLine::Status::empty_text : ParsedLine::Status::ok;
  out.message = std::move(*msg);
  return out;
}

using MessageKey = std::pair<Platform, std::string>;

}  // namespace

std::string preprocess_text(std::string_view raw) {
  std::string stripped;
  stripped.reserve(raw.size());
  for (std::size_t i = 0; i < raw.size();) {
    if (starts_with_ci(raw, i, "http://") || starts_with_ci(raw, i, "https://")) {
      while (i < raw.size() && !is_space(raw[i])) ++i;
      continue;
    }
    stripped.push_back(raw[i++]);
  }
  std::string out;
  out.reserve(stripped.size());
  bool pending_space = false;
  for (char c : stripped) {
    if (is_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(c);
  }
  return out;
}

std::optional<Message> parse_message_line(std::string_view line, std::optional<Platform> platform_hint) {
  json obj = json::parse(line, nullptr, /*allow_exceptions=*/false);
  if (obj.is_discarded() || !obj.is_object()) return std::nullopt;

  Message m;
  auto id = string_field(obj, "id");
  if (!id || id->empty()) return std::nullopt;
  m.id = std::move(*id);

  if (auto p = obj.find("platform"); p != obj.end()) {
    if (!p->is_string()) return std::nullopt;
    auto parsed = parse_platform(p->get<std::string>());
    if (!parsed) return std::nullopt;
    m.platform = *parsed;
  } else if (platform_hint) {
    m.platform = *platform_hint;
  } else {
    return std::nullopt;
  }

  auto source = string_field(obj, "source");
  if (!source) return std::nullopt;
  m.source = std::move(*source);

  if (auto k = obj.find("kind"); k != obj.end()) {
    if (!k->is_string()) return std::nullopt;
    auto parsed = parse_kind(k->get<std::string>());
    if (!parsed) return std::nullopt;
    m.kind = *parsed;
  } else {
    m.kind = m.platform == Platform::telegram ? MessageKind::message : MessageKind::post;
  }

  auto ts = timestamp_field(obj);
  if (!ts || *ts <= 0) return std::nullopt;
  m.created_utc = *ts;

  auto t = obj.find("text");
  if (t == obj.end() || !t->is_string()) return std::nullopt;
  m.text = preprocess_text(t->get_ref<const std::string&>());
  m.raw_length = text::char_count(m.text);
  return m;
}

IngestResult ingest_jsonl(const std::filesystem::path& path, std::optional<Platform> platform_hint) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot read {}", path.string()));

  IngestResult result;
  std::set<MessageKey> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    ++result.report.lines;
    ParsedLine parsed = classify_line(line, platform_hint);
    switch (parsed.status) {
      case ParsedLine::Status::blank:
        ++result.report.blank_lines;
        break;
      case ParsedLine::Status::malformed:
        ++result.report.malformed;
        if (result.report.malformed_lines.size() < 100) result.report.malformed_lines.push_back(line_no);
        break;
      case ParsedLine::Status::empty_text:
        ++result.report.empty_after_preprocess;
        break;
      case ParsedLine::Status::ok:
        if (!seen.emplace(parsed.message.platform, parsed.message.id).second) {
          ++result.report.duplicates_dropped;
        } else {
          result.messages.push_back(std::move(parsed.message));
        }
        break;
    }
  }
  if (in.bad()) throw IoError(fmt::format("read error in {}", path.string()));
  result.report.accepted = result.messages.size();
  return result;
}

IngestResult ingest_files(std::vector<std::filesystem::path> paths, std::optional<Platform> platform_hint,
                          unsigned threads) {
  std::sort(paths.begin(), paths.end());
  std::vector<IngestResult> per_file(paths.size());
  parallel_for(paths.size(), threads, [&](std::size_t i) { per_file[i] = ingest_jsonl(paths[i], platform_hint); });

  IngestResult merged;
  std::set<MessageKey> seen;
  for (auto& file : per_file) {
    IngestReport report = file.report;
    report.accepted = 0;
    for (auto& m : file.messages) {
      if (!seen.emplace(m.platform, m.id).second) {
        ++report.duplicates_dropped;
        continue;
      }
      merged.messages.push_back(std::move(m));
    }
    merged.report += report;
  }
  merged.report.accepted = merged.messages.size();
  return merged;
}

Cdf compute_length_cdf(std::span<const Message> messages) {
  if (messages.empty()) throw DataError("length CDF of an empty corpus");
  std::map<std::size_t, std::size_t> counts;
  for (const auto& m : messages) ++counts[m.raw_length];
  Cdf cdf;
  cdf.reserve(counts.size());
  std::size_t cumulative = 0;
  const auto total = static_cast<double>(messages.size());
  for (const auto& [len, c] : counts) {
    cumulative += c;
    cdf.push_back({static_cast<double>(len), static_cast<double>(cumulative) / total});
  }
  return cdf;
}

double cdf_at(const Cdf& cdf, double x) {
  auto it = std::upper_bound(cdf.begin(), cdf.end(), x, [](double v, const CdfPoint& p) { return v < p.value; });
  if (it == cdf.begin()) return 0.0;
  return std::prev(it)->fraction;
}

CorpusStats compute_source_volumes(std::span<const Message> messages) {
  CorpusStats stats;
  stats.total_items = messages.size();
  std::map<std::pair<Platform, std::string>, std::size_t> by_source;
  for (const auto& m : messages) {
    ++stats.per_platform[m.platform];
    ++by_source[{m.platform, m.source}];
  }
  for (const auto& [key, count] : by_source) stats.per_source.push_back({key.first, key.second, count});
  std::sort(stats.per_source.begin(), stats.per_source.end(), [](const SourceCount& a, const SourceCount& b) {
    if (a.count != b.count) return a.count > b.count;
    if (a.source != b.source) return a.source < b.source;
    return a.platform < b.platform;
  });
  if (!messages.empty()) stats.length_cdf = compute_length_cdf(messages);

  std::map<Platform, std::map<std::size_t, std::size_t>> volume_hist;
  std::map<Platform, std::size_t> sources_per_platform;
  for (const auto& s : stats.per_source) {
    ++volume_hist[s.platform][s.count];
    ++sources_per_platform[s.platform];
  }
  for (const auto& [platform, hist] : volume_hist) {
    Cdf cdf;
    std::size_t cumulative = 0;
    const auto total = static_cast<double>(sources_per_platform[platform]);
    for (const auto& [volume, n] : hist) {
      cumulative += n;
      cdf.push_back({static_cast<double>(volume), static_cast<double>(cumulative) / total});
    }
    stats.source_volume_cdf.emplace(platform, std::move(cdf));
  }
  return stats;
}

DailySeries daily_message_counts(std::span<const Message> messages, std::optional<Platform> platform_filter) {
  DailySeries series;
  for (const auto& m : messages) {
    if (platform_filter && m.platform != *platform_filter) continue;
    auto& p = series.points[day_of(m.created_utc)];
    ++p.n;
    p.value = static_cast<double>(p.n);
  }
  return series;
}

void write_length_cdf_csv(const std::filesystem::path& path, const Cdf& cdf) {
  std::string out = "length,fraction\n";
  for (const auto& p : cdf) out += fmt::format("{},{}\n", io::format_number(p.value), io::format_number(p.fraction));
  io::write_file(path, out);
}

void write_source_volumes_csv(const std::filesystem::path& path, const CorpusStats& stats) {
  std::string out = "platform,source,count\n";
  for (const auto& s : stats.per_source)
    out += fmt::format("{},{},{}\n", to_string(s.platform), io::csv_field(s.source), s.count);
  io::write_file(path, out);
}

std::string serialize_messages(std::span<const Message> messages) {
  std::string out;
  for (const auto& m : messages) {
    json obj = {{"id", m.id},
                {"platform", to_string(m.platform)},
                {"source", m.source},
                {"kind", to_string(m.kind)},
                {"created_utc", m.created_utc},
                {"text", m.text}};
    out += obj.dump(-1, ' ', false, json::error_handler_t::replace);
    out.push_back('\n');
  }
  return out;
}

std::vector<Message> deserialize_messages(std::string_view jsonl) {
  std::vector<Message> out;
  std::size_t start = 0;
  std::size_t line_no = 0;
  while (start < jsonl.size()) {
    std::size_t end = jsonl.find('\n', start);
    if (end == std::string_view::npos) end = jsonl.size();
    ++line_no;
    const auto line = jsonl.substr(start, end - start);
    start = end + 1;
    if (line.empty()) continue;
    auto m = parse_message_line(line, std::nullopt);
    if (!m) throw DataError(fmt::format("corrupt message cache at line {}", line_no));
    out.push_back(std::move(*m));
  }
  return out;
}

}  // namespace narrex
