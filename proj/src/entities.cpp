#include "narrex/entities.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

#include "json.hpp"
#include "narrex/error.hpp"
#include "narrex/parallel.hpp"
#include "narrex/report_io.hpp"
#include "narrex/text.hpp"

namespace narrex {

using nlohmann::json;

std::string_view to_string(EntityCategory c) {
  switch (c) {
    case EntityCategory::person: return "person";
    case EntityCategory::org: return "org";
    case EntityCategory::gpe: return "gpe";
  }
  return "gpe";
}

std::optional<EntityCategory> parse_entity_category(std::string_view s) {
  const std::string lower = text::to_lower(s);
  if (lower == "person" || lower == "per") return EntityCategory::person;
  if (lower == "org" || lower == "organization") return EntityCategory::org;
  if (lower == "gpe" || lower == "loc" || lower == "location") return EntityCategory::gpe;
  return std::nullopt;
}

void Gazetteer::add(std::string canonical, std::vector<std::string> aliases, EntityCategory category) {
  if (canonical.empty()) throw UsageError("gazetteer entry without a canonical name");
  if (entries_.contains(canonical)) throw UsageError(fmt::format("duplicate gazetteer entry '{}'", canonical));
  aliases.push_back(canonical);
  GazetteerEntry entry{{}, category};
  for (const auto& alias : aliases) {
    auto tokens = text::word_tokens(text::strip_possessives(alias));
    if (tokens.empty()) throw UsageError(fmt::format("alias '{}' of '{}' has no words", alias, canonical));
    auto [it, inserted] = alias_to_canonical_.emplace(tokens, canonical);
    if (!inserted && it->second != canonical)
      throw UsageError(fmt::format("alias '{}' maps to both '{}' and '{}'", alias, it->second, canonical));
    max_alias_tokens_ = std::max(max_alias_tokens_, tokens.size());
    std::string joined = text::to_lower(alias);
    if (std::find(entry.aliases.begin(), entry.aliases.end(), joined) == entry.aliases.end())
      entry.aliases.push_back(std::move(joined));
  }
  entries_.emplace(std::move(canonical), std::move(entry));
}

Gazetteer Gazetteer::from_json(std::string_view json_text) {
  json doc = json::parse(json_text, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) throw DataError("gazetteer must be a JSON object");
  Gazetteer g;
  for (const auto& [name, fields] : doc.items()) {
    if (!fields.is_object()) throw DataError(fmt::format("gazetteer entry '{}' must be an object", name));
    std::vector<std::string> aliases;
    if (auto it = fields.find("aliases"); it != fields.end()) {
      if (!it->is_array()) throw DataError(fmt::format("aliases of '{}' must be a list", name));
      for (const auto& a : *it) {
        if (!a.is_string()) throw DataError(fmt::format("alias of '{}' must be a string", name));
        aliases.push_back(a.get<std::string>());
      }
    }
    auto category = EntityCategory::gpe;
    if (auto it = fields.find("category"); it != fields.end()) {
      auto parsed = it->is_string() ? parse_entity_category(it->get<std::string>()) : std::nullopt;
      if (!parsed) throw DataError(fmt::format("unknown category for '{}'", name));
      category = *parsed;
    }
    try {
      g.add(name, std::move(aliases), category);
    } catch (const UsageError& e) {
      throw DataError(e.what());
    }
  }
  return g;
}

Gazetteer Gazetteer::load(const std::filesystem::path& path) { return from_json(io::read_file(path)); }

std::set<std::string> Gazetteer::match(const std::vector<std::string>& tokens) const {
  std::set<std::string> found;
  std::size_t i = 0;
  std::vector<std::string> window;
  while (i < tokens.size()) {
    bool matched = false;
    for (std::size_t len = std::min(max_alias_tokens_, tokens.size() - i); len >= 1; --len) {
      window.assign(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                    tokens.begin() + static_cast<std::ptrdiff_t>(i + len));
      if (auto it = alias_to_canonical_.find(window); it != alias_to_canonical_.end()) {
        found.insert(it->second);
        i += len;
        matched = true;
        break;
      }
    }
    if (!matched) ++i;
  }
  return found;
}

std::set<std::string> extract_entities(const Message& message, const Gazetteer& gazetteer) {
  return gazetteer.match(text::word_tokens(text::strip_possessives(message.text)));
}

std::set<std::string> GazetteerExtractor::extract(const Message& message) const {
  return extract_entities(message, gazetteer_);
}

ExchangeFileExtractor ExchangeFileExtractor::parse(std::string_view jsonl) {
  ExchangeFileExtractor ex;
  std::size_t start = 0, line_no = 0;
  while (start < jsonl.size()) {
    std::size_t end = jsonl.find('\n', start);
    if (end == std::string_view::npos) end = jsonl.size();
    ++line_no;
    const auto line = jsonl.substr(start, end - start);
    start = end + 1;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    json rec = json::parse(line, nullptr, false);
    if (rec.is_discarded() || !rec.is_object() || !rec.contains("id") || !rec.contains("entities") ||
        !rec["entities"].is_array())
      throw DataError(fmt::format("entity exchange line {}: expected {{\"id\", \"entities\"}}", line_no));
    const auto& id_field = rec["id"];
    const std::string id = id_field.is_string() ? id_field.get<std::string>() : id_field.dump();
    auto& set = ex.by_id_[id];
    for (const auto& e : rec["entities"]) {
      if (!e.is_object() || !e.contains("text") || !e["text"].is_string())
        throw DataError(fmt::format("entity exchange line {}: entity without text", line_no));
      std::string name = e["text"].get<std::string>();
      if (!name.empty()) set.insert(std::move(name));
    }
  }
  return ex;
}

ExchangeFileExtractor ExchangeFileExtractor::load(const std::filesystem::path& path) {
  return parse(io::read_file(path));
}

std::set<std::string> ExchangeFileExtractor::extract(const Message& message) const {
  auto it = by_id_.find(message.id);
  return it == by_id_.end() ? std::set<std::string>{} : it->second;
}

EntityGraph cooccurrence_counts(std::span<const Message> messages, const EntityExtractor& extractor,
                                std::optional<DateRange> date_filter, unsigned threads) {
  std::vector<std::set<std::string>> found(messages.size());
  std::vector<char> included(messages.size(), 0);
  parallel_for(messages.size(), threads, [&](std::size_t i) {
    if (date_filter && !date_filter->contains(day_of(messages[i].created_utc))) return;
    included[i] = 1;
    found[i] = extractor.extract(messages[i]);
  });

  EntityGraph g;
  g.window = date_filter;
  std::map<std::pair<std::string, std::string>, std::size_t> pairs;
  for (std::size_t i = 0; i < messages.size(); ++i) {
    if (!included[i]) continue;
    ++g.n_messages;
    for (auto a = found[i].begin(); a != found[i].end(); ++a) {
      ++g.nodes[*a];
      for (auto b = std::next(a); b != found[i].end(); ++b) ++pairs[{*a, *b}];
    }
  }
  for (auto& [key, count] : pairs) g.edges.push_back({key.first, key.second, count, 0.0});
  return g;
}

EntityGraph pmi_weights(const EntityGraph& graph, std::size_t n_messages, std::size_t min_cooccur) {
  if (n_messages < 1) throw UsageError("PMI needs at least one message");
  EntityGraph out = graph;
  out.edges.clear();
  const double n = static_cast<double>(n_messages);
  for (const auto& e : graph.edges) {
    if (e.cooccur < min_cooccur) continue;
    const double p_ab = static_cast<double>(e.cooccur) / n;
    const double p_a = static_cast<double>(graph.nodes.at(e.a)) / n;
    const double p_b = static_cast<double>(graph.nodes.at(e.b)) / n;
    const double pmi = std::log(p_ab / (p_a * p_b));
    if (!(pmi > 0.0) || !std::isfinite(pmi)) continue;
    out.edges.push_back({e.a, e.b, e.cooccur, pmi});
  }
  return out;
}

EntityGraph backbone_filter(const EntityGraph& graph, std::size_t top_k) {
  if (top_k < 1) throw UsageError("backbone top_k must be >= 1");
  std::map<std::string, std::vector<std::size_t>> incident;
  for (std::size_t i = 0; i < graph.edges.size(); ++i) {
    incident[graph.edges[i].a].push_back(i);
    incident[graph.edges[i].b].push_back(i);
  }
  auto stronger = [&](std::size_t x, std::size_t y) {
    const auto& ex = graph.edges[x];
    const auto& ey = graph.edges[y];
    if (ex.pmi != ey.pmi) return ex.pmi > ey.pmi;
    if (ex.cooccur != ey.cooccur) return ex.cooccur > ey.cooccur;
    return std::tie(ex.a, ex.b) < std::tie(ey.a, ey.b);
  };
  std::vector<char> keep(graph.edges.size(), 0);
  for (auto& [node, edges] : incident) {
    std::sort(edges.begin(), edges.end(), stronger);
    for (std::size_t r = 0; r < std::min(top_k, edges.size()); ++r) keep[edges[r]] = 1;
  }

  EntityGraph out;
  out.window = graph.window;
  out.n_messages = graph.n_messages;
  for (std::size_t i = 0; i < graph.edges.size(); ++i) {
    if (!keep[i]) continue;
    const auto& e = graph.edges[i];
    out.edges.push_back(e);
    out.nodes[e.a] = graph.nodes.at(e.a);
    out.nodes[e.b] = graph.nodes.at(e.b);
  }
  return out;
}

std::string render_graph(const EntityGraph& graph, GraphFormat format) {
  std::size_t max_freq = 1;
  for (const auto& [name, f] : graph.nodes) max_freq = std::max(max_freq, f);
  double max_pmi = 0.0;
  for (const auto& e : graph.edges) max_pmi = std::max(max_pmi, e.pmi);

  switch (format) {
    case GraphFormat::dot: {
      std::string out = "graph entities {\n";
      for (const auto& [name, f] : graph.nodes) {
        const double size = 0.5 + 1.5 * static_cast<double>(f) / static_cast<double>(max_freq);
        out += fmt::format("  {} [frequency={}, width={:.3f}, height={:.3f}];\n", json(name).dump(), f, size, size);
      }
      for (const auto& e : graph.edges) {
        const double pen = max_pmi > 0.0 ? 1.0 + 4.0 * e.pmi / max_pmi : 1.0;
        out += fmt::format("  {} -- {} [cooccur={}, weight={}, penwidth={:.3f}];\n", json(e.a).dump(),
                           json(e.b).dump(), e.cooccur, io::format_number(e.pmi), pen);
      }
      out += "}\n";
      return out;
    }
    case GraphFormat::json: {
      nlohmann::ordered_json doc;
      doc["n_messages"] = graph.n_messages;
      if (graph.window)
        doc["window"] = {{"first", format_day(graph.window->first)}, {"last", format_day(graph.window->last)}};
      else
        doc["window"] = nullptr;
      doc["nodes"] = nlohmann::ordered_json::array();
      for (const auto& [name, f] : graph.nodes) doc["nodes"].push_back({{"id", name}, {"frequency", f}});
      doc["edges"] = nlohmann::ordered_json::array();
      for (const auto& e : graph.edges)
        doc["edges"].push_back({{"source", e.a}, {"target", e.b}, {"cooccur", e.cooccur}, {"pmi", e.pmi}});
      return doc.dump(2) + "\n";
    }
    case GraphFormat::csv: {
      std::string out = "source,target,cooccur,pmi\n";
      for (const auto& e : graph.edges)
        out += fmt::format("{},{},{},{}\n", io::csv_field(e.a), io::csv_field(e.b), e.cooccur, io::format_number(e.pmi));
      return out;
    }
  }
  return {};
}

void export_graph(const EntityGraph& graph, GraphFormat format, const std::filesystem::path& path) {
  io::write_file(path, render_graph(graph, format));
}

}  // namespace narrex
