#include "narrex/config.hpp"

#include <fmt/format.h>

#include <limits>
#include <set>

#include "json.hpp"
#include "narrex/error.hpp"
#include "narrex/report_io.hpp"

#define TOML_EXCEPTIONS 1
#include "toml.hpp"

namespace narrex {
namespace {

namespace fs = std::filesystem;

class Section {
 public:
  Section(const toml::table* table, std::string name, std::set<std::string> known)
      : table_(table), name_(std::move(name)) {
    if (!table_) return;
    for (const auto& [key, node] : *table_) {
      const std::string k(key.str());
      if (!known.contains(k)) throw UsageError(fmt::format("unknown config key '{}.{}'", name_, k));
    }
  }

  const toml::node* get(std::string_view key) const { return table_ ? table_->get(key) : nullptr; }

  template <class Int>
  void read_uint(std::string_view key, Int& out, std::uint64_t lo, std::uint64_t hi) const {
    const auto* node = get(key);
    if (!node) return;
    auto v = node->value<std::int64_t>();
    if (!v || *v < 0 || static_cast<std::uint64_t>(*v) < lo || static_cast<std::uint64_t>(*v) > hi)
      throw UsageError(fmt::format("{}.{} must be an integer in [{}, {}]", name_, key, lo, hi));
    out = static_cast<Int>(*v);
  }

  void read_double(std::string_view key, double& out, double lo, double hi, bool lo_open = false) const {
    const auto* node = get(key);
    if (!node) return;
    auto v = node->value<double>();
    if (!v || *v > hi || *v < lo || (lo_open && *v == lo))
      throw UsageError(fmt::format("{}.{} must be a number in {}{}, {}]", name_, key, lo_open ? "(" : "[", lo, hi));
    out = *v;
  }

  void read_bool(std::string_view key, bool& out) const {
    const auto* node = get(key);
    if (!node) return;
    auto v = node->value<bool>();
    if (!v) throw UsageError(fmt::format("{}.{} must be true or false", name_, key));
    out = *v;
  }

  std::optional<std::string> string(std::string_view key) const {
    const auto* node = get(key);
    if (!node) return std::nullopt;
    auto v = node->value<std::string>();
    if (!v) throw UsageError(fmt::format("{}.{} must be a string", name_, key));
    return v;
  }

  std::vector<std::string> string_list(std::string_view key) const {
    const auto* node = get(key);
    if (!node) return {};
    const auto* arr = node->as_array();
    if (!arr) throw UsageError(fmt::format("{}.{} must be a list of strings", name_, key));
    std::vector<std::string> out;
    for (const auto& item : *arr) {
      auto v = item.value<std::string>();
      if (!v) throw UsageError(fmt::format("{}.{} must be a list of strings", name_, key));
      out.push_back(*v);
    }
    return out;
  }

  const toml::table* subtable(std::string_view key) const {
    const auto* node = get(key);
    if (!node) return nullptr;
    const auto* t = node->as_table();
    if (!t) throw UsageError(fmt::format("{}.{} must be a table", name_, key));
    return t;
  }

 private:
  const toml::table* table_;
  std::string name_;
};

const toml::table* section_of(const toml::table& root, std::string_view key) {
  const auto* node = root.get(key);
  if (!node) return nullptr;
  const auto* t = node->as_table();
  if (!t) throw UsageError(fmt::format("config section [{}] must be a table", key));
  return t;
}

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() ? path : (base / path).lexically_normal();
}

constexpr std::uint64_t kMaxCount = 1'000'000;

}  // namespace

fs::path default_data_dir() {
  if (const char* env = std::getenv("NARREX_DATA_DIR"); env && *env) return env;
  return NARREX_DATA_DIR;
}

PipelineConfig parse_config(std::string_view toml_text, const fs::path& base_dir) {
  toml::table root;
  try {
    root = toml::parse(toml_text);
  } catch (const toml::parse_error& e) {
    throw UsageError(fmt::format("config parse error at line {}: {}", e.source().begin.line, e.description()));
  }
  for (const auto& [key, node] : root) {
    static const std::set<std::string> sections = {"inputs",     "output",   "vectorize",   "nmf",     "sentiment",
                                                   "similarity", "escalation", "correlation", "entities", "threads"};
    if (!sections.contains(std::string(key.str()))) throw UsageError(fmt::format("unknown config section '{}'", key.str()));
  }

  PipelineConfig c;
  c.base_dir = base_dir;
  c.gazetteer = default_data_dir() / "gazetteer.json";
  c.lexicon = default_data_dir() / "vader_lexicon.tsv";

  const Section inputs(section_of(root, "inputs"), "inputs",
                       {"jsonl", "events", "gazetteer", "lexicon", "ner_exchange", "platform_hint"});
  for (const auto& p : inputs.string_list("jsonl")) c.jsonl.push_back(resolve(base_dir, p));
  for (const auto& p : inputs.string_list("events")) c.events.push_back(resolve(base_dir, p));
  if (auto p = inputs.string("gazetteer")) c.gazetteer = resolve(base_dir, *p);
  if (auto p = inputs.string("lexicon")) c.lexicon = resolve(base_dir, *p);
  if (auto p = inputs.string("ner_exchange")) c.ner_exchange = resolve(base_dir, *p);
  if (auto p = inputs.string("platform_hint")) {
    c.platform_hint = parse_platform(*p);
    if (!c.platform_hint) throw UsageError(fmt::format("inputs.platform_hint '{}' is not telegram or reddit", *p));
  }

  const Section output(section_of(root, "output"), "output", {"dir"});
  if (auto p = output.string("dir")) c.output_dir = resolve(base_dir, *p);

  if (const auto* node = root.get("threads")) {
    auto v = node->value<std::int64_t>();
    if (!v || *v < 1 || *v > 1024) throw UsageError("threads must be an integer in [1, 1024]");
    c.threads = static_cast<unsigned>(*v);
  }

  const Section vec(section_of(root, "vectorize"), "vectorize", {"min_df", "max_df_ratio", "extra_stopwords"});
  vec.read_uint("min_df", c.vectorize.min_df, 1, kMaxCount);
  vec.read_double("max_df_ratio", c.vectorize.max_df_ratio, 0.0, 1.0, /*lo_open=*/true);
  c.vectorize.extra_stopwords = vec.string_list("extra_stopwords");

  const Section nmf(section_of(root, "nmf"), "nmf", {"k", "max_iter", "tol", "seed", "top_terms", "top_n_series"});
  nmf.read_uint("k", c.nmf.k, 1, 1000);
  nmf.read_uint("max_iter", c.nmf.max_iter, 1, kMaxCount);
  nmf.read_double("tol", c.nmf.tol, 0.0, 1.0);
  nmf.read_uint("seed", c.nmf.seed, 0, std::numeric_limits<std::int64_t>::max());
  nmf.read_uint("top_terms", c.nmf.top_terms, 1, 1000);
  nmf.read_uint("top_n_series", c.nmf.top_n_series, 1, 1000);

  const Section sent(section_of(root, "sentiment"), "sentiment", {"min_daily", "rolling_window", "bins"});
  sent.read_uint("min_daily", c.sentiment.min_daily, 1, kMaxCount);
  sent.read_uint("rolling_window", c.sentiment.rolling_window, 1, 3650);
  sent.read_uint("bins", c.sentiment.bins, 2, 10000);

  const Section sim(section_of(root, "similarity"), "similarity", {"neighbors_k", "min_similarity"});
  sim.read_uint("neighbors_k", c.similarity.neighbors_k, 1, 1000);
  sim.read_double("min_similarity", c.similarity.min_similarity, 0.0, 1.0);

  const Section esc(section_of(root, "escalation"), "escalation",
                    {"bundles", "weights", "normalization", "smoothing_window"});
  if (auto n = esc.string("normalization")) {
    if (*n == "minmax")
      c.escalation.normalization = Normalization::minmax;
    else if (*n == "none")
      c.escalation.normalization = Normalization::none;
    else
      throw UsageError(fmt::format("escalation.normalization '{}' must be 'minmax' or 'none'", *n));
  }
  esc.read_uint("smoothing_window", c.escalation.smoothing_window, 0, 3650);
  std::map<std::string, double> weights;
  if (const auto* wt = esc.subtable("weights")) {
    for (const auto& [name, node] : *wt) {
      auto v = node.value<double>();
      if (!v || !(*v > 0.0)) throw UsageError(fmt::format("escalation.weights.{} must be a positive number", name.str()));
      weights.emplace(std::string(name.str()), *v);
    }
  }
  if (const auto* bundles = esc.subtable("bundles")) {
    c.escalation.bundles.clear();
    const Section b(bundles, "escalation.bundles", [&] {
      std::set<std::string> names;
      for (const auto& [name, node] : *bundles) names.insert(std::string(name.str()));
      return names;
    }());
    for (const auto& [name, node] : *bundles) {
      const std::string n(name.str());
      c.escalation.bundles.push_back(make_bundle(n, b.string_list(n)));
    }
    if (c.escalation.bundles.empty()) throw UsageError("escalation.bundles is empty");
  }
  for (const auto& [name, w] : weights) {
    auto it = std::find_if(c.escalation.bundles.begin(), c.escalation.bundles.end(),
                           [&](const KeywordBundle& b) { return b.name == name; });
    if (it == c.escalation.bundles.end()) throw UsageError(fmt::format("weight given for unknown bundle '{}'", name));
    it->weight = w;
  }

  const Section corr(section_of(root, "correlation"), "correlation", {"max_lag", "zero_fill", "signal"});
  corr.read_uint("max_lag", c.correlation.max_lag, 1, 365);
  corr.read_bool("zero_fill", c.correlation.zero_fill);
  if (auto p = corr.string("signal")) c.correlation.signal = resolve(base_dir, *p);

  const Section ent(section_of(root, "entities"), "entities", {"min_cooccur", "backbone_k"});
  ent.read_uint("min_cooccur", c.entities.min_cooccur, 1, kMaxCount);
  ent.read_uint("backbone_k", c.entities.backbone_k, 1, 1000);
  return c;
}

PipelineConfig load_config(const fs::path& path) {
  std::string text;
  try {
    text = io::read_file(path);
  } catch (const IoError& e) {
    throw UsageError(e.what());
  }
  return parse_config(text, fs::absolute(path).parent_path());
}

void validate_config(const PipelineConfig& config) {
  if (config.jsonl.empty()) throw UsageError("inputs.jsonl lists no corpus files");
  auto require = [](const fs::path& p, std::string_view what) {
    if (!fs::is_regular_file(p)) throw UsageError(fmt::format("{} not found: {}", what, p.string()));
  };
  for (const auto& p : config.jsonl) require(p, "corpus file");
  for (const auto& p : config.events) require(p, "event file");
  require(config.gazetteer, "gazetteer");
  require(config.lexicon, "sentiment lexicon");
  if (config.ner_exchange) require(*config.ner_exchange, "entity exchange file");
  if (config.correlation.signal) require(*config.correlation.signal, "signal file");
  if (config.nmf.k < 1) throw UsageError("nmf.k must be >= 1");
  if (config.correlation.max_lag < 1) throw UsageError("correlation.max_lag must be >= 1");
  if (config.threads < 1) throw UsageError("threads must be >= 1");
}

std::string canonical_config(const PipelineConfig& c) {
  auto rel = [&](const fs::path& p) {
    auto r = p.lexically_relative(c.base_dir);
    return (r.empty() ? p : r).generic_string();
  };
  nlohmann::ordered_json j;
  auto& in = j["inputs"];
  in["jsonl"] = nlohmann::ordered_json::array();
  for (const auto& p : c.jsonl) in["jsonl"].push_back(rel(p));
  in["events"] = nlohmann::ordered_json::array();
  for (const auto& p : c.events) in["events"].push_back(rel(p));
  in["gazetteer"] = c.gazetteer.filename().string();
  in["lexicon"] = c.lexicon.filename().string();
  in["ner_exchange"] = c.ner_exchange ? nlohmann::ordered_json(rel(*c.ner_exchange)) : nullptr;
  in["platform_hint"] = c.platform_hint ? nlohmann::ordered_json(to_string(*c.platform_hint)) : nullptr;
  j["vectorize"] = {{"min_df", c.vectorize.min_df},
                    {"max_df_ratio", c.vectorize.max_df_ratio},
                    {"extra_stopwords", c.vectorize.extra_stopwords}};
  j["nmf"] = {{"k", c.nmf.k},       {"max_iter", c.nmf.max_iter},   {"tol", c.nmf.tol},
              {"seed", c.nmf.seed}, {"top_terms", c.nmf.top_terms}, {"top_n_series", c.nmf.top_n_series}};
  j["sentiment"] = {{"min_daily", c.sentiment.min_daily},
                    {"rolling_window", c.sentiment.rolling_window},
                    {"bins", c.sentiment.bins}};
  j["similarity"] = {{"neighbors_k", c.similarity.neighbors_k}, {"min_similarity", c.similarity.min_similarity}};
  auto& esc = j["escalation"];
  esc["normalization"] = c.escalation.normalization == Normalization::minmax ? "minmax" : "none";
  esc["smoothing_window"] = c.escalation.smoothing_window;
  esc["bundles"] = nlohmann::ordered_json::array();
  for (const auto& b : c.escalation.bundles) {
    nlohmann::ordered_json patterns = nlohmann::ordered_json::array();
    for (const auto& p : b.patterns) patterns.push_back(p);
    esc["bundles"].push_back({{"name", b.name}, {"weight", b.weight}, {"patterns", patterns}});
  }
  j["correlation"] = {{"max_lag", c.correlation.max_lag},
                      {"zero_fill", c.correlation.zero_fill},
                      {"signal", c.correlation.signal ? nlohmann::ordered_json(rel(*c.correlation.signal)) : nullptr}};
  j["entities"] = {{"min_cooccur", c.entities.min_cooccur}, {"backbone_k", c.entities.backbone_k}};
  return j.dump();
}

}  // namespace narrex
