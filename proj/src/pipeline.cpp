#include "narrex/pipeline.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <set>

#include "json.hpp"
#include "narrex/corpus.hpp"
#include "narrex/entities.hpp"
#include "narrex/escalation.hpp"
#include "narrex/eventcorr.hpp"
#include "narrex/parallel.hpp"
#include "narrex/report_io.hpp"
#include "narrex/sentiment.hpp"
#include "narrex/topics.hpp"
#include "narrex/vectorize.hpp"

namespace narrex {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

constexpr Stage kAllStages[] = {Stage::ingest,   Stage::stats,     Stage::topics,   Stage::sentiment,
                                Stage::escalate, Stage::correlate, Stage::entities, Stage::report};

std::string missing_prerequisite(Stage producer, std::string_view what) {
  return fmt::format("{} not found: run {} first", what, to_string(producer));
}

/// Output directory access: records every file written and keeps the
/// content-addressed cache index.
class Workspace {
 public:
  explicit Workspace(fs::path root) : root_(std::move(root)) {}

  const fs::path& root() const { return root_; }

  void write(const std::string& rel, std::string_view content) {
    io::write_file(root_ / rel, content);
    track(rel);
    stage_outputs_.insert(rel);
  }

  void begin_stage() { stage_outputs_.clear(); }
  std::vector<std::string> stage_outputs() const { return {stage_outputs_.begin(), stage_outputs_.end()}; }
  const std::vector<fs::path>& created() const { return created_; }

  void cache_put(const std::string& key, std::string_view ext, std::string_view content) {
    auto index = load_index();
    const std::string name = fmt::format("{}-{}.{}", key, io::sha256_hex(content).substr(0, 16), ext);
    if (auto it = index.find(key); it != index.end() && it->get<std::string>() != name) {
      std::error_code ec;
      fs::remove(root_ / "cache" / it->get<std::string>(), ec);
    }
    io::write_file(root_ / "cache" / name, content);
    track("cache/" + name);
    index[key] = name;
    io::write_file(root_ / "cache" / "index.json", index.dump(2) + "\n");
    track("cache/index.json");
  }

  std::optional<std::string> cache_get(const std::string& key) const {
    auto index = load_index();
    auto it = index.find(key);
    if (it == index.end()) return std::nullopt;
    const fs::path p = root_ / "cache" / it->get<std::string>();
    if (!fs::is_regular_file(p)) return std::nullopt;
    return io::read_file(p);
  }

  std::string require_cache(const std::string& key, Stage producer) const {
    auto v = cache_get(key);
    if (!v) throw UsageError(missing_prerequisite(producer, fmt::format("cached '{}' artifact", key)));
    return *v;
  }

  ojson require_json(const std::string& rel, Stage producer) const {
    const fs::path p = root_ / rel;
    if (!fs::is_regular_file(p)) throw UsageError(missing_prerequisite(producer, rel));
    return ojson::parse(io::read_file(p));
  }

 private:
  void track(const std::string& rel) {
    const fs::path p = root_ / rel;
    if (std::find(created_.begin(), created_.end(), p) == created_.end()) created_.push_back(p);
  }

  ojson load_index() const {
    const fs::path p = root_ / "cache" / "index.json";
    if (!fs::is_regular_file(p)) return ojson::object();
    auto j = ojson::parse(io::read_file(p), nullptr, false);
    return j.is_object() ? j : ojson::object();
  }

  fs::path root_;
  std::vector<fs::path> created_;
  std::set<std::string> stage_outputs_;
};

using Warnings = std::vector<std::string>;

struct StageContext {
  const PipelineConfig& config;
  Workspace& ws;
  Warnings& warnings;
};

std::vector<Message> load_corpus(const Workspace& ws) {
  return deserialize_messages(ws.require_cache("corpus", Stage::ingest));
}

std::vector<Platform> platforms_present(std::span<const Message> messages) {
  std::set<Platform> seen;
  for (const auto& m : messages) seen.insert(m.platform);
  return {seen.begin(), seen.end()};
}

std::vector<Message> filter_platform(std::span<const Message> messages, Platform p) {
  std::vector<Message> out;
  for (const auto& m : messages)
    if (m.platform == p) out.push_back(m);
  return out;
}

std::string series_csv(std::string_view header, const DailySeries& s) {
  std::string out = fmt::format("{}\n", header);
  for (const auto& [day, p] : s.points) out += fmt::format("{},{},{}\n", format_day(day), io::format_number(p.value), p.n);
  return out;
}

// ---------------------------------------------------------------- ingest

std::string stage_ingest(StageContext& ctx) {
  const auto& c = ctx.config;
  auto result = ingest_files(c.jsonl, c.platform_hint, c.threads);
  if (result.messages.empty()) throw DataError("no usable messages in the corpus files");
  ctx.ws.cache_put("corpus", "jsonl", serialize_messages(result.messages));

  ojson report;
  report["files"] = ojson::array();
  std::vector<fs::path> sorted = c.jsonl;
  std::sort(sorted.begin(), sorted.end());
  for (const auto& p : sorted) report["files"].push_back(p.filename().string());
  const auto& r = result.report;
  report["lines"] = r.lines;
  report["accepted"] = r.accepted;
  report["blank_lines"] = r.blank_lines;
  report["malformed"] = r.malformed;
  report["empty_after_preprocess"] = r.empty_after_preprocess;
  report["duplicates_dropped"] = r.duplicates_dropped;
  report["malformed_lines"] = r.malformed_lines;
  ctx.ws.write("ingest_report.json", report.dump(2) + "\n");
  if (r.malformed > 0) ctx.warnings.push_back(fmt::format("ingest: {} malformed lines skipped", r.malformed));
  return fmt::format("{} messages, {} duplicates dropped", r.accepted, r.duplicates_dropped);
}

// ---------------------------------------------------------------- stats

std::string stage_stats(StageContext& ctx) {
  const auto messages = load_corpus(ctx.ws);
  const auto stats = compute_source_volumes(messages);

  std::string cdf = "length,fraction\n";
  for (const auto& p : stats.length_cdf)
    cdf += fmt::format("{},{}\n", io::format_number(p.value), io::format_number(p.fraction));
  ctx.ws.write("stats/length_cdf.csv", cdf);

  std::string sources = "platform,source,count\n";
  for (const auto& s : stats.per_source)
    sources += fmt::format("{},{},{}\n", to_string(s.platform), io::csv_field(s.source), s.count);
  ctx.ws.write("stats/source_volumes.csv", sources);

  std::string vol_cdf = "platform,volume,fraction\n";
  for (const auto& [platform, points] : stats.source_volume_cdf)
    for (const auto& p : points)
      vol_cdf += fmt::format("{},{},{}\n", to_string(platform), io::format_number(p.value), io::format_number(p.fraction));
  ctx.ws.write("stats/source_volume_cdf.csv", vol_cdf);

  std::vector<io::PlotLine> lines;
  std::string daily = "date,platform,count\n";
  lines.push_back({"all", daily_message_counts(messages)});
  for (Platform p : platforms_present(messages)) lines.push_back({std::string(to_string(p)), daily_message_counts(messages, p)});
  for (const auto& line : lines)
    for (const auto& [day, point] : line.series.points)
      daily += fmt::format("{},{},{}\n", format_day(day), line.name, point.n);
  ctx.ws.write("stats/daily_volume.csv", daily);
  ctx.ws.write("stats/daily_volume.svg", io::render_line_chart_svg("Daily message volume", "messages", lines));

  ojson summary;
  summary["total_items"] = stats.total_items;
  summary["per_platform"] = ojson::object();
  for (const auto& [p, n] : stats.per_platform) summary["per_platform"][std::string(to_string(p))] = n;
  std::map<std::string, std::size_t> per_kind;
  for (const auto& m : messages) ++per_kind[fmt::format("{}/{}", to_string(m.platform), to_string(m.kind))];
  summary["per_kind"] = per_kind;
  summary["fraction_under_500_chars"] = cdf_at(stats.length_cdf, 499);
  summary["top_sources"] = ojson::array();
  for (std::size_t i = 0; i < std::min<std::size_t>(10, stats.per_source.size()); ++i) {
    const auto& s = stats.per_source[i];
    summary["top_sources"].push_back({{"platform", to_string(s.platform)}, {"source", s.source}, {"count", s.count}});
  }
  ctx.ws.write("stats/corpus_summary.json", summary.dump(2) + "\n");
  return fmt::format("{} sources", stats.per_source.size());
}

// ---------------------------------------------------------------- topics

std::optional<ojson> fit_topic_scope(StageContext& ctx, const std::string& scope, std::span<const Message> messages) {
  const auto& c = ctx.config;
  std::vector<TokenList> docs(messages.size());
  parallel_for(messages.size(), c.threads, [&](std::size_t i) { docs[i] = tokenize(messages[i].text); });

  VocabularyOptions vopts;
  vopts.min_df = c.vectorize.min_df;
  vopts.max_df_ratio = c.vectorize.max_df_ratio;
  for (const auto& w : c.vectorize.extra_stopwords) vopts.stopwords.insert(w);

  Vocabulary vocab;
  try {
    vocab = build_vocabulary(docs, vopts);
  } catch (const DataError& e) {
    if (scope == "combined") throw;
    ctx.warnings.push_back(fmt::format("topics/{}: skipped ({})", scope, e.what()));
    return std::nullopt;
  }
  const auto matrix = tfidf_matrix(docs, vocab);

  NmfOptions opts{c.nmf.k, c.nmf.max_iter, c.nmf.tol, c.nmf.seed};
  const std::size_t limit = std::min(matrix.n_docs, matrix.n_terms);
  if (opts.k > limit) {
    ctx.warnings.push_back(fmt::format("topics/{}: k reduced from {} to {}", scope, opts.k, limit));
    opts.k = limit;
  }
  const auto model = nmf_fit(matrix, opts);
  const auto terms = top_terms(model, vocab, std::min(c.nmf.top_terms, vocab.size()));
  std::vector<std::string> labels;
  for (std::size_t t = 0; t < model.k; ++t) {
    std::string label = fmt::format("T{}:", t);
    for (std::size_t i = 0; i < std::min<std::size_t>(3, terms[t].size()); ++i) label += " " + terms[t][i];
    labels.push_back(std::move(label));
  }
  const auto assignments = dominant_topics(model);
  const auto volumes = topic_volumes(assignments, model.k);

  const std::string dir = "topics/" + scope + "/";
  write_vocabulary_csv(ctx.ws.root() / (dir + "vocabulary.csv"), vocab);
  ctx.ws.write(dir + "vocabulary.csv", io::read_file(ctx.ws.root() / (dir + "vocabulary.csv")));
  write_topic_model(ctx.ws.root() / dir, model, vocab, terms);
  for (const char* f : {"W.csv", "H.csv", "labels.json"})
    ctx.ws.write(dir + f, io::read_file(ctx.ws.root() / (dir + f)));

  std::string objective = "iteration,frobenius_error\n";
  for (std::size_t i = 0; i < model.objective_trace.size(); ++i)
    objective += fmt::format("{},{}\n", i, io::format_number(model.objective_trace[i]));
  ctx.ws.write(dir + "objective.csv", objective);

  std::string assign = "platform,id,topic\n";
  for (std::size_t d = 0; d < messages.size(); ++d)
    assign += fmt::format("{},{},{}\n", to_string(messages[d].platform), io::csv_field(messages[d].id),
                          assignments[d] ? std::to_string(*assignments[d]) : std::string("unassigned"));
  ctx.ws.write(dir + "assignments.csv", assign);

  const auto series = topic_volume_series(assignments, messages, c.nmf.top_n_series, labels);
  std::string volume_csv = "date,topic,count\n";
  for (const auto& s : series)
    for (const auto& [day, p] : s.series.points)
      volume_csv += fmt::format("{},{},{}\n", format_day(day), io::csv_field(s.label), p.n);
  ctx.ws.write(dir + "topic_volume.csv", volume_csv);

  const auto graph = topic_similarity_graph(model, c.similarity.neighbors_k, c.similarity.min_similarity, labels);
  ctx.ws.write(dir + "topic_graph.dot", topic_graph_dot(graph));
  ctx.ws.write(dir + "topic_edges.csv", topic_graph_edges_csv(graph));

  std::vector<std::size_t> order(model.k);
  for (std::size_t t = 0; t < model.k; ++t) order[t] = t;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return volumes[a] > volumes[b]; });
  ojson summary;
  summary["documents"] = messages.size();
  summary["vocabulary"] = vocab.size();
  summary["k"] = model.k;
  summary["iterations"] = model.objective_trace.size() - 1;
  summary["final_error"] = model.objective_trace.back();
  summary["unassigned"] = static_cast<std::size_t>(std::count(assignments.begin(), assignments.end(), std::nullopt));
  summary["topics"] = ojson::array();
  for (std::size_t t : order)
    summary["topics"].push_back({{"topic", t}, {"volume", volumes[t]}, {"terms", terms[t]}});
  ctx.ws.write(dir + "summary.json", summary.dump(2) + "\n");
  return summary;
}

std::string stage_topics(StageContext& ctx) {
  const auto messages = load_corpus(ctx.ws);
  ojson all;
  std::vector<std::string> fitted;
  if (auto s = fit_topic_scope(ctx, "combined", messages)) {
    all["combined"] = *s;
    fitted.push_back("combined");
  }
  for (Platform p : platforms_present(messages)) {
    const std::string scope(to_string(p));
    const auto subset = filter_platform(messages, p);
    if (auto s = fit_topic_scope(ctx, scope, subset)) {
      all[scope] = *s;
      fitted.push_back(scope);
    }
  }
  ctx.ws.write("topics/summary.json", all.dump(2) + "\n");
  return fmt::format("models: {}", fmt::join(fitted, ", "));
}

// ---------------------------------------------------------------- sentiment

std::string stage_sentiment(StageContext& ctx) {
  const auto& c = ctx.config;
  const auto messages = load_corpus(ctx.ws);
  const auto lexicon = load_lexicon(c.lexicon);
  const auto scores = score_messages(messages, lexicon, c.threads);

  std::string per_message = "platform,id,compound,pos,neu,neg\n";
  for (std::size_t i = 0; i < messages.size(); ++i)
    per_message += fmt::format("{},{},{},{},{},{}\n", to_string(messages[i].platform), io::csv_field(messages[i].id),
                               io::format_number(scores[i].compound), io::format_number(scores[i].pos),
                               io::format_number(scores[i].neu), io::format_number(scores[i].neg));
  ctx.ws.write("sentiment/message_scores.csv", per_message);

  std::vector<std::pair<std::string, std::optional<Platform>>> groups = {{"all", std::nullopt}};
  for (Platform p : platforms_present(messages)) groups.emplace_back(std::string(to_string(p)), p);

  std::map<std::string, Histogram> hists;
  std::vector<io::PlotLine> smoothed_lines;
  ojson summary = ojson::object();
  for (const auto& [name, platform] : groups) {
    std::vector<Message> subset;
    std::vector<SentimentScore> sub_scores;
    std::vector<double> compounds;
    for (std::size_t i = 0; i < messages.size(); ++i) {
      if (platform && messages[i].platform != *platform) continue;
      subset.push_back(messages[i]);
      sub_scores.push_back(scores[i]);
      compounds.push_back(scores[i].compound);
    }
    const auto daily = daily_sentiment_series(subset, sub_scores, c.sentiment.min_daily);
    const auto smoothed = rolling_mean(daily, c.sentiment.rolling_window);
    ctx.ws.write(fmt::format("sentiment/sentiment_daily_{}.csv", name), series_csv("date,mean_compound,n_messages", daily));
    ctx.ws.write(fmt::format("sentiment/sentiment_smoothed_{}.csv", name),
                 series_csv("date,rolling_mean,window_days_observed", smoothed));
    const auto hist = sentiment_histogram(compounds, c.sentiment.bins);
    std::string hist_csv = "bin_center,count\n";
    for (std::size_t b = 0; b < hist.bins(); ++b)
      hist_csv += fmt::format("{},{}\n", io::format_number(hist.bin_center(b)), hist.counts[b]);
    ctx.ws.write(fmt::format("sentiment/sentiment_hist_{}.csv", name), hist_csv);
    hists.emplace(name, hist);
    smoothed_lines.push_back({name, smoothed});

    std::vector<double> sorted = compounds;
    std::sort(sorted.begin(), sorted.end());
    double sum = 0.0;
    for (double v : sorted) sum += v;
    summary[name] = {{"messages", subset.size()},
                     {"mean_compound", subset.empty() ? 0.0 : sum / static_cast<double>(subset.size())},
                     {"days_in_series", daily.size()}};
    if (daily.empty())
      ctx.warnings.push_back(fmt::format("sentiment/{}: no day reaches {} messages", name, c.sentiment.min_daily));
  }
  ctx.ws.write("sentiment/summary.json", summary.dump(2) + "\n");
  ctx.ws.write("sentiment/sentiment_smoothed.svg",
               io::render_line_chart_svg(fmt::format("Sentiment, {}-day rolling mean", c.sentiment.rolling_window),
                                         "mean compound", smoothed_lines));

  ojson divergence;
  divergence["metric"] = "jensen_shannon_base2";
  divergence["bins"] = c.sentiment.bins;
  divergence["pairs"] = ojson::array();
  std::vector<std::string> platform_names;
  for (const auto& [name, platform] : groups)
    if (platform) platform_names.push_back(name);
  for (std::size_t i = 0; i < platform_names.size(); ++i)
    for (std::size_t j = i + 1; j < platform_names.size(); ++j)
      divergence["pairs"].push_back({{"a", platform_names[i]},
                                     {"b", platform_names[j]},
                                     {"value", platform_divergence(hists.at(platform_names[i]), hists.at(platform_names[j]))}});
  if (hists.contains("telegram") && hists.contains("reddit"))
    divergence["telegram_vs_reddit"] = platform_divergence(hists.at("telegram"), hists.at("reddit"));
  else
    divergence["telegram_vs_reddit"] = nullptr;
  ctx.ws.write("sentiment/divergence.json", divergence.dump(2) + "\n");
  return fmt::format("{} messages scored", messages.size());
}

// ---------------------------------------------------------------- escalate

std::string stage_escalate(StageContext& ctx) {
  const auto& c = ctx.config;
  const auto messages = load_corpus(ctx.ws);
  const auto rates = daily_bundle_rates(messages, c.escalation.bundles, c.threads);
  std::vector<double> weights;
  for (const auto& b : c.escalation.bundles) weights.push_back(b.weight);
  const auto index = composite_index(rates, c.escalation.normalization, weights);
  if (index.degenerate) ctx.warnings.push_back("escalate: composite index is constant; normalised values set to 0");

  std::vector<std::size_t> order(rates.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return rates[a].bundle < rates[b].bundle; });

  std::string rates_csv = "date,bundle,hits,total,rate\n";
  std::set<Day> days;
  for (const auto& r : rates)
    for (const auto& [day, p] : r.rate.points) days.insert(day);
  for (Day day : days)
    for (std::size_t i : order) {
      auto it = rates[i].rate.points.find(day);
      if (it == rates[i].rate.points.end()) continue;
      rates_csv += fmt::format("{},{},{},{},{}\n", format_day(day), io::csv_field(rates[i].bundle),
                               rates[i].hits.at(day), it->second.n, io::format_number(it->second.value));
    }
  ctx.ws.write("escalation/bundle_rates.csv", rates_csv);

  std::string index_csv = "date,composite_raw,composite_norm\n";
  for (const auto& [day, p] : index.raw.points)
    index_csv += fmt::format("{},{},{}\n", format_day(day), io::format_number(p.value),
                             io::format_number(index.normalized.at(day).value_or(0.0)));
  ctx.ws.write("escalation/escalation_index.csv", index_csv);
  ctx.ws.cache_put("escalation_signal", "csv", series_csv("date,value,n", index.raw));

  std::vector<io::PlotLine> bundle_lines;
  for (std::size_t i : order) bundle_lines.push_back({rates[i].bundle, rates[i].rate});
  ctx.ws.write("escalation/bundle_rates.svg",
               io::render_line_chart_svg("Daily keyword bundle rates", "share of messages", bundle_lines));

  std::vector<io::PlotLine> index_lines = {{"composite", index.normalized}};
  if (c.escalation.smoothing_window > 0) {
    const auto smoothed = rolling_mean(index.normalized, c.escalation.smoothing_window);
    ctx.ws.write("escalation/escalation_smoothed.csv", series_csv("date,composite_smoothed,window_days_observed", smoothed));
    index_lines.push_back({fmt::format("{}-day mean", c.escalation.smoothing_window), smoothed});
  }
  ctx.ws.write("escalation/escalation_index.svg",
               io::render_line_chart_svg("Composite escalation index", "index", index_lines));

  ojson summary;
  summary["days"] = index.raw.size();
  summary["normalization"] = c.escalation.normalization == Normalization::minmax ? "minmax" : "none";
  summary["bundles"] = ojson::array();
  for (std::size_t i : order) {
    std::size_t hits = 0;
    for (const auto& [day, h] : rates[i].hits) hits += h;
    summary["bundles"].push_back({{"name", rates[i].bundle}, {"messages_matched", hits}});
  }
  if (!index.raw.empty()) {
    auto peak = std::max_element(index.raw.points.begin(), index.raw.points.end(),
                                 [](const auto& a, const auto& b) { return a.second.value < b.second.value; });
    summary["peak_day"] = format_day(peak->first);
    summary["peak_value"] = peak->second.value;
  }
  ctx.ws.write("escalation/summary.json", summary.dump(2) + "\n");
  return fmt::format("{} days, {} bundles", index.raw.size(), rates.size());
}

// ---------------------------------------------------------------- correlate

DailySeries parse_cached_series(const std::string& csv) {
  DailySeries s;
  const auto rows = io::parse_csv(csv);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].size() < 3) continue;
    auto day = parse_day(rows[r][0]);
    if (!day) throw DataError("corrupt cached series");
    s.points.emplace(*day, DailyPoint{std::stod(rows[r][1]), static_cast<std::size_t>(std::stoull(rows[r][2]))});
  }
  return s;
}

std::string safe_label(std::string label) {
  for (auto& ch : label)
    if (!(std::isalnum(static_cast<unsigned char>(ch)) || ch == '-' || ch == '_')) ch = '_';
  return label.empty() ? std::string("events") : label;
}

std::string stage_correlate(StageContext& ctx, bool* skipped) {
  const auto& c = ctx.config;
  if (c.events.empty()) {
    *skipped = true;
    return "no event files configured";
  }
  const DailySeries signal = c.correlation.signal
                                 ? load_daily_csv(*c.correlation.signal)
                                 : parse_cached_series(ctx.ws.require_cache("escalation_signal", Stage::escalate));

  std::vector<fs::path> files = c.events;
  std::sort(files.begin(), files.end());
  std::set<std::string> used;
  std::vector<std::string> notes;
  for (const auto& file : files) {
    const auto events = load_event_series(file);
    std::string label = safe_label(events.label);
    for (int n = 2; used.contains(label); ++n) label = fmt::format("{}_{}", safe_label(events.label), n);
    used.insert(label);

    auto [sig, ev] = c.correlation.zero_fill ? zero_fill(signal, events.values) : std::pair{signal, events.values};
    const auto scan = lag_scan(sig, ev, c.correlation.max_lag, c.threads);
    const std::string dir = "correlation/" + label + "/";

    std::string lag_csv = "lag,pearson,spearman,n\n";
    for (int lag : scan.lags)
      lag_csv += fmt::format("{},{},{},{}\n", lag, io::format_number(scan.pearson.at(lag)),
                             io::format_number(scan.spearman.at(lag)), scan.n_overlap.at(lag));
    ctx.ws.write(dir + "lag_correlation.csv", lag_csv);

    const auto same_day = align_with_lag(sig, ev, 0);
    std::string scatter = "date,events,signal\n";
    for (std::size_t i = 0; i < same_day.days.size(); ++i)
      scatter += fmt::format("{},{},{}\n", format_day(same_day.days[i]), io::format_number(same_day.events[i]),
                             io::format_number(same_day.signal[i]));
    ctx.ws.write(dir + "scatter.csv", scatter);

    const auto norm_sig = minmax_normalize(sig);
    const auto norm_ev = minmax_normalize(ev);
    if (norm_ev.degenerate) ctx.warnings.push_back(fmt::format("correlate/{}: event series is constant", label));
    const auto norm_pairs = align_with_lag(norm_sig.series, norm_ev.series, 0);
    std::string timeline = "date,events,signal\n";
    for (std::size_t i = 0; i < norm_pairs.days.size(); ++i)
      timeline += fmt::format("{},{},{}\n", format_day(norm_pairs.days[i]), io::format_number(norm_pairs.events[i]),
                              io::format_number(norm_pairs.signal[i]));
    ctx.ws.write(dir + "timeline_normalized.csv", timeline);
    ctx.ws.write(dir + "timeline_normalized.svg",
                 io::render_line_chart_svg(fmt::format("Normalised timeline: {}", label), "min-max scaled",
                                           {{"events", norm_ev.series}, {"signal", norm_sig.series}}));

    ojson summary;
    summary["label"] = label;
    summary["source"] = file.filename().string();
    summary["zero_fill"] = c.correlation.zero_fill;
    summary["max_lag"] = c.correlation.max_lag;
    if (scan.pearson.contains(0)) {
      summary["same_day"] = {{"pearson", scan.pearson.at(0)}, {"spearman", scan.spearman.at(0)}, {"n", scan.n_overlap.at(0)}};
    } else {
      summary["same_day"] = nullptr;
    }
    summary["best_lag_pearson"] = scan.best_lag_pearson;
    summary["pearson_at_best"] = scan.pearson.at(scan.best_lag_pearson);
    summary["best_lag_spearman"] = scan.best_lag_spearman;
    summary["spearman_at_best"] = scan.spearman.at(scan.best_lag_spearman);
    ctx.ws.write(dir + "summary.json", summary.dump(2) + "\n");
    notes.push_back(fmt::format("{}: best lag {}", label, scan.best_lag_pearson));
  }
  return fmt::format("{}", fmt::join(notes, "; "));
}

// ---------------------------------------------------------------- entities

std::string stage_entities(StageContext& ctx) {
  const auto& c = ctx.config;
  const auto messages = load_corpus(ctx.ws);
  EntityGraph counts;
  if (c.ner_exchange) {
    const auto extractor = ExchangeFileExtractor::load(*c.ner_exchange);
    counts = cooccurrence_counts(messages, extractor, std::nullopt, c.threads);
  } else {
    const auto gazetteer = Gazetteer::load(c.gazetteer);
    const GazetteerExtractor extractor(gazetteer);
    counts = cooccurrence_counts(messages, extractor, std::nullopt, c.threads);
  }

  std::string nodes = "entity,frequency\n";
  for (const auto& [name, f] : counts.nodes) nodes += fmt::format("{},{}\n", io::csv_field(name), f);
  ctx.ws.write("entities/entity_nodes.csv", nodes);
  std::string raw = "source,target,cooccur\n";
  for (const auto& e : counts.edges) raw += fmt::format("{},{},{}\n", io::csv_field(e.a), io::csv_field(e.b), e.cooccur);
  ctx.ws.write("entities/entity_cooccurrence.csv", raw);

  const auto weighted = pmi_weights(counts, std::max<std::size_t>(counts.n_messages, 1), c.entities.min_cooccur);
  const auto backbone = backbone_filter(weighted, c.entities.backbone_k);
  ctx.ws.write("entities/entity_graph.dot", render_graph(backbone, GraphFormat::dot));
  ctx.ws.write("entities/entity_graph.json", render_graph(backbone, GraphFormat::json));
  ctx.ws.write("entities/entity_edges.csv", render_graph(backbone, GraphFormat::csv));

  std::vector<std::pair<std::string, std::size_t>> ranked(counts.nodes.begin(), counts.nodes.end());
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  ojson summary;
  summary["messages"] = counts.n_messages;
  summary["entities_found"] = counts.nodes.size();
  summary["cooccurrence_edges"] = counts.edges.size();
  summary["pmi_edges"] = weighted.edges.size();
  summary["backbone_nodes"] = backbone.nodes.size();
  summary["backbone_edges"] = backbone.edges.size();
  summary["top_entities"] = ojson::array();
  for (std::size_t i = 0; i < std::min<std::size_t>(10, ranked.size()); ++i)
    summary["top_entities"].push_back({{"entity", ranked[i].first}, {"frequency", ranked[i].second}});
  ctx.ws.write("entities/summary.json", summary.dump(2) + "\n");
  return fmt::format("{} nodes, {} edges in backbone", backbone.nodes.size(), backbone.edges.size());
}

// ---------------------------------------------------------------- report

std::string stage_report(StageContext& ctx) {
  const auto& c = ctx.config;
  ctx.ws.require_cache("corpus", Stage::ingest);
  ojson report;
  report["corpus"] = ctx.ws.require_json("stats/corpus_summary.json", Stage::stats);
  const auto topics = ctx.ws.require_json("topics/summary.json", Stage::topics);
  report["top_topics"] = ojson::object();
  for (const auto& [scope, s] : topics.items()) {
    ojson top = ojson::array();
    for (std::size_t i = 0; i < std::min<std::size_t>(5, s["topics"].size()); ++i) top.push_back(s["topics"][i]);
    report["top_topics"][scope] = top;
  }
  report["divergence"] = ctx.ws.require_json("sentiment/divergence.json", Stage::sentiment)["telegram_vs_reddit"];
  report["sentiment"] = ctx.ws.require_json("sentiment/summary.json", Stage::sentiment);
  report["escalation"] = ctx.ws.require_json("escalation/summary.json", Stage::escalate);
  report["correlations"] = ojson::array();
  if (!c.events.empty()) {
    const fs::path dir = ctx.ws.root() / "correlation";
    if (!fs::is_directory(dir)) throw UsageError(missing_prerequisite(Stage::correlate, "correlation outputs"));
    std::vector<fs::path> summaries;
    for (const auto& entry : fs::directory_iterator(dir))
      if (fs::is_regular_file(entry.path() / "summary.json")) summaries.push_back(entry.path() / "summary.json");
    if (summaries.empty()) throw UsageError(missing_prerequisite(Stage::correlate, "correlation summaries"));
    std::sort(summaries.begin(), summaries.end());
    for (const auto& p : summaries) report["correlations"].push_back(ojson::parse(io::read_file(p)));
  }
  report["entities"] = ctx.ws.require_json("entities/summary.json", Stage::entities);
  ctx.ws.write("summary.json", report.dump(2) + "\n");
  return "summary.json";
}

StageRecord execute(Stage stage, StageContext& ctx) {
  StageRecord record;
  record.name = std::string(to_string(stage));
  record.status = "ok";
  ctx.ws.begin_stage();
  const auto start = std::chrono::steady_clock::now();
  try {
    bool skipped = false;
    switch (stage) {
      case Stage::ingest: record.note = stage_ingest(ctx); break;
      case Stage::stats: record.note = stage_stats(ctx); break;
      case Stage::topics: record.note = stage_topics(ctx); break;
      case Stage::sentiment: record.note = stage_sentiment(ctx); break;
      case Stage::escalate: record.note = stage_escalate(ctx); break;
      case Stage::correlate: record.note = stage_correlate(ctx, &skipped); break;
      case Stage::entities: record.note = stage_entities(ctx); break;
      case Stage::report: record.note = stage_report(ctx); break;
    }
    if (skipped) record.status = "skipped";
  } catch (const StageError&) {
    throw;
  } catch (const UsageError& e) {
    throw StageError(stage, StageError::Kind::usage, e.what());
  } catch (const DataError& e) {
    throw StageError(stage, StageError::Kind::data, e.what());
  } catch (const IoError& e) {
    throw StageError(stage, StageError::Kind::data, e.what());
  } catch (const std::exception& e) {
    throw StageError(stage, StageError::Kind::internal, e.what());
  }
  record.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  record.outputs = ctx.ws.stage_outputs();
  return record;
}

}  // namespace

std::string_view to_string(Stage s) {
  switch (s) {
    case Stage::ingest: return "ingest";
    case Stage::stats: return "stats";
    case Stage::topics: return "topics";
    case Stage::sentiment: return "sentiment";
    case Stage::escalate: return "escalate";
    case Stage::correlate: return "correlate";
    case Stage::entities: return "entities";
    case Stage::report: return "report";
  }
  return "unknown";
}

std::optional<Stage> parse_stage(std::string_view s) {
  for (Stage st : kAllStages)
    if (to_string(st) == s) return st;
  return std::nullopt;
}

StageError::StageError(Stage stage, Kind kind, const std::string& cause)
    : Error(fmt::format("stage '{}' failed: {}", to_string(stage), cause)), stage_(stage), kind_(kind) {}

StageRecord run_stage(Stage stage, const PipelineConfig& config, std::vector<std::string>* warnings) {
  Workspace ws(config.output_dir);
  Warnings local;
  StageContext ctx{config, ws, warnings ? *warnings : local};
  return execute(stage, ctx);
}

std::string manifest_json(const RunManifest& m) {
  ojson j;
  j["config_hash"] = m.config_hash;
  j["seed"] = m.seed;
  j["input_digests"] = m.input_digests;
  j["stages"] = ojson::array();
  for (const auto& s : m.stages)
    j["stages"].push_back({{"name", s.name}, {"status", s.status}, {"note", s.note}, {"outputs", s.outputs}});
  j["warnings"] = m.warnings;
  return j.dump(2) + "\n";
}

RunManifest run_pipeline(const PipelineConfig& config) {
  validate_config(config);
  RunManifest manifest;
  manifest.config_hash = io::sha256_hex(canonical_config(config));
  manifest.seed = config.nmf.seed;

  auto digest = [&](const fs::path& p) {
    auto rel = p.lexically_relative(config.base_dir);
    const std::string key = (rel.empty() ? p : rel).generic_string();
    manifest.input_digests[key] = io::sha256_hex(io::read_file(p));
  };
  for (const auto& p : config.jsonl) digest(p);
  for (const auto& p : config.events) digest(p);
  digest(config.gazetteer);
  digest(config.lexicon);
  if (config.ner_exchange) digest(*config.ner_exchange);
  if (config.correlation.signal) digest(*config.correlation.signal);

  Workspace ws(config.output_dir);
  StageContext ctx{config, ws, manifest.warnings};
  const auto start = std::chrono::steady_clock::now();
  try {
    for (Stage stage : kAllStages) manifest.stages.push_back(execute(stage, ctx));
    ws.write("manifest.json", manifest_json(manifest));
    ojson timings;
    for (const auto& s : manifest.stages) timings["stages"][s.name] = s.seconds;
    timings["total_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    ws.write("timings.json", timings.dump(2) + "\n");
  } catch (...) {
    std::error_code ec;
    for (const auto& p : ws.created()) fs::remove(p, ec);
    throw;
  }
  return manifest;
}

}  // namespace narrex
