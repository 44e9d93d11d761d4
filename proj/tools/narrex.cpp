#include <fmt/format.h>

#include <CLI11.hpp>
#include <iostream>

#include "narrex/config.hpp"
#include "narrex/pipeline.hpp"

namespace {

struct Overrides {
  std::optional<std::size_t> min_df, k, max_iter, top_terms, min_daily, rolling_window, neighbors_k, min_cooccur,
      backbone_k;
  std::optional<double> max_df_ratio, tol, min_similarity;
  std::optional<std::string> normalization;
  std::optional<int> max_lag;
  bool zero_fill = false;
};

void add_overrides(CLI::App* cmd, narrex::Stage stage, Overrides& o) {
  using narrex::Stage;
  const bool all = cmd->get_name() == "run";
  if (all || stage == Stage::topics) {
    cmd->add_option("--min-df", o.min_df, "Minimum document frequency");
    cmd->add_option("--max-df-ratio", o.max_df_ratio, "Maximum document frequency ratio");
    cmd->add_option("--k", o.k, "Number of topics");
    cmd->add_option("--max-iter", o.max_iter, "NMF iteration cap");
    cmd->add_option("--tol", o.tol, "NMF relative tolerance");
    cmd->add_option("--top-terms", o.top_terms, "Terms listed per topic");
    cmd->add_option("--neighbors-k", o.neighbors_k, "Topic graph neighbours per node");
    cmd->add_option("--min-similarity", o.min_similarity, "Topic graph cosine threshold");
  }
  if (all || stage == Stage::sentiment) {
    cmd->add_option("--min-daily", o.min_daily, "Minimum messages per day");
    cmd->add_option("--rolling-window", o.rolling_window, "Rolling mean window in days");
  }
  if (all || stage == Stage::escalate)
    cmd->add_option("--normalization", o.normalization, "Composite normalisation")
        ->check(CLI::IsMember({"none", "minmax"}));
  if (all || stage == Stage::correlate) {
    cmd->add_option("--max-lag", o.max_lag, "Largest lag in days");
    cmd->add_flag("--zero-fill", o.zero_fill, "Treat missing days as zero");
  }
  if (all || stage == Stage::entities) {
    cmd->add_option("--min-cooccur", o.min_cooccur, "Minimum co-occurrence count");
    cmd->add_option("--backbone-k", o.backbone_k, "Edges kept per node");
  }
}

void apply(const Overrides& o, narrex::PipelineConfig& c) {
  if (o.min_df) c.vectorize.min_df = *o.min_df;
  if (o.max_df_ratio) c.vectorize.max_df_ratio = *o.max_df_ratio;
  if (o.k) c.nmf.k = *o.k;
  if (o.max_iter) c.nmf.max_iter = *o.max_iter;
  if (o.tol) c.nmf.tol = *o.tol;
  if (o.top_terms) c.nmf.top_terms = *o.top_terms;
  if (o.neighbors_k) c.similarity.neighbors_k = *o.neighbors_k;
  if (o.min_similarity) c.similarity.min_similarity = *o.min_similarity;
  if (o.min_daily) c.sentiment.min_daily = *o.min_daily;
  if (o.rolling_window) c.sentiment.rolling_window = *o.rolling_window;
  if (o.normalization)
    c.escalation.normalization = *o.normalization == "none" ? narrex::Normalization::none : narrex::Normalization::minmax;
  if (o.max_lag) c.correlation.max_lag = *o.max_lag;
  if (o.zero_fill) c.correlation.zero_fill = true;
  if (o.min_cooccur) c.entities.min_cooccur = *o.min_cooccur;
  if (o.backbone_k) c.entities.backbone_k = *o.backbone_k;
}

int exit_code(narrex::StageError::Kind kind) {
  switch (kind) {
    case narrex::StageError::Kind::usage: return 1;
    case narrex::StageError::Kind::data: return 2;
    case narrex::StageError::Kind::internal: return 3;
  }
  return 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Narrative and escalation analytics over Telegram and Reddit corpora"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  Overrides overrides;
  std::optional<narrex::Stage> selected;

  auto common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "TOML config file")->required()->check(CLI::ExistingFile);
    cmd->add_option("--out", out_dir, "Output directory");
    cmd->add_option("--seed", seed, "NMF seed");
    cmd->add_option("--threads", threads, "Worker threads")->check(CLI::Range(1u, 256u));
  };

  auto* run = app.add_subcommand("run", "Run every stage and write the manifest");
  common(run);
  add_overrides(run, narrex::Stage::report, overrides);

  const std::pair<narrex::Stage, const char*> stages[] = {
      {narrex::Stage::ingest, "Parse and deduplicate the JSONL corpus"},
      {narrex::Stage::stats, "Corpus length and source volume statistics"},
      {narrex::Stage::topics, "TF-IDF and NMF topic models"},
      {narrex::Stage::sentiment, "Lexicon sentiment scores and daily series"},
      {narrex::Stage::escalate, "Keyword bundle rates and composite index"},
      {narrex::Stage::correlate, "Lagged correlation against event counts"},
      {narrex::Stage::entities, "Entity co-occurrence graph"},
      {narrex::Stage::report, "Assemble existing outputs into summary.json"},
  };
  for (const auto& [stage, help] : stages) {
    auto* cmd = app.add_subcommand(std::string(narrex::to_string(stage)), help);
    common(cmd);
    add_overrides(cmd, stage, overrides);
    cmd->callback([&selected, stage = stage] { selected = stage; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    auto config = narrex::load_config(config_path);
    if (out_dir) config.output_dir = *out_dir;
    if (seed) config.nmf.seed = *seed;
    if (threads) config.threads = *threads;
    apply(overrides, config);

    std::vector<std::string> warnings;
    if (selected) {
      narrex::validate_config(config);
      const auto record = narrex::run_stage(*selected, config, &warnings);
      for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
      fmt::print("{}: {} ({})\n", record.name, record.status, record.note);
    } else {
      const auto manifest = narrex::run_pipeline(config);
      for (const auto& w : manifest.warnings) std::cerr << "warning: " << w << "\n";
      for (const auto& s : manifest.stages) fmt::print("{}: {} ({})\n", s.name, s.status, s.note);
      fmt::print("outputs in {}\n", config.output_dir.string());
    }
    return 0;
  } catch (const narrex::StageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const narrex::UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const narrex::DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const narrex::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
}
