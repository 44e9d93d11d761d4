#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "narrex/config.hpp"
#include "narrex/error.hpp"

namespace narrex {

enum class Stage { ingest, stats, topics, sentiment, escalate, correlate, entities, report };

std::string_view to_string(Stage s);
std::optional<Stage> parse_stage(std::string_view s);

/// A stage failure; `cause_kind` keeps the category of the underlying error
/// so the CLI can pick an exit code.
class StageError : public Error {
 public:
  enum class Kind { usage, data, internal };
  StageError(Stage stage, Kind kind, const std::string& cause);
  Stage stage() const { return stage_; }
  Kind kind() const { return kind_; }

 private:
  Stage stage_;
  Kind kind_;
};

struct StageRecord {
  std::string name;
  std::string status;  // "ok" or "skipped"
  std::string note;
  /// Output files relative to the output directory, sorted.
  std::vector<std::string> outputs;
  double seconds = 0.0;
};

struct RunManifest {
  std::string config_hash;
  /// Input path (relative to the config directory) -> SHA-256.
  std::map<std::string, std::string> input_digests;
  std::uint64_t seed = 0;
  std::vector<StageRecord> stages;
  std::vector<std::string> warnings;
};

/// Runs one stage against cached upstream artifacts in config.output_dir.
/// Throws StageError; a missing upstream artifact names the subcommand to
/// run first.
StageRecord run_stage(Stage stage, const PipelineConfig& config, std::vector<std::string>* warnings = nullptr);

/// Every stage in order, then manifest.json and timings.json. On failure the
/// files written by this run are removed and the StageError is rethrown.
RunManifest run_pipeline(const PipelineConfig& config);

/// The deterministic part of the manifest (no timings).
std::string manifest_json(const RunManifest& manifest);

}  // namespace narrex
