#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "potx/betting.hpp"
#include "potx/estimate.hpp"
#include "potx/ingest.hpp"
#include "potx/potmodel.hpp"
#include "potx/reduce.hpp"

namespace potx {

struct TargetOverrides {
  std::optional<double> level;  // fixed level, bypasses selection
  std::optional<int> K;
  std::optional<double> max_level;
  std::optional<std::vector<double>> level_grid;
  std::optional<double> confidence;
  std::optional<int> replications;
  std::optional<double> event_threshold;
};

struct PipelineConfig {
  std::vector<std::string> data_paths;
  std::optional<SynthSpec> synth;  // used when data_paths is empty
  std::vector<TargetId> targets{TargetId::T1, TargetId::T2, TargetId::T3};
  GameConfig game;                 // game.K picks the level; seeds are derived
  EstimateConfig estimate;
  std::map<TargetId, TargetOverrides> overrides;
  std::string output_dir = "potx_out";
  std::uint64_t seed = 0;
  std::vector<int> k_list{3, 5};   // scores are reported for each K
  bool emit_plot_data = true;

  void validate() const;
};

// JSON document, schema in docs/config.md. Missing keys keep defaults.
std::string config_to_json(const PipelineConfig& config);
PipelineConfig config_from_json(const std::string& text);
PipelineConfig load_config(const std::filesystem::path& path);

// FNV-1a of the canonical JSON without output_dir.
std::uint64_t config_hash(const PipelineConfig& config);

// Canonical target spec, game and estimate settings for one target after
// applying its overrides, with seeds derived from the global seed.
struct ResolvedTarget {
  TargetSpec spec;
  GameConfig game;
  EstimateConfig estimate;
  std::optional<double> fixed_level;
};

ResolvedTarget resolve_target(const PipelineConfig& config, TargetId id);

// Per-target seeds: hash of the global seed, the target and the stage.
std::uint64_t game_seed(std::uint64_t global, TargetId id);
std::uint64_t estimate_seed(std::uint64_t global, TargetId id);

struct TargetReport {
  TargetId id = TargetId::T1;
  TargetSpec spec;
  bool ok = false;
  std::string failed_stage;
  std::string error;
  std::vector<std::string> warnings;  // non-fatal plot-data failures
  std::size_t observed_count = 0;
  std::optional<double> selected_level;
  std::map<int, LevelSelection> selections;  // by K
  std::map<int, std::string> selection_errors;
  std::optional<FrequencyEstimate> estimate;
};

struct PipelineReport {
  std::vector<TargetReport> targets;
  std::vector<std::filesystem::path> files;

  bool all_ok() const;
};

// reduce -> score every level for every K -> fit at the selected level ->
// frequency estimate, writing scores.csv, answers.csv, model_<T>.json and
// plot data into config.output_dir. A failing target does not stop the
// others.
PipelineReport run_pipeline(const PipelineConfig& config);

// Writers shared with the command line tool. Each starts with the
// provenance comment line.
void write_scores_csv(std::ostream& out, TargetId id, const std::map<int, LevelSelection>& by_k,
                      std::uint64_t seed, std::uint64_t hash);
void write_answer_header(std::ostream& out, std::uint64_t seed, std::uint64_t hash);
void write_answer_row(std::ostream& out, TargetId id, const FrequencyEstimate& estimate,
                      std::uint64_t seed);

// Plot data (numeric CSV after the comment and header lines).
void write_seasonal_csv(std::ostream& out, const PotModel& model, std::uint64_t seed,
                        std::uint64_t hash);
void write_exceedance_csv(std::ostream& out, const PotFit& fit, std::uint64_t seed,
                          std::uint64_t hash);
void write_qq_csv(std::ostream& out, const QQReport& qq, std::uint64_t seed, std::uint64_t hash);
void write_angular_csv(std::ostream& out, const AngularReport& report, std::uint64_t seed,
                       std::uint64_t hash);
void write_poisson_csv(std::ostream& out, const FrequencyEstimate& estimate,
                       std::uint64_t seed, std::uint64_t hash);
void write_series_csv(std::ostream& out, const UnivariateTarget& target, std::uint64_t seed,
                      std::uint64_t hash);

}  // namespace potx
