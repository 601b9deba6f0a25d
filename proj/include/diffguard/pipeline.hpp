#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "diffguard/features.hpp"
#include "diffguard/learn.hpp"
#include "diffguard/metrics.hpp"
#include "diffguard/scenario.hpp"
#include "diffguard/synth.hpp"

namespace diffguard {

inline constexpr std::string_view kToolVersion = "0.1.0";

struct PipelineConfig {
  std::uint64_t global_seed = 42;
  SynthConfig synth;
  HifModelParams hif;
  CtParams ct;
  WaveletParams wavelet;
  int top_k = 24;
  int folds = 5;
  std::size_t limit = 0;  // 0 = every scenario
  std::string waveform_format = "bin";  // "bin" | "csv"
  nlohmann::json grids;   // {} = default_grids()

  void validate() const;
};

nlohmann::json config_to_json(const PipelineConfig& cfg);
PipelineConfig config_from_json(const nlohmann::json& j);
PipelineConfig load_config(const std::filesystem::path& path);

struct GenerateSummary {
  std::size_t type1 = 0, hif = 0, external = 0;
  std::filesystem::path manifest_path;
};

/// Synthesizes the event population into out_dir: waveform files and JSON
/// sidecars under <class>/, manifest.csv and config.json at the root. The
/// manifest is written last; a directory without one is not a valid dataset.
GenerateSummary cmd_generate(const PipelineConfig& cfg, const std::filesystem::path& out_dir);

struct FeatureSummary {
  std::size_t rows = 0;
  std::size_t feature_count = 0;
  std::filesystem::path features_csv, ranking_csv, selected_csv;
};

/// Extracts the feature matrix and information-gain ranking from a dataset.
FeatureSummary cmd_features(const std::filesystem::path& dataset_dir, const PipelineConfig& cfg,
                            const std::filesystem::path& out_dir);

struct TrainEvalSummary {
  std::vector<EvalReport> reports;  // one per classifier kind
  std::filesystem::path report_json, report_csv;
};

/// Grid-searches and cross-validates the seven classifiers on the selected
/// features; writes report.json and a results CSV.
TrainEvalSummary cmd_train_eval(const std::filesystem::path& features_dir,
                                const PipelineConfig& cfg,
                                const std::filesystem::path& out_dir);

}  // namespace diffguard
