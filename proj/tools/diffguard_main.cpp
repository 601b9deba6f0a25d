#include <cstdint>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "diffguard/errors.hpp"
#include "diffguard/pipeline.hpp"

namespace {

using diffguard::PipelineConfig;

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
};

PipelineConfig resolve_config(const CommonArgs& args) {
  if (args.config_path.empty()) return PipelineConfig{};
  return diffguard::load_config(args.config_path);
}

const char* error_type(const std::exception& e) {
  if (dynamic_cast<const diffguard::InvalidParameter*>(&e)) return "invalid_parameter";
  if (dynamic_cast<const diffguard::InvalidInput*>(&e)) return "invalid_input";
  if (dynamic_cast<const diffguard::InvalidData*>(&e)) return "invalid_data";
  if (dynamic_cast<const diffguard::ContractViolation*>(&e)) return "contract_violation";
  if (dynamic_cast<const diffguard::UndefinedMetric*>(&e)) return "undefined_metric";
  if (dynamic_cast<const diffguard::IoError*>(&e)) return "io_error";
  return "internal";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"diffguard - differential-current event synthesis, feature extraction "
               "and classifier benchmarking"};
  app.require_subcommand(1);

  CommonArgs common;
  std::uint64_t seed = 0;
  std::size_t limit = 0;
  int folds = 0, top_k = 0;
  std::string format, dataset_dir, features_dir;
  bool seed_set = false, limit_set = false, folds_set = false, top_k_set = false;

  auto* generate = app.add_subcommand("generate", "Synthesize the scenario waveform dataset");
  generate->add_option("--out", common.out_dir, "Output dataset directory")->required();
  generate->add_option("--config", common.config_path, "Pipeline config JSON");
  generate->add_option("--seed", seed, "Global seed")->each([&](const std::string&) { seed_set = true; });
  generate->add_option("--limit", limit, "Stratified scenario subsample size (0 = all)")
      ->each([&](const std::string&) { limit_set = true; });
  generate->add_option("--format", format, "Waveform file format: bin or csv");

  auto* features = app.add_subcommand("features", "Extract features and rank by information gain");
  features->add_option("--dataset", dataset_dir, "Dataset directory from 'generate'")->required();
  features->add_option("--out", common.out_dir, "Output directory")->required();
  features->add_option("--config", common.config_path, "Pipeline config JSON");
  features->add_option("--top-k", top_k, "Number of features to select")
      ->each([&](const std::string&) { top_k_set = true; });

  auto* train_eval = app.add_subcommand("train-eval", "Grid-search, cross-validate and report");
  train_eval->add_option("--features", features_dir, "Directory from 'features'")->required();
  train_eval->add_option("--out", common.out_dir, "Output directory")->required();
  train_eval->add_option("--config", common.config_path, "Pipeline config JSON");
  train_eval->add_option("--seed", seed, "Global seed")->each([&](const std::string&) { seed_set = true; });
  train_eval->add_option("--folds", folds, "Cross-validation folds")
      ->each([&](const std::string&) { folds_set = true; });
  train_eval->add_option("--top-k", top_k, "Number of features to train on")
      ->each([&](const std::string&) { top_k_set = true; });

  CLI11_PARSE(app, argc, argv);

  try {
    PipelineConfig cfg = resolve_config(common);
    if (seed_set) cfg.global_seed = seed;
    if (limit_set) cfg.limit = limit;
    if (folds_set) cfg.folds = folds;
    if (top_k_set) cfg.top_k = top_k;
    if (!format.empty()) cfg.waveform_format = format;

    if (generate->parsed()) {
      const auto summary = diffguard::cmd_generate(cfg, common.out_dir);
      std::cout << fmt::format(
          "generated {} scenarios (type1 {}, hif {}, external {}) -> {}\n",
          summary.type1 + summary.hif + summary.external, summary.type1, summary.hif,
          summary.external, common.out_dir);
    } else if (features->parsed()) {
      const auto summary = diffguard::cmd_features(dataset_dir, cfg, common.out_dir);
      std::cout << fmt::format("extracted {} feature rows x {} features -> {}\n",
                               summary.rows, summary.feature_count, common.out_dir);
    } else if (train_eval->parsed()) {
      const auto summary = diffguard::cmd_train_eval(features_dir, cfg, common.out_dir);
      std::cout << fmt::format("{:<16} {:>10} {:>14} {:>10}\n", "classifier", "bal.acc",
                               "dependability", "security");
      for (const auto& r : summary.reports) {
        std::cout << fmt::format("{:<16} {:>9.2f}% {:>13.2f}% {:>9.2f}%\n", r.classifier,
                                 100.0 * r.balanced_accuracy, 100.0 * r.dependability,
                                 100.0 * r.security);
      }
    }
    return 0;
  } catch (const std::exception& e) {
    const nlohmann::json err = {{"error", {{"type", error_type(e)}, {"message", e.what()}}}};
    std::cerr << err.dump() << "\n";
    return 1;
  }
}
