#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "diffguard/errors.hpp"
#include "diffguard/pipeline.hpp"
#include "diffguard/waveform_io.hpp"
#include "text_io.hpp"

using namespace diffguard;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name)
      : path(fs::temp_directory_path() / ("diffguard_" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

PipelineConfig small_config() {
  PipelineConfig cfg;
  cfg.global_seed = 77;
  cfg.limit = 24;
  cfg.folds = 2;
  cfg.top_k = 12;
  cfg.grids = {{"decision_tree", {{"criterion", {"entropy", "gini"}}}},
               {"random_forest",
                {{"max_depth", {6}}, {"max_features", {0.5}}, {"min_samples_leaf", {1}},
                 {"estimators", {15}}}},
               {"gradient_boost",
                {{"learning_rate", {0.1}}, {"max_depth", {2}}, {"estimators", {20}},
                 {"subsample", {1.0}}}},
               {"mlp",
                {{"activation", {"relu"}}, {"alpha", {0.0001}},
                 {"hidden_layer", {{12, 6}}}}},
               {"naive_bayes", nlohmann::json::object()},
               {"knn", {{"neighbors", {1, 3}}, {"distance", {"euclidean"}}, {"leaf_size", {3}}}},
               {"svm", {{"C", {10.0}}, {"gamma", {0.1}}, {"kernel", {"rbf"}}}}};
  return cfg;
}

std::string slurp(const fs::path& p) { return detail::read_all(p); }

}  // namespace

TEST_CASE("pipeline config json round trip") {
  PipelineConfig cfg = small_config();
  cfg.synth.sampling_rate_hz = 8000.0;
  cfg.ct.burden_end2_ohm = 6.5;
  cfg.hif.source_jitter_rel = 0.2;
  cfg.wavelet.shift_stride_samples = 4;
  cfg.waveform_format = "csv";

  const PipelineConfig back = config_from_json(config_to_json(cfg));
  CHECK(back.global_seed == cfg.global_seed);
  CHECK(back.synth.sampling_rate_hz == cfg.synth.sampling_rate_hz);
  CHECK(back.ct.burden_end2_ohm == cfg.ct.burden_end2_ohm);
  CHECK(back.hif.source_jitter_rel == cfg.hif.source_jitter_rel);
  CHECK(back.wavelet.shift_stride_samples == cfg.wavelet.shift_stride_samples);
  CHECK(back.waveform_format == cfg.waveform_format);
  CHECK(back.limit == cfg.limit);
  CHECK(back.grids == cfg.grids);

  // defaults survive an empty document
  const PipelineConfig defaults = config_from_json(nlohmann::json::object());
  CHECK(defaults.global_seed == PipelineConfig{}.global_seed);
  CHECK(defaults.top_k == 24);
}

TEST_CASE("config validation rejects bad values") {
  PipelineConfig cfg;
  cfg.folds = 1;
  CHECK_THROWS_AS(cfg.validate(), InvalidParameter);
  cfg = PipelineConfig{};
  cfg.waveform_format = "parquet";
  CHECK_THROWS_AS(cfg.validate(), InvalidParameter);
}

TEST_CASE("generate writes a stratified, reproducible dataset") {
  const TempDir dir("gen");
  const PipelineConfig cfg = small_config();
  const auto summary = cmd_generate(cfg, dir.path / "ds");
  CHECK(summary.type1 + summary.hif + summary.external == 24);
  CHECK(summary.hif >= 2);

  const auto specs = read_manifest_csv(dir.path / "ds" / "manifest.csv");
  CHECK(specs.size() == 24);
  for (const auto& spec : specs) {
    const auto wave = waveform_path(dir.path / "ds", spec, "bin");
    CHECK(fs::exists(wave));
    CHECK(fs::exists(wave.parent_path() / (std::to_string(spec.id) + ".json")));
    const Waveform w = read_waveform_bin(wave);
    CHECK(w.spec_id == spec.id);
    CHECK(w.n_samples() == cfg.synth.n_samples());
  }
  CHECK(fs::exists(dir.path / "ds" / "config.json"));

  // byte-identical manifest on a rerun
  const auto manifest_a = slurp(dir.path / "ds" / "manifest.csv");
  cmd_generate(cfg, dir.path / "ds2");
  CHECK(slurp(dir.path / "ds2" / "manifest.csv") == manifest_a);
}

TEST_CASE("csv waveform format round trips the generated samples") {
  const TempDir dir("gencsv");
  PipelineConfig cfg = small_config();
  cfg.limit = 4;
  cfg.waveform_format = "csv";
  cmd_generate(cfg, dir.path / "ds");

  const auto specs = read_manifest_csv(dir.path / "ds" / "manifest.csv");
  REQUIRE(!specs.empty());
  const auto& spec = specs.front();
  const Waveform from_csv = load_waveform(dir.path / "ds", spec);
  const Waveform direct = synthesize(spec, cfg.synth, cfg.hif, cfg.ct);
  for (int p = 0; p < 3; ++p) {
    REQUIRE(from_csv.phases[static_cast<std::size_t>(p)].size() ==
            direct.phases[static_cast<std::size_t>(p)].size());
    // shortest round-trip float formatting reproduces the samples exactly
    CHECK(from_csv.phases[static_cast<std::size_t>(p)] ==
          direct.phases[static_cast<std::size_t>(p)]);
  }
}

TEST_CASE("features stage: schema, determinism, and error paths") {
  const TempDir dir("feat");
  const PipelineConfig cfg = small_config();
  cmd_generate(cfg, dir.path / "ds");
  const auto summary = cmd_features(dir.path / "ds", cfg, dir.path / "ft");

  const FeatureDataset dataset = read_feature_csv(summary.features_csv);
  CHECK(dataset.rows.size() == 24);  // one vector per manifest row
  CHECK(dataset.feature_names.size() == summary.feature_count);
  CHECK(dataset.feature_names == feature_schema(cfg.wavelet));

  const FeatureRanking ranking = read_ranking_csv(summary.ranking_csv);
  CHECK(ranking.entries.size() == dataset.feature_names.size());
  const double h = label_entropy(dataset);
  for (const auto& [name, gain] : ranking.entries) {
    CHECK(gain >= 0.0);
    CHECK(gain <= h + 1e-12);
  }
  const FeatureRanking selected = read_ranking_csv(summary.selected_csv);
  CHECK(selected.entries.size() == 12);

  // rerun on the unchanged dataset reproduces the CSV bytes
  const std::string bytes_a = slurp(summary.features_csv);
  cmd_features(dir.path / "ds", cfg, dir.path / "ft2");
  CHECK(slurp(dir.path / "ft2" / "features.csv") == bytes_a);
  CHECK(slurp(dir.path / "ft2" / "ranking.csv") == slurp(summary.ranking_csv));

  // a missing waveform aborts with the scenario named
  const auto specs = read_manifest_csv(dir.path / "ds" / "manifest.csv");
  fs::remove(waveform_path(dir.path / "ds", specs[3], "bin"));
  try {
    cmd_features(dir.path / "ds", cfg, dir.path / "ft3");
    FAIL("expected IoError");
  } catch (const IoError& e) {
    CHECK(std::string(e.what()).find(std::to_string(specs[3].id)) != std::string::npos);
  }

  // a dataset without a manifest is rejected
  CHECK_THROWS_AS(cmd_features(dir.path / "nowhere", cfg, dir.path / "ft4"), IoError);
}

TEST_CASE("train-eval produces seven consistent, reproducible reports") {
  const TempDir dir("train");
  const PipelineConfig cfg = small_config();
  cmd_generate(cfg, dir.path / "ds");
  cmd_features(dir.path / "ds", cfg, dir.path / "ft");
  const auto summary = cmd_train_eval(dir.path / "ft", cfg, dir.path / "rp");

  REQUIRE(summary.reports.size() == 7);
  std::set<std::string> names;
  for (const auto& r : summary.reports) {
    names.insert(r.classifier);
    CHECK(r.balanced_accuracy == 0.5 * (r.dependability + r.security));
    CHECK(r.counts.tp + r.counts.fn + r.counts.tn + r.counts.fp == 24);
    CHECK(std::isfinite(r.hif_dependability));  // manifest slice present
  }
  CHECK(names.size() == 7);
  CHECK(fs::exists(summary.report_json));
  CHECK(fs::exists(summary.report_csv));
  for (const auto& r : summary.reports) {
    CHECK(fs::exists(dir.path / "rp" / "models" / (r.classifier + ".json")));
  }

  // model artifacts reload and carry the declared schema
  const auto model_json = nlohmann::json::parse(
      slurp(dir.path / "rp" / "models" / (summary.reports.front().classifier + ".json")));
  CHECK(model_json.at("schema") == "diffguard.model.v1");

  // identical seed, identical report bytes
  const std::string report_a = slurp(summary.report_json);
  cmd_train_eval(dir.path / "ft", cfg, dir.path / "rp2");
  CHECK(slurp(dir.path / "rp2" / "report.json") == report_a);

  // report CSV carries the four Table-style columns
  std::ifstream csv(summary.report_csv);
  std::string header;
  std::getline(csv, header);
  CHECK(header == "classifier,balanced_accuracy,dependability,security");
}

TEST_CASE("train-eval validates top_k against the ranking size") {
  const TempDir dir("topk");
  PipelineConfig cfg = small_config();
  cfg.limit = 12;
  cmd_generate(cfg, dir.path / "ds");
  cmd_features(dir.path / "ds", cfg, dir.path / "ft");
  cfg.top_k = 100000;
  CHECK_THROWS_AS(cmd_train_eval(dir.path / "ft", cfg, dir.path / "rp"), InvalidParameter);
}
