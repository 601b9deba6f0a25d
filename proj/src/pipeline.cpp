#include "diffguard/pipeline.hpp"

#include <algorithm>
#include <iostream>
#include <set>

#include <fmt/format.h>

#include "diffguard/errors.hpp"
#include "diffguard/rng.hpp"
#include "diffguard/waveform_io.hpp"
#include "text_io.hpp"

namespace diffguard {

namespace fs = std::filesystem;

namespace {

nlohmann::json synth_to_json(const SynthConfig& c) {
  return {{"system_frequency_hz", c.system_frequency_hz},
          {"sampling_rate_hz", c.sampling_rate_hz},
          {"record_length_s", c.record_length_s},
          {"fault_start_s", c.fault_start_s},
          {"nominal_current_a", c.nominal_current_a},
          {"noise_rel_std", c.noise_rel_std}};
}

SynthConfig synth_from_json(const nlohmann::json& j) {
  SynthConfig c;
  c.system_frequency_hz = j.value("system_frequency_hz", c.system_frequency_hz);
  c.sampling_rate_hz = j.value("sampling_rate_hz", c.sampling_rate_hz);
  c.record_length_s = j.value("record_length_s", c.record_length_s);
  c.fault_start_s = j.value("fault_start_s", c.fault_start_s);
  c.nominal_current_a = j.value("nominal_current_a", c.nominal_current_a);
  c.noise_rel_std = j.value("noise_rel_std", c.noise_rel_std);
  return c;
}

nlohmann::json hif_to_json(const HifModelParams& h) {
  return {{"vp_frac_min", h.vp_frac_min},
          {"vp_frac_max", h.vp_frac_max},
          {"vn_frac_min", h.vn_frac_min},
          {"vn_frac_max", h.vn_frac_max},
          {"min_source_gap_frac", h.min_source_gap_frac},
          {"rp_min_ohm", h.rp_min_ohm},
          {"rp_max_ohm", h.rp_max_ohm},
          {"rn_min_ohm", h.rn_min_ohm},
          {"rn_max_ohm", h.rn_max_ohm},
          {"resistance_update_interval_s", h.resistance_update_interval_s},
          {"source_jitter_rel", h.source_jitter_rel}};
}

HifModelParams hif_from_json(const nlohmann::json& j) {
  HifModelParams h;
  h.vp_frac_min = j.value("vp_frac_min", h.vp_frac_min);
  h.vp_frac_max = j.value("vp_frac_max", h.vp_frac_max);
  h.vn_frac_min = j.value("vn_frac_min", h.vn_frac_min);
  h.vn_frac_max = j.value("vn_frac_max", h.vn_frac_max);
  h.min_source_gap_frac = j.value("min_source_gap_frac", h.min_source_gap_frac);
  h.rp_min_ohm = j.value("rp_min_ohm", h.rp_min_ohm);
  h.rp_max_ohm = j.value("rp_max_ohm", h.rp_max_ohm);
  h.rn_min_ohm = j.value("rn_min_ohm", h.rn_min_ohm);
  h.rn_max_ohm = j.value("rn_max_ohm", h.rn_max_ohm);
  h.resistance_update_interval_s =
      j.value("resistance_update_interval_s", h.resistance_update_interval_s);
  h.source_jitter_rel = j.value("source_jitter_rel", h.source_jitter_rel);
  return h;
}

nlohmann::json ct_to_json(const CtParams& c) {
  return {{"turns_ratio", c.turns_ratio},
          {"burden_end1_ohm", c.burden_end1_ohm},
          {"burden_end2_ohm", c.burden_end2_ohm},
          {"saturation_flux_vs", c.saturation_flux_vs},
          {"remanence_frac", c.remanence_frac}};
}

CtParams ct_from_json(const nlohmann::json& j) {
  CtParams c;
  c.turns_ratio = j.value("turns_ratio", c.turns_ratio);
  c.burden_end1_ohm = j.value("burden_end1_ohm", c.burden_end1_ohm);
  c.burden_end2_ohm = j.value("burden_end2_ohm", c.burden_end2_ohm);
  c.saturation_flux_vs = j.value("saturation_flux_vs", c.saturation_flux_vs);
  c.remanence_frac = j.value("remanence_frac", c.remanence_frac);
  return c;
}

void write_config_snapshot(const PipelineConfig& cfg, const fs::path& out_dir) {
  nlohmann::json snapshot = {{"tool_version", std::string(kToolVersion)},
                             {"config", config_to_json(cfg)}};
  detail::write_all(out_dir / "config.json", snapshot.dump(2) + "\n");
}

}  // namespace

void PipelineConfig::validate() const {
  synth.validate();
  wavelet.validate();
  if (top_k < 1) throw InvalidParameter("top_k must be >= 1");
  if (folds < 2) throw InvalidParameter("folds must be >= 2");
  if (waveform_format != "bin" && waveform_format != "csv") {
    throw InvalidParameter(fmt::format("unknown waveform format '{}'", waveform_format));
  }
}

nlohmann::json config_to_json(const PipelineConfig& cfg) {
  return {{"global_seed", cfg.global_seed},
          {"synth", synth_to_json(cfg.synth)},
          {"hif", hif_to_json(cfg.hif)},
          {"ct", ct_to_json(cfg.ct)},
          {"wavelet",
           {{"scales_s", cfg.wavelet.scales_s},
            {"shift_stride_samples", cfg.wavelet.shift_stride_samples}}},
          {"top_k", cfg.top_k},
          {"folds", cfg.folds},
          {"limit", cfg.limit},
          {"waveform_format", cfg.waveform_format},
          {"grids", cfg.grids.is_null() ? nlohmann::json::object() : cfg.grids}};
}

PipelineConfig config_from_json(const nlohmann::json& j) {
  PipelineConfig cfg;
  cfg.global_seed = j.value("global_seed", cfg.global_seed);
  if (j.contains("synth")) cfg.synth = synth_from_json(j.at("synth"));
  if (j.contains("hif")) cfg.hif = hif_from_json(j.at("hif"));
  if (j.contains("ct")) cfg.ct = ct_from_json(j.at("ct"));
  if (j.contains("wavelet")) {
    const auto& w = j.at("wavelet");
    if (w.contains("scales_s")) cfg.wavelet.scales_s = w.at("scales_s").get<std::vector<double>>();
    cfg.wavelet.shift_stride_samples =
        w.value("shift_stride_samples", cfg.wavelet.shift_stride_samples);
  }
  cfg.top_k = j.value("top_k", cfg.top_k);
  cfg.folds = j.value("folds", cfg.folds);
  cfg.limit = j.value("limit", cfg.limit);
  cfg.waveform_format = j.value("waveform_format", cfg.waveform_format);
  if (j.contains("grids")) cfg.grids = j.at("grids");
  return cfg;
}

PipelineConfig load_config(const fs::path& path) {
  return config_from_json(nlohmann::json::parse(detail::read_all(path)));
}

GenerateSummary cmd_generate(const PipelineConfig& cfg, const fs::path& out_dir) {
  cfg.validate();

  fs::create_directories(out_dir / "internal");
  fs::create_directories(out_dir / "external");
  // A dataset is valid only once manifest.csv exists; drop any stale one so
  // an interrupted run cannot masquerade as complete.
  fs::remove(out_dir / "manifest.csv");

  auto specs = enumerate_all(cfg.global_seed);
  specs = stratified_limit(specs, cfg.limit, cfg.global_seed);

  GenerateSummary summary;
  for (const auto& spec : specs) {
    const Waveform w = synthesize(spec, cfg.synth, cfg.hif, cfg.ct);
    const fs::path wave_path = waveform_path(out_dir, spec, cfg.waveform_format);
    if (cfg.waveform_format == "csv") {
      write_waveform_csv(wave_path, w);
    } else {
      write_waveform_bin(wave_path, w);
    }
    write_sidecar_json(wave_path.parent_path() / fmt::format("{}.json", spec.id), spec, w,
                       cfg.waveform_format);
    switch (spec.event_type) {
      case EventType::type1_internal: ++summary.type1; break;
      case EventType::type2_hif: ++summary.hif; break;
      case EventType::external_ct_sat: ++summary.external; break;
    }
  }

  write_config_snapshot(cfg, out_dir);
  summary.manifest_path = out_dir / "manifest.csv";
  write_manifest_csv(summary.manifest_path, specs);
  return summary;
}

FeatureSummary cmd_features(const fs::path& dataset_dir, const PipelineConfig& cfg,
                            const fs::path& out_dir) {
  cfg.validate();
  const fs::path manifest_path = dataset_dir / "manifest.csv";
  if (!fs::exists(manifest_path)) {
    throw IoError(fmt::format("{} is not a complete dataset (missing manifest.csv)",
                              dataset_dir.string()));
  }
  const auto specs = read_manifest_csv(manifest_path);

  // Fail up front with every missing file named.
  std::string missing;
  for (const auto& spec : specs) {
    if (!fs::exists(waveform_path(dataset_dir, spec, "bin")) &&
        !fs::exists(waveform_path(dataset_dir, spec, "csv"))) {
      missing += fmt::format("  missing waveform for scenario {}\n", spec.id);
    }
  }
  if (!missing.empty()) {
    throw IoError(fmt::format("dataset {} is incomplete:\n{}", dataset_dir.string(), missing));
  }

  FeatureDataset dataset;
  dataset.feature_names = feature_schema(cfg.wavelet);
  dataset.rows.reserve(specs.size());
  for (const auto& spec : specs) {
    Waveform w;
    try {
      w = load_waveform(dataset_dir, spec);
    } catch (const std::exception& e) {
      throw IoError(fmt::format("scenario {}: corrupt waveform file ({})", spec.id, e.what()));
    }
    FeatureVector fv = extract_features(w, cfg.wavelet, cfg.synth.system_frequency_hz);
    fv.label = spec.class_label;
    dataset.rows.push_back(std::move(fv));
  }

  fs::create_directories(out_dir);
  const FeatureRanking ranking = rank_features(dataset);
  const FeatureRanking selected = select_top(dataset, cfg.top_k);

  FeatureSummary summary;
  summary.rows = dataset.rows.size();
  summary.feature_count = dataset.feature_names.size();
  summary.features_csv = out_dir / "features.csv";
  summary.ranking_csv = out_dir / "ranking.csv";
  summary.selected_csv = out_dir / "selected.csv";
  write_feature_csv(summary.features_csv, dataset);
  write_ranking_csv(summary.ranking_csv, ranking);
  write_ranking_csv(summary.selected_csv, selected);
  fs::copy_file(manifest_path, out_dir / "manifest.csv", fs::copy_options::overwrite_existing);
  write_config_snapshot(cfg, out_dir);
  return summary;
}

TrainEvalSummary cmd_train_eval(const fs::path& features_dir, const PipelineConfig& cfg,
                                const fs::path& out_dir) {
  cfg.validate();
  const FeatureDataset dataset = read_feature_csv(features_dir / "features.csv");
  const FeatureRanking ranking = read_ranking_csv(features_dir / "ranking.csv");
  if (cfg.top_k < 1 || static_cast<std::size_t>(cfg.top_k) > ranking.entries.size()) {
    throw InvalidParameter(fmt::format("top_k {} outside [1, {}]", cfg.top_k,
                                       ranking.entries.size()));
  }

  std::vector<std::string> selected;
  selected.reserve(static_cast<std::size_t>(cfg.top_k));
  for (int i = 0; i < cfg.top_k; ++i) selected.push_back(ranking.entries[static_cast<std::size_t>(i)].first);

  TrainMatrix data;
  data.feature_names = selected;
  std::vector<std::size_t> column;
  column.reserve(selected.size());
  for (const auto& name : selected) column.push_back(dataset.feature_index(name));
  data.rows.reserve(dataset.rows.size());
  for (const auto& row : dataset.rows) {
    std::vector<double> values;
    values.reserve(column.size());
    for (std::size_t c : column) values.push_back(row.values[c]);
    data.rows.push_back(std::move(values));
    data.labels.push_back(row.label == ClassLabel::internal ? 1 : 0);
    data.ids.push_back(row.spec_id);
  }

  // HIF slice from the manifest copied next to the feature matrix.
  std::set<std::uint32_t> hif_ids;
  const fs::path manifest_path = features_dir / "manifest.csv";
  if (fs::exists(manifest_path)) {
    for (const auto& spec : read_manifest_csv(manifest_path)) {
      if (spec.event_type == EventType::type2_hif) hif_ids.insert(spec.id);
    }
  }

  const nlohmann::json grids =
      cfg.grids.is_object() && !cfg.grids.empty() ? cfg.grids : default_grids();

  fs::create_directories(out_dir / "models");
  TrainEvalSummary summary;
  nlohmann::json report_classifiers = nlohmann::json::array();

  for (ClassifierKind kind : all_classifier_kinds()) {
    const std::string name = to_string(kind);
    const nlohmann::json grid =
        grids.contains(name) ? grids.at(name) : nlohmann::json::object();
    const std::uint64_t seed = substream(cfg.global_seed, "train_eval", static_cast<std::uint64_t>(kind));

    std::cerr << fmt::format("[train-eval] {}: grid search over {} point(s), {} folds\n", name,
                             expand_grid(grid).size(), cfg.folds);
    const GridSearchResult gs = grid_search(kind, grid, data, cfg.folds, seed);
    const CvResult cv = cross_validate(kind, gs.best, data, cfg.folds, seed);

    EvalReport report;
    report.classifier = name;
    report.hyperparameters = gs.best;
    report.counts = cv.pooled;
    report.dependability = dependability(cv.pooled);
    report.security = security(cv.pooled);
    report.balanced_accuracy = balanced_accuracy(cv.pooled);
    if (!hif_ids.empty()) {
      std::uint64_t hif_tp = 0, hif_fn = 0;
      for (std::size_t i = 0; i < data.ids.size(); ++i) {
        if (!hif_ids.contains(data.ids[i])) continue;
        (cv.out_of_fold[i] == 1 ? hif_tp : hif_fn) += 1;
      }
      if (hif_tp + hif_fn > 0) {
        report.hif_dependability =
            static_cast<double>(hif_tp) / static_cast<double>(hif_tp + hif_fn);
      }
    }
    std::cerr << fmt::format(
        "[train-eval] {}: balanced accuracy {:.4f}, dependability {:.4f}, security {:.4f}\n",
        name, report.balanced_accuracy, report.dependability, report.security);

    const TrainedModel final_model =
        fit(kind, gs.best, data, substream(seed, "final_fit"));
    detail::write_all(out_dir / "models" / fmt::format("{}.json", name),
                      model_to_json(final_model).dump() + "\n");

    report_classifiers.push_back(report_to_json(report));
    summary.reports.push_back(std::move(report));
  }

  nlohmann::json report_json = {{"schema", "diffguard.report.v1"},
                                {"tool_version", std::string(kToolVersion)},
                                {"global_seed", cfg.global_seed},
                                {"folds", cfg.folds},
                                {"top_k", cfg.top_k},
                                {"selected_features", selected},
                                {"n_samples", data.rows.size()},
                                {"classifiers", report_classifiers}};
  summary.report_json = out_dir / "report.json";
  summary.report_csv = out_dir / "report.csv";
  detail::write_all(summary.report_json, report_json.dump(2) + "\n");
  write_report_csv(summary.report_csv, summary.reports);
  write_config_snapshot(cfg, out_dir);
  return summary;
}

}  // namespace diffguard
