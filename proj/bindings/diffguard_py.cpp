#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <nlohmann/json.hpp>

#include "diffguard/features.hpp"
#include "diffguard/learn.hpp"
#include "diffguard/metrics.hpp"
#include "diffguard/pipeline.hpp"
#include "diffguard/scenario.hpp"
#include "diffguard/synth.hpp"

namespace py = pybind11;
using namespace diffguard;

namespace {

py::array_t<double> waveform_samples(const Waveform& w) {
  const auto n = static_cast<py::ssize_t>(w.n_samples());
  py::array_t<double> out({static_cast<py::ssize_t>(3), n});
  auto view = out.mutable_unchecked<2>();
  for (py::ssize_t p = 0; p < 3; ++p) {
    for (py::ssize_t k = 0; k < n; ++k) {
      view(p, k) = w.phases[static_cast<std::size_t>(p)][static_cast<std::size_t>(k)];
    }
  }
  return out;
}

PipelineConfig config_from_text(const std::string& config_json) {
  if (config_json.empty()) return PipelineConfig{};
  return config_from_json(nlohmann::json::parse(config_json));
}

std::vector<double> as_vector(const py::array_t<double, py::array::c_style | py::array::forcecast>& y) {
  std::vector<double> out(static_cast<std::size_t>(y.size()));
  const auto view = y.unchecked<1>();
  for (py::ssize_t i = 0; i < y.size(); ++i) out[static_cast<std::size_t>(i)] = view(i);
  return out;
}

}  // namespace

PYBIND11_MODULE(_diffguard, m) {
  m.doc() = "Differential-current event synthesis, wavelet features, and classifier benchmark";

  py::class_<OperatingCondition>(m, "OperatingCondition")
      .def_property_readonly("mode",
                             [](const OperatingCondition& c) { return to_string(c.mode); })
      .def_property_readonly("loading",
                             [](const OperatingCondition& c) { return to_string(c.loading); })
      .def_readonly("voltage_pu", &OperatingCondition::voltage_pu);

  py::class_<ScenarioSpec>(m, "ScenarioSpec")
      .def_readonly("id", &ScenarioSpec::id)
      .def_property_readonly("class_label",
                             [](const ScenarioSpec& s) { return to_string(s.class_label); })
      .def_property_readonly("event_type",
                             [](const ScenarioSpec& s) { return to_string(s.event_type); })
      .def_property_readonly("fault_type",
                             [](const ScenarioSpec& s) { return to_string(s.fault_type); })
      .def_readonly("fault_resistance_ohm", &ScenarioSpec::fault_resistance_ohm)
      .def_readonly("inception_angle_deg", &ScenarioSpec::inception_angle_deg)
      .def_property_readonly("faulted_phases",
                             [](const ScenarioSpec& s) { return s.faulted_phases_string(); })
      .def_readonly("condition", &ScenarioSpec::condition)
      .def_readonly("rng_seed", &ScenarioSpec::rng_seed)
      .def("__repr__", [](const ScenarioSpec& s) {
        return "<ScenarioSpec id=" + std::to_string(s.id) + " " + to_string(s.event_type) + ">";
      });

  py::class_<SynthConfig>(m, "SynthConfig")
      .def(py::init<>())
      .def_readwrite("system_frequency_hz", &SynthConfig::system_frequency_hz)
      .def_readwrite("sampling_rate_hz", &SynthConfig::sampling_rate_hz)
      .def_readwrite("record_length_s", &SynthConfig::record_length_s)
      .def_readwrite("fault_start_s", &SynthConfig::fault_start_s)
      .def_readwrite("nominal_current_a", &SynthConfig::nominal_current_a)
      .def_readwrite("noise_rel_std", &SynthConfig::noise_rel_std);

  py::class_<HifModelParams>(m, "HifModelParams")
      .def(py::init<>())
      .def_readwrite("vp_frac_min", &HifModelParams::vp_frac_min)
      .def_readwrite("vp_frac_max", &HifModelParams::vp_frac_max)
      .def_readwrite("vn_frac_min", &HifModelParams::vn_frac_min)
      .def_readwrite("vn_frac_max", &HifModelParams::vn_frac_max)
      .def_readwrite("min_source_gap_frac", &HifModelParams::min_source_gap_frac)
      .def_readwrite("rp_min_ohm", &HifModelParams::rp_min_ohm)
      .def_readwrite("rp_max_ohm", &HifModelParams::rp_max_ohm)
      .def_readwrite("rn_min_ohm", &HifModelParams::rn_min_ohm)
      .def_readwrite("rn_max_ohm", &HifModelParams::rn_max_ohm)
      .def_readwrite("resistance_update_interval_s", &HifModelParams::resistance_update_interval_s)
      .def_readwrite("source_jitter_rel", &HifModelParams::source_jitter_rel);

  py::class_<CtParams>(m, "CtParams")
      .def(py::init<>())
      .def_readwrite("turns_ratio", &CtParams::turns_ratio)
      .def_readwrite("burden_end1_ohm", &CtParams::burden_end1_ohm)
      .def_readwrite("burden_end2_ohm", &CtParams::burden_end2_ohm)
      .def_readwrite("saturation_flux_vs", &CtParams::saturation_flux_vs)
      .def_readwrite("remanence_frac", &CtParams::remanence_frac);

  py::class_<WaveletParams>(m, "WaveletParams")
      .def(py::init<>())
      .def_readwrite("scales_s", &WaveletParams::scales_s)
      .def_readwrite("shift_stride_samples", &WaveletParams::shift_stride_samples);

  py::class_<Waveform>(m, "Waveform")
      .def_property_readonly("samples", &waveform_samples)
      .def_readonly("sampling_rate_hz", &Waveform::sampling_rate_hz)
      .def_readonly("fault_start_index", &Waveform::fault_start_index)
      .def_readonly("spec_id", &Waveform::spec_id)
      .def_property_readonly("n_samples", [](const Waveform& w) { return w.n_samples(); });

  m.def("enumerate_external", &enumerate_external, py::arg("global_seed"));
  m.def("enumerate_internal_type1", &enumerate_internal_type1, py::arg("global_seed"));
  m.def("enumerate_hif", &enumerate_hif, py::arg("global_seed"));
  m.def("enumerate_all", &enumerate_all, py::arg("global_seed"));

  m.def("hif_current", &hif_current, py::arg("v_ph"), py::arg("vp"), py::arg("vn"),
        py::arg("rp"), py::arg("rn"));
  m.def(
      "synthesize",
      [](const ScenarioSpec& spec, const SynthConfig& cfg, const HifModelParams& hif,
         const CtParams& ct) { return synthesize(spec, cfg, hif, ct); },
      py::arg("spec"), py::arg("cfg") = SynthConfig{}, py::arg("hif") = HifModelParams{},
      py::arg("ct") = CtParams{});

  m.def("mexican_hat", &mexican_hat, py::arg("t"), py::arg("p"), py::arg("q"));
  m.def("mexican_hat_discrete_mean_residual", &mexican_hat_discrete_mean_residual,
        py::arg("p"), py::arg("sampling_rate_hz"));
  m.def(
      "cwt",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& y,
         double sampling_rate_hz, const WaveletParams& params) {
        const auto signal = as_vector(y);
        const CwtResult r = cwt(signal, sampling_rate_hz, params);
        const auto n_scales = static_cast<py::ssize_t>(r.coeff.size());
        const auto n_shifts = static_cast<py::ssize_t>(r.shift_times_s.size());
        py::array_t<double> coeff({n_scales, n_shifts});
        py::array_t<bool> flagged({n_scales, n_shifts});
        auto cview = coeff.mutable_unchecked<2>();
        auto fview = flagged.mutable_unchecked<2>();
        for (py::ssize_t i = 0; i < n_scales; ++i) {
          for (py::ssize_t j = 0; j < n_shifts; ++j) {
            cview(i, j) = r.coeff[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
            fview(i, j) = r.flagged[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] != 0;
          }
        }
        return py::make_tuple(coeff, flagged, r.shift_times_s);
      },
      py::arg("y"), py::arg("sampling_rate_hz"), py::arg("params") = WaveletParams{});
  m.def("feature_schema",
        [](const WaveletParams& params) { return feature_schema(params); },
        py::arg("params") = WaveletParams{});
  m.def(
      "extract_features",
      [](const Waveform& w, const WaveletParams& params, double f0) {
        const FeatureVector fv = extract_features(w, params, f0);
        const auto names = feature_schema(params);
        py::dict out;
        for (std::size_t i = 0; i < names.size(); ++i) {
          out[py::str(names[i])] = fv.values[i];
        }
        return out;
      },
      py::arg("waveform"), py::arg("params") = WaveletParams{},
      py::arg("system_frequency_hz") = 60.0);

  m.def("balanced_accuracy", [](std::uint64_t tp, std::uint64_t fn, std::uint64_t tn,
                                std::uint64_t fp) {
    return balanced_accuracy(ConfusionCounts{tp, fn, tn, fp});
  });
  m.def("dependability", [](std::uint64_t tp, std::uint64_t fn, std::uint64_t tn,
                            std::uint64_t fp) {
    return dependability(ConfusionCounts{tp, fn, tn, fp});
  });
  m.def("security", [](std::uint64_t tp, std::uint64_t fn, std::uint64_t tn, std::uint64_t fp) {
    return security(ConfusionCounts{tp, fn, tn, fp});
  });

  m.def("default_config_json", []() { return config_to_json(PipelineConfig{}).dump(2); });
  m.def("default_grids_json", []() { return default_grids().dump(2); });
  m.def(
      "generate",
      [](const std::filesystem::path& out_dir, const std::string& config_json) {
        const auto summary = cmd_generate(config_from_text(config_json), out_dir);
        py::dict out;
        out["type1"] = summary.type1;
        out["hif"] = summary.hif;
        out["external"] = summary.external;
        out["manifest"] = summary.manifest_path;
        return out;
      },
      py::arg("out_dir"), py::arg("config_json") = std::string());
  m.def(
      "features",
      [](const std::filesystem::path& dataset_dir, const std::filesystem::path& out_dir,
         const std::string& config_json) {
        const auto summary = cmd_features(dataset_dir, config_from_text(config_json), out_dir);
        py::dict out;
        out["rows"] = summary.rows;
        out["feature_count"] = summary.feature_count;
        out["features_csv"] = summary.features_csv;
        out["ranking_csv"] = summary.ranking_csv;
        return out;
      },
      py::arg("dataset_dir"), py::arg("out_dir"), py::arg("config_json") = std::string());
  m.def(
      "train_eval",
      [](const std::filesystem::path& features_dir, const std::filesystem::path& out_dir,
         const std::string& config_json) {
        const auto summary = cmd_train_eval(features_dir, config_from_text(config_json), out_dir);
        py::list reports;
        for (const auto& r : summary.reports) {
          py::dict item;
          item["classifier"] = r.classifier;
          item["balanced_accuracy"] = r.balanced_accuracy;
          item["dependability"] = r.dependability;
          item["security"] = r.security;
          if (std::isfinite(r.hif_dependability)) {
            item["hif_dependability"] = r.hif_dependability;
          }
          reports.append(item);
        }
        py::dict out;
        out["reports"] = reports;
        out["report_json"] = summary.report_json;
        out["report_csv"] = summary.report_csv;
        return out;
      },
      py::arg("features_dir"), py::arg("out_dir"), py::arg("config_json") = std::string());

  m.attr("__version__") = std::string(kToolVersion);
}
