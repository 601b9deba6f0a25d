#pragma once

#include <filesystem>

#include "diffguard/scenario.hpp"
#include "diffguard/synth.hpp"

namespace diffguard {

// Archive layout: <dataset>/<class>/<id>.{bin|csv} plus <id>.json sidecar.
// The .bin format is little-endian: "DGW1", u32 version, u32 spec_id,
// u32 n_samples, u32 fault_start_index, f64 sampling_rate_hz, then the three
// phase arrays (a, b, c) as f64. The .csv format has columns t,ia,ib,ic.

void write_waveform_bin(const std::filesystem::path& path, const Waveform& w);
Waveform read_waveform_bin(const std::filesystem::path& path);

void write_waveform_csv(const std::filesystem::path& path, const Waveform& w);
Waveform read_waveform_csv(const std::filesystem::path& path, double sampling_rate_hz,
                           std::uint32_t fault_start_index, std::uint32_t spec_id);

void write_sidecar_json(const std::filesystem::path& path, const ScenarioSpec& spec,
                        const Waveform& w, std::string_view format);

/// Path of a scenario's waveform file inside a dataset directory.
std::filesystem::path waveform_path(const std::filesystem::path& dataset_dir,
                                    const ScenarioSpec& spec, std::string_view format);

/// Loads a waveform (either format) using the sidecar for CSV metadata.
Waveform load_waveform(const std::filesystem::path& dataset_dir, const ScenarioSpec& spec);

}  // namespace diffguard
