#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "diffguard/scenario.hpp"

namespace diffguard {

struct SynthConfig {
  double system_frequency_hz = 60.0;
  double sampling_rate_hz = 10000.0;
  double record_length_s = 0.5;
  double fault_start_s = 0.2;
  double nominal_current_a = 120.0;  // peak phase load-current scale
  double noise_rel_std = 0.01;

  /// Throws InvalidParameter when the timing/sampling invariants do not hold.
  void validate() const;
  std::size_t n_samples() const;
  std::uint32_t fault_start_index() const;
};

struct HifModelParams {
  // Vp / |Vn| are drawn per scenario from these fractions of the system
  // peak phase voltage; |Vp| != |Vn| is enforced with min_source_gap_frac.
  double vp_frac_min = 0.2;
  double vp_frac_max = 0.5;
  double vn_frac_min = 0.2;
  double vn_frac_max = 0.5;
  double min_source_gap_frac = 0.05;
  double rp_min_ohm = 50.0;
  double rp_max_ohm = 300.0;
  double rn_min_ohm = 50.0;
  double rn_max_ohm = 300.0;
  double resistance_update_interval_s = 0.0002;
  double source_jitter_rel = 0.1;  // per-half-cycle scaling of Vp, Vn
};

struct CtParams {
  double turns_ratio = 80.0;  // 400:5
  double burden_end1_ohm = 2.0;
  double burden_end2_ohm = 8.0;
  double saturation_flux_vs = 1.6;  // volt-second clamp; +inf disables saturation
  double remanence_frac = 0.1;      // initial flux as a fraction of the clamp
};

// Per-mode Thevenin abstraction of the 5-bus network. Grid-connected is the
// stiff source; islanded scales the source impedance up and shortens the
// X/R decay time constant.
struct SystemModel {
  double phase_peak_voltage_v = 16329.9316;  // 20 kV line-line
  double grid_source_impedance_ohm = 3.266;
  double islanded_impedance_scale = 5.0;
  double grid_time_constant_s = 0.030;
  double islanded_time_constant_s = 0.015;
  // series line impedance in the external through-fault path (T24 + T45)
  double external_path_r_ohm = 1.2;
  double external_path_x_ohm = 3.48;
};

struct Waveform {
  std::array<std::vector<double>, 3> phases;  // differential current, A
  double sampling_rate_hz = 0.0;
  std::uint32_t fault_start_index = 0;
  std::uint32_t spec_id = 0;

  std::size_t n_samples() const { return phases[0].size(); }
};

/// Per-sample internals of one HIF synthesis, for model verification.
struct HifTrace {
  double vp0 = 0.0;  // per-scenario source magnitudes before jitter
  double vn0 = 0.0;
  std::vector<double> v_phase;        // driving phase voltage
  std::vector<double> vp_eff, vn_eff; // jittered thresholds, per sample
  std::vector<double> rp, rn;         // piecewise-constant arc resistances
  std::vector<double> current;        // noise-free arc current
};

/// Arc current of the two-antiparallel-source model: conducts through Rp when
/// v > Vp, through Rn when v < Vn, zero inside the dead band.
double hif_current(double v_ph, double vp, double vn, double rp, double rn);

Waveform synthesize_hif(const ScenarioSpec& spec, const SynthConfig& cfg,
                        const HifModelParams& hif, HifTrace* trace = nullptr);
Waveform synthesize_internal(const ScenarioSpec& spec, const SynthConfig& cfg);
Waveform synthesize_external(const ScenarioSpec& spec, const SynthConfig& cfg,
                             const CtParams& ct);

/// Dispatch on spec.event_type.
Waveform synthesize(const ScenarioSpec& spec, const SynthConfig& cfg,
                    const HifModelParams& hif, const CtParams& ct);

}  // namespace diffguard
