#include "diffguard/synth.hpp"

#include <cmath>

#include <fmt/format.h>

#include "diffguard/errors.hpp"
#include "diffguard/rng.hpp"

namespace diffguard {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;

// a, b, c source angles
constexpr std::array<double, 3> kPhaseOffsetRad = {0.0, -kTwoPi / 3.0, kTwoPi / 3.0};

struct Impedance {
  double r = 0.0;
  double x = 0.0;
  double magnitude() const { return std::hypot(r, x); }
  double angle() const { return std::atan2(x, r); }
};

// Source impedance from magnitude and X/R time constant.
Impedance source_impedance(const SystemModel& sys, Mode mode, double omega) {
  const double mag = mode == Mode::grid_connected
                         ? sys.grid_source_impedance_ohm
                         : sys.grid_source_impedance_ohm * sys.islanded_impedance_scale;
  const double tau = mode == Mode::grid_connected ? sys.grid_time_constant_s
                                                  : sys.islanded_time_constant_s;
  const double x_over_r = omega * tau;
  Impedance z;
  z.r = mag / std::sqrt(1.0 + x_over_r * x_over_r);
  z.x = z.r * x_over_r;
  return z;
}

std::array<double, 3> load_scale(Loading loading) {
  if (loading == Loading::unbalanced) return {1.0, 0.8, 1.2};
  return {1.0, 1.0, 1.0};
}

// Classic step fault current with decaying DC offset:
//   i(t) = I [sin(wt + theta - phi) - sin(theta - phi) e^(-t/tau)]
struct FaultCurrent {
  double magnitude = 0.0;  // peak, A
  double phi = 0.0;        // impedance angle
  double tau = 0.0;        // DC decay time constant

  double at(double t_rel, double theta) const {
    return magnitude * (std::sin(omega_ * t_rel + theta - phi) -
                        std::sin(theta - phi) * std::exp(-t_rel / tau));
  }
  double omega_ = 0.0;
};

FaultCurrent make_fault_current(double peak_voltage, Impedance source, double extra_r,
                                double extra_x, double fault_resistance, double omega) {
  Impedance total{source.r + extra_r + fault_resistance, source.x + extra_x};
  FaultCurrent f;
  f.magnitude = peak_voltage / total.magnitude();
  f.phi = total.angle();
  f.tau = total.x / (omega * total.r);
  f.omega_ = omega;
  return f;
}

void add_measurement_noise(Waveform& w, const ScenarioSpec& spec, const SynthConfig& cfg) {
  const double sigma = cfg.noise_rel_std * cfg.nominal_current_a;
  Rng rng(substream(spec.rng_seed, "noise"));
  for (auto& phase : w.phases) {
    for (double& sample : phase) sample += sigma * rng.normal();
  }
}

Waveform make_blank(const ScenarioSpec& spec, const SynthConfig& cfg) {
  Waveform w;
  const std::size_t n = cfg.n_samples();
  for (auto& phase : w.phases) phase.assign(n, 0.0);
  w.sampling_rate_hz = cfg.sampling_rate_hz;
  w.fault_start_index = cfg.fault_start_index();
  w.spec_id = spec.id;
  return w;
}

// Flux-clamp saturable CT: the secondary tracks the ratio current until the
// integrated burden volt-seconds hit the clamp, then collapses to zero until
// the ratio current reverses and the flux recovers.
class SaturableCt {
 public:
  SaturableCt(double turns_ratio, double burden_ohm, double saturation_flux_vs,
              double remanence_frac, double dt)
      : ratio_(turns_ratio), burden_(burden_ohm), clamp_(saturation_flux_vs), dt_(dt) {
    flux_ = std::isfinite(clamp_) ? remanence_frac * clamp_ : 0.0;
  }

  double step(double primary_current) {
    const double i2 = primary_current / ratio_;
    const double dflux = burden_ * i2 * dt_;
    if (saturated_) {
      const bool still_driven = (flux_ >= clamp_ && dflux >= 0.0) ||
                                (flux_ <= -clamp_ && dflux <= 0.0);
      if (still_driven) return 0.0;
      saturated_ = false;
    }
    flux_ += dflux;
    if (flux_ > clamp_) {
      flux_ = clamp_;
      saturated_ = true;
    } else if (flux_ < -clamp_) {
      flux_ = -clamp_;
      saturated_ = true;
    }
    return i2;
  }

 private:
  double ratio_, burden_, clamp_, dt_;
  double flux_ = 0.0;
  bool saturated_ = false;
};

}  // namespace

void SynthConfig::validate() const {
  if (system_frequency_hz <= 0.0 || sampling_rate_hz <= 0.0) {
    throw InvalidParameter("frequencies must be positive");
  }
  if (sampling_rate_hz < 40.0 * system_frequency_hz) {
    throw InvalidParameter(
        fmt::format("sampling_rate_hz {} below 40 x system frequency {}",
                    sampling_rate_hz, system_frequency_hz));
  }
  if (!(fault_start_s > 0.0 && fault_start_s < record_length_s)) {
    throw InvalidParameter(fmt::format("fault_start_s {} outside (0, {})",
                                       fault_start_s, record_length_s));
  }
  if (nominal_current_a <= 0.0) throw InvalidParameter("nominal_current_a must be positive");
  if (noise_rel_std < 0.0) throw InvalidParameter("noise_rel_std must be >= 0");
}

std::size_t SynthConfig::n_samples() const {
  return static_cast<std::size_t>(std::llround(record_length_s * sampling_rate_hz));
}

std::uint32_t SynthConfig::fault_start_index() const {
  return static_cast<std::uint32_t>(std::llround(fault_start_s * sampling_rate_hz));
}

double hif_current(double v_ph, double vp, double vn, double rp, double rn) {
  if (rp <= 0.0 || rn <= 0.0) {
    throw InvalidParameter(fmt::format("non-positive arc resistance (Rp={}, Rn={})", rp, rn));
  }
  if (!(vn < vp)) {
    throw InvalidParameter(fmt::format("dead band requires Vn < Vp (Vn={}, Vp={})", vn, vp));
  }
  if (v_ph > vp) return (v_ph - vp) / rp;
  if (v_ph < vn) return (v_ph - vn) / rn;
  return 0.0;
}

Waveform synthesize_hif(const ScenarioSpec& spec, const SynthConfig& cfg,
                        const HifModelParams& hif, HifTrace* trace) {
  if (spec.event_type != EventType::type2_hif) {
    throw ContractViolation(fmt::format("synthesize_hif on event type {}",
                                        to_string(spec.event_type)));
  }
  cfg.validate();
  const SystemModel sys;

  Waveform w = make_blank(spec, cfg);
  const std::size_t n = w.n_samples();
  const double dt = 1.0 / cfg.sampling_rate_hz;
  const double omega = kTwoPi * cfg.system_frequency_hz;
  const std::size_t k_fault = w.fault_start_index;

  int phase = 0;
  for (int p = 0; p < 3; ++p) {
    if (spec.faulted_phases[static_cast<std::size_t>(p)]) phase = p;
  }
  const double theta0 = spec.inception_angle_deg * kPi / 180.0 +
                        kPhaseOffsetRad[static_cast<std::size_t>(phase)];
  const double v_peak = sys.phase_peak_voltage_v * spec.condition.voltage_pu;

  // Source magnitudes, drawn once per scenario with the asymmetry gap enforced.
  Rng source_rng(substream(spec.rng_seed, "hif_v0"));
  const double v_nom = sys.phase_peak_voltage_v;
  const double vp0 = v_nom * source_rng.uniform(hif.vp_frac_min, hif.vp_frac_max);
  double vn_mag = v_nom * source_rng.uniform(hif.vn_frac_min, hif.vn_frac_max);
  while (std::abs(vp0 - vn_mag) < hif.min_source_gap_frac * v_nom) {
    vn_mag = v_nom * source_rng.uniform(hif.vn_frac_min, hif.vn_frac_max);
  }
  const double vn0 = -vn_mag;

  Rng jitter_rng(substream(spec.rng_seed, "hif_src"));
  Rng res_rng(substream(spec.rng_seed, "hif_res"));

  if (trace) {
    trace->vp0 = vp0;
    trace->vn0 = vn0;
    trace->v_phase.assign(n, 0.0);
    trace->vp_eff.assign(n, 0.0);
    trace->vn_eff.assign(n, 0.0);
    trace->rp.assign(n, 0.0);
    trace->rn.assign(n, 0.0);
    trace->current.assign(n, 0.0);
  }

  long long half_cycle = -1;
  long long segment = -1;
  double vp_eff = vp0, vn_eff = vn0;
  double rp = hif.rp_min_ohm, rn = hif.rn_min_ohm;

  auto& out = w.phases[static_cast<std::size_t>(phase)];
  for (std::size_t k = k_fault; k < n; ++k) {
    const double t_rel = static_cast<double>(k - k_fault) * dt;
    const double angle = omega * t_rel + theta0;
    const double v = v_peak * std::sin(angle);

    const auto h = static_cast<long long>(std::floor(angle / kPi + 1e-9));
    if (h != half_cycle) {
      half_cycle = h;
      vp_eff = vp0 * (1.0 + jitter_rng.uniform(-hif.source_jitter_rel, hif.source_jitter_rel));
      vn_eff = vn0 * (1.0 + jitter_rng.uniform(-hif.source_jitter_rel, hif.source_jitter_rel));
    }
    const auto seg = static_cast<long long>(
        std::floor(t_rel / hif.resistance_update_interval_s + 1e-9));
    if (seg != segment) {
      segment = seg;
      rp = res_rng.uniform(hif.rp_min_ohm, hif.rp_max_ohm);
      rn = res_rng.uniform(hif.rn_min_ohm, hif.rn_max_ohm);
    }

    const double i = hif_current(v, vp_eff, vn_eff, rp, rn);
    out[k] = i;
    if (trace) {
      trace->v_phase[k] = v;
      trace->vp_eff[k] = vp_eff;
      trace->vn_eff[k] = vn_eff;
      trace->rp[k] = rp;
      trace->rn[k] = rn;
      trace->current[k] = i;
    }
  }

  add_measurement_noise(w, spec, cfg);
  return w;
}

Waveform synthesize_internal(const ScenarioSpec& spec, const SynthConfig& cfg) {
  if (spec.event_type != EventType::type1_internal) {
    throw ContractViolation(fmt::format("synthesize_internal on event type {}",
                                        to_string(spec.event_type)));
  }
  cfg.validate();
  const SystemModel sys;

  Waveform w = make_blank(spec, cfg);
  const std::size_t n = w.n_samples();
  const double dt = 1.0 / cfg.sampling_rate_hz;
  const double omega = kTwoPi * cfg.system_frequency_hz;
  const std::size_t k_fault = w.fault_start_index;
  const double theta_inc = spec.inception_angle_deg * kPi / 180.0;

  const Impedance source = source_impedance(sys, spec.condition.mode, omega);
  const double v_peak = sys.phase_peak_voltage_v * spec.condition.voltage_pu;
  const FaultCurrent fault =
      make_fault_current(v_peak, source, 0.0, 0.0, spec.fault_resistance_ohm, omega);

  // Both CTs measure the fault current with opposite reference, so the
  // differential equals the fault current on the faulted phases.
  for (int p = 0; p < 3; ++p) {
    if (!spec.faulted_phases[static_cast<std::size_t>(p)]) continue;
    const double theta = theta_inc + kPhaseOffsetRad[static_cast<std::size_t>(p)];
    auto& out = w.phases[static_cast<std::size_t>(p)];
    for (std::size_t k = k_fault; k < n; ++k) {
      const double t_rel = static_cast<double>(k - k_fault) * dt;
      out[k] = fault.at(t_rel, theta);
    }
  }

  add_measurement_noise(w, spec, cfg);
  return w;
}

Waveform synthesize_external(const ScenarioSpec& spec, const SynthConfig& cfg,
                             const CtParams& ct) {
  if (spec.event_type != EventType::external_ct_sat) {
    throw ContractViolation(fmt::format("synthesize_external on event type {}",
                                        to_string(spec.event_type)));
  }
  cfg.validate();
  const SystemModel sys;

  Waveform w = make_blank(spec, cfg);
  const std::size_t n = w.n_samples();
  const double dt = 1.0 / cfg.sampling_rate_hz;
  const double omega = kTwoPi * cfg.system_frequency_hz;
  const std::size_t k_fault = w.fault_start_index;
  const double theta_inc = spec.inception_angle_deg * kPi / 180.0;

  const Impedance source = source_impedance(sys, spec.condition.mode, omega);
  const double v_peak = sys.phase_peak_voltage_v * spec.condition.voltage_pu;
  const FaultCurrent fault =
      make_fault_current(v_peak, source, sys.external_path_r_ohm, sys.external_path_x_ohm,
                         spec.fault_resistance_ohm, omega);
  const auto scales = load_scale(spec.condition.loading);

  for (int p = 0; p < 3; ++p) {
    const double theta = theta_inc + kPhaseOffsetRad[static_cast<std::size_t>(p)];
    const double i_load = cfg.nominal_current_a * scales[static_cast<std::size_t>(p)] *
                          spec.condition.voltage_pu;
    const bool faulted = spec.faulted_phases[static_cast<std::size_t>(p)];

    SaturableCt end1(ct.turns_ratio, ct.burden_end1_ohm, ct.saturation_flux_vs,
                     ct.remanence_frac, dt);
    SaturableCt end2(ct.turns_ratio, ct.burden_end2_ohm, ct.saturation_flux_vs,
                     ct.remanence_frac, dt);

    auto& out = w.phases[static_cast<std::size_t>(p)];
    for (std::size_t k = 0; k < n; ++k) {
      const double t_rel = (static_cast<double>(k) - static_cast<double>(k_fault)) * dt;
      double i_primary = i_load * std::sin(omega * t_rel + theta);
      if (faulted && k >= k_fault) i_primary += fault.at(t_rel, theta);
      // Through current: both ends carry the same primary; differential is
      // nonzero only when the two CTs saturate differently.
      const double i2_end1 = end1.step(i_primary);
      const double i2_end2 = end2.step(i_primary);
      out[k] = ct.turns_ratio * (i2_end1 - i2_end2);
    }
  }

  add_measurement_noise(w, spec, cfg);
  return w;
}

Waveform synthesize(const ScenarioSpec& spec, const SynthConfig& cfg,
                    const HifModelParams& hif, const CtParams& ct) {
  switch (spec.event_type) {
    case EventType::type1_internal: return synthesize_internal(spec, cfg);
    case EventType::type2_hif: return synthesize_hif(spec, cfg, hif);
    case EventType::external_ct_sat: return synthesize_external(spec, cfg, ct);
  }
  throw ContractViolation("unknown event type");
}

}  // namespace diffguard
