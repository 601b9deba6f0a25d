#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace diffguard {

enum class FaultType { LG, LLG, LL, LLLG, LLL, HIF_LG };
enum class Mode { grid_connected, islanded };
enum class Loading { balanced, unbalanced, low_voltage };
enum class ClassLabel { internal, external };
enum class EventType { type1_internal, type2_hif, external_ct_sat };

std::string to_string(FaultType);
std::string to_string(Mode);
std::string to_string(Loading);
std::string to_string(ClassLabel);
std::string to_string(EventType);
FaultType fault_type_from_string(std::string_view);
Mode mode_from_string(std::string_view);
Loading loading_from_string(std::string_view);
ClassLabel class_label_from_string(std::string_view);
EventType event_type_from_string(std::string_view);

struct OperatingCondition {
  Mode mode = Mode::grid_connected;
  Loading loading = Loading::balanced;
  double voltage_pu = 1.0;  // in [0.9, 1.0]
};

struct ScenarioSpec {
  std::uint32_t id = 0;
  ClassLabel class_label = ClassLabel::internal;
  EventType event_type = EventType::type1_internal;
  FaultType fault_type = FaultType::LG;
  double fault_resistance_ohm = 0.0;  // ignored for HIF events
  double inception_angle_deg = 0.0;   // [0, 360)
  std::array<bool, 3> faulted_phases{false, false, false};  // a, b, c
  OperatingCondition condition;
  std::uint64_t rng_seed = 0;

  std::string faulted_phases_string() const;
  int faulted_phase_count() const;
};

// Event matrix enumeration. Id blocks: external 0..999, type-1 internal
// 1000..1874, HIF 1875..2174, so the union of the three lists has unique ids.
std::vector<ScenarioSpec> enumerate_external(std::uint64_t global_seed);
std::vector<ScenarioSpec> enumerate_internal_type1(std::uint64_t global_seed);
std::vector<ScenarioSpec> enumerate_hif(std::uint64_t global_seed);
std::vector<ScenarioSpec> enumerate_all(std::uint64_t global_seed);

/// Stratified subsample (by event type, largest-remainder apportionment);
/// n = 0 or n >= specs.size() returns the input unchanged.
std::vector<ScenarioSpec> stratified_limit(const std::vector<ScenarioSpec>& specs,
                                           std::size_t n, std::uint64_t global_seed);

void write_manifest_csv(const std::filesystem::path& path,
                        const std::vector<ScenarioSpec>& specs);
std::vector<ScenarioSpec> read_manifest_csv(const std::filesystem::path& path);

}  // namespace diffguard
