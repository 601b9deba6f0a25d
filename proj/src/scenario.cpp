#include "diffguard/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <fmt/format.h>

#include "diffguard/errors.hpp"
#include "diffguard/rng.hpp"
#include "text_io.hpp"

namespace diffguard {

namespace {

constexpr std::uint32_t kExternalIdBase = 0;
constexpr std::uint32_t kType1IdBase = 1000;
constexpr std::uint32_t kHifIdBase = 1875;

// Phases carrying fault current, by fault type.
std::array<bool, 3> phases_for(FaultType ft) {
  switch (ft) {
    case FaultType::LG:
    case FaultType::HIF_LG:
      return {true, false, false};
    case FaultType::LLG:
    case FaultType::LL:
      return {true, true, false};
    case FaultType::LLLG:
    case FaultType::LLL:
      return {true, true, true};
  }
  return {true, false, false};
}

// Grid-connected admits {balanced, unbalanced}; islanded adds low_voltage.
const std::array<std::pair<Mode, Loading>, 5> kConditionCases = {{
    {Mode::grid_connected, Loading::balanced},
    {Mode::grid_connected, Loading::unbalanced},
    {Mode::islanded, Loading::balanced},
    {Mode::islanded, Loading::unbalanced},
    {Mode::islanded, Loading::low_voltage},
}};

// Low-voltage scenarios draw from a 10-step grid over [0.90, 0.99] pu.
double draw_voltage_pu(Loading loading, std::uint64_t rng_seed) {
  if (loading != Loading::low_voltage) return 1.0;
  Rng rng(substream(rng_seed, "pu"));
  return 0.90 + 0.01 * static_cast<double>(rng.below(10));
}

ScenarioSpec make_spec(std::uint32_t id, std::uint64_t global_seed, ClassLabel label,
                       EventType event_type, FaultType ft, double resistance,
                       double angle_deg, std::array<bool, 3> phases, Mode mode,
                       Loading loading) {
  ScenarioSpec s;
  s.id = id;
  s.class_label = label;
  s.event_type = event_type;
  s.fault_type = ft;
  s.fault_resistance_ohm = resistance;
  s.inception_angle_deg = angle_deg;
  s.faulted_phases = phases;
  s.condition.mode = mode;
  s.condition.loading = loading;
  s.rng_seed = mix_seed(global_seed, id);
  s.condition.voltage_pu = draw_voltage_pu(loading, s.rng_seed);
  return s;
}

}  // namespace

std::string ScenarioSpec::faulted_phases_string() const {
  std::string s;
  const char* names = "abc";
  for (int i = 0; i < 3; ++i) {
    if (faulted_phases[static_cast<std::size_t>(i)]) s += names[i];
  }
  return s;
}

int ScenarioSpec::faulted_phase_count() const {
  return static_cast<int>(faulted_phases[0]) + static_cast<int>(faulted_phases[1]) +
         static_cast<int>(faulted_phases[2]);
}

std::vector<ScenarioSpec> enumerate_external(std::uint64_t global_seed) {
  const std::array<FaultType, 5> types = {FaultType::LG, FaultType::LLG, FaultType::LL,
                                          FaultType::LLLG, FaultType::LLL};
  const std::array<double, 4> resistances = {0.01, 0.1, 1.0, 10.0};
  std::vector<ScenarioSpec> out;
  out.reserve(1000);
  std::uint32_t id = kExternalIdBase;
  for (FaultType ft : types) {
    for (double r : resistances) {
      for (int a = 0; a < 10; ++a) {
        const double angle = 360.0 * a / 10.0;
        for (const auto& [mode, loading] : kConditionCases) {
          out.push_back(make_spec(id++, global_seed, ClassLabel::external,
                                  EventType::external_ct_sat, ft, r, angle,
                                  phases_for(ft), mode, loading));
        }
      }
    }
  }
  return out;
}

std::vector<ScenarioSpec> enumerate_internal_type1(std::uint64_t global_seed) {
  const std::array<FaultType, 5> types = {FaultType::LG, FaultType::LLG, FaultType::LL,
                                          FaultType::LLLG, FaultType::LLL};
  const std::array<double, 5> resistances = {0.01, 0.1, 1.0, 10.0, 20.0};
  std::vector<ScenarioSpec> out;
  out.reserve(875);
  std::uint32_t id = kType1IdBase;
  for (FaultType ft : types) {
    for (double r : resistances) {
      for (int a = 0; a < 7; ++a) {
        const double angle = 360.0 * a / 7.0;
        for (const auto& [mode, loading] : kConditionCases) {
          out.push_back(make_spec(id++, global_seed, ClassLabel::internal,
                                  EventType::type1_internal, ft, r, angle,
                                  phases_for(ft), mode, loading));
        }
      }
    }
  }
  return out;
}

std::vector<ScenarioSpec> enumerate_hif(std::uint64_t global_seed) {
  std::vector<ScenarioSpec> out;
  out.reserve(300);
  std::uint32_t id = kHifIdBase;
  for (int phase = 0; phase < 3; ++phase) {
    std::array<bool, 3> phases{false, false, false};
    phases[static_cast<std::size_t>(phase)] = true;
    // 20 fault-inception instants evenly spaced across one fundamental cycle,
    // encoded as point-on-wave angles.
    for (int inst = 0; inst < 20; ++inst) {
      const double angle = 360.0 * inst / 20.0;
      for (const auto& [mode, loading] : kConditionCases) {
        out.push_back(make_spec(id++, global_seed, ClassLabel::internal,
                                EventType::type2_hif, FaultType::HIF_LG,
                                0.0, angle, phases, mode, loading));
      }
    }
  }
  return out;
}

std::vector<ScenarioSpec> enumerate_all(std::uint64_t global_seed) {
  std::vector<ScenarioSpec> all = enumerate_external(global_seed);
  auto type1 = enumerate_internal_type1(global_seed);
  auto hif = enumerate_hif(global_seed);
  all.insert(all.end(), type1.begin(), type1.end());
  all.insert(all.end(), hif.begin(), hif.end());
  return all;
}

std::vector<ScenarioSpec> stratified_limit(const std::vector<ScenarioSpec>& specs,
                                           std::size_t n, std::uint64_t global_seed) {
  if (n == 0 || n >= specs.size()) return specs;

  std::map<EventType, std::vector<std::size_t>> strata;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    strata[specs[i].event_type].push_back(i);
  }

  // Largest-remainder apportionment of n across event types.
  struct Share {
    EventType type;
    std::size_t take;
    double remainder;
  };
  std::vector<Share> shares;
  std::size_t assigned = 0;
  for (const auto& [type, idx] : strata) {
    const double exact = static_cast<double>(n) * static_cast<double>(idx.size()) /
                         static_cast<double>(specs.size());
    const auto take = static_cast<std::size_t>(std::floor(exact));
    shares.push_back({type, take, exact - std::floor(exact)});
    assigned += take;
  }
  std::sort(shares.begin(), shares.end(), [](const Share& a, const Share& b) {
    if (a.remainder != b.remainder) return a.remainder > b.remainder;
    return static_cast<int>(a.type) < static_cast<int>(b.type);
  });
  for (std::size_t i = 0; assigned < n; ++i, ++assigned) {
    shares[i % shares.size()].take += 1;
  }

  std::vector<std::size_t> chosen;
  for (const auto& share : shares) {
    auto idx = strata.at(share.type);
    Rng rng(substream(global_seed, "limit", static_cast<std::uint64_t>(share.type)));
    for (std::size_t i = idx.size(); i > 1; --i) {  // Fisher-Yates
      std::swap(idx[i - 1], idx[rng.below(i)]);
    }
    chosen.insert(chosen.end(), idx.begin(),
                  idx.begin() + static_cast<std::ptrdiff_t>(std::min(share.take, idx.size())));
  }
  std::sort(chosen.begin(), chosen.end());

  std::vector<ScenarioSpec> out;
  out.reserve(chosen.size());
  for (std::size_t i : chosen) out.push_back(specs[i]);
  return out;
}

std::string to_string(FaultType t) {
  switch (t) {
    case FaultType::LG: return "LG";
    case FaultType::LLG: return "LLG";
    case FaultType::LL: return "LL";
    case FaultType::LLLG: return "LLLG";
    case FaultType::LLL: return "LLL";
    case FaultType::HIF_LG: return "HIF_LG";
  }
  return "?";
}

std::string to_string(Mode m) {
  return m == Mode::grid_connected ? "grid_connected" : "islanded";
}

std::string to_string(Loading l) {
  switch (l) {
    case Loading::balanced: return "balanced";
    case Loading::unbalanced: return "unbalanced";
    case Loading::low_voltage: return "low_voltage";
  }
  return "?";
}

std::string to_string(ClassLabel c) {
  return c == ClassLabel::internal ? "internal" : "external";
}

std::string to_string(EventType e) {
  switch (e) {
    case EventType::type1_internal: return "type1_internal";
    case EventType::type2_hif: return "type2_hif";
    case EventType::external_ct_sat: return "external_ct_sat";
  }
  return "?";
}

FaultType fault_type_from_string(std::string_view s) {
  if (s == "LG") return FaultType::LG;
  if (s == "LLG") return FaultType::LLG;
  if (s == "LL") return FaultType::LL;
  if (s == "LLLG") return FaultType::LLLG;
  if (s == "LLL") return FaultType::LLL;
  if (s == "HIF_LG") return FaultType::HIF_LG;
  throw InvalidInput(fmt::format("unknown fault type '{}'", s));
}

Mode mode_from_string(std::string_view s) {
  if (s == "grid_connected") return Mode::grid_connected;
  if (s == "islanded") return Mode::islanded;
  throw InvalidInput(fmt::format("unknown mode '{}'", s));
}

Loading loading_from_string(std::string_view s) {
  if (s == "balanced") return Loading::balanced;
  if (s == "unbalanced") return Loading::unbalanced;
  if (s == "low_voltage") return Loading::low_voltage;
  throw InvalidInput(fmt::format("unknown loading '{}'", s));
}

ClassLabel class_label_from_string(std::string_view s) {
  if (s == "internal") return ClassLabel::internal;
  if (s == "external") return ClassLabel::external;
  throw InvalidInput(fmt::format("unknown class label '{}'", s));
}

EventType event_type_from_string(std::string_view s) {
  if (s == "type1_internal") return EventType::type1_internal;
  if (s == "type2_hif") return EventType::type2_hif;
  if (s == "external_ct_sat") return EventType::external_ct_sat;
  throw InvalidInput(fmt::format("unknown event type '{}'", s));
}

void write_manifest_csv(const std::filesystem::path& path,
                        const std::vector<ScenarioSpec>& specs) {
  std::string buf =
      "id,class_label,event_type,fault_type,fault_resistance_ohm,"
      "inception_angle_deg,faulted_phases,mode,loading,voltage_pu,rng_seed\n";
  for (const auto& s : specs) {
    buf += fmt::format("{},{},{},{},{},{},{},{},{},{},{}\n", s.id,
                       to_string(s.class_label), to_string(s.event_type),
                       to_string(s.fault_type), s.fault_resistance_ohm,
                       s.inception_angle_deg, s.faulted_phases_string(),
                       to_string(s.condition.mode), to_string(s.condition.loading),
                       s.condition.voltage_pu, s.rng_seed);
  }
  detail::write_all(path, buf);
}

std::vector<ScenarioSpec> read_manifest_csv(const std::filesystem::path& path) {
  auto in = detail::open_in(path);
  std::string line;
  if (!std::getline(in, line)) throw InvalidInput(fmt::format("{}: empty manifest", path.string()));
  std::vector<ScenarioSpec> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = detail::split_csv_line(line);
    if (f.size() != 11) {
      throw InvalidInput(fmt::format("{}: bad manifest row '{}'", path.string(), line));
    }
    ScenarioSpec s;
    s.id = static_cast<std::uint32_t>(detail::parse_u64(f[0], "id"));
    s.class_label = class_label_from_string(f[1]);
    s.event_type = event_type_from_string(f[2]);
    s.fault_type = fault_type_from_string(f[3]);
    s.fault_resistance_ohm = detail::parse_double(f[4], "fault_resistance_ohm");
    s.inception_angle_deg = detail::parse_double(f[5], "inception_angle_deg");
    s.faulted_phases = {f[6].find('a') != std::string::npos,
                        f[6].find('b') != std::string::npos,
                        f[6].find('c') != std::string::npos};
    s.condition.mode = mode_from_string(f[7]);
    s.condition.loading = loading_from_string(f[8]);
    s.condition.voltage_pu = detail::parse_double(f[9], "voltage_pu");
    s.rng_seed = detail::parse_u64(f[10], "rng_seed");
    out.push_back(s);
  }
  return out;
}

}  // namespace diffguard
