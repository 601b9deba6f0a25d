#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <set>

#include "diffguard/scenario.hpp"

using namespace diffguard;

namespace {

bool specs_equal(const ScenarioSpec& a, const ScenarioSpec& b) {
  return a.id == b.id && a.class_label == b.class_label && a.event_type == b.event_type &&
         a.fault_type == b.fault_type && a.fault_resistance_ohm == b.fault_resistance_ohm &&
         a.inception_angle_deg == b.inception_angle_deg &&
         a.faulted_phases == b.faulted_phases && a.condition.mode == b.condition.mode &&
         a.condition.loading == b.condition.loading &&
         a.condition.voltage_pu == b.condition.voltage_pu && a.rng_seed == b.rng_seed;
}

std::size_t count_mode(const std::vector<ScenarioSpec>& specs, Mode mode) {
  std::size_t n = 0;
  for (const auto& s : specs) n += s.condition.mode == mode;
  return n;
}

}  // namespace

TEST_CASE("external enumeration matches the parameter matrix") {
  const auto specs = enumerate_external(42);
  REQUIRE(specs.size() == 1000);
  CHECK(count_mode(specs, Mode::grid_connected) == 400);
  CHECK(count_mode(specs, Mode::islanded) == 600);

  const std::set<double> allowed_r = {0.01, 0.1, 1.0, 10.0};
  std::set<double> angles;
  std::set<std::string> combos;
  for (const auto& s : specs) {
    CHECK(s.class_label == ClassLabel::external);
    CHECK(s.event_type == EventType::external_ct_sat);
    CHECK(allowed_r.contains(s.fault_resistance_ohm));
    CHECK(s.fault_type != FaultType::HIF_LG);
    angles.insert(s.inception_angle_deg);
    combos.insert(to_string(s.fault_type) + "/" + std::to_string(s.fault_resistance_ohm) +
                  "/" + std::to_string(s.inception_angle_deg) + "/" +
                  to_string(s.condition.mode) + "/" + to_string(s.condition.loading));
  }
  CHECK(angles.size() == 10);           // evenly spaced 0..324
  CHECK(*angles.begin() == 0.0);
  CHECK(combos.size() == 1000);         // exact Cartesian product, no repeats
}

TEST_CASE("type-1 internal enumeration matches the parameter matrix") {
  const auto specs = enumerate_internal_type1(42);
  REQUIRE(specs.size() == 875);
  CHECK(count_mode(specs, Mode::grid_connected) == 350);
  CHECK(count_mode(specs, Mode::islanded) == 525);

  std::set<double> resistances, angles;
  for (const auto& s : specs) {
    CHECK(s.class_label == ClassLabel::internal);
    CHECK(s.event_type == EventType::type1_internal);
    resistances.insert(s.fault_resistance_ohm);
    angles.insert(s.inception_angle_deg);
  }
  CHECK(resistances == std::set<double>{0.01, 0.1, 1.0, 10.0, 20.0});
  CHECK(angles.size() == 7);

  // 20 ohm never appears in the external set
  for (const auto& s : enumerate_external(42)) {
    CHECK(s.fault_resistance_ohm != 20.0);
  }
  CHECK(5 * 5 * 7 * 2 == 350);
}

TEST_CASE("HIF enumeration matches the parameter matrix") {
  const auto specs = enumerate_hif(42);
  REQUIRE(specs.size() == 300);
  CHECK(count_mode(specs, Mode::grid_connected) == 120);
  CHECK(count_mode(specs, Mode::islanded) == 180);

  std::set<double> instants;
  for (const auto& s : specs) {
    CHECK(s.fault_type == FaultType::HIF_LG);
    CHECK(s.event_type == EventType::type2_hif);
    CHECK(s.class_label == ClassLabel::internal);
    CHECK(s.faulted_phase_count() == 1);
    instants.insert(s.inception_angle_deg);
  }
  CHECK(instants.size() == 20);
}

TEST_CASE("union of the three enumerations is the 2175-event population") {
  const auto all = enumerate_all(42);
  REQUIRE(all.size() == 2175);
  std::set<std::uint32_t> ids;
  std::size_t internal = 0;
  for (const auto& s : all) {
    ids.insert(s.id);
    internal += s.class_label == ClassLabel::internal;
  }
  CHECK(ids.size() == 2175);  // no two specs share an id
  CHECK(internal == 1175);
}

TEST_CASE("enumeration is a pure function of the seed") {
  const auto a = enumerate_all(0);
  const auto b = enumerate_all(0);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(specs_equal(a[i], b[i]));
  }
  const auto c = enumerate_all(1);
  bool any_seed_diff = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    any_seed_diff |= a[i].rng_seed != c[i].rng_seed;
  }
  CHECK(any_seed_diff);
}

TEST_CASE("operating-condition invariants") {
  for (const auto& s : enumerate_all(9)) {
    if (s.condition.loading == Loading::low_voltage) {
      CHECK(s.condition.mode == Mode::islanded);
      CHECK(s.condition.voltage_pu >= 0.90);
      CHECK(s.condition.voltage_pu < 1.0);
    } else {
      CHECK(s.condition.voltage_pu == 1.0);
    }
    if (s.event_type == EventType::type2_hif) {
      CHECK(s.fault_type == FaultType::HIF_LG);
    } else {
      CHECK(s.fault_type != FaultType::HIF_LG);
    }
  }
}

TEST_CASE("stratified limit keeps class proportions") {
  const auto all = enumerate_all(42);
  const auto sampled = stratified_limit(all, 10, 42);
  REQUIRE(sampled.size() == 10);
  std::size_t internal = 0, type1 = 0, hif = 0, external = 0;
  for (const auto& s : sampled) {
    internal += s.class_label == ClassLabel::internal;
    type1 += s.event_type == EventType::type1_internal;
    hif += s.event_type == EventType::type2_hif;
    external += s.event_type == EventType::external_ct_sat;
  }
  // largest-remainder apportionment of (875, 300, 1000)/2175 over 10 slots:
  // floors 4/1/4, the spare slot goes to the largest remainder (external)
  CHECK(type1 == 4);
  CHECK(hif == 1);
  CHECK(external == 5);
  CHECK(internal == 5);

  // ids stay unique and sorted; limit 0 and oversized limits are pass-through
  CHECK(stratified_limit(all, 0, 42).size() == all.size());
  CHECK(stratified_limit(all, 5000, 42).size() == all.size());
}

TEST_CASE("manifest csv round trip") {
  const auto specs = stratified_limit(enumerate_all(3), 40, 3);
  const auto path = std::filesystem::temp_directory_path() / "diffguard_manifest_test.csv";
  write_manifest_csv(path, specs);
  const auto back = read_manifest_csv(path);
  REQUIRE(back.size() == specs.size());
  for (std::size_t i = 0; i < specs.size(); ++i) {
    CHECK(specs_equal(specs[i], back[i]));
  }
  std::filesystem::remove(path);
}
