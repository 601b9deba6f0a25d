#include "diffguard/waveform_io.hpp"

#include <cstring>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "diffguard/errors.hpp"
#include "text_io.hpp"

namespace diffguard {

namespace {

constexpr char kMagic[4] = {'D', 'G', 'W', '1'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::string& buf, std::uint32_t v) {
  char bytes[4];
  std::memcpy(bytes, &v, 4);
  buf.append(bytes, 4);
}

void put_f64(std::string& buf, double v) {
  char bytes[8];
  std::memcpy(bytes, &v, 8);
  buf.append(bytes, 8);
}

std::uint32_t get_u32(const char*& p) {
  std::uint32_t v;
  std::memcpy(&v, p, 4);
  p += 4;
  return v;
}

double get_f64(const char*& p) {
  double v;
  std::memcpy(&v, p, 8);
  p += 8;
  return v;
}

}  // namespace

void write_waveform_bin(const std::filesystem::path& path, const Waveform& w) {
  std::string buf;
  const auto n = static_cast<std::uint32_t>(w.n_samples());
  buf.reserve(24 + 8 + 3 * 8 * n);
  buf.append(kMagic, 4);
  put_u32(buf, kVersion);
  put_u32(buf, w.spec_id);
  put_u32(buf, n);
  put_u32(buf, w.fault_start_index);
  put_f64(buf, w.sampling_rate_hz);
  for (const auto& phase : w.phases) {
    buf.append(reinterpret_cast<const char*>(phase.data()), 8 * phase.size());
  }
  detail::write_all(path, buf);
}

Waveform read_waveform_bin(const std::filesystem::path& path) {
  const std::string buf = detail::read_all(path);
  if (buf.size() < 24 || std::memcmp(buf.data(), kMagic, 4) != 0) {
    throw InvalidInput(fmt::format("{}: not a DGW1 waveform file", path.string()));
  }
  const char* p = buf.data() + 4;
  const std::uint32_t version = get_u32(p);
  if (version != kVersion) {
    throw InvalidInput(fmt::format("{}: unsupported version {}", path.string(), version));
  }
  Waveform w;
  w.spec_id = get_u32(p);
  const std::uint32_t n = get_u32(p);
  w.fault_start_index = get_u32(p);
  w.sampling_rate_hz = get_f64(p);
  if (buf.size() != 24 + 3ull * 8ull * n) {
    throw InvalidInput(fmt::format("{}: truncated waveform payload", path.string()));
  }
  for (auto& phase : w.phases) {
    phase.resize(n);
    std::memcpy(phase.data(), p, 8ull * n);
    p += 8ull * n;
  }
  return w;
}

void write_waveform_csv(const std::filesystem::path& path, const Waveform& w) {
  std::string buf = "t,ia,ib,ic\n";
  const double dt = 1.0 / w.sampling_rate_hz;
  for (std::size_t k = 0; k < w.n_samples(); ++k) {
    buf += fmt::format("{},{},{},{}\n", static_cast<double>(k) * dt, w.phases[0][k],
                       w.phases[1][k], w.phases[2][k]);
  }
  detail::write_all(path, buf);
}

Waveform read_waveform_csv(const std::filesystem::path& path, double sampling_rate_hz,
                           std::uint32_t fault_start_index, std::uint32_t spec_id) {
  auto in = detail::open_in(path);
  std::string line;
  if (!std::getline(in, line)) throw InvalidInput(fmt::format("{}: empty file", path.string()));
  Waveform w;
  w.sampling_rate_hz = sampling_rate_hz;
  w.fault_start_index = fault_start_index;
  w.spec_id = spec_id;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = detail::split_csv_line(line);
    if (f.size() != 4) throw InvalidInput(fmt::format("{}: bad row '{}'", path.string(), line));
    w.phases[0].push_back(detail::parse_double(f[1], "ia"));
    w.phases[1].push_back(detail::parse_double(f[2], "ib"));
    w.phases[2].push_back(detail::parse_double(f[3], "ic"));
  }
  return w;
}

void write_sidecar_json(const std::filesystem::path& path, const ScenarioSpec& spec,
                        const Waveform& w, std::string_view format) {
  nlohmann::json j;
  j["spec"] = {
      {"id", spec.id},
      {"class_label", to_string(spec.class_label)},
      {"event_type", to_string(spec.event_type)},
      {"fault_type", to_string(spec.fault_type)},
      {"fault_resistance_ohm", spec.fault_resistance_ohm},
      {"inception_angle_deg", spec.inception_angle_deg},
      {"faulted_phases", spec.faulted_phases_string()},
      {"mode", to_string(spec.condition.mode)},
      {"loading", to_string(spec.condition.loading)},
      {"voltage_pu", spec.condition.voltage_pu},
      {"rng_seed", spec.rng_seed},
  };
  j["sampling_rate_hz"] = w.sampling_rate_hz;
  j["fault_start_index"] = w.fault_start_index;
  j["n_samples"] = w.n_samples();
  j["format"] = std::string(format);
  detail::write_all(path, j.dump(2) + "\n");
}

std::filesystem::path waveform_path(const std::filesystem::path& dataset_dir,
                                    const ScenarioSpec& spec, std::string_view format) {
  return dataset_dir / to_string(spec.class_label) /
         fmt::format("{}.{}", spec.id, format == "csv" ? "csv" : "bin");
}

Waveform load_waveform(const std::filesystem::path& dataset_dir, const ScenarioSpec& spec) {
  const auto bin = waveform_path(dataset_dir, spec, "bin");
  if (std::filesystem::exists(bin)) return read_waveform_bin(bin);

  const auto csv = waveform_path(dataset_dir, spec, "csv");
  if (std::filesystem::exists(csv)) {
    const auto sidecar = csv.parent_path() / fmt::format("{}.json", spec.id);
    const auto meta = nlohmann::json::parse(detail::read_all(sidecar));
    return read_waveform_csv(csv, meta.at("sampling_rate_hz").get<double>(),
                             meta.at("fault_start_index").get<std::uint32_t>(), spec.id);
  }
  throw IoError(fmt::format("waveform for scenario {} not found under {}", spec.id,
                            dataset_dir.string()));
}

}  // namespace diffguard
