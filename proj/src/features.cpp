#include "diffguard/features.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "diffguard/errors.hpp"
#include "text_io.hpp"

namespace diffguard {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;

struct Moments {
  double mean = 0.0, m2 = 0.0, m3 = 0.0, m4 = 0.0;
};

Moments central_moments(std::span<const double> y) {
  Moments m;
  const auto n = static_cast<double>(y.size());
  for (double v : y) m.mean += v;
  m.mean /= n;
  for (double v : y) {
    const double d = v - m.mean;
    const double d2 = d * d;
    m.m2 += d2;
    m.m3 += d2 * d;
    m.m4 += d2 * d2;
  }
  m.m2 /= n;
  m.m3 /= n;
  m.m4 /= n;
  return m;
}

double median_of(std::span<const double> y) {
  std::vector<double> tmp(y.begin(), y.end());
  std::sort(tmp.begin(), tmp.end());
  const std::size_t n = tmp.size();
  if (n % 2 == 1) return tmp[n / 2];
  return 0.5 * (tmp[n / 2 - 1] + tmp[n / 2]);
}

// Lag-corrected sample autocorrelation: the overlap average over W - lag
// terms divided by the variance, so a perfectly periodic signal scores ~1
// at its period regardless of the window length.
double autocorrelation(std::span<const double> y, std::size_t lag, double mean, double m2) {
  if (lag >= y.size() || m2 <= 1e-300) return 0.0;
  double num = 0.0;
  for (std::size_t k = 0; k + lag < y.size(); ++k) {
    num += (y[k] - mean) * (y[k + lag] - mean);
  }
  return num / (static_cast<double>(y.size() - lag) * m2);
}

/// Amplitude of the h-th harmonic of f0 via a single-frequency DFT.
double harmonic_magnitude(std::span<const double> y, double sampling_rate_hz, double freq_hz) {
  const double w = kTwoPi * freq_hz / sampling_rate_hz;
  double re = 0.0, im = 0.0;
  for (std::size_t k = 0; k < y.size(); ++k) {
    re += y[k] * std::cos(w * static_cast<double>(k));
    im += y[k] * std::sin(w * static_cast<double>(k));
  }
  return 2.0 / static_cast<double>(y.size()) * std::hypot(re, im);
}

double histogram_entropy_bits(std::span<const double> y, int bins) {
  const auto [lo_it, hi_it] = std::minmax_element(y.begin(), y.end());
  const double lo = *lo_it, hi = *hi_it;
  if (!(hi > lo)) return 0.0;  // single-amplitude signal occupies one bin
  std::vector<std::size_t> counts(static_cast<std::size_t>(bins), 0);
  const double inv_width = static_cast<double>(bins) / (hi - lo);
  for (double v : y) {
    auto b = static_cast<std::size_t>((v - lo) * inv_width);
    if (b >= counts.size()) b = counts.size() - 1;
    counts[b] += 1;
  }
  double h = 0.0;
  const auto n = static_cast<double>(y.size());
  for (std::size_t c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / n;
    h -= p * std::log2(p);
  }
  return h;
}

/// Approximate entropy, m = 2, Chebyshev distance, self-matches included.
double approximate_entropy(std::span<const double> y, double r) {
  const std::size_t n = y.size();
  auto phi = [&](std::size_t m) {
    const std::size_t count = n - m + 1;
    double sum_log = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
      std::size_t matches = 0;
      for (std::size_t j = 0; j < count; ++j) {
        double dist = 0.0;
        for (std::size_t u = 0; u < m; ++u) {
          dist = std::max(dist, std::abs(y[i + u] - y[j + u]));
          if (dist > r) break;
        }
        if (dist <= r) ++matches;
      }
      sum_log += std::log(static_cast<double>(matches) / static_cast<double>(count));
    }
    return sum_log / static_cast<double>(count);
  };
  if (n < 4) return 0.0;
  return phi(2) - phi(3);
}

}  // namespace

void WaveletParams::validate() const {
  if (scales_s.empty()) throw InvalidParameter("scale_set is empty");
  double prev = 0.0;
  for (double p : scales_s) {
    if (p <= 0.0) throw InvalidParameter("wavelet scales must be positive");
    if (p <= prev) throw InvalidParameter("scale_set must be strictly increasing");
    prev = p;
  }
  if (shift_stride_samples < 1) throw InvalidParameter("shift_stride_samples must be >= 1");
}

double mexican_hat(double t, double p, double q) {
  if (p <= 0.0) throw InvalidParameter(fmt::format("scale p must be positive (got {})", p));
  const double u = (t - q) / p;
  const double u2 = u * u;
  return 2.0 / (std::sqrt(3.0 * p) * std::pow(kPi, 0.25)) * (1.0 - u2) * std::exp(-0.5 * u2);
}

double mexican_hat_discrete_mean_residual(double p, double sampling_rate_hz) {
  const double dt = 1.0 / sampling_rate_hz;
  const auto kmax = static_cast<long long>(std::floor(5.0 * p * sampling_rate_hz + 1e-9));
  double sum = 0.0;
  for (long long k = -kmax; k <= kmax; ++k) {
    sum += mexican_hat(static_cast<double>(k) * dt, p, 0.0);
  }
  return std::abs(sum * dt);
}

double cwt_coefficient(std::span<const double> y, double sampling_rate_hz, double p, double q) {
  if (y.empty()) throw InvalidInput("cwt on empty signal");
  const double dt = 1.0 / sampling_rate_hz;
  double sum = 0.0;
  for (std::size_t k = 0; k < y.size(); ++k) {
    sum += y[k] * mexican_hat(static_cast<double>(k) * dt, p, q);
  }
  return sum * dt;
}

CwtResult cwt(std::span<const double> y, double sampling_rate_hz, const WaveletParams& params) {
  if (y.empty()) throw InvalidInput("cwt on empty signal");
  params.validate();

  const double dt = 1.0 / sampling_rate_hz;
  const std::size_t n = y.size();
  const std::size_t stride = static_cast<std::size_t>(params.shift_stride_samples);
  const std::size_t n_shifts = (n - 1) / stride + 1;

  CwtResult result;
  result.scales_s = params.scales_s;
  result.shift_times_s.resize(n_shifts);
  for (std::size_t j = 0; j < n_shifts; ++j) {
    result.shift_times_s[j] = static_cast<double>(j * stride) * dt;
  }
  result.coeff.assign(params.scales_s.size(), std::vector<double>(n_shifts, 0.0));
  result.flagged.assign(params.scales_s.size(), std::vector<char>(n_shifts, 0));

  const double t_end = static_cast<double>(n - 1) * dt;
  std::vector<double> table(2 * n - 1);
  for (std::size_t i = 0; i < params.scales_s.size(); ++i) {
    const double p = params.scales_s[i];
    // psi sampled at integer offsets; the coefficient is a plain Riemann sum
    // over every supplied sample.
    for (std::size_t k = 0; k < table.size(); ++k) {
      const auto offset = static_cast<double>(static_cast<long long>(k) -
                                              static_cast<long long>(n - 1));
      table[k] = mexican_hat(offset * dt, p, 0.0);
    }
    const double support = 5.0 * p;
    for (std::size_t j = 0; j < n_shifts; ++j) {
      const double q = result.shift_times_s[j];
      const auto base = static_cast<std::ptrdiff_t>(n - 1) -
                        static_cast<std::ptrdiff_t>(j * stride);
      double sum = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        sum += y[k] * table[static_cast<std::size_t>(base + static_cast<std::ptrdiff_t>(k))];
      }
      result.coeff[i][j] = sum * dt;
      // Flag coefficients whose truncated support exits the signal: their
      // value mixes in the missing-tail error, so summaries skip them.
      result.flagged[i][j] =
          (q - support < -0.5 * dt || q + support > t_end + 0.5 * dt) ? 1 : 0;
    }
  }
  return result;
}

std::vector<std::string> feature_schema(const WaveletParams& params) {
  static const char* kPhases[3] = {"ia", "ib", "ic"};
  std::vector<std::string> names;
  for (const char* ph : kPhases) {
    for (const char* stat : {"min", "max", "mean", "median", "std", "rms", "skewness",
                             "kurtosis", "acorr_lag1", "acorr_half_cycle", "acorr_one_cycle"}) {
      names.push_back(fmt::format("{}_{}", ph, stat));
    }
    for (int h = 1; h <= 10; ++h) names.push_back(fmt::format("{}_fft_h{}", ph, h));
    names.push_back(fmt::format("{}_entropy", ph));
    names.push_back(fmt::format("{}_apen", ph));
    for (std::size_t s = 0; s < params.scales_s.size(); ++s) {
      names.push_back(fmt::format("{}_cwt_max_s{}", ph, s + 1));
      names.push_back(fmt::format("{}_cwt_energy_s{}", ph, s + 1));
    }
  }
  return names;
}

FeatureVector extract_features(const Waveform& w, const WaveletParams& params,
                               double system_frequency_hz) {
  params.validate();
  const double fs = w.sampling_rate_hz;
  const auto window_len = static_cast<std::size_t>(
      std::llround(2.0 * fs / system_frequency_hz));
  const std::size_t start = w.fault_start_index;
  if (start + window_len > w.n_samples()) {
    throw InvalidInput(fmt::format(
        "analysis window [{}, {}) exceeds record of {} samples", start,
        start + window_len, w.n_samples()));
  }

  FeatureVector fv;
  fv.spec_id = w.spec_id;
  fv.values.reserve(feature_schema(params).size());

  const auto half_cycle = static_cast<std::size_t>(std::llround(fs / (2.0 * system_frequency_hz)));
  const auto one_cycle = static_cast<std::size_t>(std::llround(fs / system_frequency_hz));

  for (const auto& phase : w.phases) {
    const std::span<const double> y(phase.data() + start, window_len);

    const auto [lo_it, hi_it] = std::minmax_element(y.begin(), y.end());
    const Moments m = central_moments(y);
    const double stdev = std::sqrt(m.m2);
    double rms = 0.0;
    for (double v : y) rms += v * v;
    rms = std::sqrt(rms / static_cast<double>(y.size()));
    const double skew = m.m2 > 1e-24 ? m.m3 / std::pow(m.m2, 1.5) : 0.0;
    const double kurt = m.m2 > 1e-24 ? m.m4 / (m.m2 * m.m2) - 3.0 : 0.0;
    fv.values.push_back(*lo_it);
    fv.values.push_back(*hi_it);
    fv.values.push_back(m.mean);
    fv.values.push_back(median_of(y));
    fv.values.push_back(stdev);
    fv.values.push_back(rms);
    fv.values.push_back(skew);
    fv.values.push_back(kurt);
    fv.values.push_back(autocorrelation(y, 1, m.mean, m.m2));
    fv.values.push_back(autocorrelation(y, half_cycle, m.mean, m.m2));
    fv.values.push_back(autocorrelation(y, one_cycle, m.mean, m.m2));
    for (int h = 1; h <= 10; ++h) {
      fv.values.push_back(harmonic_magnitude(y, fs, system_frequency_hz * h));
    }
    fv.values.push_back(histogram_entropy_bits(y, 32));
    fv.values.push_back(approximate_entropy(y, 0.2 * stdev));

    const CwtResult c = cwt(y, fs, params);
    for (std::size_t s = 0; s < params.scales_s.size(); ++s) {
      double max_abs = 0.0, energy = 0.0;
      for (std::size_t j = 0; j < c.coeff[s].size(); ++j) {
        if (c.flagged[s][j]) continue;
        max_abs = std::max(max_abs, std::abs(c.coeff[s][j]));
        energy += c.coeff[s][j] * c.coeff[s][j];
      }
      fv.values.push_back(max_abs);
      fv.values.push_back(energy);
    }
  }
  return fv;
}

std::size_t FeatureDataset::feature_index(std::string_view name) const {
  const auto it = std::find(feature_names.begin(), feature_names.end(), name);
  if (it == feature_names.end()) {
    throw InvalidInput(fmt::format("unknown feature '{}'", name));
  }
  return static_cast<std::size_t>(it - feature_names.begin());
}

double label_entropy(const FeatureDataset& dataset) {
  std::size_t internal = 0;
  for (const auto& row : dataset.rows) {
    if (row.label == ClassLabel::internal) ++internal;
  }
  const auto n = static_cast<double>(dataset.rows.size());
  double h = 0.0;
  for (const double count : {static_cast<double>(internal),
                             n - static_cast<double>(internal)}) {
    if (count <= 0.0) continue;
    const double p = count / n;
    h -= p * std::log2(p);
  }
  return h;
}

double information_gain_by_index(const FeatureDataset& dataset, std::size_t feature) {
  const std::size_t n = dataset.rows.size();
  if (n == 0) throw InvalidData("information gain on an empty dataset");
  bool has_internal = false, has_external = false;
  for (const auto& row : dataset.rows) {
    (row.label == ClassLabel::internal ? has_internal : has_external) = true;
  }
  if (!has_internal || !has_external) {
    throw InvalidData("information gain requires both labels present");
  }

  // Equal-frequency discretization into 16 bins with edges at the quantile
  // values. Tied values always share a bin (duplicate edges collapse into
  // empty bins), so a feature identical to the label reaches the full label
  // entropy and strictly monotone transforms preserve memberships.
  constexpr std::size_t kBins = 16;
  std::vector<double> sorted(n);
  for (std::size_t i = 0; i < n; ++i) sorted[i] = dataset.rows[i].values[feature];
  std::sort(sorted.begin(), sorted.end());
  std::array<double, kBins - 1> edges{};
  for (std::size_t b = 1; b < kBins; ++b) {
    edges[b - 1] = sorted[b * n / kBins];
  }

  std::array<std::array<double, 2>, kBins> counts{};
  for (const auto& row : dataset.rows) {
    const double v = row.values[feature];
    std::size_t bin = 0;
    for (double edge : edges) bin += v >= edge;
    counts[bin][row.label == ClassLabel::internal ? 1 : 0] += 1.0;
  }

  double conditional = 0.0;
  for (const auto& bin : counts) {
    const double total = bin[0] + bin[1];
    if (total <= 0.0) continue;
    double h = 0.0;
    for (double c : bin) {
      if (c <= 0.0) continue;
      const double p = c / total;
      h -= p * std::log2(p);
    }
    conditional += total / static_cast<double>(n) * h;
  }
  return std::max(0.0, label_entropy(dataset) - conditional);
}

double information_gain(const FeatureDataset& dataset, std::string_view feature_name) {
  return information_gain_by_index(dataset, dataset.feature_index(feature_name));
}

FeatureRanking rank_features(const FeatureDataset& dataset) {
  FeatureRanking ranking;
  ranking.entries.reserve(dataset.feature_names.size());
  for (std::size_t i = 0; i < dataset.feature_names.size(); ++i) {
    ranking.entries.emplace_back(dataset.feature_names[i],
                                 information_gain_by_index(dataset, i));
  }
  std::sort(ranking.entries.begin(), ranking.entries.end(),
            [](const auto& a, const auto& b) {
              if (a.second != b.second) return a.second > b.second;
              return a.first < b.first;
            });
  return ranking;
}

FeatureRanking select_top(const FeatureDataset& dataset, int k) {
  if (k < 1 || static_cast<std::size_t>(k) > dataset.feature_names.size()) {
    throw InvalidParameter(fmt::format("top-k {} outside [1, {}]", k,
                                       dataset.feature_names.size()));
  }
  FeatureRanking ranking = rank_features(dataset);
  ranking.entries.resize(static_cast<std::size_t>(k));
  return ranking;
}

void write_feature_csv(const std::filesystem::path& path, const FeatureDataset& dataset) {
  std::string buf = "spec_id";
  for (const auto& name : dataset.feature_names) buf += fmt::format(",{}", name);
  buf += ",label\n";
  for (const auto& row : dataset.rows) {
    buf += fmt::format("{}", row.spec_id);
    for (double v : row.values) buf += fmt::format(",{}", v);
    buf += fmt::format(",{}\n", to_string(row.label));
  }
  detail::write_all(path, buf);
}

FeatureDataset read_feature_csv(const std::filesystem::path& path) {
  auto in = detail::open_in(path);
  std::string line;
  if (!std::getline(in, line)) throw InvalidInput(fmt::format("{}: empty file", path.string()));
  auto header = detail::split_csv_line(line);
  if (header.size() < 3 || header.front() != "spec_id" || header.back() != "label") {
    throw InvalidInput(fmt::format("{}: unexpected feature CSV header", path.string()));
  }
  FeatureDataset dataset;
  dataset.feature_names.assign(header.begin() + 1, header.end() - 1);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = detail::split_csv_line(line);
    if (f.size() != header.size()) {
      throw InvalidInput(fmt::format("{}: bad row '{}'", path.string(), line));
    }
    FeatureVector row;
    row.spec_id = static_cast<std::uint32_t>(detail::parse_u64(f[0], "spec_id"));
    row.values.reserve(dataset.feature_names.size());
    for (std::size_t i = 1; i + 1 < f.size(); ++i) {
      row.values.push_back(detail::parse_double(f[i], dataset.feature_names[i - 1]));
    }
    row.label = class_label_from_string(f.back());
    dataset.rows.push_back(std::move(row));
  }
  return dataset;
}

void write_ranking_csv(const std::filesystem::path& path, const FeatureRanking& ranking) {
  std::string buf = "feature_name,information_gain\n";
  for (const auto& [name, gain] : ranking.entries) {
    buf += fmt::format("{},{}\n", name, gain);
  }
  detail::write_all(path, buf);
}

FeatureRanking read_ranking_csv(const std::filesystem::path& path) {
  auto in = detail::open_in(path);
  std::string line;
  if (!std::getline(in, line)) throw InvalidInput(fmt::format("{}: empty file", path.string()));
  FeatureRanking ranking;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = detail::split_csv_line(line);
    if (f.size() != 2) throw InvalidInput(fmt::format("{}: bad row '{}'", path.string(), line));
    ranking.entries.emplace_back(f[0], detail::parse_double(f[1], "information_gain"));
  }
  return ranking;
}

}  // namespace diffguard
