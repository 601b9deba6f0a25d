#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "diffguard/scenario.hpp"
#include "diffguard/synth.hpp"

namespace diffguard {

struct WaveletParams {
  // Scales in seconds, strictly increasing, all positive.
  std::vector<double> scales_s{1.0e-4, 1.5e-4, 2.0e-4, 3.0e-4,
                               4.0e-4, 5.0e-4, 6.5e-4, 8.0e-4};
  int shift_stride_samples = 8;

  void validate() const;
};

/// Mexican-Hat wavelet at scale p and shift q.
double mexican_hat(double t, double p, double q);

/// |sum of psi(t_i, p, 0) * dt| over the sampled support |t_i| <= 5p.
/// Admissibility residual of the discretized wavelet; used by tests.
double mexican_hat_discrete_mean_residual(double p, double sampling_rate_hz);

struct CwtResult {
  std::vector<double> scales_s;
  std::vector<double> shift_times_s;  // one per column, on the sample grid
  // coeff[i][j]: scale i, shift j. flagged[i][j] is true when the ±5p
  // support of (i, j) extends past the supplied samples.
  std::vector<std::vector<double>> coeff;
  std::vector<std::vector<char>> flagged;
};

/// Discretized Eq.-style transform: coefficient = sum(y_k * psi(t_k)) * dt
/// over all supplied samples (the wavelet is real, conjugation is identity).
CwtResult cwt(std::span<const double> y, double sampling_rate_hz, const WaveletParams& params);

/// Single coefficient at an arbitrary (p, q); same discretization as cwt().
double cwt_coefficient(std::span<const double> y, double sampling_rate_hz, double p, double q);

struct FeatureVector {
  std::uint32_t spec_id = 0;
  std::vector<double> values;  // ordered per feature_schema()
  ClassLabel label = ClassLabel::internal;
};

/// Fixed, ordered feature-name schema (per phase x 3 phases).
std::vector<std::string> feature_schema(const WaveletParams& params);

/// Features over the window [fault_start_index, fault_start_index + 2 cycles).
FeatureVector extract_features(const Waveform& w, const WaveletParams& params,
                               double system_frequency_hz = 60.0);

struct FeatureDataset {
  std::vector<std::string> feature_names;
  std::vector<FeatureVector> rows;

  std::size_t feature_index(std::string_view name) const;  // throws InvalidInput
};

double information_gain(const FeatureDataset& dataset, std::string_view feature_name);
double information_gain_by_index(const FeatureDataset& dataset, std::size_t feature);

/// Shannon entropy (bits) of the label distribution; upper bound for IG.
double label_entropy(const FeatureDataset& dataset);

struct FeatureRanking {
  std::vector<std::pair<std::string, double>> entries;  // non-increasing gain
};

FeatureRanking rank_features(const FeatureDataset& dataset);
FeatureRanking select_top(const FeatureDataset& dataset, int k);

void write_feature_csv(const std::filesystem::path& path, const FeatureDataset& dataset);
FeatureDataset read_feature_csv(const std::filesystem::path& path);
void write_ranking_csv(const std::filesystem::path& path, const FeatureRanking& ranking);
FeatureRanking read_ranking_csv(const std::filesystem::path& path);

}  // namespace diffguard
