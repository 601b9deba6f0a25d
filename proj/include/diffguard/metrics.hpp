#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace diffguard {

/// Positive class is "internal fault" (trip).
struct ConfusionCounts {
  std::uint64_t tp = 0;  // internal predicted internal
  std::uint64_t fn = 0;  // internal predicted external
  std::uint64_t tn = 0;  // external predicted external
  std::uint64_t fp = 0;  // external predicted internal
};

/// Recall on internal faults, TP/(TP+FN).
double dependability(const ConfusionCounts& c);
/// True-negative rate on external events, TN/(TN+FP).
double security(const ConfusionCounts& c);
/// Mean of dependability and security.
double balanced_accuracy(const ConfusionCounts& c);

/// Counts from paired (prediction, label) lists, 1 = internal.
ConfusionCounts count_confusion(const std::vector<int>& predictions,
                                const std::vector<int>& labels);

struct EvalReport {
  std::string classifier;
  nlohmann::json hyperparameters;
  ConfusionCounts counts;
  double balanced_accuracy = 0.0;
  double dependability = 0.0;
  double security = 0.0;
  // Dependability restricted to HIF internal events; NaN when not computed.
  double hif_dependability = std::numeric_limits<double>::quiet_NaN();
};

nlohmann::json report_to_json(const EvalReport& report);
EvalReport report_from_json(const nlohmann::json& j);

/// CSV with columns classifier,balanced_accuracy,dependability,security.
void write_report_csv(const std::filesystem::path& path, const std::vector<EvalReport>& reports);

}  // namespace diffguard
