#include "diffguard/metrics.hpp"

#include <cmath>

#include <fmt/format.h>

#include "diffguard/errors.hpp"
#include "text_io.hpp"

namespace diffguard {

double dependability(const ConfusionCounts& c) {
  const std::uint64_t internal = c.tp + c.fn;
  if (internal == 0) throw UndefinedMetric("dependability needs at least one internal sample");
  return static_cast<double>(c.tp) / static_cast<double>(internal);
}

double security(const ConfusionCounts& c) {
  const std::uint64_t external = c.tn + c.fp;
  if (external == 0) throw UndefinedMetric("security needs at least one external sample");
  return static_cast<double>(c.tn) / static_cast<double>(external);
}

double balanced_accuracy(const ConfusionCounts& c) {
  // Evaluated as the mean of the two rates so the identity
  // balanced_accuracy == (dependability + security) / 2 is bit-exact.
  return 0.5 * (dependability(c) + security(c));
}

ConfusionCounts count_confusion(const std::vector<int>& predictions,
                                const std::vector<int>& labels) {
  if (predictions.size() != labels.size()) {
    throw InvalidInput(fmt::format("prediction/label length mismatch ({} vs {})",
                                   predictions.size(), labels.size()));
  }
  ConfusionCounts c;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == 1) {
      (predictions[i] == 1 ? c.tp : c.fn) += 1;
    } else {
      (predictions[i] == 1 ? c.fp : c.tn) += 1;
    }
  }
  return c;
}

nlohmann::json report_to_json(const EvalReport& report) {
  nlohmann::json j;
  j["classifier"] = report.classifier;
  j["hyperparameters"] = report.hyperparameters;
  j["counts"] = {{"tp", report.counts.tp},
                 {"fn", report.counts.fn},
                 {"tn", report.counts.tn},
                 {"fp", report.counts.fp}};
  j["balanced_accuracy"] = report.balanced_accuracy;
  j["dependability"] = report.dependability;
  j["security"] = report.security;
  if (std::isfinite(report.hif_dependability)) {
    j["hif_dependability"] = report.hif_dependability;
  }
  return j;
}

EvalReport report_from_json(const nlohmann::json& j) {
  EvalReport r;
  r.classifier = j.at("classifier").get<std::string>();
  r.hyperparameters = j.at("hyperparameters");
  const auto& c = j.at("counts");
  r.counts = {c.at("tp").get<std::uint64_t>(), c.at("fn").get<std::uint64_t>(),
              c.at("tn").get<std::uint64_t>(), c.at("fp").get<std::uint64_t>()};
  r.balanced_accuracy = j.at("balanced_accuracy").get<double>();
  r.dependability = j.at("dependability").get<double>();
  r.security = j.at("security").get<double>();
  if (j.contains("hif_dependability")) {
    r.hif_dependability = j.at("hif_dependability").get<double>();
  }
  return r;
}

void write_report_csv(const std::filesystem::path& path,
                      const std::vector<EvalReport>& reports) {
  std::string buf = "classifier,balanced_accuracy,dependability,security\n";
  for (const auto& r : reports) {
    buf += fmt::format("{},{},{},{}\n", r.classifier, r.balanced_accuracy,
                       r.dependability, r.security);
  }
  detail::write_all(path, buf);
}

}  // namespace diffguard
