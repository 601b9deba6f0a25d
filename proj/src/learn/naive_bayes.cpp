#include <cmath>

#include "learn_internal.hpp"

namespace diffguard::detail {

namespace {
constexpr double kVarianceFloor = 1e-9;
constexpr double kLog2Pi = 1.8378770664093454836;
}  // namespace

int NaiveBayesClassifier::predict_standardized(std::span<const double> z) const {
  double score[2];
  for (int c = 0; c < 2; ++c) {
    double s = log_prior_[static_cast<std::size_t>(c)];
    const auto& mean = mean_[static_cast<std::size_t>(c)];
    const auto& var = var_[static_cast<std::size_t>(c)];
    for (std::size_t f = 0; f < z.size(); ++f) {
      const double d = z[f] - mean[f];
      s -= 0.5 * (kLog2Pi + std::log(var[f]) + d * d / var[f]);
    }
    score[c] = s;
  }
  return score[1] >= score[0] ? 1 : 0;
}

nlohmann::json NaiveBayesClassifier::state() const {
  return {{"log_prior", log_prior_}, {"mean", mean_}, {"var", var_}};
}

std::shared_ptr<Classifier> NaiveBayesClassifier::from_state(const nlohmann::json& j) {
  return std::make_shared<NaiveBayesClassifier>(
      j.at("log_prior").get<std::array<double, 2>>(), j.at("mean").get<Matrix>(),
      j.at("var").get<Matrix>());
}

std::shared_ptr<Classifier> fit_naive_bayes(const Matrix& z, const std::vector<int>& y,
                                            const Hyperparams& /*hp*/, std::uint64_t /*seed*/) {
  const std::size_t d = z[0].size();
  Matrix mean(2, std::vector<double>(d, 0.0));
  Matrix var(2, std::vector<double>(d, 0.0));
  std::array<double, 2> count{0.0, 0.0};

  for (std::size_t i = 0; i < z.size(); ++i) {
    const auto c = static_cast<std::size_t>(y[i]);
    count[c] += 1.0;
    for (std::size_t f = 0; f < d; ++f) mean[c][f] += z[i][f];
  }
  for (int c = 0; c < 2; ++c) {
    for (std::size_t f = 0; f < d; ++f) mean[static_cast<std::size_t>(c)][f] /= count[static_cast<std::size_t>(c)];
  }
  for (std::size_t i = 0; i < z.size(); ++i) {
    const auto c = static_cast<std::size_t>(y[i]);
    for (std::size_t f = 0; f < d; ++f) {
      const double dlt = z[i][f] - mean[c][f];
      var[c][f] += dlt * dlt;
    }
  }
  for (int c = 0; c < 2; ++c) {
    for (std::size_t f = 0; f < d; ++f) {
      auto& v = var[static_cast<std::size_t>(c)][f];
      v = std::max(v / count[static_cast<std::size_t>(c)], kVarianceFloor);
    }
  }

  const double total = count[0] + count[1];
  std::array<double, 2> log_prior = {std::log(count[0] / total), std::log(count[1] / total)};
  return std::make_shared<NaiveBayesClassifier>(log_prior, std::move(mean), std::move(var));
}

}  // namespace diffguard::detail
