#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "diffguard/errors.hpp"
#include "learn_internal.hpp"

namespace diffguard::detail {

namespace {

double distance_between(std::span<const double> a, std::span<const double> b,
                        bool manhattan) {
  double acc = 0.0;
  if (manhattan) {
    for (std::size_t i = 0; i < a.size(); ++i) acc += std::abs(a[i] - b[i]);
    return acc;
  }
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return std::sqrt(acc);
}

}  // namespace

int KnnClassifier::predict_standardized(std::span<const double> z) const {
  const bool manhattan = distance_ == "manhattan";
  std::vector<std::pair<double, std::size_t>> dist;
  dist.reserve(x_.size());
  for (std::size_t i = 0; i < x_.size(); ++i) {
    dist.emplace_back(distance_between(x_[i], z, manhattan), i);
  }
  const auto k = std::min<std::size_t>(static_cast<std::size_t>(neighbors_), dist.size());
  std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());

  int votes = 0;
  for (std::size_t i = 0; i < k; ++i) votes += y_[dist[i].second];
  const int other = static_cast<int>(k) - votes;
  if (votes != other) return votes > other ? 1 : 0;
  return y_[dist[0].second];  // tied vote: nearest neighbor decides
}

nlohmann::json KnnClassifier::state() const {
  return {{"neighbors", neighbors_}, {"distance", distance_}, {"x", x_}, {"y", y_}};
}

std::shared_ptr<Classifier> KnnClassifier::from_state(const nlohmann::json& j) {
  return std::make_shared<KnnClassifier>(j.at("neighbors").get<int>(),
                                         j.at("distance").get<std::string>(),
                                         j.at("x").get<Matrix>(),
                                         j.at("y").get<std::vector<int>>());
}

std::shared_ptr<Classifier> fit_knn(const Matrix& z, const std::vector<int>& y,
                                    const Hyperparams& hp, std::uint64_t /*seed*/) {
  const int neighbors = hp.value("neighbors", 5);
  const std::string distance = hp.value("distance", "euclidean");
  if (distance != "manhattan" && distance != "euclidean") {
    throw InvalidParameter(fmt::format("unknown knn distance '{}'", distance));
  }
  if (neighbors < 1) throw InvalidParameter("neighbors must be >= 1");
  // leaf_size is recorded in the hyperparameters but has no effect: the
  // search is exact brute force.
  return std::make_shared<KnnClassifier>(neighbors, distance, z, y);
}

}  // namespace diffguard::detail
