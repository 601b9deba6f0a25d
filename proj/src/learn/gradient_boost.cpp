#include <algorithm>
#include <cmath>
#include <numeric>

#include "learn_internal.hpp"

namespace diffguard::detail {

namespace {

double sigmoid(double f) { return 1.0 / (1.0 + std::exp(-f)); }

}  // namespace

double GradientBoostClassifier::decision(std::span<const double> z) const {
  double f = f0_;
  for (const auto& tree : trees_) f += learning_rate_ * tree_value(tree, z);
  return f;
}

int GradientBoostClassifier::predict_standardized(std::span<const double> z) const {
  return sigmoid(decision(z)) >= 0.5 ? 1 : 0;
}

nlohmann::json GradientBoostClassifier::state() const {
  nlohmann::json trees = nlohmann::json::array();
  for (const auto& tree : trees_) trees.push_back(nodes_to_json(tree));
  return {{"f0", f0_}, {"learning_rate", learning_rate_}, {"trees", trees}};
}

std::shared_ptr<Classifier> GradientBoostClassifier::from_state(const nlohmann::json& j) {
  std::vector<std::vector<TreeNode>> trees;
  for (const auto& t : j.at("trees")) trees.push_back(nodes_from_json(t));
  return std::make_shared<GradientBoostClassifier>(j.at("f0").get<double>(),
                                                   j.at("learning_rate").get<double>(),
                                                   std::move(trees));
}

// Staged additive trees on logistic loss: each stage fits a variance-reduction
// tree to the residuals y - p and takes a Newton step per leaf.
std::shared_ptr<Classifier> fit_gradient_boost(const Matrix& z, const std::vector<int>& y,
                                               const Hyperparams& hp, std::uint64_t seed) {
  const double learning_rate = hp.value("learning_rate", 0.1);
  const int estimators = hp.value("estimators", 100);
  const double subsample = hp.value("subsample", 1.0);
  RegTreeOptions opt;
  opt.max_depth = hp.value("max_depth", 3);
  opt.min_samples_leaf = 1;

  const std::size_t n = z.size();
  double p0 = 0.0;
  for (int label : y) p0 += label;
  p0 = std::clamp(p0 / static_cast<double>(n), 1e-12, 1.0 - 1e-12);
  const double f0 = std::log(p0 / (1.0 - p0));

  std::vector<double> score(n, f0);
  std::vector<double> residual(n, 0.0);
  std::vector<std::size_t> all_rows(n);
  std::iota(all_rows.begin(), all_rows.end(), 0);

  std::vector<std::vector<TreeNode>> trees;
  trees.reserve(static_cast<std::size_t>(estimators));
  for (int m = 0; m < estimators; ++m) {
    for (std::size_t i = 0; i < n; ++i) {
      residual[i] = static_cast<double>(y[i]) - sigmoid(score[i]);
    }

    std::vector<std::size_t> rows;
    if (subsample < 1.0) {
      const auto take = std::max<std::size_t>(
          2, static_cast<std::size_t>(subsample * static_cast<double>(n)));
      Rng rng(substream(seed, "gb_stage", static_cast<std::uint64_t>(m)));
      std::vector<std::size_t> pool = all_rows;
      for (std::size_t i = 0; i < take; ++i) {
        std::swap(pool[i], pool[i + rng.below(n - i)]);
      }
      pool.resize(take);
      std::sort(pool.begin(), pool.end());
      rows = std::move(pool);
    } else {
      rows = all_rows;
    }

    auto tree = build_regression_tree(z, residual, rows, opt);

    // Newton leaf values from the in-bag rows: sum(residual) / sum(p(1-p)).
    std::vector<double> num(tree.size(), 0.0), den(tree.size(), 0.0);
    for (std::size_t r : rows) {
      const auto leaf = static_cast<std::size_t>(tree_leaf_index(tree, z[r]));
      const double p = sigmoid(score[r]);
      num[leaf] += residual[r];
      den[leaf] += p * (1.0 - p);
    }
    for (std::size_t i = 0; i < tree.size(); ++i) {
      if (tree[i].feature < 0) {
        tree[i].value = num[i] / std::max(den[i], 1e-12);
      }
    }

    for (std::size_t i = 0; i < n; ++i) {
      score[i] += learning_rate * tree_value(tree, z[i]);
    }
    trees.push_back(std::move(tree));
  }
  return std::make_shared<GradientBoostClassifier>(f0, learning_rate, std::move(trees));
}

}  // namespace diffguard::detail
