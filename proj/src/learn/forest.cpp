#include <numeric>

#include "learn_internal.hpp"

namespace diffguard::detail {

nlohmann::json DecisionTreeClassifier::state() const {
  return {{"criterion", criterion_}, {"nodes", nodes_to_json(nodes_)}};
}

std::shared_ptr<Classifier> DecisionTreeClassifier::from_state(const nlohmann::json& j) {
  return std::make_shared<DecisionTreeClassifier>(nodes_from_json(j.at("nodes")),
                                                  j.at("criterion").get<std::string>());
}

int RandomForestClassifier::predict_standardized(std::span<const double> z) const {
  double prob = 0.0;
  for (const auto& tree : trees_) prob += tree_value(tree, z);
  prob /= static_cast<double>(trees_.size());
  return prob >= 0.5 ? 1 : 0;
}

nlohmann::json RandomForestClassifier::state() const {
  nlohmann::json trees = nlohmann::json::array();
  for (const auto& tree : trees_) trees.push_back(nodes_to_json(tree));
  return {{"trees", trees}};
}

std::shared_ptr<Classifier> RandomForestClassifier::from_state(const nlohmann::json& j) {
  std::vector<std::vector<TreeNode>> trees;
  for (const auto& t : j.at("trees")) trees.push_back(nodes_from_json(t));
  return std::make_shared<RandomForestClassifier>(std::move(trees));
}

std::shared_ptr<Classifier> fit_decision_tree(const Matrix& z, const std::vector<int>& y,
                                              const Hyperparams& hp, std::uint64_t /*seed*/) {
  const std::string criterion = hp.value("criterion", "gini");
  TreeOptions opt;
  opt.criterion = criterion_from_string(criterion);
  std::vector<std::size_t> rows(z.size());
  std::iota(rows.begin(), rows.end(), 0);
  return std::make_shared<DecisionTreeClassifier>(build_classification_tree(z, y, rows, opt),
                                                  criterion);
}

std::shared_ptr<Classifier> fit_random_forest(const Matrix& z, const std::vector<int>& y,
                                              const Hyperparams& hp, std::uint64_t seed) {
  const int estimators = hp.value("estimators", 100);
  TreeOptions opt;
  opt.criterion = criterion_from_string(hp.value("criterion", "gini"));
  opt.max_depth = hp.value("max_depth", 0);
  opt.min_samples_leaf = hp.value("min_samples_leaf", 1);
  opt.max_features = hp.value("max_features", 1.0);

  std::vector<std::vector<TreeNode>> trees;
  trees.reserve(static_cast<std::size_t>(estimators));
  for (int b = 0; b < estimators; ++b) {
    const auto rows = forest_bootstrap_indices(seed, b, z.size());
    Rng grow_rng(substream(seed, "tree_growth", static_cast<std::uint64_t>(b)));
    TreeOptions tree_opt = opt;
    tree_opt.rng = &grow_rng;
    trees.push_back(build_classification_tree(z, y, rows, tree_opt));
  }
  return std::make_shared<RandomForestClassifier>(std::move(trees));
}

}  // namespace diffguard::detail

namespace diffguard {

std::vector<std::size_t> forest_bootstrap_indices(std::uint64_t seed, int tree_index,
                                                  std::size_t n) {
  Rng rng(substream(seed, "bootstrap", static_cast<std::uint64_t>(tree_index)));
  std::vector<std::size_t> rows(n);
  for (auto& r : rows) r = rng.below(n);
  return rows;
}

}  // namespace diffguard
