#pragma once

// Internal training machinery shared by the classifier implementations.

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "diffguard/learn.hpp"
#include "diffguard/rng.hpp"

namespace diffguard::detail {

using Matrix = std::vector<std::vector<double>>;

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1, right = -1;
  double value = 0.0;  // leaf payload: class-1 probability or regression value
  int count = 0;
};

enum class SplitCriterion { entropy, gini };
SplitCriterion criterion_from_string(std::string_view s);

struct TreeOptions {
  SplitCriterion criterion = SplitCriterion::gini;
  int max_depth = 0;  // 0 = unbounded
  int min_samples_leaf = 1;
  double max_features = 1.0;  // fraction of columns tried per split
  Rng* rng = nullptr;         // consumed only when max_features < 1
};

/// Greedy CART growth; deterministic tie-breaking by (feature order, lowest
/// threshold). Splits are chosen by class counts only, so the topology is
/// invariant under per-feature affine rescaling.
std::vector<TreeNode> build_classification_tree(const Matrix& x, const std::vector<int>& y,
                                                const std::vector<std::size_t>& rows,
                                                const TreeOptions& opt);

struct RegTreeOptions {
  int max_depth = 3;
  int min_samples_leaf = 1;
};

/// Variance-reduction regression tree; leaves hold the mean target.
std::vector<TreeNode> build_regression_tree(const Matrix& x, const std::vector<double>& target,
                                            const std::vector<std::size_t>& rows,
                                            const RegTreeOptions& opt);

int tree_leaf_index(const std::vector<TreeNode>& nodes, std::span<const double> z);
double tree_value(const std::vector<TreeNode>& nodes, std::span<const double> z);

nlohmann::json nodes_to_json(const std::vector<TreeNode>& nodes);
std::vector<TreeNode> nodes_from_json(const nlohmann::json& j);

// --- fitted classifiers ----------------------------------------------------

class DecisionTreeClassifier : public Classifier {
 public:
  DecisionTreeClassifier(std::vector<TreeNode> nodes, std::string criterion)
      : nodes_(std::move(nodes)), criterion_(std::move(criterion)) {}
  int predict_standardized(std::span<const double> z) const override {
    return tree_value(nodes_, z) >= 0.5 ? 1 : 0;
  }
  nlohmann::json state() const override;
  static std::shared_ptr<Classifier> from_state(const nlohmann::json& j);
  const std::vector<TreeNode>& nodes() const { return nodes_; }

 private:
  std::vector<TreeNode> nodes_;
  std::string criterion_;
};

class RandomForestClassifier : public Classifier {
 public:
  explicit RandomForestClassifier(std::vector<std::vector<TreeNode>> trees)
      : trees_(std::move(trees)) {}
  int predict_standardized(std::span<const double> z) const override;
  nlohmann::json state() const override;
  static std::shared_ptr<Classifier> from_state(const nlohmann::json& j);
  const std::vector<std::vector<TreeNode>>& trees() const { return trees_; }

 private:
  std::vector<std::vector<TreeNode>> trees_;
};

class GradientBoostClassifier : public Classifier {
 public:
  GradientBoostClassifier(double f0, double learning_rate,
                          std::vector<std::vector<TreeNode>> trees)
      : f0_(f0), learning_rate_(learning_rate), trees_(std::move(trees)) {}
  int predict_standardized(std::span<const double> z) const override;
  nlohmann::json state() const override;
  static std::shared_ptr<Classifier> from_state(const nlohmann::json& j);
  double decision(std::span<const double> z) const;

 private:
  double f0_ = 0.0;
  double learning_rate_ = 0.1;
  std::vector<std::vector<TreeNode>> trees_;
};

class MlpClassifier : public Classifier {
 public:
  struct Layer {
    std::vector<double> weights;  // out x in, row-major
    std::vector<double> bias;     // out
    int in = 0, out = 0;
  };

  MlpClassifier(std::string activation, std::vector<Layer> layers)
      : activation_(std::move(activation)), layers_(std::move(layers)) {}
  int predict_standardized(std::span<const double> z) const override;
  nlohmann::json state() const override;
  static std::shared_ptr<Classifier> from_state(const nlohmann::json& j);
  double probability(std::span<const double> z) const;

 private:
  std::string activation_;
  std::vector<Layer> layers_;  // hidden1, hidden2, output
};

class NaiveBayesClassifier : public Classifier {
 public:
  NaiveBayesClassifier(std::array<double, 2> log_prior, Matrix mean, Matrix var)
      : log_prior_(log_prior), mean_(std::move(mean)), var_(std::move(var)) {}
  int predict_standardized(std::span<const double> z) const override;
  nlohmann::json state() const override;
  static std::shared_ptr<Classifier> from_state(const nlohmann::json& j);

 private:
  std::array<double, 2> log_prior_{};  // [external, internal]
  Matrix mean_, var_;                  // [class][feature]
};

class KnnClassifier : public Classifier {
 public:
  KnnClassifier(int neighbors, std::string distance, Matrix x, std::vector<int> y)
      : neighbors_(neighbors), distance_(std::move(distance)), x_(std::move(x)),
        y_(std::move(y)) {}
  int predict_standardized(std::span<const double> z) const override;
  nlohmann::json state() const override;
  static std::shared_ptr<Classifier> from_state(const nlohmann::json& j);

 private:
  int neighbors_ = 3;
  std::string distance_;
  Matrix x_;
  std::vector<int> y_;
};

class SvmClassifier : public Classifier {
 public:
  SvmClassifier(std::string kernel, double gamma, double bias, Matrix support,
                std::vector<double> coef)
      : kernel_(std::move(kernel)), gamma_(gamma), bias_(bias),
        support_(std::move(support)), coef_(std::move(coef)) {}
  int predict_standardized(std::span<const double> z) const override;
  nlohmann::json state() const override;
  static std::shared_ptr<Classifier> from_state(const nlohmann::json& j);
  /// Kernel expansion sum(coef_i K(sv_i, x)) + b.
  double decision(std::span<const double> z) const;

 private:
  std::string kernel_;  // "rbf" | "poly"
  double gamma_ = 1.0;
  double bias_ = 0.0;
  Matrix support_;
  std::vector<double> coef_;  // alpha_i * y_i
};

// --- per-kind trainers (standardized rows) ----------------------------------

std::shared_ptr<Classifier> fit_decision_tree(const Matrix& z, const std::vector<int>& y,
                                              const Hyperparams& hp, std::uint64_t seed);
std::shared_ptr<Classifier> fit_random_forest(const Matrix& z, const std::vector<int>& y,
                                              const Hyperparams& hp, std::uint64_t seed);
std::shared_ptr<Classifier> fit_gradient_boost(const Matrix& z, const std::vector<int>& y,
                                               const Hyperparams& hp, std::uint64_t seed);
std::shared_ptr<Classifier> fit_mlp(const Matrix& z, const std::vector<int>& y,
                                    const Hyperparams& hp, std::uint64_t seed);
std::shared_ptr<Classifier> fit_naive_bayes(const Matrix& z, const std::vector<int>& y,
                                            const Hyperparams& hp, std::uint64_t seed);
std::shared_ptr<Classifier> fit_knn(const Matrix& z, const std::vector<int>& y,
                                    const Hyperparams& hp, std::uint64_t seed);
std::shared_ptr<Classifier> fit_svm(const Matrix& z, const std::vector<int>& y,
                                    const Hyperparams& hp, std::uint64_t seed);

std::shared_ptr<Classifier> classifier_from_state(ClassifierKind kind, const nlohmann::json& j);

}  // namespace diffguard::detail
