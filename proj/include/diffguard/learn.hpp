#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "diffguard/metrics.hpp"

namespace diffguard {

enum class ClassifierKind {
  decision_tree,
  random_forest,
  gradient_boost,
  mlp,
  naive_bayes,
  knn,
  svm
};

std::string to_string(ClassifierKind);
ClassifierKind classifier_kind_from_string(std::string_view);
const std::vector<ClassifierKind>& all_classifier_kinds();

/// Flat JSON object, e.g. {"criterion":"entropy"} or {"C":1000,"gamma":1,"kernel":"rbf"}.
using Hyperparams = nlohmann::json;

struct TrainMatrix {
  std::vector<std::string> feature_names;
  std::vector<std::vector<double>> rows;  // raw feature values, n x d
  std::vector<int> labels;                // 1 = internal, 0 = external
  std::vector<std::uint32_t> ids;         // unique sample ids

  std::size_t n() const { return rows.size(); }
  std::size_t d() const { return feature_names.size(); }
};

/// Z-score standardizer; zero-variance columns pass through unscaled.
struct Scaler {
  std::vector<double> mean, scale;
  void fit(const std::vector<std::vector<double>>& rows);
  std::vector<double> apply(std::span<const double> row) const;
};

/// Fitted state; predicts on standardized rows.
class Classifier {
 public:
  virtual ~Classifier() = default;
  virtual int predict_standardized(std::span<const double> z) const = 0;
  virtual nlohmann::json state() const = 0;
};

struct TrainedModel {
  ClassifierKind kind = ClassifierKind::decision_tree;
  Hyperparams hyperparameters;
  std::vector<std::string> selected_features;
  Scaler scaler;
  std::uint64_t train_seed = 0;
  std::shared_ptr<const Classifier> impl;

  int predict(std::span<const double> raw_row) const;
  std::vector<int> predict_rows(const std::vector<std::vector<double>>& rows) const;
};

TrainedModel fit(ClassifierKind kind, const Hyperparams& hp, const TrainMatrix& train,
                 std::uint64_t seed);

nlohmann::json model_to_json(const TrainedModel& model);
TrainedModel model_from_json(const nlohmann::json& j);

/// Stratified fold assignment keyed on sample id; row order never matters.
std::vector<int> stratified_fold_assignment(const std::vector<int>& labels,
                                            const std::vector<std::uint32_t>& ids,
                                            int folds, std::uint64_t seed);

struct FoldMetrics {
  ConfusionCounts counts;
  double balanced_accuracy = 0.0;
};

struct CvResult {
  std::vector<FoldMetrics> folds;
  ConfusionCounts pooled;              // out-of-fold predictions over all rows
  double mean_balanced_accuracy = 0.0; // mean of per-fold balanced accuracies
  std::vector<int> out_of_fold;        // prediction per row
};

CvResult cross_validate(ClassifierKind kind, const Hyperparams& hp, const TrainMatrix& data,
                        int folds, std::uint64_t seed);

struct GridPointResult {
  Hyperparams hp;
  double mean_balanced_accuracy = 0.0;
};

struct GridSearchResult {
  Hyperparams best;
  double best_score = 0.0;
  std::vector<GridPointResult> evaluated;  // in grid order
};

/// Exhaustive CV over the expansion of `grid`; ties keep the earliest point.
GridSearchResult grid_search(ClassifierKind kind, const nlohmann::json& grid,
                             const TrainMatrix& data, int folds, std::uint64_t seed);

/// Cartesian expansion of {param: [values...]}; parameters iterate in
/// alphabetical order with the last one varying fastest. Deterministic.
std::vector<Hyperparams> expand_grid(const nlohmann::json& grid);

/// Built-in grids; same content as configs/grids.json.
nlohmann::json default_grids();

/// Bootstrap rows used for tree `tree_index` of a forest trained with `seed`.
std::vector<std::size_t> forest_bootstrap_indices(std::uint64_t seed, int tree_index,
                                                  std::size_t n);

}  // namespace diffguard
