#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include <fmt/format.h>

#include "diffguard/errors.hpp"
#include "learn_internal.hpp"

namespace diffguard {

std::string to_string(ClassifierKind kind) {
  switch (kind) {
    case ClassifierKind::decision_tree: return "decision_tree";
    case ClassifierKind::random_forest: return "random_forest";
    case ClassifierKind::gradient_boost: return "gradient_boost";
    case ClassifierKind::mlp: return "mlp";
    case ClassifierKind::naive_bayes: return "naive_bayes";
    case ClassifierKind::knn: return "knn";
    case ClassifierKind::svm: return "svm";
  }
  return "?";
}

ClassifierKind classifier_kind_from_string(std::string_view s) {
  for (ClassifierKind kind : all_classifier_kinds()) {
    if (to_string(kind) == s) return kind;
  }
  throw InvalidInput(fmt::format("unknown classifier kind '{}'", s));
}

const std::vector<ClassifierKind>& all_classifier_kinds() {
  static const std::vector<ClassifierKind> kinds = {
      ClassifierKind::decision_tree, ClassifierKind::random_forest,
      ClassifierKind::gradient_boost, ClassifierKind::mlp,
      ClassifierKind::naive_bayes,   ClassifierKind::knn,
      ClassifierKind::svm};
  return kinds;
}

void Scaler::fit(const std::vector<std::vector<double>>& rows) {
  const std::size_t d = rows.empty() ? 0 : rows[0].size();
  mean.assign(d, 0.0);
  scale.assign(d, 1.0);
  if (rows.empty()) return;
  const auto n = static_cast<double>(rows.size());
  for (const auto& row : rows) {
    for (std::size_t f = 0; f < d; ++f) mean[f] += row[f];
  }
  for (double& m : mean) m /= n;
  std::vector<double> var(d, 0.0);
  for (const auto& row : rows) {
    for (std::size_t f = 0; f < d; ++f) {
      const double delta = row[f] - mean[f];
      var[f] += delta * delta;
    }
  }
  for (std::size_t f = 0; f < d; ++f) {
    const double sd = std::sqrt(var[f] / n);
    scale[f] = sd > 1e-12 ? sd : 1.0;  // constant columns pass through
  }
}

std::vector<double> Scaler::apply(std::span<const double> row) const {
  std::vector<double> z(row.size());
  for (std::size_t f = 0; f < row.size(); ++f) z[f] = (row[f] - mean[f]) / scale[f];
  return z;
}

int TrainedModel::predict(std::span<const double> raw_row) const {
  if (raw_row.size() != selected_features.size()) {
    throw InvalidInput(fmt::format("feature schema mismatch: model expects {} features, got {}",
                                   selected_features.size(), raw_row.size()));
  }
  return impl->predict_standardized(scaler.apply(raw_row));
}

std::vector<int> TrainedModel::predict_rows(const std::vector<std::vector<double>>& rows) const {
  std::vector<int> out;
  out.reserve(rows.size());
  for (const auto& row : rows) out.push_back(predict(row));
  return out;
}

TrainedModel fit(ClassifierKind kind, const Hyperparams& hp, const TrainMatrix& train,
                 std::uint64_t seed) {
  if (train.n() == 0) throw InvalidData("empty training set");
  bool has_internal = false, has_external = false;
  for (int label : train.labels) (label == 1 ? has_internal : has_external) = true;
  if (!has_internal || !has_external) {
    throw InvalidData("training set must contain both classes");
  }
  for (const auto& row : train.rows) {
    if (row.size() != train.d()) throw InvalidData("ragged feature matrix");
    for (double v : row) {
      if (!std::isfinite(v)) throw InvalidData("non-finite feature value");
    }
  }

  TrainedModel model;
  model.kind = kind;
  model.hyperparameters = hp.is_null() ? Hyperparams::object() : hp;
  model.selected_features = train.feature_names;
  model.train_seed = seed;
  model.scaler.fit(train.rows);

  detail::Matrix z;
  z.reserve(train.n());
  for (const auto& row : train.rows) z.push_back(model.scaler.apply(row));

  switch (kind) {
    case ClassifierKind::decision_tree:
      model.impl = detail::fit_decision_tree(z, train.labels, model.hyperparameters, seed);
      break;
    case ClassifierKind::random_forest:
      model.impl = detail::fit_random_forest(z, train.labels, model.hyperparameters, seed);
      break;
    case ClassifierKind::gradient_boost:
      model.impl = detail::fit_gradient_boost(z, train.labels, model.hyperparameters, seed);
      break;
    case ClassifierKind::mlp:
      model.impl = detail::fit_mlp(z, train.labels, model.hyperparameters, seed);
      break;
    case ClassifierKind::naive_bayes:
      model.impl = detail::fit_naive_bayes(z, train.labels, model.hyperparameters, seed);
      break;
    case ClassifierKind::knn:
      model.impl = detail::fit_knn(z, train.labels, model.hyperparameters, seed);
      break;
    case ClassifierKind::svm:
      model.impl = detail::fit_svm(z, train.labels, model.hyperparameters, seed);
      break;
  }
  return model;
}

std::vector<int> stratified_fold_assignment(const std::vector<int>& labels,
                                            const std::vector<std::uint32_t>& ids,
                                            int folds, std::uint64_t seed) {
  if (folds < 2) throw InvalidParameter("folds must be >= 2");
  if (labels.size() != ids.size()) throw InvalidInput("labels/ids size mismatch");
  if (static_cast<std::size_t>(folds) > labels.size()) {
    throw InvalidParameter("more folds than samples");
  }

  std::vector<int> assignment(labels.size(), -1);
  // Keyed on ids, not row positions: permuting the rows cannot change which
  // sample lands in which fold. A single fold cursor runs across the classes
  // so fold sizes stay within one sample of each other (and folds == n gives
  // leave-one-out).
  std::size_t cursor = 0;
  for (int cls : {1, 0}) {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == cls) rows.push_back(i);
    }
    std::sort(rows.begin(), rows.end(),
              [&](std::size_t a, std::size_t b) { return ids[a] < ids[b]; });
    Rng rng(substream(seed, "cv_shuffle", static_cast<std::uint64_t>(cls)));
    for (std::size_t i = rows.size(); i > 1; --i) {
      std::swap(rows[i - 1], rows[rng.below(i)]);
    }
    for (std::size_t r : rows) {
      assignment[r] = static_cast<int>(cursor % static_cast<std::size_t>(folds));
      ++cursor;
    }
  }
  return assignment;
}

CvResult cross_validate(ClassifierKind kind, const Hyperparams& hp, const TrainMatrix& data,
                        int folds, std::uint64_t seed) {
  const auto assignment = stratified_fold_assignment(data.labels, data.ids, folds, seed);

  CvResult result;
  result.out_of_fold.assign(data.n(), 0);
  double score_sum = 0.0;
  int scored_folds = 0;

  for (int f = 0; f < folds; ++f) {
    TrainMatrix train;
    train.feature_names = data.feature_names;
    std::vector<std::size_t> val_rows;
    for (std::size_t i = 0; i < data.n(); ++i) {
      if (assignment[i] == f) {
        val_rows.push_back(i);
      } else {
        train.rows.push_back(data.rows[i]);
        train.labels.push_back(data.labels[i]);
        train.ids.push_back(data.ids[i]);
      }
    }

    bool train_internal = false, train_external = false;
    for (int label : train.labels) (label == 1 ? train_internal : train_external) = true;
    if (!train_internal || !train_external) {
      throw InvalidData(fmt::format("stratification failed: fold {} training set is single-class", f));
    }

    const TrainedModel model = fit(kind, hp, train, substream(seed, "fold_fit",
                                                              static_cast<std::uint64_t>(f)));
    FoldMetrics fm;
    for (std::size_t i : val_rows) {
      const int pred = model.predict(data.rows[i]);
      result.out_of_fold[i] = pred;
      if (data.labels[i] == 1) {
        (pred == 1 ? fm.counts.tp : fm.counts.fn) += 1;
      } else {
        (pred == 1 ? fm.counts.fp : fm.counts.tn) += 1;
      }
    }
    result.pooled.tp += fm.counts.tp;
    result.pooled.fn += fm.counts.fn;
    result.pooled.tn += fm.counts.tn;
    result.pooled.fp += fm.counts.fp;

    const bool val_both = (fm.counts.tp + fm.counts.fn) > 0 && (fm.counts.tn + fm.counts.fp) > 0;
    fm.balanced_accuracy =
        val_both ? balanced_accuracy(fm.counts) : std::numeric_limits<double>::quiet_NaN();
    if (val_both) {
      score_sum += fm.balanced_accuracy;
      ++scored_folds;
    }
    result.folds.push_back(fm);
  }

  result.mean_balanced_accuracy = scored_folds > 0
                                      ? score_sum / scored_folds
                                      : balanced_accuracy(result.pooled);
  return result;
}

std::vector<Hyperparams> expand_grid(const nlohmann::json& grid) {
  if (!grid.is_object()) throw InvalidParameter("grid must be a JSON object");
  std::map<std::string, nlohmann::json> params;  // alphabetical iteration
  for (const auto& [key, values] : grid.items()) {
    if (!values.is_array() || values.empty()) {
      throw InvalidParameter(fmt::format("grid parameter '{}' must be a non-empty array", key));
    }
    params[key] = values;
  }

  std::vector<Hyperparams> points{Hyperparams::object()};
  for (const auto& [key, values] : params) {
    std::vector<Hyperparams> expanded;
    expanded.reserve(points.size() * values.size());
    for (const auto& point : points) {
      for (const auto& value : values) {
        Hyperparams next = point;
        next[key] = value;
        expanded.push_back(std::move(next));
      }
    }
    points = std::move(expanded);
  }
  return points;
}

GridSearchResult grid_search(ClassifierKind kind, const nlohmann::json& grid,
                             const TrainMatrix& data, int folds, std::uint64_t seed) {
  if (folds < 2) throw InvalidParameter("folds must be >= 2");
  const auto points = expand_grid(grid);

  GridSearchResult result;
  result.best_score = -1.0;
  for (const auto& point : points) {
    const CvResult cv = cross_validate(kind, point, data, folds, seed);
    result.evaluated.push_back({point, cv.mean_balanced_accuracy});
    if (cv.mean_balanced_accuracy > result.best_score) {  // ties keep the earliest point
      result.best_score = cv.mean_balanced_accuracy;
      result.best = point;
    }
  }
  return result;
}

nlohmann::json default_grids() {
  return nlohmann::json{
      {"decision_tree", {{"criterion", {"entropy", "gini"}}}},
      {"random_forest",
       {{"max_depth", {5, 10, 20}},
        {"max_features", {0.1, 1.0}},
        {"min_samples_leaf", {5, 60}},
        {"estimators", {500}}}},
      {"gradient_boost",
       {{"learning_rate", {0.01, 0.1}},
        {"max_depth", {5}},
        {"estimators", {500}},
        {"subsample", {0.5, 1.0}}}},
      {"mlp",
       {{"activation", {"logistic", "relu", "tanh"}},
        {"alpha", {0.0001, 0.01}},
        {"hidden_layer", {{88, 23}, {30, 8}}},
        {"learning_rate", {"adaptive"}},
        {"solver", {"adam"}}}},
      {"naive_bayes", nlohmann::json::object()},
      {"knn",
       {{"leaf_size", {3, 10}},
        {"neighbors", {3, 4, 7, 10}},
        {"distance", {"manhattan", "euclidean"}}}},
      {"svm",
       {{"C", {0.1, 10.0, 1000.0}},
        {"gamma", {0.0001, 0.01, 1.0}},
        {"kernel", {"rbf", "poly"}}}}};
}

}  // namespace diffguard
