#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <map>
#include <set>

#include "diffguard/errors.hpp"
#include "diffguard/learn.hpp"
#include "diffguard/rng.hpp"

using namespace diffguard;

namespace {

TrainMatrix toy_data(std::size_t n_internal, std::size_t n_external, std::uint64_t seed) {
  TrainMatrix data;
  data.feature_names = {"x0", "x1"};
  Rng rng(seed);
  for (std::size_t i = 0; i < n_internal + n_external; ++i) {
    const int label = i < n_internal ? 1 : 0;
    data.rows.push_back({(label == 1 ? 2.0 : -2.0) + rng.normal(), rng.normal()});
    data.labels.push_back(label);
    data.ids.push_back(static_cast<std::uint32_t>(1000 + i * 3));  // sparse, unique ids
  }
  return data;
}

}  // namespace

TEST_CASE("stratified folds partition the data with balanced class shares") {
  const TrainMatrix data = toy_data(23, 17, 5);
  const int folds = 4;
  const auto assignment = stratified_fold_assignment(data.labels, data.ids, folds, 99);
  REQUIRE(assignment.size() == data.n());

  std::map<int, std::array<int, 2>> per_fold;
  for (std::size_t i = 0; i < data.n(); ++i) {
    REQUIRE(assignment[i] >= 0);
    REQUIRE(assignment[i] < folds);
    per_fold[assignment[i]][static_cast<std::size_t>(data.labels[i])] += 1;
  }
  for (int cls = 0; cls < 2; ++cls) {
    int lo = 1 << 20, hi = 0;
    for (const auto& [fold, counts] : per_fold) {
      lo = std::min(lo, counts[static_cast<std::size_t>(cls)]);
      hi = std::max(hi, counts[static_cast<std::size_t>(cls)]);
    }
    CHECK(hi - lo <= 1);  // within one sample of the global proportion
  }
}

TEST_CASE("folds equal to n gives leave-one-out") {
  const TrainMatrix data = toy_data(6, 4, 7);
  const auto assignment =
      stratified_fold_assignment(data.labels, data.ids, static_cast<int>(data.n()), 3);
  std::set<int> folds(assignment.begin(), assignment.end());
  CHECK(folds.size() == data.n());  // every validation fold has exactly one sample
}

TEST_CASE("fold assignment is keyed on sample id, not row order") {
  TrainMatrix data = toy_data(20, 20, 9);
  const auto assignment = stratified_fold_assignment(data.labels, data.ids, 5, 42);

  // reverse the row order and recompute
  TrainMatrix reversed = data;
  std::reverse(reversed.rows.begin(), reversed.rows.end());
  std::reverse(reversed.labels.begin(), reversed.labels.end());
  std::reverse(reversed.ids.begin(), reversed.ids.end());
  const auto assignment_rev =
      stratified_fold_assignment(reversed.labels, reversed.ids, 5, 42);

  std::map<std::uint32_t, int> by_id, by_id_rev;
  for (std::size_t i = 0; i < data.n(); ++i) {
    by_id[data.ids[i]] = assignment[i];
    by_id_rev[reversed.ids[i]] = assignment_rev[i];
  }
  CHECK(by_id == by_id_rev);
}

TEST_CASE("fold assignment errors") {
  const TrainMatrix data = toy_data(5, 5, 1);
  CHECK_THROWS_AS(stratified_fold_assignment(data.labels, data.ids, 1, 0), InvalidParameter);
  CHECK_THROWS_AS(stratified_fold_assignment(data.labels, data.ids, 11, 0), InvalidParameter);
}

TEST_CASE("cross_validate covers every sample exactly once and is deterministic") {
  const TrainMatrix data = toy_data(30, 24, 13);
  const Hyperparams hp = {{"criterion", "gini"}};
  const CvResult a = cross_validate(ClassifierKind::decision_tree, hp, data, 3, 21);
  const CvResult b = cross_validate(ClassifierKind::decision_tree, hp, data, 3, 21);

  CHECK(a.pooled.tp + a.pooled.fn == 30);  // every internal sample validated once
  CHECK(a.pooled.tn + a.pooled.fp == 24);
  CHECK(a.out_of_fold == b.out_of_fold);
  CHECK(a.mean_balanced_accuracy == b.mean_balanced_accuracy);
  REQUIRE(a.folds.size() == 3);
  for (const auto& fold : a.folds) {
    CHECK(fold.balanced_accuracy >= 0.0);
    CHECK(fold.balanced_accuracy <= 1.0);
  }
}

TEST_CASE("cross_validate reports stratification failure for unlearnable folds") {
  // 2 internal vs 8 external with 5 folds: some training splits lose a class
  TrainMatrix data = toy_data(2, 8, 17);
  CHECK_THROWS_AS(
      cross_validate(ClassifierKind::naive_bayes, {}, data, 5, 3), InvalidData);
}

TEST_CASE("expand_grid is a deterministic cartesian product") {
  const nlohmann::json grid = {{"b", {1, 2}}, {"a", {"x", "y", "z"}}};
  const auto points = expand_grid(grid);
  REQUIRE(points.size() == 6);
  // alphabetical parameter order, last parameter fastest
  CHECK(points[0] == Hyperparams({{"a", "x"}, {"b", 1}}));
  CHECK(points[1] == Hyperparams({{"a", "x"}, {"b", 2}}));
  CHECK(points[2] == Hyperparams({{"a", "y"}, {"b", 1}}));
  CHECK(points[5] == Hyperparams({{"a", "z"}, {"b", 2}}));

  CHECK(expand_grid(nlohmann::json::object()).size() == 1);  // single empty point
  CHECK_THROWS_AS(expand_grid(nlohmann::json{{"a", nlohmann::json::array()}}),
                  InvalidParameter);
}

TEST_CASE("grid_search returns the singleton point and its CV score") {
  const TrainMatrix data = toy_data(24, 24, 19);
  const nlohmann::json grid = {{"criterion", {"entropy"}}};
  const GridSearchResult gs = grid_search(ClassifierKind::decision_tree, grid, data, 4, 31);
  CHECK(gs.best == Hyperparams({{"criterion", "entropy"}}));
  const CvResult cv =
      cross_validate(ClassifierKind::decision_tree, gs.best, data, 4, 31);
  CHECK(gs.best_score == cv.mean_balanced_accuracy);
}

TEST_CASE("grid_search picks the better criterion and ignores dominated duplicates") {
  const TrainMatrix data = toy_data(40, 40, 23);
  const nlohmann::json grid = {{"criterion", {"entropy", "gini"}}};
  const GridSearchResult gs = grid_search(ClassifierKind::decision_tree, grid, data, 4, 37);
  REQUIRE(gs.evaluated.size() == 2);
  const double best = std::max(gs.evaluated[0].mean_balanced_accuracy,
                               gs.evaluated[1].mean_balanced_accuracy);
  CHECK(gs.best_score == best);

  // a duplicated (hence tied or dominated) point never changes the winner
  const nlohmann::json grid_dup = {{"criterion", {"entropy", "gini", "gini"}}};
  const GridSearchResult gs_dup =
      grid_search(ClassifierKind::decision_tree, grid_dup, data, 4, 37);
  CHECK(gs_dup.best == gs.best);
  CHECK(gs_dup.best_score == gs.best_score);
}

TEST_CASE("knn grid search finds a sensible neighbor count") {
  const TrainMatrix data = toy_data(30, 30, 29);
  const nlohmann::json grid = {{"neighbors", {1, 3, 5}},
                               {"distance", {"manhattan", "euclidean"}},
                               {"leaf_size", {3}}};
  const GridSearchResult gs = grid_search(ClassifierKind::knn, grid, data, 3, 41);
  CHECK(gs.evaluated.size() == 6);
  CHECK(gs.best_score > 0.8);
}

TEST_CASE("default grids match the shipped config file") {
  std::ifstream in(std::string(DIFFGUARD_SOURCE_DIR) + "/configs/grids.json");
  REQUIRE(in.good());
  nlohmann::json file_grids;
  in >> file_grids;
  CHECK(file_grids == default_grids());

  // every Table-style best point is reachable inside the default grids
  const auto grids = default_grids();
  CHECK(grids.at("random_forest").at("max_depth").front() == 5);
  CHECK(grids.at("svm").at("C").back() == 1000.0);
  CHECK(grids.at("svm").at("gamma").back() == 1.0);
  const auto hidden = grids.at("mlp").at("hidden_layer");
  CHECK(std::find(hidden.begin(), hidden.end(), nlohmann::json({88, 23})) != hidden.end());
  CHECK(grids.at("naive_bayes").empty());
}
