#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "diffguard/errors.hpp"
#include "learn_internal.hpp"

namespace diffguard::detail {

namespace {

double class_impurity(double n1, double n, SplitCriterion criterion) {
  if (n <= 0.0) return 0.0;
  const double p1 = n1 / n;
  const double p0 = 1.0 - p1;
  if (criterion == SplitCriterion::gini) return 1.0 - p0 * p0 - p1 * p1;
  double h = 0.0;
  if (p0 > 0.0) h -= p0 * std::log(p0);
  if (p1 > 0.0) h -= p1 * std::log(p1);
  return h;
}

struct BestSplit {
  int feature = -1;
  double threshold = 0.0;
  double gain = 0.0;
  std::size_t left_count = 0;
};

std::vector<int> select_features(std::size_t d, double max_features, Rng* rng) {
  const auto total = static_cast<int>(d);
  auto k = static_cast<int>(max_features * static_cast<double>(total));
  k = std::clamp(k, 1, total);
  std::vector<int> features(d);
  for (std::size_t i = 0; i < d; ++i) features[i] = static_cast<int>(i);
  if (k >= total) return features;  // canonical order, no rng consumed
  for (int i = 0; i < k; ++i) {
    const auto j = static_cast<std::size_t>(i) + rng->below(d - static_cast<std::size_t>(i));
    std::swap(features[static_cast<std::size_t>(i)], features[j]);
  }
  features.resize(static_cast<std::size_t>(k));
  std::sort(features.begin(), features.end());  // keep feature-order tie-breaking
  return features;
}

}  // namespace

SplitCriterion criterion_from_string(std::string_view s) {
  if (s == "entropy") return SplitCriterion::entropy;
  if (s == "gini") return SplitCriterion::gini;
  throw InvalidParameter(fmt::format("unknown split criterion '{}'", s));
}

std::vector<TreeNode> build_classification_tree(const Matrix& x, const std::vector<int>& y,
                                                const std::vector<std::size_t>& rows,
                                                const TreeOptions& opt) {
  std::vector<TreeNode> nodes;
  std::vector<std::pair<double, int>> scratch;  // (value, label), sorted per feature

  struct Work {
    int node;
    std::vector<std::size_t> rows;
    int depth;
  };
  std::vector<Work> stack;
  nodes.emplace_back();
  stack.push_back({0, rows, 0});

  while (!stack.empty()) {
    Work w = std::move(stack.back());
    stack.pop_back();

    const auto n = static_cast<double>(w.rows.size());
    double n1 = 0.0;
    for (std::size_t r : w.rows) n1 += y[r];
    TreeNode& node = nodes[static_cast<std::size_t>(w.node)];
    node.count = static_cast<int>(w.rows.size());
    node.value = n1 / n;

    const bool pure = n1 == 0.0 || n1 == n;
    const bool depth_capped = opt.max_depth > 0 && w.depth >= opt.max_depth;
    const bool too_small = w.rows.size() < 2 * static_cast<std::size_t>(opt.min_samples_leaf);
    if (pure || depth_capped || too_small) continue;

    const double parent = class_impurity(n1, n, opt.criterion);
    const auto features = select_features(x[0].size(), opt.max_features, opt.rng);

    BestSplit best;
    for (int f : features) {
      scratch.clear();
      for (std::size_t r : w.rows) {
        scratch.emplace_back(x[r][static_cast<std::size_t>(f)], y[r]);
      }
      std::sort(scratch.begin(), scratch.end());

      double left_n = 0.0, left_n1 = 0.0;
      for (std::size_t i = 0; i + 1 < scratch.size(); ++i) {
        left_n += 1.0;
        left_n1 += scratch[i].second;
        if (scratch[i].first == scratch[i + 1].first) continue;
        const double right_n = n - left_n;
        if (left_n < opt.min_samples_leaf || right_n < opt.min_samples_leaf) continue;
        const double gain = parent - (left_n * class_impurity(left_n1, left_n, opt.criterion) +
                                      right_n * class_impurity(n1 - left_n1, right_n,
                                                               opt.criterion)) /
                                         n;
        if (gain > best.gain + 1e-12) {
          best.feature = f;
          best.threshold = 0.5 * (scratch[i].first + scratch[i + 1].first);
          best.gain = gain;
          best.left_count = static_cast<std::size_t>(left_n);
        }
      }
    }
    if (best.feature < 0 || best.gain <= 1e-12) continue;

    std::vector<std::size_t> left_rows, right_rows;
    left_rows.reserve(best.left_count);
    right_rows.reserve(w.rows.size() - best.left_count);
    for (std::size_t r : w.rows) {
      (x[r][static_cast<std::size_t>(best.feature)] <= best.threshold ? left_rows : right_rows)
          .push_back(r);
    }
    if (left_rows.empty() || right_rows.empty()) continue;  // midpoint collapsed

    const int left_id = static_cast<int>(nodes.size());
    nodes.emplace_back();
    const int right_id = static_cast<int>(nodes.size());
    nodes.emplace_back();
    TreeNode& parent_node = nodes[static_cast<std::size_t>(w.node)];
    parent_node.feature = best.feature;
    parent_node.threshold = best.threshold;
    parent_node.left = left_id;
    parent_node.right = right_id;
    stack.push_back({right_id, std::move(right_rows), w.depth + 1});
    stack.push_back({left_id, std::move(left_rows), w.depth + 1});
  }
  return nodes;
}

std::vector<TreeNode> build_regression_tree(const Matrix& x, const std::vector<double>& target,
                                            const std::vector<std::size_t>& rows,
                                            const RegTreeOptions& opt) {
  std::vector<TreeNode> nodes;
  std::vector<std::pair<double, double>> scratch;  // (value, target)

  struct Work {
    int node;
    std::vector<std::size_t> rows;
    int depth;
  };
  std::vector<Work> stack;
  nodes.emplace_back();
  stack.push_back({0, rows, 0});

  while (!stack.empty()) {
    Work w = std::move(stack.back());
    stack.pop_back();

    const auto n = static_cast<double>(w.rows.size());
    double sum = 0.0, sum_sq = 0.0;
    for (std::size_t r : w.rows) {
      sum += target[r];
      sum_sq += target[r] * target[r];
    }
    TreeNode& node = nodes[static_cast<std::size_t>(w.node)];
    node.count = static_cast<int>(w.rows.size());
    node.value = sum / n;

    const double parent_sse = sum_sq - sum * sum / n;
    const bool depth_capped = opt.max_depth > 0 && w.depth >= opt.max_depth;
    const bool too_small = w.rows.size() < 2 * static_cast<std::size_t>(opt.min_samples_leaf);
    if (depth_capped || too_small || parent_sse <= 1e-12) continue;

    BestSplit best;
    for (std::size_t f = 0; f < x[0].size(); ++f) {
      scratch.clear();
      for (std::size_t r : w.rows) scratch.emplace_back(x[r][f], target[r]);
      std::sort(scratch.begin(), scratch.end());

      double left_n = 0.0, left_sum = 0.0, left_sq = 0.0;
      for (std::size_t i = 0; i + 1 < scratch.size(); ++i) {
        left_n += 1.0;
        left_sum += scratch[i].second;
        left_sq += scratch[i].second * scratch[i].second;
        if (scratch[i].first == scratch[i + 1].first) continue;
        const double right_n = n - left_n;
        if (left_n < opt.min_samples_leaf || right_n < opt.min_samples_leaf) continue;
        const double right_sum = sum - left_sum;
        const double right_sq = sum_sq - left_sq;
        const double sse = (left_sq - left_sum * left_sum / left_n) +
                           (right_sq - right_sum * right_sum / right_n);
        const double gain = parent_sse - sse;
        if (gain > best.gain + 1e-12) {
          best.feature = static_cast<int>(f);
          best.threshold = 0.5 * (scratch[i].first + scratch[i + 1].first);
          best.gain = gain;
        }
      }
    }
    if (best.feature < 0) continue;

    std::vector<std::size_t> left_rows, right_rows;
    for (std::size_t r : w.rows) {
      (x[r][static_cast<std::size_t>(best.feature)] <= best.threshold ? left_rows : right_rows)
          .push_back(r);
    }
    if (left_rows.empty() || right_rows.empty()) continue;

    const int left_id = static_cast<int>(nodes.size());
    nodes.emplace_back();
    const int right_id = static_cast<int>(nodes.size());
    nodes.emplace_back();
    TreeNode& parent_node = nodes[static_cast<std::size_t>(w.node)];
    parent_node.feature = best.feature;
    parent_node.threshold = best.threshold;
    parent_node.left = left_id;
    parent_node.right = right_id;
    stack.push_back({right_id, std::move(right_rows), w.depth + 1});
    stack.push_back({left_id, std::move(left_rows), w.depth + 1});
  }
  return nodes;
}

int tree_leaf_index(const std::vector<TreeNode>& nodes, std::span<const double> z) {
  int i = 0;
  while (nodes[static_cast<std::size_t>(i)].feature >= 0) {
    const TreeNode& node = nodes[static_cast<std::size_t>(i)];
    i = z[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left : node.right;
  }
  return i;
}

double tree_value(const std::vector<TreeNode>& nodes, std::span<const double> z) {
  return nodes[static_cast<std::size_t>(tree_leaf_index(nodes, z))].value;
}

nlohmann::json nodes_to_json(const std::vector<TreeNode>& nodes) {
  nlohmann::json arr = nlohmann::json::array();
  for (const TreeNode& n : nodes) {
    arr.push_back({{"feature", n.feature},
                   {"threshold", n.threshold},
                   {"left", n.left},
                   {"right", n.right},
                   {"value", n.value},
                   {"count", n.count}});
  }
  return arr;
}

std::vector<TreeNode> nodes_from_json(const nlohmann::json& j) {
  std::vector<TreeNode> nodes;
  nodes.reserve(j.size());
  for (const auto& item : j) {
    TreeNode n;
    n.feature = item.at("feature").get<int>();
    n.threshold = item.at("threshold").get<double>();
    n.left = item.at("left").get<int>();
    n.right = item.at("right").get<int>();
    n.value = item.at("value").get<double>();
    n.count = item.at("count").get<int>();
    nodes.push_back(n);
  }
  return nodes;
}

}  // namespace diffguard::detail
