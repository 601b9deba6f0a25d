#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "diffguard/errors.hpp"
#include "learn_internal.hpp"

namespace diffguard::detail {

namespace {

double kernel_eval(std::string_view kernel, double gamma, std::span<const double> a,
                   std::span<const double> b) {
  if (kernel == "rbf") {
    double sq = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      const double d = a[i] - b[i];
      sq += d * d;
    }
    return std::exp(-gamma * sq);
  }
  // cubic polynomial kernel, coef0 = 0
  double dot = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) dot += a[i] * b[i];
  const double g = gamma * dot;
  return g * g * g;
}

}  // namespace

double SvmClassifier::decision(std::span<const double> z) const {
  double f = bias_;
  for (std::size_t i = 0; i < support_.size(); ++i) {
    f += coef_[i] * kernel_eval(kernel_, gamma_, support_[i], z);
  }
  return f;
}

int SvmClassifier::predict_standardized(std::span<const double> z) const {
  return decision(z) >= 0.0 ? 1 : 0;
}

nlohmann::json SvmClassifier::state() const {
  return {{"kernel", kernel_},
          {"gamma", gamma_},
          {"bias", bias_},
          {"support", support_},
          {"coef", coef_}};
}

std::shared_ptr<Classifier> SvmClassifier::from_state(const nlohmann::json& j) {
  return std::make_shared<SvmClassifier>(
      j.at("kernel").get<std::string>(), j.at("gamma").get<double>(),
      j.at("bias").get<double>(), j.at("support").get<Matrix>(),
      j.at("coef").get<std::vector<double>>());
}

// Soft-margin dual solved by SMO with maximal-violating-pair selection,
// stopping at KKT gap <= 1e-3.
std::shared_ptr<Classifier> fit_svm(const Matrix& z, const std::vector<int>& y,
                                    const Hyperparams& hp, std::uint64_t /*seed*/) {
  const double c_param = hp.value("C", 1.0);
  const double gamma = hp.value("gamma", 1.0);
  const std::string kernel = hp.value("kernel", "rbf");
  if (kernel != "rbf" && kernel != "poly") {
    throw InvalidParameter(fmt::format("unknown svm kernel '{}'", kernel));
  }
  if (c_param <= 0.0 || gamma <= 0.0) {
    throw InvalidParameter("svm C and gamma must be positive");
  }
  constexpr double kTol = 1e-3;
  constexpr long kMaxIterations = 200000;

  const auto n = static_cast<Eigen::Index>(z.size());
  const auto d = static_cast<Eigen::Index>(z[0].size());
  Eigen::MatrixXd x(n, d);
  Eigen::VectorXd ys(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      x(i, j) = z[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
    ys(i) = y[static_cast<std::size_t>(i)] == 1 ? 1.0 : -1.0;
  }

  const Eigen::MatrixXd gram = x * x.transpose();
  Eigen::MatrixXd k(n, n);
  if (kernel == "rbf") {
    const Eigen::VectorXd sq = gram.diagonal();
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) {
        k(i, j) = std::exp(-gamma * (sq(i) + sq(j) - 2.0 * gram(i, j)));
      }
    }
  } else {
    k = (gamma * gram.array()).cube().matrix();
  }

  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd f = Eigen::VectorXd::Zero(n);  // sum_j alpha_j y_j K_ij, no bias

  double gap_high = 0.0, gap_low = 0.0;
  for (long iter = 0; iter < kMaxIterations; ++iter) {
    // i maximizes (y - f) over I_up, j minimizes it over I_low
    Eigen::Index best_i = -1, best_j = -1;
    gap_high = -std::numeric_limits<double>::infinity();
    gap_low = std::numeric_limits<double>::infinity();
    for (Eigen::Index t = 0; t < n; ++t) {
      const double v = ys(t) - f(t);
      const bool in_up = (ys(t) > 0.0 && alpha(t) < c_param) || (ys(t) < 0.0 && alpha(t) > 0.0);
      const bool in_low = (ys(t) < 0.0 && alpha(t) < c_param) || (ys(t) > 0.0 && alpha(t) > 0.0);
      if (in_up && v > gap_high) {
        gap_high = v;
        best_i = t;
      }
      if (in_low && v < gap_low) {
        gap_low = v;
        best_j = t;
      }
    }
    if (best_i < 0 || best_j < 0 || gap_high - gap_low <= kTol) break;

    const Eigen::Index i = best_i, j = best_j;
    const double ei = f(i) - ys(i);
    const double ej = f(j) - ys(j);
    double eta = k(i, i) + k(j, j) - 2.0 * k(i, j);
    if (eta <= 1e-12) eta = 1e-12;

    const double ai_old = alpha(i), aj_old = alpha(j);
    double lo, hi;
    if (ys(i) != ys(j)) {
      lo = std::max(0.0, aj_old - ai_old);
      hi = std::min(c_param, c_param + aj_old - ai_old);
    } else {
      lo = std::max(0.0, ai_old + aj_old - c_param);
      hi = std::min(c_param, ai_old + aj_old);
    }

    double aj_new = std::clamp(aj_old + ys(j) * (ei - ej) / eta, lo, hi);
    const double ai_new = ai_old + ys(i) * ys(j) * (aj_old - aj_new);
    if (std::abs(aj_new - aj_old) < 1e-14) break;  // no feasible progress

    alpha(i) = ai_new;
    alpha(j) = aj_new;
    f += (ai_new - ai_old) * ys(i) * k.col(i) + (aj_new - aj_old) * ys(j) * k.col(j);
  }

  const double bias = 0.5 * (gap_high + gap_low);

  Matrix support;
  std::vector<double> coef;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (alpha(i) > 1e-12) {
      support.push_back(z[static_cast<std::size_t>(i)]);
      coef.push_back(alpha(i) * ys(i));
    }
  }
  return std::make_shared<SvmClassifier>(kernel, gamma, bias, std::move(support),
                                         std::move(coef));
}

}  // namespace diffguard::detail
