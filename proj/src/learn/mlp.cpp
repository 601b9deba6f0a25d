#include <cmath>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "diffguard/errors.hpp"
#include "learn_internal.hpp"

namespace diffguard::detail {

namespace {

enum class Activation { logistic, identity, tanh_act, relu };

Activation activation_from_string(std::string_view s) {
  if (s == "logistic") return Activation::logistic;
  if (s == "identity") return Activation::identity;
  if (s == "tanh") return Activation::tanh_act;
  if (s == "relu") return Activation::relu;
  throw InvalidParameter(fmt::format("unknown activation '{}'", s));
}

Eigen::MatrixXd apply_activation(const Eigen::MatrixXd& z, Activation act) {
  switch (act) {
    case Activation::logistic:
      return (1.0 / (1.0 + (-z.array()).exp())).matrix();
    case Activation::identity:
      return z;
    case Activation::tanh_act:
      return z.array().tanh().matrix();
    case Activation::relu:
      return z.cwiseMax(0.0);
  }
  return z;
}

// derivative expressed through the activation output
Eigen::MatrixXd activation_grad(const Eigen::MatrixXd& a, Activation act) {
  switch (act) {
    case Activation::logistic:
      return (a.array() * (1.0 - a.array())).matrix();
    case Activation::identity:
      return Eigen::MatrixXd::Ones(a.rows(), a.cols());
    case Activation::tanh_act:
      return (1.0 - a.array().square()).matrix();
    case Activation::relu:
      return (a.array() > 0.0).cast<double>().matrix();
  }
  return a;
}

Eigen::MatrixXd glorot_init(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
  Eigen::MatrixXd w(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      w(r, c) = rng.uniform(-limit, limit);
    }
  }
  return w;
}

struct Adam {
  Eigen::MatrixXd m, v;
  explicit Adam(const Eigen::MatrixXd& shape)
      : m(Eigen::MatrixXd::Zero(shape.rows(), shape.cols())),
        v(Eigen::MatrixXd::Zero(shape.rows(), shape.cols())) {}

  void step(Eigen::MatrixXd& param, const Eigen::MatrixXd& grad, double lr, int t) {
    constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    m = beta1 * m + (1.0 - beta1) * grad;
    v = beta2 * v + (1.0 - beta2) * grad.array().square().matrix();
    const double bc1 = 1.0 - std::pow(beta1, t);
    const double bc2 = 1.0 - std::pow(beta2, t);
    param.array() -= lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + eps);
  }
};

MlpClassifier::Layer to_layer(const Eigen::MatrixXd& w, const Eigen::VectorXd& b) {
  MlpClassifier::Layer layer;
  layer.out = static_cast<int>(w.rows());
  layer.in = static_cast<int>(w.cols());
  layer.weights.resize(static_cast<std::size_t>(w.size()));
  for (Eigen::Index r = 0; r < w.rows(); ++r) {
    for (Eigen::Index c = 0; c < w.cols(); ++c) {
      layer.weights[static_cast<std::size_t>(r * w.cols() + c)] = w(r, c);
    }
  }
  layer.bias.assign(b.data(), b.data() + b.size());
  return layer;
}

}  // namespace

double MlpClassifier::probability(std::span<const double> z) const {
  const Activation act = activation_from_string(activation_);
  std::vector<double> cur(z.begin(), z.end());
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const Layer& layer = layers_[l];
    std::vector<double> next(static_cast<std::size_t>(layer.out), 0.0);
    for (int o = 0; o < layer.out; ++o) {
      double acc = layer.bias[static_cast<std::size_t>(o)];
      const double* wrow = layer.weights.data() + static_cast<std::size_t>(o) *
                                                      static_cast<std::size_t>(layer.in);
      for (int i = 0; i < layer.in; ++i) acc += wrow[i] * cur[static_cast<std::size_t>(i)];
      next[static_cast<std::size_t>(o)] = acc;
    }
    const bool hidden = l + 1 < layers_.size();
    for (double& v : next) {
      if (hidden) {
        switch (act) {
          case Activation::logistic: v = 1.0 / (1.0 + std::exp(-v)); break;
          case Activation::identity: break;
          case Activation::tanh_act: v = std::tanh(v); break;
          case Activation::relu: v = std::max(0.0, v); break;
        }
      } else {
        v = 1.0 / (1.0 + std::exp(-v));  // logistic output unit
      }
    }
    cur = std::move(next);
  }
  return cur[0];
}

int MlpClassifier::predict_standardized(std::span<const double> z) const {
  return probability(z) >= 0.5 ? 1 : 0;
}

nlohmann::json MlpClassifier::state() const {
  nlohmann::json layers = nlohmann::json::array();
  for (const Layer& l : layers_) {
    layers.push_back({{"in", l.in}, {"out", l.out}, {"weights", l.weights}, {"bias", l.bias}});
  }
  return {{"activation", activation_}, {"layers", layers}};
}

std::shared_ptr<Classifier> MlpClassifier::from_state(const nlohmann::json& j) {
  std::vector<Layer> layers;
  for (const auto& l : j.at("layers")) {
    Layer layer;
    layer.in = l.at("in").get<int>();
    layer.out = l.at("out").get<int>();
    layer.weights = l.at("weights").get<std::vector<double>>();
    layer.bias = l.at("bias").get<std::vector<double>>();
    layers.push_back(std::move(layer));
  }
  return std::make_shared<MlpClassifier>(j.at("activation").get<std::string>(),
                                         std::move(layers));
}

// Two hidden layers, logistic output, full-batch Adam with fixed seed;
// stops at |loss delta| < 1e-4 or 500 epochs.
std::shared_ptr<Classifier> fit_mlp(const Matrix& z, const std::vector<int>& y,
                                    const Hyperparams& hp, std::uint64_t seed) {
  const std::string activation_name = hp.value("activation", "relu");
  const Activation act = activation_from_string(activation_name);
  const double alpha = hp.value("alpha", 0.0001);
  int h1 = 100, h2 = 20;
  if (hp.contains("hidden_layer")) {
    const auto& hidden = hp.at("hidden_layer");
    h1 = hidden.at(0).get<int>();
    h2 = hidden.at(1).get<int>();
  }

  const auto n = static_cast<Eigen::Index>(z.size());
  const auto d = static_cast<Eigen::Index>(z[0].size());
  Eigen::MatrixXd x(n, d);
  Eigen::VectorXd target(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) x(i, j) = z[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    target(i) = y[static_cast<std::size_t>(i)];
  }

  Rng rng(substream(seed, "mlp_init"));
  Eigen::MatrixXd w1 = glorot_init(h1, d, rng);
  Eigen::VectorXd b1 = Eigen::VectorXd::Zero(h1);
  Eigen::MatrixXd w2 = glorot_init(h2, h1, rng);
  Eigen::VectorXd b2 = Eigen::VectorXd::Zero(h2);
  Eigen::MatrixXd w3 = glorot_init(1, h2, rng);
  Eigen::VectorXd b3 = Eigen::VectorXd::Zero(1);

  Adam opt_w1(w1), opt_w2(w2), opt_w3(w3);
  Adam opt_b1(b1), opt_b2(b2), opt_b3(b3);

  constexpr double kLearningRate = 0.01;
  constexpr double kTol = 1e-4;
  constexpr int kMaxEpochs = 500;
  const double inv_n = 1.0 / static_cast<double>(n);

  double prev_loss = std::numeric_limits<double>::infinity();
  for (int epoch = 1; epoch <= kMaxEpochs; ++epoch) {
    const Eigen::MatrixXd z1 = (x * w1.transpose()).rowwise() + b1.transpose();
    const Eigen::MatrixXd a1 = apply_activation(z1, act);
    const Eigen::MatrixXd z2 = (a1 * w2.transpose()).rowwise() + b2.transpose();
    const Eigen::MatrixXd a2 = apply_activation(z2, act);
    const Eigen::VectorXd z3 = (a2 * w3.transpose()).col(0).array() + b3(0);
    const Eigen::VectorXd p = (1.0 / (1.0 + (-z3.array()).exp())).matrix();

    const Eigen::ArrayXd pc = p.array().min(1.0 - 1e-12).max(1e-12);
    double loss = -(target.array() * pc.log() +
                    (1.0 - target.array()) * (1.0 - pc).log()).mean();
    loss += 0.5 * alpha * inv_n *
            (w1.squaredNorm() + w2.squaredNorm() + w3.squaredNorm());

    const Eigen::VectorXd delta3 = (p - target) * inv_n;
    const Eigen::MatrixXd grad_w3 = delta3.transpose() * a2 + alpha * inv_n * w3;
    Eigen::VectorXd grad_b3(1);
    grad_b3(0) = delta3.sum();

    const Eigen::MatrixXd delta2 =
        (delta3 * w3).cwiseProduct(activation_grad(a2, act));
    const Eigen::MatrixXd grad_w2 = delta2.transpose() * a1 + alpha * inv_n * w2;
    const Eigen::VectorXd grad_b2 = delta2.colwise().sum();

    const Eigen::MatrixXd delta1 = (delta2 * w2).cwiseProduct(activation_grad(a1, act));
    const Eigen::MatrixXd grad_w1 = delta1.transpose() * x + alpha * inv_n * w1;
    const Eigen::VectorXd grad_b1 = delta1.colwise().sum();

    opt_w1.step(w1, grad_w1, kLearningRate, epoch);
    opt_w2.step(w2, grad_w2, kLearningRate, epoch);
    opt_w3.step(w3, grad_w3, kLearningRate, epoch);
    Eigen::MatrixXd b1m = b1, b2m = b2, b3m = b3;
    opt_b1.step(b1m, grad_b1, kLearningRate, epoch);
    opt_b2.step(b2m, grad_b2, kLearningRate, epoch);
    opt_b3.step(b3m, grad_b3, kLearningRate, epoch);
    b1 = b1m;
    b2 = b2m;
    b3 = b3m;

    if (std::abs(prev_loss - loss) < kTol) break;
    prev_loss = loss;
  }

  std::vector<MlpClassifier::Layer> layers;
  layers.push_back(to_layer(w1, b1));
  layers.push_back(to_layer(w2, b2));
  layers.push_back(to_layer(w3, b3));
  return std::make_shared<MlpClassifier>(activation_name, std::move(layers));
}

}  // namespace diffguard::detail
