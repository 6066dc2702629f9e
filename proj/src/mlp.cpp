#include "erd/mlp.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <random>

#include "erd/error.hpp"

namespace erd {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMat>;
using Map = Eigen::Map<RowMat>;

ConstMap view(const Matrix& m) {
  return ConstMap(m.data().data(), static_cast<Eigen::Index>(m.rows()),
                  static_cast<Eigen::Index>(m.cols()));
}

Map view(Matrix& m) {
  return Map(m.data().data(), static_cast<Eigen::Index>(m.rows()),
             static_cast<Eigen::Index>(m.cols()));
}

void activate(RowMat& z, Activation a) {
  if (a == Activation::relu) {
    z = z.cwiseMax(0.0);
  } else {
    z = z.array().tanh().matrix();
  }
}

// Derivative expressed through the activation output.
RowMat activation_derivative(const RowMat& out, Activation a) {
  if (a == Activation::relu) return (out.array() > 0.0).cast<double>().matrix();
  return (1.0 - out.array().square()).matrix();
}

void softmax_rows(RowMat& z) {
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    auto r = z.row(i);
    const double m = r.maxCoeff();
    r = (r.array() - m).exp().matrix();
    r /= r.sum();
  }
}

void check_finite(const RowMat& m, std::size_t layer) {
  if (!m.allFinite()) throw NonFiniteActivation(layer);
}

// Activations of every layer; acts[0] is the input, acts.back() the softmax output.
// logits receives the pre-softmax values of the last layer.
std::vector<RowMat> run_layers(const MlpClassifier& model, const Matrix& x, RowMat* logits) {
  if (x.cols() != model.input_dim()) {
    throw ShapeError("input has " + std::to_string(x.cols()) + " features, model expects " +
                     std::to_string(model.input_dim()));
  }
  std::vector<RowMat> acts;
  acts.reserve(model.num_layers() + 1);
  acts.emplace_back(view(x));
  for (std::size_t l = 0; l < model.num_layers(); ++l) {
    const auto w = view(model.weights[l]);
    Eigen::Map<const Eigen::RowVectorXd> b(model.biases[l].data(),
                                           static_cast<Eigen::Index>(model.biases[l].size()));
    RowMat z = acts.back() * w.transpose();
    z.rowwise() += b;
    check_finite(z, l);
    if (l + 1 < model.num_layers()) {
      activate(z, model.activation);
    } else {
      if (logits) *logits = z;
      softmax_rows(z);
    }
    check_finite(z, l);
    acts.push_back(std::move(z));
  }
  return acts;
}

}  // namespace

std::string to_string(Activation a) { return a == Activation::relu ? "relu" : "tanh"; }
std::string to_string(Loss l) { return l == Loss::cross_entropy ? "cross_entropy" : "squared"; }

Activation parse_activation(std::string_view s) {
  if (s == "relu") return Activation::relu;
  if (s == "tanh") return Activation::tanh;
  throw ValidationError("unknown activation '" + std::string(s) + "' (expected relu|tanh)");
}

Loss parse_loss(std::string_view s) {
  if (s == "cross_entropy") return Loss::cross_entropy;
  if (s == "squared") return Loss::squared;
  throw ValidationError("unknown loss '" + std::string(s) + "' (expected cross_entropy|squared)");
}

MlpClassifier MlpClassifier::initialized(std::vector<std::size_t> dims, Activation activation,
                                         std::uint64_t seed) {
  MlpClassifier m;
  m.layer_dims = std::move(dims);
  m.activation = activation;
  m.seed = seed;
  if (m.layer_dims.size() < 2) throw ShapeError("an MLP needs at least input and output dims");
  std::mt19937_64 rng(seed);
  for (std::size_t l = 0; l + 1 < m.layer_dims.size(); ++l) {
    const std::size_t fan_in = m.layer_dims[l];
    const std::size_t fan_out = m.layer_dims[l + 1];
    const double gain = activation == Activation::relu ? 2.0 : 1.0;
    std::normal_distribution<double> dist(0.0, std::sqrt(gain / static_cast<double>(fan_in)));
    Matrix w(fan_out, fan_in);
    for (double& v : w.data()) v = dist(rng);
    m.weights.push_back(std::move(w));
    m.biases.emplace_back(fan_out, 0.0);
  }
  m.validate();
  return m;
}

void MlpClassifier::validate() const {
  if (layer_dims.size() < 2) throw ShapeError("an MLP needs at least input and output dims");
  if (layer_dims.back() < 2) throw ShapeError("an MLP classifier needs at least 2 classes");
  if (weights.size() + 1 != layer_dims.size() || biases.size() != weights.size()) {
    throw ShapeError("layer count does not match layer_dims");
  }
  for (std::size_t l = 0; l < weights.size(); ++l) {
    if (layer_dims[l] == 0) throw ShapeError("zero-width layer");
    if (weights[l].rows() != layer_dims[l + 1] || weights[l].cols() != layer_dims[l]) {
      throw ShapeError("weights[" + std::to_string(l) + "] has shape " +
                       std::to_string(weights[l].rows()) + "x" +
                       std::to_string(weights[l].cols()) + ", expected " +
                       std::to_string(layer_dims[l + 1]) + "x" + std::to_string(layer_dims[l]));
    }
    if (biases[l].size() != layer_dims[l + 1]) {
      throw ShapeError("biases[" + std::to_string(l) + "] has wrong length");
    }
  }
}

double MlpGradients::squared_norm() const {
  double s = 0.0;
  for (const auto& w : weights) {
    for (double v : w.data()) s += v * v;
  }
  for (const auto& b : biases) {
    for (double v : b) s += v * v;
  }
  return s;
}

std::vector<double> forward(const MlpClassifier& model, std::span<const double> x) {
  Matrix one(1, x.size(), std::vector<double>(x.begin(), x.end()));
  Matrix out = forward_batch(model, one);
  return out.data();
}

Matrix forward_batch(const MlpClassifier& model, const Matrix& x) {
  auto acts = run_layers(model, x, nullptr);
  const RowMat& out = acts.back();
  Matrix result(static_cast<std::size_t>(out.rows()), static_cast<std::size_t>(out.cols()));
  view(result) = out;
  return result;
}

std::vector<int> predict(const MlpClassifier& model, const Matrix& x) {
  const Matrix probs = forward_batch(model, x);
  std::vector<int> out(probs.rows());
  for (std::size_t i = 0; i < probs.rows(); ++i) {
    auto r = probs.row(i);
    out[i] = static_cast<int>(std::max_element(r.begin(), r.end()) - r.begin());
  }
  return out;
}

MlpLossGrad backward(const MlpClassifier& model, const Matrix& x, std::span<const int> labels,
                     Loss loss, std::span<const double> sample_weights, double l2_coefficient) {
  const std::size_t n = x.rows();
  if (labels.size() != n) throw ShapeError("labels and features disagree in length");
  if (!sample_weights.empty() && sample_weights.size() != n) {
    throw ShapeError("sample_weights and features disagree in length");
  }
  if (n == 0) throw ShapeError("empty batch");
  const auto k = static_cast<int>(model.num_classes());
  for (int y : labels) {
    if (y < 0 || y >= k) throw ValidationError("label " + std::to_string(y) + " outside [0, classes)");
  }

  RowMat logits;
  auto acts = run_layers(model, x, &logits);
  const RowMat& probs = acts.back();

  // delta = d(total loss)/d(logits)
  RowMat delta = probs;
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = (sample_weights.empty() ? 1.0 : sample_weights[i]) / static_cast<double>(n);
    const auto ii = static_cast<Eigen::Index>(i);
    const int y = labels[i];
    auto p = probs.row(ii);
    if (loss == Loss::cross_entropy) {
      const double m = logits.row(ii).maxCoeff();
      const double lse = m + std::log((logits.row(ii).array() - m).exp().sum());
      total += w * (lse - logits(ii, y));
      delta.row(ii) = p;
      delta(ii, y) -= 1.0;
    } else {
      Eigen::RowVectorXd r = p;
      r(y) -= 1.0;
      total += w * 0.5 * r.squaredNorm();
      // softmax Jacobian J = diag(p) - p p^T applied to r
      const double pr = p.dot(r);
      delta.row(ii) = (p.array() * (r.array() - pr)).matrix();
    }
    delta.row(ii) *= w;
  }

  MlpLossGrad out;
  out.grad.weights.resize(model.num_layers());
  out.grad.biases.resize(model.num_layers());
  for (std::size_t l = model.num_layers(); l-- > 0;) {
    const RowMat& input = acts[l];
    Matrix gw(model.weights[l].rows(), model.weights[l].cols());
    view(gw) = delta.transpose() * input;
    if (l2_coefficient != 0.0) view(gw) += l2_coefficient * view(model.weights[l]);
    std::vector<double> gb(model.biases[l].size());
    Eigen::Map<Eigen::RowVectorXd>(gb.data(), static_cast<Eigen::Index>(gb.size())) =
        delta.colwise().sum();
    if (l > 0) {
      RowMat next = delta * view(model.weights[l]);
      delta = (next.array() * activation_derivative(acts[l], model.activation).array()).matrix();
    }
    out.grad.weights[l] = std::move(gw);
    out.grad.biases[l] = std::move(gb);
  }

  if (l2_coefficient != 0.0) {
    double sq = 0.0;
    for (const auto& w : model.weights) sq += view(w).squaredNorm();
    total += 0.5 * l2_coefficient * sq;
  }
  out.loss = total;
  return out;
}

void apply_step(MlpClassifier& model, const MlpGradients& grad, double step) {
  for (std::size_t l = 0; l < model.num_layers(); ++l) {
    view(model.weights[l]) -= step * view(grad.weights[l]);
    auto& b = model.biases[l];
    for (std::size_t j = 0; j < b.size(); ++j) b[j] -= step * grad.biases[l][j];
  }
}

}  // namespace erd
