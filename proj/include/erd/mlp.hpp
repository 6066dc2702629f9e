#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "erd/matrix.hpp"

namespace erd {

enum class Activation { relu, tanh };
enum class Loss { cross_entropy, squared };

std::string to_string(Activation a);
std::string to_string(Loss l);
Activation parse_activation(std::string_view s);
Loss parse_loss(std::string_view s);

/// Fully connected softmax classifier. weights[l] has shape dims[l+1] x dims[l];
/// the hidden layers use `activation`, the output layer is softmax.
struct MlpClassifier {
  std::vector<std::size_t> layer_dims;
  std::vector<Matrix> weights;
  std::vector<std::vector<double>> biases;
  Activation activation = Activation::relu;
  std::uint64_t seed = 0;
  std::size_t epochs_trained = 0;

  /// He-scaled Gaussian weights (variance 2/fan_in for relu, 1/fan_in for tanh), zero biases.
  static MlpClassifier initialized(std::vector<std::size_t> dims, Activation activation,
                                   std::uint64_t seed);

  std::size_t input_dim() const { return layer_dims.front(); }
  std::size_t num_classes() const { return layer_dims.back(); }
  std::size_t num_layers() const { return weights.size(); }

  /// Throws ShapeError when dims, weights and biases disagree or fewer than 2 classes.
  void validate() const;

  friend bool operator==(const MlpClassifier&, const MlpClassifier&) = default;
};

struct MlpGradients {
  std::vector<Matrix> weights;
  std::vector<std::vector<double>> biases;

  double squared_norm() const;
};

struct MlpLossGrad {
  double loss = 0.0;
  MlpGradients grad;
};

/// Softmax output for one sample.
std::vector<double> forward(const MlpClassifier& model, std::span<const double> x);

/// Softmax outputs for every row of `x` (n x classes).
Matrix forward_batch(const MlpClassifier& model, const Matrix& x);

std::vector<int> predict(const MlpClassifier& model, const Matrix& x);

/// Weighted mean per-sample loss over the batch plus 0.5 * l2 * sum ||W||^2 (weights only).
/// `sample_weights` empty means all ones. Throws NonFiniteActivation(layer) on overflow.
MlpLossGrad backward(const MlpClassifier& model, const Matrix& x, std::span<const int> labels,
                     Loss loss, std::span<const double> sample_weights = {},
                     double l2_coefficient = 0.0);

/// model.params -= step * grad
void apply_step(MlpClassifier& model, const MlpGradients& grad, double step);

}  // namespace erd
