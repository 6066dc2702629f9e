#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "erd/matrix.hpp"
#include "erd/mlp.hpp"

namespace erd {

/// Bound on |phi'| and |phi''| for tanh.
inline constexpr double kTanhGamma = 1.0;

/// Scalar-output two-layer network x -> v^T tanh(W x). The output weights v are
/// fixed at +1/p for the first half of the hidden units and -1/p for the second half;
/// only W is trained. Labels are embedded as evenly spaced targets in [-1, 1].
struct TheoryNet {
  std::size_t p = 0;
  Matrix w;
  std::vector<double> v;
  std::vector<double> label_values;
  Activation activation = Activation::tanh;

  /// W entries i.i.d. N(0, 1).
  static TheoryNet initialized(std::size_t hidden, std::size_t input_dim, std::size_t num_labels,
                               std::uint64_t seed);

  std::size_t input_dim() const { return w.cols(); }
  std::size_t num_labels() const { return label_values.size(); }

  void validate() const;

  double output(std::span<const double> x) const;
  std::vector<double> output_batch(const Matrix& x) const;

  /// Label whose target value is nearest to `f` (ties go to the smaller label).
  int decode(double f) const;
  std::vector<int> predict(const Matrix& x) const;

  friend bool operator==(const TheoryNet&, const TheoryNet&) = default;
};

/// Targets evenly spaced in [-1, 1]; a single label maps to 0.
std::vector<double> evenly_spaced_targets(std::size_t num_labels);

struct TheoryLossGrad {
  double loss = 0.0;
  Matrix grad_w;
};

/// 0.5 * sum_i (y_i - f(x_i; W))^2 + 0.5 * l2 * ||W||^2 and its gradient with respect to W only.
TheoryLossGrad backward(const TheoryNet& net, const Matrix& x, std::span<const int> labels,
                        double l2_coefficient = 0.0);

struct TheoryConstants {
  double c2 = 1.0;
  double c4 = 1.0;
};

struct TheorySchedule {
  double eta = 0.0;
  std::size_t t_stop = 0;
  double sigma_min = 0.0;
  double centers_norm = 0.0;  // spectral norm of C
  Matrix sigma;               // symmetrized Monte Carlo estimate
};

/// Step size and stopping time from the cluster centers C (rows unit norm):
/// Sigma = (C C^T) .* E_g[phi'(Cg) phi'(Cg)^T] with g ~ N(0, I_d) estimated from
/// `mc_samples` draws, eta = c2 K / (n ||C||^2), t_stop = ceil(c4 ||C||^2 / lambda_min(Sigma)).
TheorySchedule theory_schedule(const Matrix& centers, Activation activation, std::size_t n,
                               std::size_t mc_samples, std::uint64_t seed,
                               TheoryConstants constants = {});

}  // namespace erd
