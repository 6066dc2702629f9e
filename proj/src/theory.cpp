#include "erd/theory.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <random>

#include "erd/error.hpp"

namespace erd {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Eigen::Map<const RowMat> view(const Matrix& m) {
  return {m.data().data(), static_cast<Eigen::Index>(m.rows()),
          static_cast<Eigen::Index>(m.cols())};
}

void require_smooth(Activation a) {
  if (a != Activation::tanh) {
    throw ValidationError("the theory network needs an activation with bounded first and second "
                          "derivatives; only tanh is supported");
  }
}

}  // namespace

std::vector<double> evenly_spaced_targets(std::size_t num_labels) {
  if (num_labels == 0) throw ValidationError("need at least one label");
  if (num_labels == 1) return {0.0};
  std::vector<double> t(num_labels);
  for (std::size_t k = 0; k < num_labels; ++k) {
    t[k] = -1.0 + 2.0 * static_cast<double>(k) / static_cast<double>(num_labels - 1);
  }
  return t;
}

TheoryNet TheoryNet::initialized(std::size_t hidden, std::size_t input_dim,
                                 std::size_t num_labels, std::uint64_t seed) {
  if (hidden == 0 || hidden % 2 != 0) throw ValidationError("hidden width p must be even and > 0");
  TheoryNet net;
  net.p = hidden;
  net.w = Matrix(hidden, input_dim);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (double& x : net.w.data()) x = gauss(rng);
  net.v.assign(hidden, 0.0);
  const double inv_p = 1.0 / static_cast<double>(hidden);
  for (std::size_t r = 0; r < hidden; ++r) net.v[r] = r < hidden / 2 ? inv_p : -inv_p;
  net.label_values = evenly_spaced_targets(num_labels);
  return net;
}

void TheoryNet::validate() const {
  require_smooth(activation);
  if (p == 0 || p % 2 != 0) throw ValidationError("hidden width p must be even and > 0");
  if (w.rows() != p || v.size() != p) throw ShapeError("theory net weights do not match p");
  if (label_values.empty()) throw ValidationError("theory net needs label targets");
}

std::vector<double> TheoryNet::output_batch(const Matrix& x) const {
  if (x.cols() != input_dim()) throw ShapeError("input dimension does not match theory net");
  Eigen::Map<const Eigen::VectorXd> vv(v.data(), static_cast<Eigen::Index>(v.size()));
  const RowMat hidden = (view(x) * view(w).transpose()).array().tanh().matrix();
  const Eigen::VectorXd f = hidden * vv;
  if (!f.allFinite()) throw NonFiniteActivation(0);
  return {f.data(), f.data() + f.size()};
}

double TheoryNet::output(std::span<const double> x) const {
  Matrix one(1, x.size(), std::vector<double>(x.begin(), x.end()));
  return output_batch(one).front();
}

int TheoryNet::decode(double f) const {
  int best = 0;
  double best_dist = std::abs(f - label_values[0]);
  for (std::size_t k = 1; k < label_values.size(); ++k) {
    const double d = std::abs(f - label_values[k]);
    if (d < best_dist) {
      best_dist = d;
      best = static_cast<int>(k);
    }
  }
  return best;
}

std::vector<int> TheoryNet::predict(const Matrix& x) const {
  const auto f = output_batch(x);
  std::vector<int> out(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = decode(f[i]);
  return out;
}

TheoryLossGrad backward(const TheoryNet& net, const Matrix& x, std::span<const int> labels,
                        double l2_coefficient) {
  net.validate();
  if (labels.size() != x.rows()) throw ShapeError("labels and features disagree in length");
  if (x.cols() != net.input_dim()) throw ShapeError("input dimension does not match theory net");
  const auto n = static_cast<Eigen::Index>(x.rows());

  // one n x p buffer: pre-activation, then tanh, then the per-unit gradient coefficients
  RowMat h = view(x) * view(net.w).transpose();
  h = h.array().tanh();
  if (!h.allFinite()) throw NonFiniteActivation(0);
  Eigen::Map<const Eigen::VectorXd> v(net.v.data(), static_cast<Eigen::Index>(net.p));
  const Eigen::VectorXd f = h * v;

  Eigen::VectorXd residual(n);  // f_i - y_i
  for (Eigen::Index i = 0; i < n; ++i) {
    const int y = labels[static_cast<std::size_t>(i)];
    if (y < 0 || static_cast<std::size_t>(y) >= net.num_labels()) {
      throw ValidationError("label " + std::to_string(y) + " outside the theory net label set");
    }
    residual(i) = f(i) - net.label_values[static_cast<std::size_t>(y)];
  }

  // dL/dW_r = sum_i (f_i - y_i) v_r phi'(w_r . x_i) x_i
  h = (1.0 - h.array().square()).colwise() * residual.array();
  h.array().rowwise() *= v.transpose().array();

  TheoryLossGrad out;
  out.grad_w = Matrix(net.p, net.input_dim());
  Eigen::Map<RowMat>(out.grad_w.data().data(), static_cast<Eigen::Index>(net.p),
                     static_cast<Eigen::Index>(net.input_dim())).noalias() = h.transpose() * view(x);
  out.loss = 0.5 * residual.squaredNorm();
  if (l2_coefficient != 0.0) {
    Eigen::Map<RowMat>(out.grad_w.data().data(), static_cast<Eigen::Index>(net.p),
                       static_cast<Eigen::Index>(net.input_dim())) += l2_coefficient * view(net.w);
    out.loss += 0.5 * l2_coefficient * view(net.w).squaredNorm();
  }
  return out;
}

TheorySchedule theory_schedule(const Matrix& centers, Activation activation, std::size_t n,
                               std::size_t mc_samples, std::uint64_t seed,
                               TheoryConstants constants) {
  require_smooth(activation);
  if (centers.rows() == 0 || centers.cols() == 0) throw ShapeError("no cluster centers");
  if (mc_samples < 1000) throw ValidationError("mc_samples must be at least 1000");
  if (n == 0) throw ValidationError("n must be positive");
  if (!(constants.c2 > 0.0) || !(constants.c4 > 0.0)) {
    throw ValidationError("theory constants c2, c4 must be positive");
  }
  const auto k = static_cast<Eigen::Index>(centers.rows());
  const auto d = static_cast<Eigen::Index>(centers.cols());
  const auto c = view(centers);
  for (Eigen::Index i = 0; i < k; ++i) {
    if (std::abs(c.row(i).norm() - 1.0) > 1e-6) {
      throw ValidationError("cluster center " + std::to_string(i) + " is not unit norm");
    }
  }

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd moment = Eigen::MatrixXd::Zero(k, k);
  Eigen::VectorXd g(d);
  for (std::size_t s = 0; s < mc_samples; ++s) {
    for (Eigen::Index j = 0; j < d; ++j) g(j) = gauss(rng);
    const Eigen::VectorXd t = (c * g).array().tanh().matrix();
    const Eigen::VectorXd dphi = (1.0 - t.array().square()).matrix();
    moment.noalias() += dphi * dphi.transpose();
  }
  moment /= static_cast<double>(mc_samples);

  const Eigen::MatrixXd gram = c * c.transpose();
  Eigen::MatrixXd sigma = gram.cwiseProduct(moment);
  sigma = 0.5 * (sigma + sigma.transpose()).eval();

  TheorySchedule out;
  out.sigma = Matrix(static_cast<std::size_t>(k), static_cast<std::size_t>(k));
  Eigen::Map<RowMat>(out.sigma.data().data(), k, k) = sigma;
  out.sigma_min = min_symmetric_eigenvalue(out.sigma);
  if (out.sigma_min <= 1e-10) {
    throw DegenerateCentersError("lambda_min(Sigma) = " + std::to_string(out.sigma_min) +
                                 " <= 1e-10; cluster centers coincide");
  }
  out.centers_norm = spectral_norm(centers);
  const double norm_sq = out.centers_norm * out.centers_norm;
  out.eta = constants.c2 * static_cast<double>(k) / (static_cast<double>(n) * norm_sq);
  out.t_stop = static_cast<std::size_t>(std::ceil(constants.c4 * norm_sq / out.sigma_min));
  return out;
}

}  // namespace erd
