#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "erd/dataset.hpp"
#include "erd/error.hpp"
#include "erd/matrix.hpp"
#include "erd/mlp.hpp"
#include "erd/synthetic2d.hpp"
#include "erd/theory.hpp"
#include "erd/train.hpp"
#include "oracles.hpp"

using namespace erd;

namespace {

MlpClassifier zero_model(std::size_t in, std::size_t classes) {
  auto m = MlpClassifier::initialized({in, classes}, Activation::relu, 0);
  for (double& v : m.weights[0].data()) v = 0.0;
  return m;
}

}  // namespace

TEST_CASE("matrix basics") {
  Matrix m{{1, 2, 3}, {4, 5, 6}};
  CHECK(m.rows() == 2);
  CHECK(m.cols() == 3);
  CHECK(m(1, 2) == 6);
  CHECK_THROWS_AS(Matrix(2, 2, std::vector<double>{1, 2, 3}), ShapeError);
  CHECK_THROWS_AS((Matrix{{1, 2}, {3}}), ShapeError);

  const std::vector<std::size_t> idx{1, 0, 1};
  const Matrix s = m.select_rows(idx);
  CHECK(s == Matrix{{4, 5, 6}, {1, 2, 3}, {4, 5, 6}});

  const Matrix st = vstack(m, Matrix{{7, 8, 9}});
  CHECK(st.rows() == 3);
  CHECK(st(2, 0) == 7);
  CHECK(vstack(Matrix(), m) == m);
  CHECK_THROWS_AS(vstack(m, Matrix{{1, 2}}), ShapeError);

  m(0, 0) = std::nan("");
  CHECK_FALSE(m.all_finite());
}

TEST_CASE("spectral norm and symmetric eigenvalues") {
  CHECK(spectral_norm(Matrix{{3, 0}, {0, -4}}) == doctest::Approx(4.0).epsilon(1e-12));
  // rank one: ||u v^T|| = ||u|| ||v||
  CHECK(spectral_norm(Matrix{{1, 2}, {2, 4}}) == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(min_symmetric_eigenvalue(Matrix{{2, 1}, {1, 2}}) == doctest::Approx(1.0).epsilon(1e-12));
  // the antisymmetric part is ignored
  CHECK(min_symmetric_eigenvalue(Matrix{{2, 3}, {-1, 2}}) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("forward: hand-evaluated softmax") {
  auto m = zero_model(3, 2);
  const std::vector<double> x{0.3, -1.0, 7.0};
  auto p = forward(m, x);
  CHECK(p[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(p[1] == doctest::Approx(0.5).epsilon(1e-15));

  m.biases[0] = {std::log(3.0), 0.0};
  p = forward(m, x);
  CHECK(p[0] == doctest::Approx(0.75).epsilon(1e-14));
  CHECK(p[1] == doctest::Approx(0.25).epsilon(1e-14));

  const std::vector<double> bad{1.0, 2.0};
  CHECK_THROWS_AS(forward(m, bad), ShapeError);
}

TEST_CASE("forward: outputs are probability vectors") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g(0.0, 3.0);
  for (int t = 0; t < 50; ++t) {
    const auto act = t % 2 ? Activation::tanh : Activation::relu;
    const auto m = MlpClassifier::initialized({4, 8, 5}, act, static_cast<std::uint64_t>(t));
    Matrix x(7, 4);
    for (double& v : x.data()) v = g(rng);
    const Matrix p = forward_batch(m, x);
    for (std::size_t i = 0; i < p.rows(); ++i) {
      double s = 0.0;
      for (double v : p.row(i)) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
        s += v;
      }
      CHECK(std::abs(s - 1.0) <= 1e-12);
    }
  }
}

TEST_CASE("model validation") {
  CHECK_THROWS_AS(MlpClassifier::initialized({3, 1}, Activation::relu, 0), ShapeError);
  auto m = MlpClassifier::initialized({3, 4, 2}, Activation::relu, 0);
  m.biases[1].push_back(0.0);
  CHECK_THROWS_AS(m.validate(), ShapeError);
}

TEST_CASE("backward: stationary point has vanishing gradient") {
  auto m = zero_model(2, 2);
  m.biases[0] = {40.0, -40.0};
  const Matrix x{{0.5, -0.5}};
  const std::vector<int> y{0};
  const auto g = backward(m, x, y, Loss::cross_entropy);
  CHECK(std::sqrt(g.grad.squared_norm()) < 1e-8);
}

TEST_CASE("backward: gradients match central differences") {
  const auto check = oracle::gradient_check(100, 2024);
  CHECK(check.instances == 100);
  CHECK(check.max_error < 1e-5);
}

TEST_CASE("backward: non-finite activations name the layer") {
  auto m = MlpClassifier::initialized({2, 3, 2}, Activation::relu, 1);
  m.weights[0](0, 0) = std::numeric_limits<double>::infinity();
  const Matrix x{{1.0, 1.0}};
  const std::vector<int> y{0};
  try {
    (void)backward(m, x, y, Loss::cross_entropy);
    FAIL("expected NonFiniteActivation");
  } catch (const NonFiniteActivation& e) {
    CHECK(e.layer() == 0);
  }
}

TEST_CASE("theory net: hand-derived gradient for p = 2, d = 1") {
  auto net = TheoryNet::initialized(2, 1, 2, 0);
  net.w(0, 0) = 0.3;
  net.w(1, 0) = -0.7;
  const Matrix x{{1.5}};
  const std::vector<int> y{0};  // target -1
  // f = tanh(0.45)/2 - tanh(-1.05)/2
  const double f = 0.5 * std::tanh(0.45) - 0.5 * std::tanh(-1.05);
  const double r = -1.0 - f;
  const double sech2_a = 1.0 - std::tanh(0.45) * std::tanh(0.45);
  const double sech2_b = 1.0 - std::tanh(-1.05) * std::tanh(-1.05);
  const auto g = backward(net, x, y);
  CHECK(g.loss == doctest::Approx(0.5 * r * r).epsilon(1e-14));
  CHECK(g.grad_w(0, 0) == doctest::Approx(-r * 0.5 * sech2_a * 1.5).epsilon(1e-14));
  CHECK(g.grad_w(1, 0) == doctest::Approx(r * 0.5 * sech2_b * 1.5).epsilon(1e-14));
}

TEST_CASE("theory net: structure and decoding") {
  const auto net = TheoryNet::initialized(6, 3, 3, 5);
  CHECK(net.v == std::vector<double>{1.0 / 6, 1.0 / 6, 1.0 / 6, -1.0 / 6, -1.0 / 6, -1.0 / 6});
  CHECK(net.label_values == std::vector<double>{-1.0, 0.0, 1.0});
  CHECK(net.decode(-0.2) == 1);
  CHECK(net.decode(-0.6) == 0);
  CHECK(net.decode(-0.5) == 0);  // tie goes to the smaller label
  CHECK(net.decode(5.0) == 2);
  CHECK_THROWS_AS(TheoryNet::initialized(5, 3, 3, 0), ValidationError);
  CHECK(evenly_spaced_targets(1) == std::vector<double>{0.0});
}

TEST_CASE("theory net: training never moves v") {
  auto data = make_two_moons_like_2d(Task2d::blobs, 60, 0.2, 3);
  auto net = TheoryNet::initialized(8, 2, 2, 1);
  const auto v_before = net.v;
  TrainConfig cfg;
  cfg.learning_rate = 0.01;
  cfg.batch_size = 16;
  cfg.max_epochs = 25;
  cfg.loss = Loss::squared;
  const auto out = sgd_train(net, data, cfg);
  CHECK(out.model.v == v_before);
  CHECK_FALSE(out.model.w == net.w);
  cfg.loss = Loss::cross_entropy;
  CHECK_THROWS_AS(sgd_train(net, data, cfg), ValidationError);
}

TEST_CASE("sgd_train: separable blobs are fit exactly") {
  const auto data = make_two_moons_like_2d(Task2d::blobs, 200, 0.3, 9);
  const auto model = MlpClassifier::initialized({2, 16, 2}, Activation::relu, 4);
  TrainConfig cfg;
  cfg.max_epochs = 50;
  cfg.batch_size = 16;
  const auto out = sgd_train(model, data, cfg);
  CHECK(out.trace.size() == 50);
  CHECK(out.trace.back().accuracy == 1.0);
  CHECK(accuracy(out.model, data) == 1.0);
  CHECK(out.model.epochs_trained == 50);
}

TEST_CASE("sgd_train: determinism and zero step") {
  const auto data = make_two_moons_like_2d(Task2d::moons, 120, 0.1, 2);
  const auto model = MlpClassifier::initialized({2, 10, 10, 2}, Activation::relu, 8);
  TrainConfig cfg;
  cfg.max_epochs = 5;
  cfg.seed = 77;
  const auto a = sgd_train(model, data, cfg);
  const auto b = sgd_train(model, data, cfg);
  CHECK(a.model == b.model);

  cfg.learning_rate = 0.0;
  cfg.max_epochs = 4;
  const auto z = sgd_train(model, data, cfg);
  CHECK(z.model.weights == model.weights);
  CHECK(z.model.biases == model.biases);
  CHECK(z.trace.size() == 4);

  cfg.max_epochs = 0;
  CHECK_THROWS_AS(sgd_train(model, data, cfg), ValidationError);
  cfg.max_epochs = 1;
  cfg.learning_rate = -1.0;
  CHECK_THROWS_AS(sgd_train(model, data, cfg), ValidationError);
}

TEST_CASE("sgd_train: divergence reports the epoch") {
  const auto data = make_two_moons_like_2d(Task2d::blobs, 40, 0.1, 2);
  auto model = MlpClassifier::initialized({2, 4, 2}, Activation::relu, 8);
  TrainConfig cfg;
  cfg.learning_rate = 1e300;
  cfg.max_epochs = 5;
  try {
    (void)sgd_train(model, data, cfg);
    FAIL("expected TrainingError");
  } catch (const TrainingError& e) {
    CHECK(e.epoch() >= 1);
    CHECK(e.epoch() <= 5);
  }
}

TEST_CASE("theory_schedule: orthonormal centers") {
  Matrix c(4, 8);
  for (std::size_t i = 0; i < 4; ++i) c(i, i) = 1.0;
  const auto s = theory_schedule(c, Activation::tanh, 400, 20000, 3);
  CHECK(s.centers_norm == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(s.sigma_min - oracle::expected_sech4()) < 0.01);
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 4; ++j) {
      if (i != j) CHECK(s.sigma(i, j) == 0.0);
    }
  }
  CHECK(s.eta == doctest::Approx(4.0 / 400.0));
  CHECK(s.t_stop == static_cast<std::size_t>(std::ceil(1.0 / s.sigma_min)));

  const auto scaled = theory_schedule(c, Activation::tanh, 400, 20000, 3, {2.0, 10.0});
  CHECK(scaled.eta == doctest::Approx(8.0 / 400.0));
  CHECK(scaled.t_stop == static_cast<std::size_t>(std::ceil(10.0 / scaled.sigma_min)));
}

TEST_CASE("theory_schedule: rejected inputs") {
  Matrix dup{{1, 0}, {1, 0}};
  CHECK_THROWS_AS(theory_schedule(dup, Activation::tanh, 10, 2000, 0), DegenerateCentersError);
  Matrix scaled{{2, 0}, {0, 2}};
  CHECK_THROWS_AS(theory_schedule(scaled, Activation::tanh, 10, 2000, 0), ValidationError);
  Matrix ok{{1, 0}, {0, 1}};
  CHECK_THROWS_AS(theory_schedule(ok, Activation::tanh, 10, 999, 0), ValidationError);
}

TEST_CASE("quadrature oracle sanity") {
  // E[sech^4] lies strictly between 0 and 1 and below E[sech^2]
  const double v = oracle::expected_sech4();
  CHECK(v > 0.3);
  CHECK(v < 0.6);
}
