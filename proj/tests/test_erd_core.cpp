#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <random>
#include <set>

#include "erd/ensemble.hpp"
#include "erd/error.hpp"
#include "erd/statistics.hpp"
#include "erd/synthetic2d.hpp"
#include "erd/train.hpp"

using namespace erd;
using Outputs = std::vector<std::vector<double>>;

namespace {

std::vector<double> random_simplex(std::mt19937_64& rng, std::size_t n) {
  std::exponential_distribution<double> e(1.0);
  std::vector<double> p(n);
  double s = 0.0;
  for (double& v : p) s += (v = e(rng));
  for (double& v : p) v /= s;
  return p;
}

// Two 2D classes at (-2, 0) / (2, 0), unlabeled mixture with a far blob at (0, 6).
struct Toy {
  Dataset s, v, u;
  std::vector<bool> truth;
  MlpClassifier pretrained;
};

Toy make_toy() {
  Toy t;
  t.s = make_two_moons_like_2d(Task2d::blobs, 200, 0.4, 1);
  t.v = make_two_moons_like_2d(Task2d::blobs, 60, 0.4, 2);
  auto u_id = make_two_moons_like_2d(Task2d::blobs, 60, 0.4, 3);
  auto u_ood = make_blob_2d(60, 0.0, 6.0, 0.4, 0, 4);
  t.u = concat(u_id, u_ood);
  std::fill(t.u.labels.begin(), t.u.labels.end(), kUnlabeled);
  t.truth.assign(60, false);
  t.truth.resize(120, true);
  TrainConfig cfg;
  cfg.max_epochs = 10;
  t.pretrained = sgd_train(MlpClassifier::initialized({2, 32, 32, 2}, Activation::relu, 1), t.s, cfg).model;
  return t;
}

ErdOptions toy_options() {
  ErdOptions o;
  o.k = 2;
  o.train.learning_rate = 0.05;
  o.train.batch_size = 32;
  o.train.max_epochs = 15;
  o.train.seed = 3;
  return o;
}

}  // namespace

TEST_CASE("tv distance: examples") {
  const std::vector<double> a{0.5, 0.5};
  const std::vector<double> b{0.25, 0.75};
  const std::vector<double> e0{1.0, 0.0};
  const std::vector<double> e1{0.0, 1.0};
  CHECK(tv_distance(a, a) == 0.0);
  CHECK(tv_distance(e0, e1) == 1.0);
  CHECK(tv_distance(a, b) == 0.25);
  const std::vector<double> three{0.2, 0.3, 0.5};
  CHECK_THROWS_AS(tv_distance(a, three), ShapeError);
  const std::vector<double> bad{0.5, 0.6};
  CHECK_THROWS_AS(tv_distance(a, bad), ValidationError);
}

TEST_CASE("disagreement statistic: examples") {
  CHECK(disagreement_statistic(Outputs{{0.2, 0.8}, {0.2, 0.8}, {0.2, 0.8}}) == 0.0);
  CHECK(disagreement_statistic(Outputs{{0.5, 0.5}, {0.25, 0.75}}) == 0.25);
  CHECK(disagreement_statistic(Outputs{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}) == 1.0);
  CHECK_THROWS_AS(disagreement_statistic(Outputs{{0.5, 0.5}}), ArityError);
  CHECK_THROWS_AS(disagreement_statistic(Outputs{{0.5, 0.5}, {0.2, 0.3, 0.5}}), ShapeError);
}

TEST_CASE("entropy of the average: examples") {
  CHECK(entropy_avg_statistic(Outputs{{0, 1, 0}}) == 0.0);
  CHECK(entropy_avg_statistic(Outputs{{0.5, 0.5}, {0.5, 0.5}}) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  // two confident, disagreeing members look exactly like shared uncertainty
  CHECK(entropy_avg_statistic(Outputs{{1, 0}, {0, 1}}) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(disagreement_statistic(Outputs{{1, 0}, {0, 1}}) == 1.0);
  CHECK(disagreement_statistic(Outputs{{0.5, 0.5}, {0.5, 0.5}}) == 0.0);
  CHECK_THROWS_AS(entropy_avg_statistic(Outputs{}), ArityError);
}

TEST_CASE("statistics: random properties") {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<int> kdist(2, 6);
  std::uniform_int_distribution<int> cdist(2, 8);
  for (int t = 0; t < 2000; ++t) {
    const auto k = static_cast<std::size_t>(kdist(rng));
    const auto c = static_cast<std::size_t>(cdist(rng));
    Outputs out;
    for (std::size_t i = 0; i < k; ++i) out.push_back(random_simplex(rng, c));
    const double d = disagreement_statistic(out);
    CHECK(d >= 0.0);
    CHECK(d <= 1.0);
    auto perm = out;
    std::shuffle(perm.begin(), perm.end(), rng);
    CHECK(std::abs(disagreement_statistic(perm) - d) <= 1e-12);
    CHECK(d > 1e-12);
    const double h = entropy_avg_statistic(out);
    CHECK(h >= 0.0);
    CHECK(h <= std::log(static_cast<double>(c)) + 1e-12);
    const Outputs same(k, out[0]);
    CHECK(disagreement_statistic(same) <= 1e-12);
    const Outputs pair{out[0], out[1]};
    CHECK(disagreement_statistic(pair) == tv_distance(out[0], out[1]));
  }
}

TEST_CASE("artificial labels") {
  const std::vector<int> none;
  const auto l = choose_artificial_labels(3, 5, none, 9);
  CHECK(l.size() == 3);
  CHECK(std::set<int>(l.begin(), l.end()).size() == 3);
  for (int c : l) CHECK((c >= 0 && c < 5));
  CHECK(choose_artificial_labels(3, 5, none, 9) == l);
  CHECK(choose_artificial_labels(5, 5, none, 1).size() == 5);
  CHECK_THROWS_AS(choose_artificial_labels(6, 5, none, 1), LabelExhaustionError);
  CHECK_THROWS_AS(choose_artificial_labels(1, 5, none, 1), ArityError);
  const std::vector<int> dup{1, 1};
  CHECK_THROWS_AS(choose_artificial_labels(2, 5, dup, 1), ValidationError);
  const std::vector<int> out_of_range{1, 5};
  CHECK_THROWS_AS(choose_artificial_labels(2, 5, out_of_range, 1), ValidationError);
  const std::vector<int> ok{4, 0};
  CHECK(choose_artificial_labels(2, 5, ok, 1) == ok);
}

TEST_CASE("stop epoch: max validation accuracy after epoch 0, earliest on ties") {
  std::vector<ErdEpochRecord> trace(5);
  const double acc[] = {0.99, 0.8, 0.9, 0.9, 0.85};
  for (std::size_t i = 0; i < 5; ++i) {
    trace[i].epoch = i;
    trace[i].val_accuracy = acc[i];
  }
  CHECK(select_stop_epoch(trace) == 2);
  trace.resize(1);
  CHECK_THROWS_AS(select_stop_epoch(trace), ValidationError);
}

TEST_CASE("erd_fit: contract on a toy mixture") {
  const Toy t = make_toy();
  const auto o = toy_options();
  const auto e = erd_fit(t.pretrained, t.s, t.u, t.v, o, t.truth);
  REQUIRE(e.size() == 2);
  CHECK(e.artificial_labels[0] != e.artificial_labels[1]);
  for (std::size_t m = 0; m < e.size(); ++m) {
    const auto& tr = e.traces[m];
    CHECK(tr.size() == o.train.max_epochs + 1);
    CHECK(tr[0].epoch == 0);
    CHECK(e.stop_epochs[m] >= 1);
    double best = 0.0;
    for (std::size_t i = 1; i < tr.size(); ++i) best = std::max(best, tr[i].val_accuracy);
    CHECK(tr[e.stop_epochs[m]].val_accuracy == best);
    for (std::size_t i = 1; i < e.stop_epochs[m]; ++i) CHECK(tr[i].val_accuracy < best);
    CHECK(tr[1].acc_u_c_on_ood.has_value());
    CHECK(accuracy(e.members[m], t.v) == tr[e.stop_epochs[m]].val_accuracy);
  }

  // determinism, also with one thread per member
  const auto again = erd_fit(t.pretrained, t.s, t.u, t.v, o, t.truth);
  CHECK(again.stop_epochs == e.stop_epochs);
  CHECK(again.members == e.members);
  auto par = o;
  par.parallel = true;
  CHECK(erd_fit(t.pretrained, t.s, t.u, t.v, par, t.truth).members == e.members);

  // regularized disagreement: the OOD half of U disagrees more
  const auto scores = ensemble_scores(e.members, t.u.features, Statistic::tdis_tv);
  double id = 0.0;
  double ood = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) (t.truth[i] ? ood : id) += scores[i];
  CHECK(ood / 60.0 > id / 60.0);
}

TEST_CASE("erd_fit: degenerate and invalid inputs") {
  const Toy t = make_toy();
  auto o = toy_options();
  o.train.max_epochs = 3;
  Dataset empty_u;
  empty_u.features = Matrix(0, 2);
  empty_u.num_classes = 2;
  const auto e = erd_fit(t.pretrained, t.s, empty_u, t.v, o);
  // without U both members see the same data from the same start
  const auto id_scores = ensemble_scores(e.members, t.v.features, Statistic::tdis_tv);
  CHECK(*std::max_element(id_scores.begin(), id_scores.end()) < 0.2);

  o.k = 3;
  CHECK_THROWS_AS(erd_fit(t.pretrained, t.s, t.u, t.v, o), LabelExhaustionError);
  o.k = 2;
  o.labels = {1, 1};
  CHECK_THROWS_AS(erd_fit(t.pretrained, t.s, t.u, t.v, o), ValidationError);
  o.labels.clear();
  Dataset labeled_u = t.u;
  labeled_u.labels[0] = 0;
  CHECK_THROWS_AS(erd_fit(t.pretrained, t.s, labeled_u, t.v, o), ValidationError);
  const auto wrong = MlpClassifier::initialized({3, 4, 2}, Activation::relu, 0);
  CHECK_THROWS_AS(erd_fit(wrong, t.s, t.u, t.v, o), ShapeError);
}

TEST_CASE("detect: strict threshold and nesting") {
  const Toy t = make_toy();
  auto o = toy_options();
  o.train.max_epochs = 4;
  const auto e = erd_fit(t.pretrained, t.s, t.u, t.v, o);
  const auto none = detect(e, t.u, 1.0, Statistic::tdis_tv);
  CHECK(std::none_of(none.flagged.begin(), none.flagged.end(), [](bool f) { return f; }));
  const auto all = detect(e, t.u, -1.0, Statistic::tdis_tv);
  CHECK(std::all_of(all.flagged.begin(), all.flagged.end(), [](bool f) { return f; }));

  const auto base = detect(e, t.u, 0.0, Statistic::tdis_tv);
  std::vector<double> ths = base.scores;
  std::sort(ths.begin(), ths.end());
  std::vector<bool> prev = all.flagged;
  for (double th : ths) {
    const auto d = detect(e, t.u, th, Statistic::tdis_tv);
    for (std::size_t i = 0; i < d.flagged.size(); ++i) {
      CHECK(d.flagged[i] == (d.scores[i] > th));
      if (d.flagged[i]) CHECK(prev[i]);
    }
    prev = d.flagged;
  }
  ErdEnsemble empty;
  CHECK_THROWS_AS(detect(empty, t.u, 0.5, Statistic::tdis_tv), ArityError);
}

TEST_CASE("grid_eval") {
  auto constant = MlpClassifier::initialized({2, 2}, Activation::relu, 0);
  for (double& w : constant.weights[0].data()) w = 0.0;
  constant.biases[0] = {1.0, 0.0};
  std::vector<MlpClassifier> one{constant};
  const auto g = grid_eval(one, {-1, 1, -1, 1}, 4, 3);
  CHECK(g.x.size() == 12);
  for (std::size_t i = 0; i < 12; ++i) {
    CHECK(g.member_argmax[i][0] == 0);
    CHECK(g.tdis[i] == 0.0);
  }
  const auto center = grid_eval(one, {0, 2, -4, 0}, 1, 1);
  CHECK(center.x == std::vector<double>{1.0});
  CHECK(center.y == std::vector<double>{-2.0});

  // class 1 right of x = -0.5 for A and right of x = +0.5 for B
  auto a = constant;
  a.biases[0] = {0.0, 25.0};
  a.weights[0](1, 0) = 50.0;
  auto b = a;
  b.biases[0] = {0.0, -25.0};
  std::vector<MlpClassifier> pair{a, b};
  const auto m = grid_eval(pair, {-2, 2, -1, 1}, 40, 2);
  double inside = 1.0;
  double outside = 0.0;
  for (std::size_t i = 0; i < m.x.size(); ++i) {
    if (std::abs(m.x[i]) < 0.4) inside = std::min(inside, m.tdis[i]);
    if (std::abs(m.x[i]) > 0.6) outside = std::max(outside, m.tdis[i]);
  }
  CHECK(inside > outside);

  auto three_d = MlpClassifier::initialized({3, 2}, Activation::relu, 0);
  std::vector<MlpClassifier> bad{three_d};
  CHECK_THROWS_AS(grid_eval(bad, {}, 2, 2), ShapeError);
}

TEST_CASE("ensemble checkpoint round trip") {
  const Toy t = make_toy();
  auto o = toy_options();
  o.train.max_epochs = 2;
  const auto e = erd_fit(t.pretrained, t.s, t.u, t.v, o, t.truth);
  const auto dir = std::filesystem::temp_directory_path() / "erd_test_core" / "ens";
  std::filesystem::remove_all(dir);
  save_ensemble(e, dir);
  CHECK(std::filesystem::exists(dir / "manifest.json"));
  const auto back = load_ensemble(dir);
  CHECK(back.members == e.members);
  CHECK(back.artificial_labels == e.artificial_labels);
  CHECK(back.stop_epochs == e.stop_epochs);
  write_learning_curve_csv(e.traces[0], dir / "curve.csv");
  CHECK(std::filesystem::exists(dir / "curve.csv"));
}
