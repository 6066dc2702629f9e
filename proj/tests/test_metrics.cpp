#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>

#include "erd/error.hpp"
#include "erd/metrics.hpp"
#include "oracles.hpp"

using namespace erd;

TEST_CASE("roc: hand examples") {
  const std::vector<double> id{0.1, 0.2};
  const std::vector<double> ood{0.8, 0.9};
  const auto r = roc(id, ood);
  CHECK(r.auroc == 1.0);
  CHECK(r.tnr_at_tpr95 == 1.0);
  CHECK(auroc_bruteforce(id, ood) == 1.0);

  const std::vector<double> same(5, 0.3);
  CHECK(roc(same, same).auroc == 0.5);
  CHECK(auroc_bruteforce(same, same) == 0.5);

  const std::vector<double> id3{0.1, 0.4, 0.35};
  const std::vector<double> ood2{0.8, 0.3};
  CHECK(roc(id3, ood2).auroc == doctest::Approx(4.0 / 6.0).epsilon(1e-15));
  CHECK(auroc_bruteforce(id3, ood2) == doctest::Approx(4.0 / 6.0).epsilon(1e-15));

  const std::vector<double> empty;
  CHECK_THROWS_AS(roc(empty, ood), ArityError);
  CHECK_THROWS_AS(auroc_bruteforce(id, empty), ArityError);
}

TEST_CASE("roc: curve shape") {
  const std::vector<double> id{0.1, 0.3, 0.3, 0.7};
  const std::vector<double> ood{0.3, 0.9, 0.8};
  const auto r = roc(id, ood);
  CHECK(r.thresholds.front() == std::numeric_limits<double>::infinity());
  CHECK(r.thresholds.back() == -std::numeric_limits<double>::infinity());
  CHECK(r.tpr.front() == 0.0);
  CHECK(r.fpr.front() == 0.0);
  CHECK(r.tpr.back() == 1.0);
  CHECK(r.fpr.back() == 1.0);
  for (std::size_t i = 1; i < r.tpr.size(); ++i) {
    CHECK(r.tpr[i] >= r.tpr[i - 1]);
    CHECK(r.fpr[i] >= r.fpr[i - 1]);
    CHECK(r.thresholds[i] < r.thresholds[i - 1]);
  }
  // trapezoid over the curve
  double area = 0.0;
  for (std::size_t i = 1; i < r.tpr.size(); ++i) {
    area += (r.fpr[i] - r.fpr[i - 1]) * (r.tpr[i] + r.tpr[i - 1]) / 2.0;
  }
  CHECK(area == doctest::Approx(r.auroc).epsilon(1e-14));
}

TEST_CASE("roc: tnr at 95 uses the first point reaching the target, no interpolation") {
  // 20 OOD, 19 of them above every ID score: tpr 0.95 is reached before any ID point
  std::vector<double> ood;
  for (int i = 0; i < 19; ++i) ood.push_back(10.0 + i);
  ood.push_back(0.5);
  std::vector<double> id;
  for (int i = 0; i < 10; ++i) id.push_back(i / 10.0);
  auto r = roc(id, ood);
  CHECK(r.tnr_at_tpr95 == 1.0);

  // one more OOD point pushed down: 18/20 = 0.9 < 0.95 until the ID block is crossed
  ood[18] = 0.45;
  r = roc(id, ood);
  std::size_t first = 0;
  while (r.tpr[first] < 0.95) ++first;
  CHECK(r.tnr_at_tpr95 == doctest::Approx(1.0 - r.fpr[first]).epsilon(1e-15));
  CHECK(r.tnr_at_tpr95 == doctest::Approx(0.5));
}

TEST_CASE("roc: fast path equals pairwise counting on random tied and untied inputs") {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> size(1, 200);
  std::uniform_int_distribution<int> levels(1, 12);
  std::normal_distribution<double> g(0.0, 1.0);
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const int n_id = size(rng);
    const int n_ood = size(rng);
    const bool tied = t % 2 == 0;
    const int lv = levels(rng);
    auto draw = [&](double shift) {
      const double v = g(rng) + shift;
      return tied ? std::round(v * lv) / lv : v;
    };
    std::vector<double> id(static_cast<std::size_t>(n_id));
    std::vector<double> ood(static_cast<std::size_t>(n_ood));
    for (double& v : id) v = draw(0.0);
    for (double& v : ood) v = draw(0.7);
    worst = std::max(worst, std::abs(roc(id, ood).auroc - oracle::mann_whitney(id, ood)));
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("roc: invariant under strictly increasing transforms") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int t = 0; t < 50; ++t) {
    std::vector<double> id(40);
    std::vector<double> ood(30);
    for (double& v : id) v = std::round(4 * g(rng)) / 4;
    for (double& v : ood) v = std::round(4 * (g(rng) + 0.5)) / 4;
    auto tid = id;
    auto tood = ood;
    for (double& v : tid) v = std::exp(3 * v) + 1.0;
    for (double& v : tood) v = std::exp(3 * v) + 1.0;
    CHECK(roc(id, ood).auroc == roc(tid, tood).auroc);
    CHECK(roc(id, ood).tnr_at_tpr95 == roc(tid, tood).tnr_at_tpr95);
  }
}

TEST_CASE("threshold_for_fpr: examples") {
  std::vector<double> s;
  for (int i = 1; i <= 100; ++i) s.push_back(i / 100.0);
  const double t = threshold_for_fpr(s, 0.5);
  CHECK(t == 0.5);
  CHECK(std::count_if(s.begin(), s.end(), [&](double v) { return v > t; }) == 50);

  CHECK(threshold_for_fpr(s, 1e-9) >= 1.0);

  const std::vector<double> flat(30, 0.2);
  for (const double target : {0.0001, 0.05, 0.5, 0.99}) {
    CHECK(threshold_for_fpr(flat, target) == 0.2);
    CHECK(flagged_fraction(flat, threshold_for_fpr(flat, target)) == 0.0);
  }

  const std::vector<double> few(19, 0.0);
  CHECK_THROWS_AS(threshold_for_fpr(few, 0.05), SizeError);
  CHECK_THROWS_AS(threshold_for_fpr(s, 0.0), ValidationError);
  CHECK_THROWS_AS(threshold_for_fpr(s, 1.0), ValidationError);
}

TEST_CASE("threshold_for_fpr: tight on random inputs") {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.001, 0.999);
  for (int t = 0; t < 300; ++t) {
    std::vector<double> s(20 + t);
    for (double& v : s) v = t % 3 == 0 ? std::round(3 * g(rng)) : g(rng);
    const double target = u(rng);
    const double th = threshold_for_fpr(s, target);
    CHECK(std::find(s.begin(), s.end(), th) != s.end());
    CHECK(flagged_fraction(s, th) <= target);
    // the next lower distinct score would flag too many
    double lower = -std::numeric_limits<double>::infinity();
    for (double v : s) {
      if (v < th) lower = std::max(lower, v);
    }
    if (std::isfinite(lower)) CHECK(flagged_fraction(s, lower) > target);
  }
}

TEST_CASE("roc exports") {
  const std::vector<double> id{0.1, 0.2};
  const std::vector<double> ood{0.15, 0.9};
  const auto r = roc(id, ood);
  const auto dir = std::filesystem::temp_directory_path() / "erd_test_metrics";
  std::filesystem::create_directories(dir);
  write_roc_csv(r, dir / "roc.csv");
  std::ifstream in(dir / "roc.csv");
  std::string header;
  std::getline(in, header);
  CHECK(header == "threshold,fpr,tpr");
  std::size_t lines = 0;
  for (std::string line; std::getline(in, line);) ++lines;
  CHECK(lines == r.thresholds.size());

  const auto j = roc_summary(r, 0.2);
  CHECK(j.at("auroc").get<double>() == r.auroc);
  CHECK(j.contains("tnr_at_tpr95"));
  CHECK(j.at("threshold_at_fpr05").get<double>() == 0.2);
}
