#include "erd/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "erd/dataset.hpp"
#include "erd/error.hpp"

namespace erd {

namespace {

void require_scores(std::span<const double> id, std::span<const double> ood) {
  if (id.empty() || ood.empty()) throw ArityError("ROC needs ID and OOD scores");
  for (auto s : {id, ood}) {
    for (double v : s) {
      if (std::isnan(v)) throw ValidationError("scores contain NaN");
    }
  }
}

}  // namespace

RocReport roc(std::span<const double> scores_id, std::span<const double> scores_ood) {
  require_scores(scores_id, scores_ood);
  std::vector<std::pair<double, bool>> all;  // (score, is_ood)
  all.reserve(scores_id.size() + scores_ood.size());
  for (double s : scores_id) all.emplace_back(s, false);
  for (double s : scores_ood) all.emplace_back(s, true);
  std::sort(all.begin(), all.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });

  const auto n_id = static_cast<double>(scores_id.size());
  const auto n_ood = static_cast<double>(scores_ood.size());
  constexpr double inf = std::numeric_limits<double>::infinity();

  RocReport r;
  r.thresholds.push_back(inf);
  r.tpr.push_back(0.0);
  r.fpr.push_back(0.0);

  // Integer counts keep the area exact up to the final division.
  double tp = 0.0;
  double fp = 0.0;
  double twice_area = 0.0;
  bool tnr_set = false;
  std::size_t i = 0;
  while (i < all.size()) {
    const double s = all[i].first;
    const double tp0 = tp;
    const double fp0 = fp;
    while (i < all.size() && all[i].first == s) {
      (all[i].second ? tp : fp) += 1.0;
      ++i;
    }
    twice_area += (fp - fp0) * (tp + tp0);
    r.thresholds.push_back(s);
    r.tpr.push_back(tp / n_ood);
    r.fpr.push_back(fp / n_id);
    if (!tnr_set && tp * 100.0 >= 95.0 * n_ood) {
      r.tnr_at_tpr95 = 1.0 - fp / n_id;
      tnr_set = true;
    }
  }
  r.thresholds.push_back(-inf);
  r.tpr.push_back(1.0);
  r.fpr.push_back(1.0);
  r.auroc = twice_area / (2.0 * n_id * n_ood);
  return r;
}

double auroc_bruteforce(std::span<const double> scores_id, std::span<const double> scores_ood) {
  require_scores(scores_id, scores_ood);
  double wins = 0.0;
  for (double o : scores_ood) {
    for (double d : scores_id) {
      if (o > d) {
        wins += 1.0;
      } else if (o == d) {
        wins += 0.5;
      }
    }
  }
  return wins / (static_cast<double>(scores_id.size()) * static_cast<double>(scores_ood.size()));
}

double threshold_for_fpr(std::span<const double> validation_id_scores, double target_fpr) {
  if (validation_id_scores.size() < kMinCalibrationScores) {
    throw SizeError("threshold calibration needs at least " +
                    std::to_string(kMinCalibrationScores) + " validation scores, got " +
                    std::to_string(validation_id_scores.size()));
  }
  if (!(target_fpr > 0.0 && target_fpr < 1.0)) {
    throw ValidationError("target_fpr must lie in (0, 1)");
  }
  std::vector<double> sorted(validation_id_scores.begin(), validation_id_scores.end());
  for (double v : sorted) {
    if (std::isnan(v)) throw ValidationError("scores contain NaN");
  }
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  const auto n = static_cast<double>(sorted.size());
  // Walk candidates from the top; `above` counts scores strictly greater than the candidate.
  double chosen = sorted.front();
  std::size_t i = 0;
  while (i < sorted.size()) {
    const double s = sorted[i];
    const auto above = static_cast<double>(i);
    if (above > target_fpr * n) break;
    chosen = s;
    while (i < sorted.size() && sorted[i] == s) ++i;
  }
  return chosen;
}

double flagged_fraction(std::span<const double> scores, double threshold) {
  if (scores.empty()) return 0.0;
  std::size_t k = 0;
  for (double s : scores) k += s > threshold ? 1 : 0;
  return static_cast<double>(k) / static_cast<double>(scores.size());
}

void write_roc_csv(const RocReport& report, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << "threshold,fpr,tpr\n";
  for (std::size_t i = 0; i < report.thresholds.size(); ++i) {
    out << format_double(report.thresholds[i]) << ',' << format_double(report.fpr[i]) << ','
        << format_double(report.tpr[i]) << '\n';
  }
}

nlohmann::json roc_summary(const RocReport& report, double threshold_at_fpr05) {
  return {{"auroc", report.auroc},
          {"tnr_at_tpr95", report.tnr_at_tpr95},
          {"threshold_at_fpr05", threshold_at_fpr05}};
}

void partition_scores(std::span<const double> scores, const std::vector<bool>& truth,
                      std::vector<double>& id, std::vector<double>& ood) {
  if (scores.size() != truth.size()) throw ShapeError("scores and truth differ in length");
  id.clear();
  ood.clear();
  for (std::size_t i = 0; i < scores.size(); ++i) (truth[i] ? ood : id).push_back(scores[i]);
}

}  // namespace erd
