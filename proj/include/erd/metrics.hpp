#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include <json.hpp>

namespace erd {

/// ROC with OOD as the positive class. Point i counts scores >= thresholds[i] as positive;
/// thresholds run from +inf through every distinct score (descending) to -inf, so
/// tpr/fpr go from (0, 0) to (1, 1). Tied scores move the curve in one diagonal step.
struct RocReport {
  std::vector<double> thresholds;
  std::vector<double> tpr;
  std::vector<double> fpr;
  double auroc = 0.0;
  double tnr_at_tpr95 = 0.0;  // 1 - fpr at the first point with tpr >= 0.95
};

RocReport roc(std::span<const double> scores_id, std::span<const double> scores_ood);

/// Mann-Whitney by pairwise counting: (wins + 0.5 ties) / (n_id n_ood).
double auroc_bruteforce(std::span<const double> scores_id, std::span<const double> scores_ood);

inline constexpr std::size_t kMinCalibrationScores = 20;

/// Smallest validation score s such that the fraction of validation scores strictly
/// above s is <= target_fpr. Needs at least kMinCalibrationScores scores.
double threshold_for_fpr(std::span<const double> validation_id_scores, double target_fpr);

/// Fraction of scores strictly above the threshold.
double flagged_fraction(std::span<const double> scores, double threshold);

/// CSV columns threshold,fpr,tpr (sentinels written as inf / -inf).
void write_roc_csv(const RocReport& report, const std::filesystem::path& path);

/// {auroc, tnr_at_tpr95, threshold_at_fpr05}
nlohmann::json roc_summary(const RocReport& report, double threshold_at_fpr05);

/// Splits scores by a truth vector (true = OOD).
void partition_scores(std::span<const double> scores, const std::vector<bool>& truth,
                      std::vector<double>& id, std::vector<double>& ood);

}  // namespace erd
