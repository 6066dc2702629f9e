#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "erd/dataset.hpp"
#include "erd/mlp.hpp"
#include "erd/statistics.hpp"
#include "erd/train.hpp"

namespace erd {

/// Per-epoch diagnostics of one fine-tuning run. Epoch 0 is the pretrained model.
/// The ood/id breakdown is only filled when the unlabeled truth was supplied.
struct ErdEpochRecord {
  std::size_t epoch = 0;
  double val_accuracy = 0.0;
  double acc_on_s = 0.0;
  double acc_on_u_with_label_c = 0.0;
  std::optional<double> acc_u_c_on_ood;
  std::optional<double> acc_u_c_on_id;
};

struct ErdEnsemble {
  std::vector<MlpClassifier> members;  // at their selected checkpoints
  std::vector<int> artificial_labels;
  std::vector<std::size_t> stop_epochs;
  std::vector<std::vector<ErdEpochRecord>> traces;

  std::size_t size() const { return members.size(); }
};

struct ErdOptions {
  std::size_t k = 3;
  std::vector<int> labels;  // explicit artificial labels; empty means seeded random
  std::uint64_t label_seed = 0;
  TrainConfig train;        // member i shuffles with derive_seed(train.seed, i)
  bool parallel = false;    // one thread per member
};

/// Artificial labels: the explicit list when given, otherwise K labels drawn without
/// replacement from [0, num_classes) with `seed`.
std::vector<int> choose_artificial_labels(std::size_t k, int num_classes,
                                          std::span<const int> explicit_labels,
                                          std::uint64_t seed);

/// Index of the max-validation-accuracy record among epochs >= 1; ties go to the earliest.
std::size_t select_stop_epoch(std::span<const ErdEpochRecord> trace);

/// Fine-tunes one copy of `pretrained` per artificial label c on S plus U relabeled to c,
/// keeping the checkpoint with the best validation accuracy after at least one epoch.
/// `unlabeled_truth` (true = OOD) only feeds the diagnostic traces.
ErdEnsemble erd_fit(const MlpClassifier& pretrained, const Dataset& s, const Dataset& u,
                    const Dataset& v, const ErdOptions& options,
                    const std::vector<bool>& unlabeled_truth = {});

/// Statistic of the member outputs for every row of `x`.
std::vector<double> ensemble_scores(std::span<const MlpClassifier> members, const Matrix& x,
                                    Statistic statistic);

struct DetectionResult {
  std::vector<double> scores;
  std::vector<bool> flagged;  // scores[i] > threshold
  double threshold = 0.0;
};

DetectionResult detect(const ErdEnsemble& ensemble, const Dataset& test, double threshold,
                       Statistic statistic);

struct GridBox {
  double x_min = -1.0;
  double x_max = 1.0;
  double y_min = -1.0;
  double y_max = 1.0;
};

/// Row-major evaluation grid over cell centers of an nx x ny partition of the box.
struct GridEvaluation {
  std::size_t nx = 0;
  std::size_t ny = 0;
  std::vector<double> x;
  std::vector<double> y;
  std::vector<std::vector<int>> member_argmax;  // [point][member]
  std::vector<double> tdis;                     // 0 for a single model
};

GridEvaluation grid_eval(std::span<const MlpClassifier> models, const GridBox& box,
                         std::size_t nx, std::size_t ny);

/// CSV columns x,y,m0..m{K-1},tdis
void write_grid_csv(const GridEvaluation& grid, const std::filesystem::path& path);

/// CSV columns epoch,val_acc,acc_S,acc_U_c_on_ood,acc_U_c_on_id (breakdown blank when unknown).
void write_learning_curve_csv(std::span<const ErdEpochRecord> trace,
                              const std::filesystem::path& path);

/// Directory with member_<i>.json and manifest.json
/// {kind, artificial_labels, stop_epochs, statistic_defaults}.
void save_ensemble(const ErdEnsemble& ensemble, const std::filesystem::path& dir);
ErdEnsemble load_ensemble(const std::filesystem::path& dir);

}  // namespace erd
