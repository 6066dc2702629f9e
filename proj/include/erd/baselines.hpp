#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

#include "erd/dataset.hpp"
#include "erd/mlp.hpp"
#include "erd/train.hpp"

namespace erd {

/// K members trained on S with the true labels, differing only in their seeds.
struct VanillaEnsemble {
  std::vector<MlpClassifier> members;
  std::vector<std::size_t> stop_epochs;
  std::vector<double> learning_rates;  // chosen per member
};

struct VanillaOptions {
  std::size_t k = 3;
  std::vector<std::size_t> hidden = {100, 100};
  Activation activation = Activation::relu;
  TrainConfig train;
  std::vector<double> learning_rates;  // candidates; empty means train.learning_rate only
  bool same_seed = false;              // force every member onto train.seed
};

/// Member i initializes and shuffles with seed train.seed + i; the (learning rate, epoch)
/// with the best validation accuracy is kept (ties: earlier candidate, earlier epoch).
VanillaEnsemble vanilla_fit(const Dataset& s, const Dataset& v, const VanillaOptions& options);

/// Binary classifier separating S (class 0) from U (class 1), early-stopped on the
/// class-0 accuracy of an ID-only holdout.
struct BinaryDiscriminator {
  MlpClassifier model;
  std::size_t stop_epoch = 0;
  std::vector<double> holdout_accuracy;  // per epoch, index 0 = epoch 1
};

struct BinaryOptions {
  std::vector<std::size_t> hidden = {100, 100};
  Activation activation = Activation::relu;
  TrainConfig train;
  bool early_stopping = true;   // false keeps the model after max_epochs
  bool balance_classes = true;  // reweight so S and U carry equal total weight
};

BinaryDiscriminator binary_fit(const Dataset& s, const Dataset& u, const Dataset& v_id,
                               const BinaryOptions& options);

/// P(class 1 = unlabeled) per row.
std::vector<double> binary_scores(const BinaryDiscriminator& disc, const Matrix& x);

void save_vanilla(const VanillaEnsemble& e, const std::filesystem::path& dir);
VanillaEnsemble load_vanilla(const std::filesystem::path& dir);
void save_binary(const BinaryDiscriminator& b, const std::filesystem::path& dir);
BinaryDiscriminator load_binary(const std::filesystem::path& dir);

}  // namespace erd
