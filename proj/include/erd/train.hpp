#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "erd/dataset.hpp"
#include "erd/mlp.hpp"
#include "erd/theory.hpp"

namespace erd {

inline constexpr std::size_t kFullBatch = 0;

struct TrainConfig {
  double learning_rate = 0.05;
  std::size_t batch_size = 64;  // kFullBatch = whole training set per step
  std::size_t max_epochs = 30;
  std::uint64_t seed = 0;
  double l2_coefficient = 0.0;
  Loss loss = Loss::cross_entropy;

  /// Rejects negative or non-finite rates, max_epochs == 0 and negative l2.
  /// A zero learning rate is allowed and leaves the weights untouched.
  void validate() const;
};

struct EpochStats {
  std::size_t epoch = 0;  // 1-based
  double loss = 0.0;      // mean per-step training loss over the epoch
  double accuracy = 0.0;  // training accuracy after the epoch
};

template <class Model>
struct TrainResult {
  Model model;
  std::vector<EpochStats> trace;
};

template <class Model>
using EpochCallback = std::function<void(const EpochStats&, const Model&)>;

/// Mini-batch gradient descent. Shuffling is driven by config.seed only, so identical
/// (model, data, config) give bit-identical results. Labels must all be in [0, classes).
/// Throws TrainingError(epoch) when the loss or an activation becomes non-finite.
TrainResult<MlpClassifier> sgd_train(MlpClassifier model, const Dataset& train,
                                     const TrainConfig& config,
                                     const EpochCallback<MlpClassifier>& on_epoch = {},
                                     std::span<const double> sample_weights = {});

/// Gradient descent on the theory network; only W moves. Requires loss == squared.
TrainResult<TheoryNet> sgd_train(TheoryNet model, const Dataset& train, const TrainConfig& config,
                                 const EpochCallback<TheoryNet>& on_epoch = {});

double accuracy(std::span<const int> predicted, std::span<const int> truth);
double accuracy(const MlpClassifier& model, const Dataset& data);

}  // namespace erd
