#include "erd/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "erd/error.hpp"

namespace erd {

void TrainConfig::validate() const {
  if (!std::isfinite(learning_rate) || learning_rate < 0.0) {
    throw ValidationError("learning_rate must be a finite non-negative number");
  }
  if (max_epochs < 1) throw ValidationError("max_epochs must be >= 1");
  if (!std::isfinite(l2_coefficient) || l2_coefficient < 0.0) {
    throw ValidationError("l2_coefficient must be >= 0");
  }
}

double accuracy(std::span<const int> predicted, std::span<const int> truth) {
  if (predicted.size() != truth.size()) throw ShapeError("accuracy: length mismatch");
  if (truth.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) hits += predicted[i] == truth[i] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(truth.size());
}

double accuracy(const MlpClassifier& model, const Dataset& data) {
  if (data.empty()) return 0.0;
  return accuracy(predict(model, data.features), data.labels);
}

namespace {

void check_trainable(const Dataset& train, int classes) {
  if (train.empty()) throw ValidationError("training set is empty");
  if (train.features.rows() != train.labels.size()) throw ShapeError("dataset shape mismatch");
  for (int y : train.labels) {
    if (y < 0 || y >= classes) {
      throw ValidationError("training label " + std::to_string(y) + " outside [0, " +
                            std::to_string(classes) + ")");
    }
  }
}

std::vector<std::vector<std::size_t>> epoch_batches(std::vector<std::size_t>& order,
                                                    std::size_t batch_size,
                                                    std::mt19937_64& rng) {
  std::shuffle(order.begin(), order.end(), rng);
  const std::size_t bs = batch_size == kFullBatch ? order.size() : batch_size;
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t start = 0; start < order.size(); start += bs) {
    const std::size_t end = std::min(order.size(), start + bs);
    batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                         order.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return batches;
}

}  // namespace

TrainResult<MlpClassifier> sgd_train(MlpClassifier model, const Dataset& train,
                                     const TrainConfig& config,
                                     const EpochCallback<MlpClassifier>& on_epoch,
                                     std::span<const double> sample_weights) {
  config.validate();
  model.validate();
  if (train.dim() != model.input_dim()) throw ShapeError("training data dimension mismatch");
  check_trainable(train, static_cast<int>(model.num_classes()));
  if (!sample_weights.empty() && sample_weights.size() != train.size()) {
    throw ShapeError("sample_weights length does not match the training set");
  }

  TrainResult<MlpClassifier> result;
  std::mt19937_64 rng(config.seed);
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<int> batch_labels;
  std::vector<double> batch_weights;

  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    double loss_sum = 0.0;
    const auto batches = epoch_batches(order, config.batch_size, rng);
    try {
      for (const auto& idx : batches) {
        const Matrix xb = train.features.select_rows(idx);
        batch_labels.clear();
        batch_weights.clear();
        for (std::size_t i : idx) {
          batch_labels.push_back(train.labels[i]);
          if (!sample_weights.empty()) batch_weights.push_back(sample_weights[i]);
        }
        const auto lg = backward(model, xb, batch_labels, config.loss, batch_weights,
                                 config.l2_coefficient);
        if (!std::isfinite(lg.loss)) throw TrainingError("loss became non-finite", epoch);
        loss_sum += lg.loss;
        if (config.learning_rate != 0.0) apply_step(model, lg.grad, config.learning_rate);
      }
      ++model.epochs_trained;
      EpochStats stats;
      stats.epoch = epoch;
      stats.loss = loss_sum / static_cast<double>(batches.size());
      stats.accuracy = accuracy(model, train);
      result.trace.push_back(stats);
      if (on_epoch) on_epoch(stats, model);
    } catch (const NonFiniteActivation& e) {
      throw TrainingError(e.what(), epoch);
    }
  }
  result.model = std::move(model);
  return result;
}

TrainResult<TheoryNet> sgd_train(TheoryNet model, const Dataset& train, const TrainConfig& config,
                                 const EpochCallback<TheoryNet>& on_epoch) {
  config.validate();
  model.validate();
  if (config.loss != Loss::squared) {
    throw ValidationError("the theory network is trained with the squared loss");
  }
  if (train.dim() != model.input_dim()) throw ShapeError("training data dimension mismatch");
  check_trainable(train, static_cast<int>(model.num_labels()));

  TrainResult<TheoryNet> result;
  std::mt19937_64 rng(config.seed);
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<int> batch_labels;

  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    double loss_sum = 0.0;
    const auto batches = epoch_batches(order, config.batch_size, rng);
    try {
      for (const auto& idx : batches) {
        const Matrix xb = train.features.select_rows(idx);
        batch_labels.clear();
        for (std::size_t i : idx) batch_labels.push_back(train.labels[i]);
        const auto lg = backward(model, xb, batch_labels, config.l2_coefficient);
        if (!std::isfinite(lg.loss)) throw TrainingError("loss became non-finite", epoch);
        loss_sum += lg.loss;
        if (config.learning_rate != 0.0) {
          auto& w = model.w.data();
          const auto& g = lg.grad_w.data();
          for (std::size_t j = 0; j < w.size(); ++j) w[j] -= config.learning_rate * g[j];
        }
      }
      EpochStats stats;
      stats.epoch = epoch;
      stats.loss = loss_sum / static_cast<double>(batches.size());
      stats.accuracy = accuracy(model.predict(train.features), train.labels);
      result.trace.push_back(stats);
      if (on_epoch) on_epoch(stats, model);
    } catch (const NonFiniteActivation& e) {
      throw TrainingError(e.what(), epoch);
    }
  }
  result.model = std::move(model);
  return result;
}

}  // namespace erd
