#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "erd/baselines.hpp"
#include "erd/clusterable.hpp"
#include "erd/ensemble.hpp"
#include "erd/metrics.hpp"
#include "erd/split.hpp"
#include "erd/statistics.hpp"
#include "erd/train.hpp"

namespace erd::exp {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Config (de)serialization
// ---------------------------------------------------------------------------

/// Fields absent from `j` keep the value in `defaults`. batch_size accepts a count or "full".
TrainConfig train_config_from_json(const json& j, TrainConfig defaults = {});
json to_json(const TrainConfig& c);

/// Names of the in-repo data presets.
std::vector<std::string> preset_names();

/// Full data recipe for a preset; throws ValidationError for unknown names.
json preset_recipe(std::string_view name);

/// Resolves {"preset": name, ...overrides} into a full recipe (JSON merge patch).
/// A config without "preset" is returned as is.
json resolve_recipe(const json& config);

struct BuiltData {
  SplitBundle split;
  json recipe;
  std::optional<ClusterableSpec> spec;     // clusterable recipes only
  std::optional<ClusterableBundle> pool;   // clusterable recipes only
};

/// Generates the pool described by a resolved recipe and splits it. Pure in the recipe.
BuiltData build_data(const json& recipe);

// ---------------------------------------------------------------------------
// Pretraining and evaluation
// ---------------------------------------------------------------------------

struct PretrainConfig {
  std::vector<std::size_t> hidden = {100, 100};
  Activation activation = Activation::relu;
  std::size_t output_classes = 0;  // 0 means the number of ID classes in S
  TrainConfig train = {0.05, 32, 30, 0, 0.0, Loss::cross_entropy};
};

PretrainConfig pretrain_config_from_json(const json& j);
json to_json(const PretrainConfig& c);

struct PretrainResult {
  MlpClassifier model;  // best validation accuracy over epochs >= 1, earliest on ties
  std::size_t best_epoch = 0;
  double val_accuracy = 0.0;
  std::vector<EpochStats> trace;
  std::vector<double> val_trace;
};

PretrainResult pretrain(const SplitBundle& split, const PretrainConfig& config);

ErdOptions erd_options_from_json(const json& j);
json to_json(const ErdOptions& o);

VanillaOptions vanilla_options_from_json(const json& j);
BinaryOptions binary_options_from_json(const json& j);

struct EvalOutcome {
  RocReport roc;
  double threshold_at_fpr05 = 0.0;  // calibrated on validation ID scores
  double test_fpr_at_threshold = 0.0;
  double test_tpr_at_threshold = 0.0;
};

/// ROC on the test mixture plus an FPR-targeted threshold calibrated on ID validation scores.
EvalOutcome evaluate_scores(const std::vector<double>& validation_scores,
                            const std::vector<double>& test_scores,
                            const std::vector<bool>& test_truth, double target_fpr = 0.05);

json to_json(const EvalOutcome& e);

// ---------------------------------------------------------------------------
// End-to-end pipelines
// ---------------------------------------------------------------------------

struct PipelineConfig {
  json data;  // recipe or {"preset": ...}
  PretrainConfig pretrain;
  ErdOptions erd;
  bool k_explicit = false;  // otherwise k is capped at the model's output count
  Statistic statistic = Statistic::tdis_tv;
  double target_fpr = 0.05;
};

PipelineConfig pipeline_config_from_json(const json& j);

struct PipelineResult {
  BuiltData data;
  PretrainResult pretrained;
  ErdEnsemble ensemble;
  EvalOutcome eval;
};

/// gen -> pretrain -> erd_fit -> score the test mixture.
PipelineResult run_erd_pipeline(const PipelineConfig& config);

struct VanillaPipelineResult {
  VanillaEnsemble ensemble;
  EvalOutcome eval;
};

/// Vanilla ensemble on S scored with the entropy of the averaged output.
VanillaPipelineResult run_vanilla(const SplitBundle& split, const VanillaOptions& options,
                                  double target_fpr = 0.05);

enum class SweepAxis { ood_ratio, unlabeled_size, ensemble_size };
SweepAxis parse_sweep_axis(std::string_view s);
std::string to_string(SweepAxis a);

struct SweepRow {
  double value = 0.0;
  double auroc = 0.0;
  double tnr_at_tpr95 = 0.0;
};

struct SweepConfig {
  SweepAxis axis = SweepAxis::ood_ratio;
  std::vector<double> values;
  PipelineConfig pipeline;
};

SweepConfig sweep_config_from_json(const json& j);

/// One pipeline run per axis value; the ensemble-size axis reuses one split and pretrained model.
std::vector<SweepRow> run_sweep(const SweepConfig& config);

// ---------------------------------------------------------------------------
// Early-stopping verifier on clusterable data with the theory network
// ---------------------------------------------------------------------------

struct PropcheckConfig {
  std::size_t clusters = 6;
  std::size_t id_clusters = 3;  // clusters [0, id_clusters) are ID, the rest novel
  std::size_t dim = 16;
  std::size_t num_labels = 3;   // |Y|; ID cluster i has label i mod |Y|
  std::size_t n = 1200;         // total points, split evenly over clusters
  double epsilon = 0.05;
  double rho = 0.05;
  double min_center_distance = 1.0;
  std::size_t hidden = 256;     // p
  std::size_t mc_samples = 20000;
  // eta scales with p to offset the 1/p output weights; c4 widens the scanned window
  TheoryConstants constants = {256.0, 4.0};
  double scan_factor = 3.0;     // scan epochs [1, scan_factor * t_stop]
  std::size_t seeds = 20;
  std::uint64_t first_seed = 0;
  double required_success_rate = 0.9;
};

PropcheckConfig propcheck_config_from_json(const json& j);
json to_json(const PropcheckConfig& c);

struct PropcheckLabelResult {
  int artificial_label = 0;
  bool clusterable = false;  // S u (U, c) passes the (epsilon, rho) check
  std::optional<std::size_t> first_good_epoch;
  std::size_t good_epochs = 0;
  bool good_at_t_stop = false;
  // At the first good epoch (or the last scanned epoch when none):
  double acc_s = 0.0;
  double acc_correct_id = 0.0;   // unlabeled ID with y* = c, predicted c
  double acc_ood_c = 0.0;        // unlabeled OOD predicted c
  double noisy_true_label = 0.0; // unlabeled ID with y* != c, predicted y*
};

struct PropcheckSeedResult {
  std::uint64_t seed = 0;
  double eta = 0.0;
  std::size_t t_stop = 0;
  double sigma_min = 0.0;
  double centers_norm = 0.0;
  std::vector<PropcheckLabelResult> labels;
  bool success = false;  // every artificial label reached a good epoch
};

struct PropcheckReport {
  PropcheckConfig config;
  std::vector<PropcheckSeedResult> seeds;
  double success_rate = 0.0;
  bool passed = false;
};

/// Throws ValidationError unless rho <= delta / 8 with delta = 2 / (|Y| - 1).
void check_propcheck_preconditions(const PropcheckConfig& config);

PropcheckReport run_propcheck(const PropcheckConfig& config);
json to_json(const PropcheckReport& r);

}  // namespace erd::exp
