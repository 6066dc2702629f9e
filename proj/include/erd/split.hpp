#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include <json.hpp>

#include "erd/clusterable.hpp"
#include "erd/dataset.hpp"

namespace erd {

/// Fractions of the in-distribution pool sent to S, V and the ID half of the test set.
struct SplitFractions {
  double train = 0.5;
  double val = 0.1;
  double test = 0.2;
};

/// S (labeled train), V (validation), U (unlabeled ID/OOD mixture) and a held-out test
/// mixture. Truth vectors mark OOD samples and are for evaluation only.
struct SplitBundle {
  Dataset train;
  Dataset validation;
  Dataset unlabeled;  // labels all -1
  std::vector<bool> unlabeled_truth;
  Dataset test;  // ID points keep their label, OOD points are -1
  std::vector<bool> test_truth;

  // Source-pool row of every sample, per split.
  std::vector<std::size_t> train_index;
  std::vector<std::size_t> val_index;
  std::vector<std::size_t> unlabeled_index;
  std::vector<std::size_t> test_index;

  int num_classes() const { return train.num_classes; }
  std::size_t dim() const { return train.dim(); }
};

/// Splits a labeled pool into an SSND bundle. `groups[i]` names the group (cluster or
/// band) of row i; rows of groups with `ood_group_flags[g]` set are OOD and never reach
/// S or V. U holds round(ood_ratio * unlabeled_size) OOD rows, the rest ID. The test set
/// takes round(fractions.test * n_id) ID rows and as many OOD rows.
/// ID labels must lie in [0, m); m becomes num_classes of every split.
/// Throws SizeError naming the shortfall when the pool is too small.
SplitBundle make_ssnd_split(const Dataset& pool, std::span<const int> groups,
                            const std::vector<bool>& ood_group_flags, SplitFractions fractions,
                            double ood_ratio, std::size_t unlabeled_size, std::uint64_t seed);

/// Same, using the cluster labels y*(c_i) as the true labels (injected noise is ignored).
SplitBundle make_ssnd_split(const ClusterableBundle& bundle, const ClusterableSpec& spec,
                            SplitFractions fractions, double ood_ratio,
                            std::size_t unlabeled_size, std::uint64_t seed);

/// Directory layout: train.csv, val.csv, unlabeled.csv, unlabeled_truth.csv, test.csv,
/// test_truth.csv, meta.json. `meta` is merged into meta.json.
void save_split(const SplitBundle& split, const std::filesystem::path& dir,
                const nlohmann::json& meta = nlohmann::json::object());
SplitBundle load_split(const std::filesystem::path& dir);

void write_truth_csv(const std::vector<bool>& truth, const std::filesystem::path& path);
std::vector<bool> read_truth_csv(const std::filesystem::path& path);

}  // namespace erd
