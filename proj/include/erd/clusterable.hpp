#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "erd/dataset.hpp"
#include "erd/matrix.hpp"

namespace erd {

/// Generative description of an (epsilon, rho)-clusterable data set: balanced clusters
/// of radius epsilon around unit-norm centers, each with at most a rho fraction of
/// wrongly labeled points, and differently labeled centers at least 2 epsilon apart.
struct ClusterableSpec {
  Matrix centers;                   // K x d, unit-norm rows
  std::vector<int> cluster_labels;  // y*(c_i)
  double epsilon = 0.1;
  double rho = 0.0;
  std::vector<std::size_t> sizes;
  std::vector<bool> ood_cluster_flags;  // novel-class clusters, withheld from S and V
  double alpha1 = 0.5;
  double alpha2 = 2.0;
  std::uint64_t seed = 0;
  int num_classes = 0;  // label space for noisy labels; 0 means max(cluster_labels) + 1

  std::size_t num_clusters() const { return centers.rows(); }
  std::size_t total_size() const;
  int label_space() const;

  /// Throws ValidationError listing every violated clause.
  void validate() const;
};

struct ClusterableBundle {
  Dataset points;  // labels include the injected noise
  std::vector<int> cluster_assignment;
  std::vector<bool> noisy;
};

/// x = c_i + r u, u uniform on the unit sphere, r uniform in [0, epsilon].
/// Exactly floor(rho |C_i|) points of each cluster get a uniformly drawn wrong label.
ClusterableBundle generate_clusterable(const ClusterableSpec& spec);

struct ClusterabilityReport {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

/// Re-checks every clusterability clause on realized data.
ClusterabilityReport check_clusterable(const Dataset& points, std::span<const int> assignment,
                                       const Matrix& centers, std::span<const int> cluster_labels,
                                       double epsilon, double rho, double alpha1, double alpha2);

ClusterabilityReport check_clusterable(const ClusterableBundle& bundle,
                                       const ClusterableSpec& spec);

/// K random unit vectors in R^d (normalized Gaussians), redrawn until every pair is at
/// least `min_distance` apart. Throws ValidationError after 1000 failed draws.
Matrix random_unit_centers(std::size_t k, std::size_t d, double min_distance, std::uint64_t seed);

}  // namespace erd
