#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "erd/matrix.hpp"

namespace erd {

inline constexpr int kUnlabeled = -1;

/// Feature matrix plus integer labels; label -1 marks an unlabeled sample.
struct Dataset {
  Matrix features;
  std::vector<int> labels;
  int num_classes = 0;

  std::size_t size() const noexcept { return labels.size(); }
  std::size_t dim() const noexcept { return features.cols(); }
  bool empty() const noexcept { return labels.empty(); }

  /// Throws ValidationError when shapes or labels are inconsistent.
  void validate() const;

  Dataset subset(std::span<const std::size_t> indices) const;

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

/// Concatenates two datasets with the same dimensionality; num_classes is the max of both.
Dataset concat(const Dataset& a, const Dataset& b);

/// CSV with header "x0,...,x{d-1},label". Empty body is an error unless `allow_empty`.
Dataset read_csv(const std::filesystem::path& path, int num_classes = 0, bool allow_empty = false);
void write_csv(const Dataset& dataset, const std::filesystem::path& path);

/// Shortest round-trip decimal representation.
std::string format_double(double v);

}  // namespace erd
