#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

#include "erd/dataset.hpp"

namespace erd {

enum class Task2d { bands, moons, blobs };

std::string to_string(Task2d t);
Task2d parse_task2d(std::string_view s);

/// Two-class 2D toy data, n/2 points per class (class 0 gets the extra point when n is odd).
///  - bands: horizontal strips x in [-3, 3], y in -1 +- 0.4 (class 0) and +1 +- 0.4 (class 1)
///  - moons: interleaved half circles
///  - blobs: point masses at (-2, 0) and (2, 0)
/// `noise` is the standard deviation of isotropic Gaussian jitter added to every point.
Dataset make_two_moons_like_2d(Task2d task, std::size_t n, double noise, std::uint64_t seed);

/// Points in a horizontal strip centered at height `y_center`, x uniform in [x_min, x_max],
/// half-height `half_width`, plus Gaussian jitter; every label is `label`.
Dataset make_band_2d(std::size_t n, double y_center, double half_width, double x_min,
                     double x_max, double noise, int label, std::uint64_t seed);

/// Isotropic Gaussian blob around (cx, cy); every label is `label`.
Dataset make_blob_2d(std::size_t n, double cx, double cy, double stddev, int label,
                     std::uint64_t seed);

}  // namespace erd
