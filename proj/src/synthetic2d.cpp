#include "erd/synthetic2d.hpp"

#include <numbers>
#include <random>

#include "erd/error.hpp"

namespace erd {

std::string to_string(Task2d t) {
  switch (t) {
    case Task2d::bands: return "bands";
    case Task2d::moons: return "moons";
    case Task2d::blobs: return "blobs";
  }
  return "unknown";
}

Task2d parse_task2d(std::string_view s) {
  if (s == "bands") return Task2d::bands;
  if (s == "moons") return Task2d::moons;
  if (s == "blobs") return Task2d::blobs;
  throw ValidationError("unknown 2D task '" + std::string(s) + "' (expected bands|moons|blobs)");
}

Dataset make_two_moons_like_2d(Task2d task, std::size_t n, double noise, std::uint64_t seed) {
  if (n < 4) throw ValidationError("need n >= 4 points");
  if (!(noise >= 0.0)) throw ValidationError("noise must be >= 0");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  Dataset ds;
  ds.features = Matrix(n, 2);
  ds.labels.resize(n);
  ds.num_classes = 2;
  const std::size_t n0 = n - n / 2;
  for (std::size_t i = 0; i < n; ++i) {
    const int y = i < n0 ? 0 : 1;
    double px = 0.0;
    double py = 0.0;
    switch (task) {
      case Task2d::bands:
        px = -3.0 + 6.0 * unit(rng);
        py = (y == 0 ? -1.0 : 1.0) + 0.8 * (unit(rng) - 0.5);
        break;
      case Task2d::moons: {
        const double t = std::numbers::pi * unit(rng);
        if (y == 0) {
          px = std::cos(t);
          py = std::sin(t);
        } else {
          px = 1.0 - std::cos(t);
          py = 0.5 - std::sin(t);
        }
        break;
      }
      case Task2d::blobs:
        px = y == 0 ? -2.0 : 2.0;
        py = 0.0;
        break;
    }
    if (noise > 0.0) {
      px += noise * gauss(rng);
      py += noise * gauss(rng);
    }
    ds.features(i, 0) = px;
    ds.features(i, 1) = py;
    ds.labels[i] = y;
  }
  return ds;
}

Dataset make_band_2d(std::size_t n, double y_center, double half_width, double x_min,
                     double x_max, double noise, int label, std::uint64_t seed) {
  if (n == 0) throw ValidationError("band needs at least one point");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Dataset ds;
  ds.features = Matrix(n, 2);
  ds.labels.assign(n, label);
  ds.num_classes = label + 1;
  for (std::size_t i = 0; i < n; ++i) {
    double px = x_min + (x_max - x_min) * unit(rng);
    double py = y_center + half_width * (2.0 * unit(rng) - 1.0);
    if (noise > 0.0) {
      px += noise * gauss(rng);
      py += noise * gauss(rng);
    }
    ds.features(i, 0) = px;
    ds.features(i, 1) = py;
  }
  return ds;
}

Dataset make_blob_2d(std::size_t n, double cx, double cy, double stddev, int label,
                     std::uint64_t seed) {
  if (n == 0) throw ValidationError("blob needs at least one point");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Dataset ds;
  ds.features = Matrix(n, 2);
  ds.labels.assign(n, label);
  ds.num_classes = label + 1;
  for (std::size_t i = 0; i < n; ++i) {
    ds.features(i, 0) = cx + stddev * gauss(rng);
    ds.features(i, 1) = cy + stddev * gauss(rng);
  }
  return ds;
}

}  // namespace erd
