#include "erd/clusterable.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "erd/error.hpp"

namespace erd {

namespace {

constexpr double kTol = 1e-9;

double row_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) s += (a[j] - b[j]) * (a[j] - b[j]);
  return std::sqrt(s);
}

double row_norm(std::span<const double> a) {
  double s = 0.0;
  for (double v : a) s += v * v;
  return std::sqrt(s);
}

void check_centers(const Matrix& centers, std::span<const int> labels, double epsilon,
                   std::vector<std::string>& out) {
  for (std::size_t i = 0; i < centers.rows(); ++i) {
    if (std::abs(row_norm(centers.row(i)) - 1.0) > 1e-6) {
      out.push_back("center " + std::to_string(i) + " is not unit norm");
    }
  }
  for (std::size_t i = 0; i < centers.rows(); ++i) {
    for (std::size_t j = i + 1; j < centers.rows(); ++j) {
      if (labels[i] == labels[j]) continue;
      const double dist = row_distance(centers.row(i), centers.row(j));
      if (dist < 2.0 * epsilon - kTol) {
        std::ostringstream msg;
        msg << "differently labeled centers " << i << " and " << j << " are " << dist
            << " apart, need >= 2*epsilon = " << 2.0 * epsilon;
        out.push_back(msg.str());
      }
    }
  }
}

void check_balance(std::span<const std::size_t> sizes, double alpha1, double alpha2,
                   std::vector<std::string>& out) {
  const double n = std::accumulate(sizes.begin(), sizes.end(), 0.0);
  const double per = n / static_cast<double>(sizes.size());
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    const auto s = static_cast<double>(sizes[i]);
    if (s < alpha1 * per - kTol || s > alpha2 * per + kTol) {
      std::ostringstream msg;
      msg << "cluster " << i << " has " << sizes[i] << " points, outside [alpha1 n/K, alpha2 n/K] = ["
          << alpha1 * per << ", " << alpha2 * per << "]";
      out.push_back(msg.str());
    }
  }
}

}  // namespace

std::size_t ClusterableSpec::total_size() const {
  return std::accumulate(sizes.begin(), sizes.end(), std::size_t{0});
}

int ClusterableSpec::label_space() const {
  if (num_classes > 0) return num_classes;
  return cluster_labels.empty() ? 0 : *std::max_element(cluster_labels.begin(), cluster_labels.end()) + 1;
}

void ClusterableSpec::validate() const {
  std::vector<std::string> v;
  const std::size_t k = centers.rows();
  if (k == 0) v.push_back("no cluster centers");
  if (cluster_labels.size() != k) v.push_back("cluster_labels length != number of centers");
  if (sizes.size() != k) v.push_back("sizes length != number of centers");
  if (!ood_cluster_flags.empty() && ood_cluster_flags.size() != k) {
    v.push_back("ood_cluster_flags length != number of centers");
  }
  const bool shapes_ok = v.empty();
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) v.push_back("epsilon must be >= 0");
  if (!(rho >= 0.0 && rho <= 1.0)) v.push_back("rho must lie in [0, 1]");
  if (!(alpha1 > 0.0) || !(alpha2 > 0.0) || alpha1 > alpha2) {
    v.push_back("need 0 < alpha1 <= alpha2");
  }
  for (int y : cluster_labels) {
    if (y < 0) v.push_back("cluster labels must be non-negative");
  }
  if (num_classes > 0) {
    for (int y : cluster_labels) {
      if (y >= num_classes) v.push_back("cluster label " + std::to_string(y) + " >= num_classes");
    }
  }
  if (shapes_ok) {
    check_centers(centers, cluster_labels, epsilon, v);
    check_balance(sizes, alpha1, alpha2, v);
    for (std::size_t i = 0; i < k; ++i) {
      if (sizes[i] == 0) v.push_back("cluster " + std::to_string(i) + " is empty");
    }
    if (rho > 0.0 && label_space() < 2) v.push_back("label noise needs at least two labels");
  }
  if (!v.empty()) {
    std::string msg = "infeasible clusterable spec:";
    for (const auto& s : v) msg += "\n  - " + s;
    throw ValidationError(msg);
  }
}

ClusterableBundle generate_clusterable(const ClusterableSpec& spec) {
  spec.validate();
  const std::size_t d = spec.centers.cols();
  const std::size_t n = spec.total_size();
  const int classes = spec.label_space();

  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  ClusterableBundle out;
  out.points.features = Matrix(n, d);
  out.points.labels.resize(n);
  out.points.num_classes = classes;
  out.cluster_assignment.resize(n);
  out.noisy.assign(n, false);

  std::vector<double> u(d);
  std::size_t next = 0;
  for (std::size_t c = 0; c < spec.num_clusters(); ++c) {
    const std::size_t first = next;
    for (std::size_t s = 0; s < spec.sizes[c]; ++s, ++next) {
      double norm = 0.0;
      do {
        norm = 0.0;
        for (double& x : u) {
          x = gauss(rng);
          norm += x * x;
        }
        norm = std::sqrt(norm);
      } while (norm == 0.0);
      const double r = spec.epsilon * unit(rng);
      auto row = out.points.features.row(next);
      auto center = spec.centers.row(c);
      for (std::size_t j = 0; j < d; ++j) row[j] = center[j] + r * u[j] / norm;
      out.points.labels[next] = spec.cluster_labels[c];
      out.cluster_assignment[next] = static_cast<int>(c);
    }

    const auto noisy_count =
        static_cast<std::size_t>(std::floor(spec.rho * static_cast<double>(spec.sizes[c]) + kTol));
    if (noisy_count == 0) continue;
    std::vector<std::size_t> members(spec.sizes[c]);
    std::iota(members.begin(), members.end(), first);
    std::shuffle(members.begin(), members.end(), rng);
    std::uniform_int_distribution<int> wrong(0, classes - 2);
    for (std::size_t m = 0; m < noisy_count; ++m) {
      int y = wrong(rng);
      if (y >= spec.cluster_labels[c]) ++y;
      out.points.labels[members[m]] = y;
      out.noisy[members[m]] = true;
    }
  }
  return out;
}

ClusterabilityReport check_clusterable(const Dataset& points, std::span<const int> assignment,
                                       const Matrix& centers, std::span<const int> cluster_labels,
                                       double epsilon, double rho, double alpha1, double alpha2) {
  ClusterabilityReport report;
  auto& v = report.violations;
  const std::size_t k = centers.rows();
  if (assignment.size() != points.size()) {
    v.push_back("assignment length != number of points");
    return report;
  }
  if (cluster_labels.size() != k) {
    v.push_back("cluster_labels length != number of centers");
    return report;
  }
  check_centers(centers, cluster_labels, epsilon, v);

  std::vector<std::size_t> sizes(k, 0);
  std::vector<std::size_t> wrong(k, 0);
  double worst_radius = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const int c = assignment[i];
    if (c < 0 || static_cast<std::size_t>(c) >= k) {
      v.push_back("point " + std::to_string(i) + " assigned to unknown cluster");
      return report;
    }
    const auto cu = static_cast<std::size_t>(c);
    ++sizes[cu];
    if (points.labels[i] != cluster_labels[cu]) ++wrong[cu];
    worst_radius = std::max(worst_radius, row_distance(points.features.row(i), centers.row(cu)));
  }
  if (worst_radius > epsilon + kTol) {
    std::ostringstream msg;
    msg << "a point lies " << worst_radius << " from its center, epsilon = " << epsilon;
    v.push_back(msg.str());
  }
  for (std::size_t c = 0; c < k; ++c) {
    if (sizes[c] == 0) continue;
    const double frac = static_cast<double>(wrong[c]) / static_cast<double>(sizes[c]);
    if (frac > rho + kTol) {
      std::ostringstream msg;
      msg << "cluster " << c << " has noisy fraction " << frac << " > rho = " << rho;
      v.push_back(msg.str());
    }
  }
  check_balance(sizes, alpha1, alpha2, v);
  return report;
}

ClusterabilityReport check_clusterable(const ClusterableBundle& bundle,
                                       const ClusterableSpec& spec) {
  return check_clusterable(bundle.points, bundle.cluster_assignment, spec.centers,
                           spec.cluster_labels, spec.epsilon, spec.rho, spec.alpha1, spec.alpha2);
}

Matrix random_unit_centers(std::size_t k, std::size_t d, double min_distance, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    Matrix c(k, d);
    for (std::size_t i = 0; i < k; ++i) {
      auto row = c.row(i);
      double norm = 0.0;
      for (double& x : row) {
        x = gauss(rng);
        norm += x * x;
      }
      norm = std::sqrt(norm);
      for (double& x : row) x /= norm;
    }
    bool ok = true;
    for (std::size_t i = 0; i < k && ok; ++i) {
      for (std::size_t j = i + 1; j < k && ok; ++j) {
        ok = row_distance(c.row(i), c.row(j)) >= min_distance;
      }
    }
    if (ok) return c;
  }
  throw ValidationError("could not draw well-separated unit centers");
}

}  // namespace erd
