#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace erd {

/// 0.5 * ||p - q||_1. Both inputs must be probability vectors (sum 1 +- 1e-9).
double tv_distance(std::span<const double> p, std::span<const double> q);

/// Mean total-variation distance over the K(K-1)/2 unordered member pairs; K >= 2.
double disagreement_statistic(std::span<const std::vector<double>> outputs);

/// Shannon entropy (natural log) of the averaged output; K >= 1, 0 log 0 = 0.
double entropy_avg_statistic(std::span<const std::vector<double>> outputs);

enum class Statistic { tdis_tv, entropy_avg };

std::string to_string(Statistic s);
Statistic parse_statistic(std::string_view s);

double compute_statistic(Statistic s, std::span<const std::vector<double>> outputs);

}  // namespace erd
