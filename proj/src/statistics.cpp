#include "erd/statistics.hpp"

#include <cmath>

#include "erd/error.hpp"

namespace erd {

namespace {

void require_probability(std::span<const double> p) {
  double sum = 0.0;
  for (double v : p) {
    if (!(v >= -1e-12)) throw ValidationError("probability vector has a negative or NaN entry");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw ValidationError("probability vector sums to " + std::to_string(sum));
  }
}

void require_same_length(std::span<const std::vector<double>> outputs) {
  for (const auto& o : outputs) {
    if (o.size() != outputs.front().size()) throw ShapeError("member outputs differ in length");
    require_probability(o);
  }
}

}  // namespace

double tv_distance(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw ShapeError("tv_distance: length mismatch");
  require_probability(p);
  require_probability(q);
  double s = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) s += std::abs(p[k] - q[k]);
  return std::min(1.0, 0.5 * s);
}

double disagreement_statistic(std::span<const std::vector<double>> outputs) {
  const std::size_t k = outputs.size();
  if (k < 2) throw ArityError("disagreement statistic needs at least 2 member outputs");
  require_same_length(outputs);
  double total = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i + 1; j < k; ++j) total += tv_distance(outputs[i], outputs[j]);
  }
  return 2.0 * total / static_cast<double>(k * (k - 1));
}

double entropy_avg_statistic(std::span<const std::vector<double>> outputs) {
  if (outputs.empty()) throw ArityError("entropy statistic needs at least 1 member output");
  require_same_length(outputs);
  const std::size_t classes = outputs.front().size();
  const double inv_k = 1.0 / static_cast<double>(outputs.size());
  double h = 0.0;
  for (std::size_t c = 0; c < classes; ++c) {
    double mean = 0.0;
    for (const auto& o : outputs) mean += o[c];
    mean *= inv_k;
    if (mean > 0.0) h -= mean * std::log(mean);
  }
  return h;
}

std::string to_string(Statistic s) { return s == Statistic::tdis_tv ? "tdis_tv" : "entropy_avg"; }

Statistic parse_statistic(std::string_view s) {
  if (s == "tdis_tv") return Statistic::tdis_tv;
  if (s == "entropy_avg") return Statistic::entropy_avg;
  throw ValidationError("unknown statistic '" + std::string(s) + "' (expected tdis_tv|entropy_avg)");
}

double compute_statistic(Statistic s, std::span<const std::vector<double>> outputs) {
  return s == Statistic::tdis_tv ? disagreement_statistic(outputs) : entropy_avg_statistic(outputs);
}

}  // namespace erd
