#include "erd/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "erd/error.hpp"

namespace erd {

void Dataset::validate() const {
  if (labels.empty()) throw ValidationError("dataset has no samples");
  if (features.rows() != labels.size()) {
    throw ShapeError("dataset has " + std::to_string(features.rows()) + " feature rows but " +
                     std::to_string(labels.size()) + " labels");
  }
  if (!features.all_finite()) throw ValidationError("dataset features must be finite");
  for (int y : labels) {
    if (y < kUnlabeled || y >= num_classes) {
      throw ValidationError("label " + std::to_string(y) + " outside {-1, 0, ..., " +
                            std::to_string(num_classes - 1) + "}");
    }
  }
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  Dataset out;
  out.features = features.select_rows(indices);
  out.labels.reserve(indices.size());
  for (std::size_t i : indices) out.labels.push_back(labels.at(i));
  out.num_classes = num_classes;
  return out;
}

Dataset concat(const Dataset& a, const Dataset& b) {
  Dataset out;
  out.features = vstack(a.features, b.features);
  out.labels = a.labels;
  out.labels.insert(out.labels.end(), b.labels.begin(), b.labels.end());
  out.num_classes = std::max(a.num_classes, b.num_classes);
  return out;
}

std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

std::string strip(std::string s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.pop_back();
  std::size_t start = 0;
  while (start < s.size() && s[start] == ' ') ++start;
  return s.substr(start);
}

std::string expected_header(std::size_t d) {
  std::string h;
  for (std::size_t j = 0; j < d; ++j) h += "x" + std::to_string(j) + ",";
  return h + "label";
}

}  // namespace

Dataset read_csv(const std::filesystem::path& path, int num_classes, bool allow_empty) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());

  std::string line;
  if (!std::getline(in, line)) throw ParseError("missing header, expected x0,...,x{d-1},label", 1);
  auto header = split_fields(strip(line));
  if (header.size() < 2 || strip(header.back()) != "label") {
    throw ParseError("missing label column, expected header " +
                         expected_header(header.empty() ? 0 : header.size()),
                     1);
  }
  const std::size_t d = header.size() - 1;
  for (std::size_t j = 0; j < d; ++j) {
    if (strip(header[j]) != "x" + std::to_string(j)) {
      throw ParseError("unexpected header, expected " + expected_header(d), 1);
    }
  }

  std::vector<double> values;
  std::vector<int> labels;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip(line);
    if (line.empty()) continue;
    auto fields = split_fields(line);
    if (fields.size() != d + 1) {
      throw ParseError("expected " + std::to_string(d + 1) + " fields, got " +
                           std::to_string(fields.size()),
                       line_no);
    }
    for (std::size_t j = 0; j < d; ++j) {
      const std::string f = strip(fields[j]);
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      if (ec != std::errc() || ptr != f.data() + f.size() || !std::isfinite(v)) {
        throw ParseError("bad number '" + f + "' in column x" + std::to_string(j), line_no);
      }
      values.push_back(v);
    }
    const std::string lf = strip(fields[d]);
    int y = 0;
    auto [ptr, ec] = std::from_chars(lf.data(), lf.data() + lf.size(), y);
    if (ec != std::errc() || ptr != lf.data() + lf.size() || y < kUnlabeled) {
      throw ParseError("bad label '" + lf + "'", line_no);
    }
    labels.push_back(y);
  }
  if (labels.empty()) {
    if (!allow_empty) throw ValidationError(path.string() + ": no samples");
    Dataset empty;
    empty.features = Matrix(0, d);
    empty.num_classes = num_classes;
    return empty;
  }

  Dataset ds;
  const std::size_t n = labels.size();
  ds.features = Matrix(n, d, std::move(values));
  ds.labels = std::move(labels);
  const int max_label = *std::max_element(ds.labels.begin(), ds.labels.end());
  ds.num_classes = std::max(num_classes, max_label + 1);
  return ds;
}

void write_csv(const Dataset& dataset, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << expected_header(dataset.dim()) << '\n';
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    for (double v : dataset.features.row(i)) out << format_double(v) << ',';
    out << dataset.labels[i] << '\n';
  }
}

}  // namespace erd
