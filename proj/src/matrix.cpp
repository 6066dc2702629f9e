#include "erd/matrix.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <string>

#include "erd/error.hpp"

namespace erd {

namespace {
using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
}

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    throw ShapeError("matrix data length " + std::to_string(data_.size()) + " != " +
                     std::to_string(rows_) + "x" + std::to_string(cols_));
  }
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows)
    : rows_(rows.size()), cols_(rows.size() == 0 ? 0 : rows.begin()->size()) {
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw ShapeError("ragged matrix initializer");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

Matrix Matrix::select_rows(std::span<const std::size_t> indices) const {
  Matrix out(indices.size(), cols_);
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= rows_) throw ShapeError("row index out of range");
    auto src = row(indices[i]);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return out;
}

bool Matrix::all_finite() const noexcept {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

Matrix vstack(const Matrix& top, const Matrix& bottom) {
  if (top.empty()) return bottom;
  if (bottom.empty()) return top;
  if (top.cols() != bottom.cols()) throw ShapeError("vstack: column mismatch");
  std::vector<double> data = top.data();
  data.insert(data.end(), bottom.data().begin(), bottom.data().end());
  return Matrix(top.rows() + bottom.rows(), top.cols(), std::move(data));
}

double spectral_norm(const Matrix& m) {
  if (m.empty()) return 0.0;
  Eigen::Map<const RowMajor> map(m.data().data(), static_cast<Eigen::Index>(m.rows()),
                                 static_cast<Eigen::Index>(m.cols()));
  Eigen::JacobiSVD<RowMajor> svd(map);
  return svd.singularValues()(0);
}

double min_symmetric_eigenvalue(const Matrix& m) {
  if (m.rows() != m.cols() || m.empty()) throw ShapeError("min eigenvalue needs a square matrix");
  Eigen::Map<const RowMajor> map(m.data().data(), static_cast<Eigen::Index>(m.rows()),
                                 static_cast<Eigen::Index>(m.cols()));
  const Eigen::MatrixXd sym = 0.5 * (map + map.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym, Eigen::EigenvaluesOnly);
  return solver.eigenvalues()(0);
}

}  // namespace erd
