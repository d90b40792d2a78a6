#include "fsel/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <unordered_set>

#include "fsel/dataset.hpp"
#include "fsel/errors.hpp"

namespace fsel {

IncrementalFit::IncrementalFit(const Vector& y) {
  const Eigen::Index n = y.size();
  if (n == 0) throw std::invalid_argument("least squares: empty response");
  const double root_n = std::sqrt(static_cast<double>(n));
  basis_ = Matrix::Constant(n, 1, 1.0 / root_n);
  r_inv_ = Matrix::Constant(1, 1, 1.0 / root_n);
  qty_ = Vector::Constant(1, y.sum() / root_n);
  residual_ = y.array() - y.mean();
  sse_ = residual_.squaredNorm();
  max_diag_ = root_n;
}

Vector IncrementalFit::orthogonal_part(const Eigen::Ref<const Vector>& column, Vector* projection) const {
  Vector coeffs = basis_.transpose() * column;
  Vector q = column - basis_ * coeffs;
  const Vector again = basis_.transpose() * q;
  q.noalias() -= basis_ * again;
  if (projection) *projection = coeffs + again;
  return q;
}

void IncrementalFit::append(const Eigen::Ref<const Vector>& column) {
  const Eigen::Index n = basis_.rows();
  const Eigen::Index m = basis_.cols();
  if (column.size() != n) throw std::invalid_argument("least squares: column length differs from response length");
  if (m >= n) throw std::invalid_argument("least squares: no rows left for another column");

  Vector projection;
  Vector q = orthogonal_part(column, &projection);
  const double rho = q.norm();
  if (!(rho > kRankTolerance * std::max(max_diag_, column.norm()))) {
    throw SingularFitError(static_cast<std::size_t>(m), "least squares: design column " + std::to_string(m) +
                                                            " is linearly dependent on the earlier columns");
  }
  q /= rho;

  basis_.conservativeResize(Eigen::NoChange, m + 1);
  basis_.col(m) = q;

  // [R u; 0 rho]^-1 = [R^-1  -R^-1 u / rho; 0  1 / rho]
  Matrix r_inv = Matrix::Zero(m + 1, m + 1);
  r_inv.topLeftCorner(m, m) = r_inv_;
  r_inv.topRightCorner(m, 1) = -(r_inv_ * projection) / rho;
  r_inv(m, m) = 1.0 / rho;
  r_inv_ = std::move(r_inv);

  const double qy = q.dot(residual_);
  qty_.conservativeResize(m + 1);
  qty_(m) = qy;
  residual_ -= qy * q;
  sse_ = residual_.squaredNorm();
  max_diag_ = std::max(max_diag_, rho);
}

Vector IncrementalFit::coefficients() const { return r_inv_ * qty_; }

double IncrementalFit::sse_drop_if_added(const Eigen::Ref<const Vector>& column) const {
  const Vector q = orthogonal_part(column, nullptr);
  const double q_norm = q.norm();
  if (!(q_norm > kRankTolerance * std::max(max_diag_, column.norm()))) return -1.0;
  const double proj = q.dot(residual_);
  return proj * proj / (q_norm * q_norm);
}

double IncrementalFit::sse_rise_if_removed(std::size_t c) const {
  const auto row = static_cast<Eigen::Index>(c);
  const double b = r_inv_.row(row).dot(qty_);
  return b * b / r_inv_.row(row).squaredNorm();
}

FitResult fit_ols(const Matrix& X, const Vector& y, bool with_intercept) {
  const Eigen::Index offset = with_intercept ? 1 : 0;
  const Eigen::Index n = X.rows();
  const Eigen::Index m = X.cols() + offset;
  if (y.size() != n) {
    throw std::invalid_argument("fit_ols: design has " + std::to_string(n) + " rows but response has " +
                                std::to_string(y.size()));
  }
  if (n < m) {
    throw std::invalid_argument("fit_ols: " + std::to_string(m) + " parameters need at least as many rows, got " +
                                std::to_string(n));
  }

  FitResult out;
  out.n = static_cast<std::size_t>(n);
  out.k = static_cast<std::size_t>(X.cols());
  out.with_intercept = with_intercept;
  if (m == 0) {
    out.coefficients.resize(0);
    out.sse = y.squaredNorm();
    return out;
  }

  Matrix design(n, m);
  if (with_intercept) design.col(0).setOnes();
  design.rightCols(X.cols()) = X;

  Eigen::ColPivHouseholderQR<Matrix> qr;
  qr.setThreshold(kRankTolerance);
  qr.compute(design);
  if (qr.rank() < m) {
    const auto offending = static_cast<Eigen::Index>(qr.colsPermutation().indices()(qr.rank()));
    if (offending < offset) {
      throw SingularFitError(SingularFitError::intercept_column,
                             "fit_ols: intercept is linearly dependent on the feature columns");
    }
    const auto column = static_cast<std::size_t>(offending - offset);
    throw SingularFitError(column, "fit_ols: feature column " + std::to_string(column) +
                                       " is linearly dependent on the others");
  }
  out.coefficients = qr.solve(y);
  out.sse = (y - design * out.coefficients).squaredNorm();
  return out;
}

void check_subset(std::span<const std::size_t> subset, std::size_t bound) {
  std::unordered_set<std::size_t> seen;
  for (std::size_t f : subset) {
    if (f >= bound) {
      throw std::invalid_argument("feature index " + std::to_string(f) + " out of range (have " +
                                  std::to_string(bound) + " features)");
    }
    if (!seen.insert(f).second) {
      throw std::invalid_argument("feature index " + std::to_string(f) + " listed twice");
    }
  }
}

Matrix select_columns(const Matrix& X, std::span<const std::size_t> columns) {
  Matrix out(X.rows(), static_cast<Eigen::Index>(columns.size()));
  for (std::size_t c = 0; c < columns.size(); ++c) {
    out.col(static_cast<Eigen::Index>(c)) = X.col(static_cast<Eigen::Index>(columns[c]));
  }
  return out;
}

double sse_of_subset(const Dataset& data, std::span<const std::size_t> subset) {
  check_subset(subset, data.features());
  return fit_ols(select_columns(data.X(), subset), data.response(), true).sse;
}

Matrix swap_columns(const Matrix& X, std::size_t i, std::size_t j) {
  const auto cols = static_cast<std::size_t>(X.cols());
  if (i >= cols || j >= cols) {
    throw std::out_of_range("swap_columns: index out of range for " + std::to_string(cols) + " columns");
  }
  Matrix out = X;
  if (i != j) out.col(static_cast<Eigen::Index>(i)).swap(out.col(static_cast<Eigen::Index>(j)));
  return out;
}

}  // namespace fsel
