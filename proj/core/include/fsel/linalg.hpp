#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace fsel {

class Dataset;

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Relative pivot magnitude below which a design is declared rank deficient.
inline constexpr double kRankTolerance = 1e-10;

struct FitResult {
  Vector coefficients;  // intercept first when fitted with one
  double sse = 0.0;
  std::size_t n = 0;
  std::size_t k = 0;  // features, intercept excluded
  bool with_intercept = true;
};

/// Least-squares fit that grows one column at a time.
///
/// Starts from the intercept-only model and keeps a thin orthonormal basis Q
/// of the design columns, R^-1, Q'y and the residual. Appending a column is
/// one re-orthogonalized Gram-Schmidt step, O(n m). The cached pieces also
/// give the neighbouring fits in closed form:
///   adding x:    sse drops by (q'r)^2 / q'q with q = (I - QQ')x
///   removing c:  sse grows by b_c^2 / [(A'A)^-1]_cc
class IncrementalFit {
 public:
  /// Intercept-only fit of y.
  explicit IncrementalFit(const Vector& y);

  /// Appends a design column. Throws SingularFitError (carrying the index the
  /// column would have taken) when it lies in the current column space, and
  /// std::invalid_argument when no rows are left for it.
  void append(const Eigen::Ref<const Vector>& column);

  /// Design columns including the intercept.
  std::size_t columns() const noexcept { return static_cast<std::size_t>(basis_.cols()); }
  double sse() const noexcept { return sse_; }
  const Vector& residual() const noexcept { return residual_; }
  /// Intercept first, then columns in order of appending.
  Vector coefficients() const;

  /// Reduction in sse if `column` were appended; negative when the column is
  /// numerically inside the current column space.
  double sse_drop_if_added(const Eigen::Ref<const Vector>& column) const;

  /// Increase in sse if design column `c` (0 is the intercept) were removed.
  double sse_rise_if_removed(std::size_t c) const;

 private:
  // q with Q'q = 0 up to rounding (two projection passes).
  Vector orthogonal_part(const Eigen::Ref<const Vector>& column, Vector* projection) const;

  Matrix basis_;   // n x m
  Matrix r_inv_;   // m x m upper triangular
  Vector qty_;     // Q'y
  Vector residual_;
  double sse_ = 0.0;
  double max_diag_ = 0.0;  // largest |R_ii|
};

/// Ordinary least squares of y on X (optionally with a leading intercept).
FitResult fit_ols(const Matrix& X, const Vector& y, bool with_intercept);

/// Error sum of squares of the intercept model on the listed feature
/// columns of a regression dataset. Empty subset gives the total sum of
/// squares about the mean.
double sse_of_subset(const Dataset& data, std::span<const std::size_t> subset);

/// Copies the listed columns of X, in order.
Matrix select_columns(const Matrix& X, std::span<const std::size_t> columns);

/// Returns X with columns i and j exchanged. Throws std::out_of_range.
Matrix swap_columns(const Matrix& X, std::size_t i, std::size_t j);

/// Checks that indices are in range [0, bound) and pairwise distinct.
/// Throws std::invalid_argument otherwise.
void check_subset(std::span<const std::size_t> subset, std::size_t bound);

}  // namespace fsel
