#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "fsel/dataset.hpp"
#include "fsel/linalg.hpp"
#include "fsel/selectors.hpp"

namespace fsel {

/// Centers and scales both sets with training mean and population std.
/// Constant training columns get scale 1 and are flagged.
std::pair<Dataset, Dataset> standardize(const Dataset& train, const Dataset& test);

/// Applies previously fitted stats.
Matrix apply_standardization(const Matrix& X, const StandardizationStats& stats);

/// Seeded class-stratified split; at least one training row per class.
std::pair<Dataset, Dataset> stratified_split(const Dataset& data, double train_fraction, std::uint64_t seed);

struct LdaModel {
  Matrix class_means;        // one row per class
  Matrix pooled_covariance;  // ridge included
  Vector log_priors;
  std::vector<std::string> classes;
  double ridge = 0.0;        // absolute value added to the diagonal
};

/// Relative ridge: 1e-6 * tr(Sigma) / d.
inline constexpr double kDefaultLdaRidge = 1e-6;

/// Throws DataError with fewer than two classes or a class with fewer than
/// two rows, SingularScatterError when the pooled covariance is singular.
LdaModel lda_fit(const Dataset& train, double ridge = kDefaultLdaRidge);

/// Argmax of x' S^-1 m_k - m_k' S^-1 m_k / 2 + log pi_k; ties go to the lower
/// class code.
std::vector<int> lda_predict(const LdaModel& model, const Matrix& X);

/// Number of components, or a target explained-variance fraction in (0, 1].
using ComponentRequest = std::variant<std::size_t, double>;

struct PcaResult {
  Matrix train_scores;
  Matrix test_scores;
  Matrix components;  // p x k, columns are principal directions
  double explained = 0.0;
  std::size_t k = 0;
  bool clamped = false;  // requested k exceeded the rank or the n-1 / p cap
};

PcaResult pca_fit_transform(const Matrix& train, const Matrix& test, ComponentRequest request);

/// Throws std::invalid_argument on length mismatch or empty input.
double error_rate(const std::vector<int>& predicted, const std::vector<int>& truth);

struct CompareOptions {
  std::vector<Method> methods{Method::dropping_forward_backward, Method::stepwise, Method::forward_backward};
  bool with_all_features = false;
  bool with_pca = false;
  double pca_variance = 0.985;
  double train_fraction = 0.7;
  std::uint64_t seed = 1;
  double lda_ridge = kDefaultLdaRidge;
  SelectionConfig selection;  // criterion is forced to trace
};

struct MethodOutcome {
  std::string method;  // dfb, fb, stepwise, all-features, pca
  double test_error = 0.0;
  std::vector<std::size_t> selected;  // empty for pca
  std::size_t feature_count = 0;      // selected features or PCA components
  double wall_time_seconds = 0.0;
  std::size_t criterion_evals = 0;
  std::size_t backward_steps = 0;
  std::optional<double> explained;    // pca only
};

struct ComparisonReport {
  std::size_t train_rows = 0;
  std::size_t test_rows = 0;
  StandardizationStats train_stats;
  std::vector<MethodOutcome> outcomes;

  const MethodOutcome& at(const std::string& method) const;
};

/// Splits `data` (or uses `test` when given), standardizes on training data,
/// selects with the trace criterion, fits LDA and reports test error per
/// method. Errors are rethrown with the method name prefixed.
ComparisonReport compare_pipeline(const Dataset& data, const std::optional<Dataset>& test,
                                  const CompareOptions& options);

}  // namespace fsel
