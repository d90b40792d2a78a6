#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "fsel/dataset.hpp"
#include "fsel/linalg.hpp"

namespace fsel {

enum class Orientation { minimize, maximize };
enum class Direction { add, remove };
enum class CriterionKind { cp, trace };

using FeatureSet = std::vector<std::size_t>;

/// Default relative ridge applied to the within-class scatter on fallback.
inline constexpr double kDefaultScatterRidge = 1e-8;

/// A criterion evaluated at one subset, with whatever the concrete criterion
/// caches to make neighbouring evaluations cheap. Immutable: gain() may be
/// called concurrently for different candidates.
class CriterionState {
 public:
  virtual ~CriterionState() = default;

  const FeatureSet& subset() const noexcept { return subset_; }
  double value() const noexcept { return value_; }
  virtual Orientation orientation() const noexcept = 0;

  /// Signed improvement of moving `candidate` in or out of the subset.
  /// Positive is better for either orientation. Returns -infinity when the
  /// modified subset cannot be evaluated (singular refit).
  virtual double gain(std::size_t candidate, Direction direction) const = 0;

  /// State for the subset after the move. Added features are appended;
  /// removals keep the order of the rest.
  virtual std::unique_ptr<CriterionState> moved(std::size_t candidate, Direction direction) const = 0;

  bool contains(std::size_t feature) const noexcept;

 protected:
  CriterionState(FeatureSet subset, double value) : subset_(std::move(subset)), value_(value) {}
  void set_value(double value) noexcept { value_ = value; }

 private:
  FeatureSet subset_;
  double value_;
};

class Criterion {
 public:
  virtual ~Criterion() = default;

  virtual CriterionKind kind() const noexcept = 0;
  virtual Orientation orientation() const noexcept = 0;
  virtual std::size_t feature_count() const noexcept = 0;

  /// From-scratch value on `subset`. Throws NumericalError when singular.
  virtual double evaluate(std::span<const std::size_t> subset) const = 0;

  /// Throws NumericalError when `subset` itself cannot be evaluated.
  virtual std::unique_ptr<CriterionState> state(FeatureSet subset) const = 0;
};

/// gain() on the state, spelled as a free function.
double criterion_gain(const CriterionState& state, std::size_t candidate, Direction direction);

// --- Mallows's Cp -----------------------------------------------------------

/// Cp = sse / sigma2 - n + 2 (k + 1); k excludes the intercept.
double mallows_cp(double sse, std::size_t n, std::size_t k, double sigma2);

/// Error variance used by Cp. Override wins; otherwise the full-model
/// residual variance when n > p + 2, otherwise the residual variance of a
/// greedy SSE-reduction path capped at floor(n / 2) features.
double estimate_sigma2(const Dataset& data, std::optional<double> override_value = std::nullopt);

class CpCriterion final : public Criterion {
 public:
  CpCriterion(const Dataset& data, double sigma2);

  CriterionKind kind() const noexcept override { return CriterionKind::cp; }
  Orientation orientation() const noexcept override { return Orientation::minimize; }
  std::size_t feature_count() const noexcept override;
  double evaluate(std::span<const std::size_t> subset) const override;
  std::unique_ptr<CriterionState> state(FeatureSet subset) const override;

  double sigma2() const noexcept { return sigma2_; }
  const Dataset& data() const noexcept { return *data_; }

 private:
  const Dataset* data_;
  double sigma2_;
};

// --- Trace class separability ------------------------------------------------

struct ScatterPair {
  Matrix between;  // S_b
  Matrix within;   // S_w
  std::vector<std::size_t> class_counts;
  Matrix class_means;  // one row per class
  Vector overall_mean;
};

/// Between- and within-class scatter of the given columns.
ScatterPair scatter_matrices(const Matrix& X, const Labels& labels);

/// trace((S_w + lambda I)^-1 S_b) with lambda = ridge * tr(S_w) / d, or
/// lambda = ridge when tr(S_w) is zero. Throws SingularScatterError when the
/// regularized within-class scatter is not invertible.
double trace_of_scatter(const Matrix& within, const Matrix& between, double ridge);

double trace_criterion(const Matrix& X, const Labels& labels, double ridge);

struct TraceOptions {
  double ridge = kDefaultScatterRidge;
  /// Apply the ridge to every evaluation instead of only on singular S_w.
  bool always_ridge = false;
};

class TraceCriterion final : public Criterion {
 public:
  TraceCriterion(const Dataset& data, TraceOptions options = {});

  CriterionKind kind() const noexcept override { return CriterionKind::trace; }
  Orientation orientation() const noexcept override { return Orientation::maximize; }
  std::size_t feature_count() const noexcept override;
  double evaluate(std::span<const std::size_t> subset) const override;
  std::unique_ptr<CriterionState> state(FeatureSet subset) const override;

  const TraceOptions& options() const noexcept { return options_; }

  /// Sub-blocks of S_w and S_b for `subset`, assembled from cached
  /// centered data.
  Matrix within_block(std::span<const std::size_t> subset) const;
  Matrix between_block(std::span<const std::size_t> subset) const;
  /// Off-diagonal border of the blocks when `feature` joins `subset`.
  Vector within_cross(std::span<const std::size_t> subset, std::size_t feature) const;
  Vector between_cross(std::span<const std::size_t> subset, std::size_t feature) const;

  /// Trace from precomputed blocks, applying the fallback ridge policy.
  double trace_from_blocks(const Matrix& within, const Matrix& between) const;

 private:
  // Rows are x - class mean; S_w = W'W.
  Matrix within_centered_;
  // Rows are sqrt(n_i) (class mean - overall mean); S_b = B'B.
  Matrix between_centered_;
  TraceOptions options_;
};

struct CriterionOptions {
  CriterionKind kind = CriterionKind::cp;
  std::optional<double> sigma2_override;
  TraceOptions trace;
};

/// Builds the criterion for a dataset, estimating sigma^2 for Cp when no
/// override is given. The dataset must outlive the returned criterion.
std::unique_ptr<Criterion> make_criterion(const Dataset& data, const CriterionOptions& options);

}  // namespace fsel
