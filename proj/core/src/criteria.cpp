#include "fsel/criteria.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "fsel/errors.hpp"

namespace fsel {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Relative LDLT pivot floor for declaring S_w singular.
constexpr double kScatterTolerance = 1e-13;

std::size_t position_in(const FeatureSet& subset, std::size_t feature) {
  const auto it = std::find(subset.begin(), subset.end(), feature);
  return static_cast<std::size_t>(it - subset.begin());
}

void check_move(const CriterionState& state, std::size_t candidate, Direction direction, std::size_t bound) {
  if (candidate >= bound) {
    throw std::invalid_argument("criterion: candidate " + std::to_string(candidate) + " out of range");
  }
  const bool inside = state.contains(candidate);
  if (direction == Direction::add && inside) {
    throw std::invalid_argument("criterion: feature " + std::to_string(candidate) + " is already in the subset");
  }
  if (direction == Direction::remove && !inside) {
    throw std::invalid_argument("criterion: feature " + std::to_string(candidate) + " is not in the subset");
  }
}

FeatureSet moved_subset(const FeatureSet& subset, std::size_t candidate, Direction direction) {
  FeatureSet out = subset;
  if (direction == Direction::add) {
    out.push_back(candidate);
  } else {
    out.erase(std::find(out.begin(), out.end(), candidate));
  }
  return out;
}

// --- Cp ----------------------------------------------------------------------

class CpState final : public CriterionState {
 public:
  CpState(const CpCriterion& criterion, FeatureSet subset, IncrementalFit fit)
      : CriterionState(std::move(subset), 0.0), criterion_(criterion), fit_(std::move(fit)) {
    set_value(mallows_cp(fit_.sse(), criterion_.data().rows(), this->subset().size(), criterion_.sigma2()));
  }

  Orientation orientation() const noexcept override { return Orientation::minimize; }

  double gain(std::size_t candidate, Direction direction) const override {
    check_move(*this, candidate, direction, criterion_.feature_count());
    const double sigma2 = criterion_.sigma2();
    if (direction == Direction::add) {
      // Cp needs n > k + 1 after the addition.
      if (criterion_.data().rows() <= subset().size() + 2) return kNegInf;
      const double drop = fit_.sse_drop_if_added(column(candidate));
      if (drop < 0.0) return kNegInf;
      return drop / sigma2 - 2.0;
    }
    const std::size_t design_column = position_in(subset(), candidate) + 1;
    return 2.0 - fit_.sse_rise_if_removed(design_column) / sigma2;
  }

  std::unique_ptr<CriterionState> moved(std::size_t candidate, Direction direction) const override {
    check_move(*this, candidate, direction, criterion_.feature_count());
    if (direction == Direction::remove) return criterion_.state(moved_subset(subset(), candidate, direction));
    if (criterion_.data().rows() <= subset().size() + 2) {
      throw SingularFitError(subset().size(), "Cp: need more samples than parameters");
    }
    IncrementalFit grown = fit_;
    try {
      grown.append(column(candidate));
    } catch (const SingularFitError&) {
      throw SingularFitError(subset().size(), "Cp: feature " + std::to_string(candidate) +
                                                  " is linearly dependent on the current subset");
    }
    return std::make_unique<CpState>(criterion_, moved_subset(subset(), candidate, direction), std::move(grown));
  }

 private:
  Eigen::Ref<const Vector> column(std::size_t feature) const {
    return criterion_.data().X().col(static_cast<Eigen::Index>(feature));
  }

  const CpCriterion& criterion_;
  IncrementalFit fit_;
};

// --- trace -------------------------------------------------------------------

class TraceState final : public CriterionState {
 public:
  TraceState(const TraceCriterion& criterion, FeatureSet subset, Matrix within, Matrix between, double value)
      : CriterionState(std::move(subset), value),
        criterion_(criterion),
        within_(std::move(within)),
        between_(std::move(between)) {
    prepare_closed_forms();
  }

  Orientation orientation() const noexcept override { return Orientation::maximize; }

  double gain(std::size_t candidate, Direction direction) const override {
    check_move(*this, candidate, direction, criterion_.feature_count());
    if (direction == Direction::add) {
      const Vector w = criterion_.within_cross(subset(), candidate);
      const Vector b = criterion_.between_cross(subset(), candidate);
      const FeatureSet one{candidate};
      const double c = criterion_.within_block(one)(0, 0);
      const double e = criterion_.between_block(one)(0, 0);
      if (closed_form_) {
        // Bordered inverse: the new trace is old + (u'Bu - 2u'b + e) / s.
        const Vector u = inverse_ * w;
        const double s = c - w.dot(u);
        if (c > 0.0 && s > kClosedFormMargin * c) return (u.dot(between_ * u) - 2.0 * u.dot(b) + e) / s;
      }
      return exact_gain(bordered(within_, w, c), bordered(between_, b, e));
    }
    const auto t = static_cast<Eigen::Index>(position_in(subset(), candidate));
    // Deleting row/column t: the trace drops by (M B M)_tt / M_tt.
    if (closed_form_) return -sandwich_(t, t) / inverse_(t, t);
    return exact_gain(drop_row_col(within_, t), drop_row_col(between_, t));
  }

  std::unique_ptr<CriterionState> moved(std::size_t candidate, Direction direction) const override {
    check_move(*this, candidate, direction, criterion_.feature_count());
    return criterion_.state(moved_subset(subset(), candidate, direction));
  }

 private:
  // Closed forms are used only while S_w is far from singular; near the
  // boundary the exact path applies the ridge fallback policy.
  static constexpr double kClosedFormMargin = 1e-7;

  void prepare_closed_forms() {
    if (within_.rows() == 0 || criterion_.options().always_ridge) return;
    const Eigen::LDLT<Matrix> ldlt(within_);
    const Vector pivots = ldlt.vectorD();
    if (ldlt.info() != Eigen::Success || !(pivots.minCoeff() > kClosedFormMargin * pivots.maxCoeff())) return;
    inverse_ = ldlt.solve(Matrix::Identity(within_.rows(), within_.cols()));
    sandwich_ = inverse_ * between_ * inverse_;
    closed_form_ = true;
  }

  double exact_gain(const Matrix& within, const Matrix& between) const {
    try {
      return criterion_.trace_from_blocks(within, between) - value();
    } catch (const NumericalError&) {
      return kNegInf;
    }
  }

  static Matrix bordered(const Matrix& m, const Vector& border, double corner) {
    const Eigen::Index d = m.rows();
    Matrix out(d + 1, d + 1);
    out.topLeftCorner(d, d) = m;
    out.topRightCorner(d, 1) = border;
    out.bottomLeftCorner(1, d) = border.transpose();
    out(d, d) = corner;
    return out;
  }

  static Matrix drop_row_col(const Matrix& m, Eigen::Index t) {
    const Eigen::Index d = m.rows();
    Matrix out(d - 1, d - 1);
    for (Eigen::Index i = 0, oi = 0; i < d; ++i) {
      if (i == t) continue;
      for (Eigen::Index j = 0, oj = 0; j < d; ++j) {
        if (j == t) continue;
        out(oi, oj++) = m(i, j);
      }
      ++oi;
    }
    return out;
  }

  const TraceCriterion& criterion_;
  Matrix within_;
  Matrix between_;
  bool closed_form_ = false;
  Matrix inverse_;   // S_w^-1
  Matrix sandwich_;  // S_w^-1 S_b S_w^-1
};

}  // namespace

bool CriterionState::contains(std::size_t feature) const noexcept {
  return std::find(subset_.begin(), subset_.end(), feature) != subset_.end();
}

double criterion_gain(const CriterionState& state, std::size_t candidate, Direction direction) {
  return state.gain(candidate, direction);
}

double mallows_cp(double sse, std::size_t n, std::size_t k, double sigma2) {
  if (!(sigma2 > 0.0)) throw std::invalid_argument("mallows_cp: sigma2 must be positive");
  if (n <= k + 1) throw std::invalid_argument("mallows_cp: need n > k + 1");
  return sse / sigma2 - static_cast<double>(n) + 2.0 * static_cast<double>(k + 1);
}

double estimate_sigma2(const Dataset& data, std::optional<double> override_value) {
  if (override_value) {
    if (!(*override_value > 0.0) || !std::isfinite(*override_value)) {
      throw std::invalid_argument("estimate_sigma2: override must be a positive finite number");
    }
    return *override_value;
  }
  const Vector& y = data.response();
  const std::size_t n = data.rows();
  const std::size_t p = data.features();
  if (n < 4) throw std::invalid_argument("estimate_sigma2: need at least 4 samples without an override");

  const double tss = (y.array() - y.mean()).square().sum();
  auto checked = [&](double sigma2) {
    if (!(sigma2 > 1e-14 * std::max(tss / static_cast<double>(n), 1e-300))) {
      throw NumericalError("estimate_sigma2: residual variance is zero or negligible; supply a sigma^2 override");
    }
    return sigma2;
  };

  if (n > p + 2) {
    try {
      return checked(fit_ols(data.X(), y, true).sse / static_cast<double>(n - p - 1));
    } catch (const SingularFitError&) {
      // collinear full model: fall through to the capped path
    }
  }

  // Greedy SSE-reduction path, capped at floor(n / 2) features.
  const std::size_t cap = std::min(n / 2, p);
  std::vector<bool> used(p, false);
  std::size_t k = 0;
  IncrementalFit fit(y);
  while (k < cap) {
    double best_drop = -1.0;
    std::size_t best = p;
    for (std::size_t f = 0; f < p; ++f) {
      if (used[f]) continue;
      const double drop = fit.sse_drop_if_added(data.X().col(static_cast<Eigen::Index>(f)));
      if (drop > best_drop) {
        best_drop = drop;
        best = f;
      }
    }
    if (best == p || best_drop < 0.0) break;
    fit.append(data.X().col(static_cast<Eigen::Index>(best)));
    used[best] = true;
    ++k;
  }
  return checked(fit.sse() / static_cast<double>(n - k - 1));
}

CpCriterion::CpCriterion(const Dataset& data, double sigma2) : data_(&data), sigma2_(sigma2) {
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) throw std::invalid_argument("CpCriterion: sigma2 must be positive");
  (void)data.response();
}

std::size_t CpCriterion::feature_count() const noexcept { return data_->features(); }

double CpCriterion::evaluate(std::span<const std::size_t> subset) const {
  check_subset(subset, feature_count());
  if (data_->rows() <= subset.size() + 1) {
    throw SingularFitError(subset.empty() ? 0 : subset.size() - 1, "Cp: need more samples than parameters");
  }
  const double sse = sse_of_subset(*data_, subset);
  return mallows_cp(sse, data_->rows(), subset.size(), sigma2_);
}

std::unique_ptr<CriterionState> CpCriterion::state(FeatureSet subset) const {
  check_subset(subset, feature_count());
  const std::size_t k = subset.size();
  if (data_->rows() <= k + 1) {
    throw SingularFitError(k == 0 ? 0 : k - 1, "Cp: need more samples than parameters");
  }
  IncrementalFit fit(data_->response());
  for (std::size_t i = 0; i < k; ++i) {
    try {
      fit.append(data_->X().col(static_cast<Eigen::Index>(subset[i])));
    } catch (const SingularFitError&) {
      throw SingularFitError(i, "Cp: feature " + std::to_string(subset[i]) +
                                    " is linearly dependent on the earlier features of the subset");
    }
  }
  return std::make_unique<CpState>(*this, std::move(subset), std::move(fit));
}

// --- scatter -----------------------------------------------------------------

ScatterPair scatter_matrices(const Matrix& X, const Labels& labels) {
  const Eigen::Index n = X.rows();
  const Eigen::Index d = X.cols();
  if (n < 2) throw std::invalid_argument("scatter_matrices: need at least 2 samples");
  if (d < 1) throw std::invalid_argument("scatter_matrices: subset is empty");
  if (labels.codes.size() != static_cast<std::size_t>(n)) {
    throw std::invalid_argument("scatter_matrices: label count differs from row count");
  }

  ScatterPair out;
  out.class_counts = labels.counts();
  const auto classes = static_cast<Eigen::Index>(labels.class_count());
  out.class_means = Matrix::Zero(classes, d);
  for (Eigen::Index r = 0; r < n; ++r) out.class_means.row(labels.codes[static_cast<std::size_t>(r)]) += X.row(r);
  for (Eigen::Index c = 0; c < classes; ++c) {
    const auto count = out.class_counts[static_cast<std::size_t>(c)];
    if (count > 0) out.class_means.row(c) /= static_cast<double>(count);
  }
  out.overall_mean = X.colwise().mean().transpose();

  out.between = Matrix::Zero(d, d);
  for (Eigen::Index c = 0; c < classes; ++c) {
    const auto count = out.class_counts[static_cast<std::size_t>(c)];
    if (count == 0) continue;
    const Vector diff = out.class_means.row(c).transpose() - out.overall_mean;
    out.between.noalias() += static_cast<double>(count) * diff * diff.transpose();
  }

  Matrix centered(n, d);
  for (Eigen::Index r = 0; r < n; ++r) centered.row(r) = X.row(r) - out.class_means.row(labels.codes[static_cast<std::size_t>(r)]);
  out.within = centered.transpose() * centered;

  // exact symmetry
  out.between = (0.5 * (out.between + out.between.transpose())).eval();
  out.within = (0.5 * (out.within + out.within.transpose())).eval();
  return out;
}

double trace_of_scatter(const Matrix& within, const Matrix& between, double ridge) {
  const Eigen::Index d = within.rows();
  if (d == 0) return 0.0;
  if (ridge < 0.0) throw std::invalid_argument("trace criterion: ridge must be nonnegative");

  Matrix regularized = within;
  if (ridge > 0.0) {
    const double tr = within.trace();
    const double lambda = tr > 0.0 ? ridge * tr / static_cast<double>(d) : ridge;
    regularized.diagonal().array() += lambda;
  }

  const Eigen::LDLT<Matrix> ldlt(regularized);
  const Vector pivots = ldlt.vectorD();
  const double largest = pivots.maxCoeff();
  if (ldlt.info() != Eigen::Success || !(largest > 0.0) || !(pivots.minCoeff() > kScatterTolerance * largest)) {
    throw SingularScatterError("trace criterion: within-class scatter is singular");
  }
  const double value = ldlt.solve(between).trace();
  return std::max(0.0, value);
}

double trace_criterion(const Matrix& X, const Labels& labels, double ridge) {
  const ScatterPair scatter = scatter_matrices(X, labels);
  return trace_of_scatter(scatter.within, scatter.between, ridge);
}

TraceCriterion::TraceCriterion(const Dataset& data, TraceOptions options) : options_(options) {
  const Labels& labels = data.labels();
  const Matrix& X = data.X();
  if (options_.ridge < 0.0) throw std::invalid_argument("TraceCriterion: ridge must be nonnegative");
  if (data.rows() < 2) throw std::invalid_argument("TraceCriterion: need at least 2 samples");

  const auto classes = static_cast<Eigen::Index>(labels.class_count());
  const auto counts = labels.counts();
  Matrix means = Matrix::Zero(classes, X.cols());
  for (Eigen::Index r = 0; r < X.rows(); ++r) means.row(labels.codes[static_cast<std::size_t>(r)]) += X.row(r);
  for (Eigen::Index c = 0; c < classes; ++c) {
    if (counts[static_cast<std::size_t>(c)] > 0) means.row(c) /= static_cast<double>(counts[static_cast<std::size_t>(c)]);
  }
  const Eigen::RowVectorXd overall = X.colwise().mean();

  within_centered_.resize(X.rows(), X.cols());
  for (Eigen::Index r = 0; r < X.rows(); ++r) {
    within_centered_.row(r) = X.row(r) - means.row(labels.codes[static_cast<std::size_t>(r)]);
  }
  between_centered_ = Matrix::Zero(classes, X.cols());
  for (Eigen::Index c = 0; c < classes; ++c) {
    const auto count = static_cast<double>(counts[static_cast<std::size_t>(c)]);
    if (count > 0) between_centered_.row(c) = std::sqrt(count) * (means.row(c) - overall);
  }
}

std::size_t TraceCriterion::feature_count() const noexcept { return static_cast<std::size_t>(within_centered_.cols()); }

namespace {

Matrix gram_block(const Matrix& centered, std::span<const std::size_t> subset) {
  const auto d = static_cast<Eigen::Index>(subset.size());
  Matrix out(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    const auto ci = centered.col(static_cast<Eigen::Index>(subset[static_cast<std::size_t>(i)]));
    for (Eigen::Index j = 0; j <= i; ++j) {
      out(i, j) = out(j, i) = ci.dot(centered.col(static_cast<Eigen::Index>(subset[static_cast<std::size_t>(j)])));
    }
  }
  return out;
}

Vector gram_cross(const Matrix& centered, std::span<const std::size_t> subset, std::size_t feature) {
  Vector out(static_cast<Eigen::Index>(subset.size()));
  const auto cf = centered.col(static_cast<Eigen::Index>(feature));
  for (std::size_t i = 0; i < subset.size(); ++i) {
    out(static_cast<Eigen::Index>(i)) = cf.dot(centered.col(static_cast<Eigen::Index>(subset[i])));
  }
  return out;
}

}  // namespace

Matrix TraceCriterion::within_block(std::span<const std::size_t> subset) const { return gram_block(within_centered_, subset); }
Matrix TraceCriterion::between_block(std::span<const std::size_t> subset) const { return gram_block(between_centered_, subset); }
Vector TraceCriterion::within_cross(std::span<const std::size_t> subset, std::size_t feature) const {
  return gram_cross(within_centered_, subset, feature);
}
Vector TraceCriterion::between_cross(std::span<const std::size_t> subset, std::size_t feature) const {
  return gram_cross(between_centered_, subset, feature);
}

double TraceCriterion::trace_from_blocks(const Matrix& within, const Matrix& between) const {
  if (options_.always_ridge) return trace_of_scatter(within, between, options_.ridge);
  try {
    return trace_of_scatter(within, between, 0.0);
  } catch (const SingularScatterError&) {
    if (options_.ridge <= 0.0) throw;
    return trace_of_scatter(within, between, options_.ridge);
  }
}

double TraceCriterion::evaluate(std::span<const std::size_t> subset) const {
  check_subset(subset, feature_count());
  return trace_from_blocks(within_block(subset), between_block(subset));
}

std::unique_ptr<CriterionState> TraceCriterion::state(FeatureSet subset) const {
  check_subset(subset, feature_count());
  Matrix within = within_block(subset);
  Matrix between = between_block(subset);
  const double value = trace_from_blocks(within, between);
  return std::make_unique<TraceState>(*this, std::move(subset), std::move(within), std::move(between), value);
}

std::unique_ptr<Criterion> make_criterion(const Dataset& data, const CriterionOptions& options) {
  if (options.kind == CriterionKind::cp) {
    if (data.is_classification()) throw DataError("Cp criterion needs a numeric response");
    return std::make_unique<CpCriterion>(data, estimate_sigma2(data, options.sigma2_override));
  }
  if (!data.is_classification()) throw DataError("trace criterion needs class labels");
  return std::make_unique<TraceCriterion>(data, options.trace);
}

}  // namespace fsel
