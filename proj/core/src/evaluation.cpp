#include "fsel/evaluation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/SVD>

#include "fsel/errors.hpp"

namespace fsel {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

}  // namespace

Matrix apply_standardization(const Matrix& X, const StandardizationStats& stats) {
  if (static_cast<std::size_t>(X.cols()) != stats.mean.size()) {
    throw DataError("standardize: column count does not match the fitted statistics");
  }
  Matrix out = X;
  for (Eigen::Index c = 0; c < X.cols(); ++c) {
    const auto i = static_cast<std::size_t>(c);
    out.col(c) = (X.col(c).array() - stats.mean[i]) / stats.scale[i];
  }
  return out;
}

std::pair<Dataset, Dataset> standardize(const Dataset& train, const Dataset& test) {
  if (train.rows() == 0) throw DataError("standardize: training set is empty");
  if (test.features() != train.features()) throw DataError("standardize: train and test column counts differ");

  const Matrix& X = train.X();
  const auto n = static_cast<double>(X.rows());
  StandardizationStats stats;
  for (Eigen::Index c = 0; c < X.cols(); ++c) {
    const double mean = X.col(c).mean();
    const double sd = std::sqrt((X.col(c).array() - mean).square().sum() / n);
    const bool constant = !(sd > 1e-12 * std::max(1.0, std::abs(mean)));
    stats.mean.push_back(mean);
    stats.scale.push_back(constant ? 1.0 : sd);
    stats.constant.push_back(constant);
  }
  Matrix train_x = apply_standardization(X, stats);
  Matrix test_x = apply_standardization(test.X(), stats);
  return {train.with_features(std::move(train_x), stats), test.with_features(std::move(test_x), stats)};
}

std::pair<Dataset, Dataset> stratified_split(const Dataset& data, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw std::invalid_argument("split fraction must lie strictly between 0 and 1");
  }
  const Labels& labels = data.labels();
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> train_rows;
  std::vector<std::size_t> test_rows;
  for (std::size_t c = 0; c < labels.class_count(); ++c) {
    std::vector<std::size_t> members;
    for (std::size_t r = 0; r < labels.codes.size(); ++r) {
      if (labels.codes[r] == static_cast<int>(c)) members.push_back(r);
    }
    if (members.empty()) continue;
    std::shuffle(members.begin(), members.end(), rng);
    auto take = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(members.size())));
    take = std::clamp<std::size_t>(take, 1, members.size());
    train_rows.insert(train_rows.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(take));
    test_rows.insert(test_rows.end(), members.begin() + static_cast<std::ptrdiff_t>(take), members.end());
  }
  std::sort(train_rows.begin(), train_rows.end());
  std::sort(test_rows.begin(), test_rows.end());
  return {data.rows_subset(train_rows), data.rows_subset(test_rows)};
}

LdaModel lda_fit(const Dataset& train, double ridge) {
  const Labels& labels = train.labels();
  const auto counts = labels.counts();
  if (labels.class_count() < 2) throw DataError("LDA: need at least two classes");
  for (std::size_t c = 0; c < counts.size(); ++c) {
    if (counts[c] < 2) {
      throw DataError("LDA: class '" + labels.names[c] + "' has fewer than two training rows");
    }
  }
  if (ridge < 0.0) throw std::invalid_argument("LDA: ridge must be nonnegative");

  const Matrix& X = train.X();
  const Eigen::Index d = X.cols();
  const auto classes = static_cast<Eigen::Index>(labels.class_count());
  const auto n = static_cast<double>(X.rows());

  LdaModel model;
  model.classes = labels.names;
  model.class_means = Matrix::Zero(classes, d);
  for (Eigen::Index r = 0; r < X.rows(); ++r) model.class_means.row(labels.codes[static_cast<std::size_t>(r)]) += X.row(r);
  model.log_priors.resize(classes);
  for (Eigen::Index c = 0; c < classes; ++c) {
    const auto count = static_cast<double>(counts[static_cast<std::size_t>(c)]);
    model.class_means.row(c) /= count;
    model.log_priors(c) = std::log(count / n);
  }

  Matrix centered(X.rows(), d);
  for (Eigen::Index r = 0; r < X.rows(); ++r) {
    centered.row(r) = X.row(r) - model.class_means.row(labels.codes[static_cast<std::size_t>(r)]);
  }
  model.pooled_covariance = centered.transpose() * centered / (n - static_cast<double>(classes));
  if (d > 0 && ridge > 0.0) {
    const double tr = model.pooled_covariance.trace();
    model.ridge = tr > 0.0 ? ridge * tr / static_cast<double>(d) : ridge;
    model.pooled_covariance.diagonal().array() += model.ridge;
  }
  if (d > 0) {
    const Eigen::LDLT<Matrix> ldlt(model.pooled_covariance);
    const Vector pivots = ldlt.vectorD();
    if (ldlt.info() != Eigen::Success || !(pivots.maxCoeff() > 0.0) ||
        !(pivots.minCoeff() > 1e-13 * pivots.maxCoeff())) {
      throw SingularScatterError("LDA: pooled covariance is singular; use a positive ridge");
    }
  }
  return model;
}

std::vector<int> lda_predict(const LdaModel& model, const Matrix& X) {
  const Eigen::Index d = model.class_means.cols();
  if (X.cols() != d) throw DataError("LDA: predict matrix has the wrong number of columns");
  const Eigen::Index classes = model.class_means.rows();

  Matrix weights = Matrix::Zero(d, classes);  // S^-1 m_k
  Vector offsets = model.log_priors;
  if (d > 0) {
    const Eigen::LDLT<Matrix> ldlt(model.pooled_covariance);
    weights = ldlt.solve(model.class_means.transpose());
    for (Eigen::Index c = 0; c < classes; ++c) {
      offsets(c) -= 0.5 * model.class_means.row(c).dot(weights.col(c));
    }
  }
  const Matrix scores = (X * weights).rowwise() + offsets.transpose();

  std::vector<int> out(static_cast<std::size_t>(X.rows()));
  for (Eigen::Index r = 0; r < X.rows(); ++r) {
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < classes; ++c) {
      const double incumbent = scores(r, best);
      // near-equal scores count as a tie, which the lower code keeps
      if (scores(r, c) > incumbent + 1e-12 * std::max(1.0, std::abs(incumbent))) best = c;
    }
    out[static_cast<std::size_t>(r)] = static_cast<int>(best);
  }
  return out;
}

PcaResult pca_fit_transform(const Matrix& train, const Matrix& test, ComponentRequest request) {
  if (train.rows() < 2) throw DataError("PCA: need at least two training rows");
  if (test.cols() != train.cols()) throw DataError("PCA: train and test column counts differ");

  const Eigen::RowVectorXd mean = train.colwise().mean();
  const Matrix centered = train.rowwise() - mean;
  const Eigen::BDCSVD<Matrix> svd(centered, Eigen::ComputeThinV);
  const Vector sq = svd.singularValues().array().square();
  const double total = sq.sum();

  const auto cap = static_cast<std::size_t>(std::min(train.rows() - 1, train.cols()));
  std::size_t rank = 0;
  const double largest = sq.size() > 0 ? svd.singularValues()(0) : 0.0;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) {
    if (svd.singularValues()(i) > 1e-10 * largest) ++rank;
  }
  const std::size_t limit = std::min(cap, rank);

  PcaResult out;
  if (const auto* count = std::get_if<std::size_t>(&request)) {
    out.k = std::min(*count, limit);
    out.clamped = *count > limit;
  } else {
    const double target = std::get<double>(request);
    if (!(target > 0.0 && target <= 1.0)) throw std::invalid_argument("PCA: variance target must lie in (0, 1]");
    double cumulative = 0.0;
    while (out.k < limit && (total <= 0.0 || cumulative / total < target - 1e-12)) {
      cumulative += sq(static_cast<Eigen::Index>(out.k));
      ++out.k;
    }
    out.clamped = total > 0.0 && cumulative / total < target - 1e-12;
  }

  const auto k = static_cast<Eigen::Index>(out.k);
  out.explained = total > 0.0 ? sq.head(k).sum() / total : 1.0;
  out.components = svd.matrixV().leftCols(k);
  out.train_scores = centered * out.components;
  out.test_scores = (test.rowwise() - mean) * out.components;
  return out;
}

double error_rate(const std::vector<int>& predicted, const std::vector<int>& truth) {
  if (predicted.size() != truth.size()) throw std::invalid_argument("error_rate: length mismatch");
  if (truth.empty()) throw std::invalid_argument("error_rate: empty input");
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) wrong += predicted[i] != truth[i] ? 1 : 0;
  return static_cast<double>(wrong) / static_cast<double>(truth.size());
}

const MethodOutcome& ComparisonReport::at(const std::string& method) const {
  for (const auto& o : outcomes) {
    if (o.method == method) return o;
  }
  throw std::out_of_range("comparison report has no row for '" + method + "'");
}

namespace {

template <typename Fn>
auto tagged(const std::string& method, Fn&& fn) {
  try {
    return fn();
  } catch (const NumericalError& e) {
    throw NumericalError(method + ": " + e.what());
  } catch (const DataError& e) {
    throw DataError(method + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(method + ": " + e.what());
  }
}

}  // namespace

ComparisonReport compare_pipeline(const Dataset& data, const std::optional<Dataset>& test,
                                  const CompareOptions& options) {
  if (!data.is_classification()) throw DataError("compare: dataset has a numeric target; class labels required");

  auto [train_raw, test_raw] = [&]() -> std::pair<Dataset, Dataset> {
    if (test) {
      if (!test->is_classification()) throw DataError("compare: test set has a numeric target");
      if (test->labels().names != data.labels().names) throw DataError("compare: train and test class sets differ");
      return {data, *test};
    }
    return stratified_split(data, options.train_fraction, options.seed);
  }();
  if (test_raw.rows() == 0) throw DataError("compare: test set is empty");

  const auto [train, testset] = standardize(train_raw, test_raw);
  const auto& truth = testset.labels().codes;

  ComparisonReport report;
  report.train_rows = train.rows();
  report.test_rows = testset.rows();
  report.train_stats = *train.stats();

  SelectionConfig selection = options.selection;
  selection.criterion.kind = CriterionKind::trace;

  for (Method method : options.methods) {
    const std::string name(method_name(method));
    report.outcomes.push_back(tagged(name, [&] {
      const SelectionReport sel = run_selector(method, train, selection);
      const Dataset train_sel = train.columns_subset(sel.selected);
      const Matrix test_sel = select_columns(testset.X(), sel.selected);
      const LdaModel model = lda_fit(train_sel, options.lda_ridge);
      MethodOutcome o;
      o.method = name;
      o.test_error = error_rate(lda_predict(model, test_sel), truth);
      o.selected = sel.selected;
      o.feature_count = sel.selected.size();
      o.wall_time_seconds = sel.wall_time_seconds;
      o.criterion_evals = sel.criterion_evals;
      o.backward_steps = sel.backward_steps_taken;
      return o;
    }));
  }

  if (options.with_all_features) {
    report.outcomes.push_back(tagged("all-features", [&] {
      const auto start = Clock::now();
      const LdaModel model = lda_fit(train, options.lda_ridge);
      MethodOutcome o;
      o.method = "all-features";
      o.test_error = error_rate(lda_predict(model, testset.X()), truth);
      o.selected.resize(train.features());
      std::iota(o.selected.begin(), o.selected.end(), std::size_t{0});
      o.feature_count = train.features();
      o.wall_time_seconds = seconds_since(start);
      return o;
    }));
  }

  if (options.with_pca) {
    report.outcomes.push_back(tagged("pca", [&] {
      const auto start = Clock::now();
      const PcaResult pca = pca_fit_transform(train.X(), testset.X(), options.pca_variance);
      const LdaModel model = lda_fit(train.with_features(pca.train_scores), options.lda_ridge);
      MethodOutcome o;
      o.method = "pca";
      o.test_error = error_rate(lda_predict(model, pca.test_scores), truth);
      o.feature_count = pca.k;
      o.explained = pca.explained;
      o.wall_time_seconds = seconds_since(start);
      return o;
    }));
  }
  return report;
}

}  // namespace fsel
