#include "fsel/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <string>

#include "fsel/errors.hpp"

namespace fsel {

std::vector<std::size_t> Labels::counts() const {
  std::vector<std::size_t> out(names.size(), 0);
  for (int c : codes) ++out[static_cast<std::size_t>(c)];
  return out;
}

std::vector<std::string> default_column_names(std::size_t count) {
  std::vector<std::string> names;
  names.reserve(count);
  for (std::size_t i = 0; i < count; ++i) names.push_back("x" + std::to_string(i + 1));
  return names;
}

namespace {

std::optional<double> as_number(const std::string& s) {
  double v = 0.0;
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc{} || ptr != end) return std::nullopt;
  return v;
}

}  // namespace

Labels encode_labels(const std::vector<std::string>& raw) {
  std::vector<std::string> distinct = raw;
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

  const bool numeric = std::all_of(distinct.begin(), distinct.end(), [](const auto& s) { return as_number(s).has_value(); });
  if (numeric) {
    std::stable_sort(distinct.begin(), distinct.end(),
                     [](const auto& a, const auto& b) { return *as_number(a) < *as_number(b); });
  }

  std::map<std::string, int> code_of;
  for (std::size_t i = 0; i < distinct.size(); ++i) code_of[distinct[i]] = static_cast<int>(i);

  Labels out;
  out.names = std::move(distinct);
  out.codes.reserve(raw.size());
  for (const auto& s : raw) out.codes.push_back(code_of.at(s));
  return out;
}

Dataset::Dataset(Matrix X, std::variant<Vector, Labels> target, std::vector<std::string> names)
    : X_(std::move(X)), target_(std::move(target)), names_(std::move(names)) {
  if (names_.empty()) names_ = default_column_names(features());
  validate();
}

Dataset Dataset::regression(Matrix X, Vector y, std::vector<std::string> names) {
  return Dataset(std::move(X), std::move(y), std::move(names));
}

Dataset Dataset::classification(Matrix X, Labels labels, std::vector<std::string> names) {
  return Dataset(std::move(X), std::move(labels), std::move(names));
}

void Dataset::validate() const {
  if (names_.size() != features()) {
    throw DataError("dataset: " + std::to_string(names_.size()) + " column names for " +
                    std::to_string(features()) + " features");
  }
  if (!X_.allFinite()) throw DataError("dataset: feature matrix has non-finite entries");
  if (const auto* y = std::get_if<Vector>(&target_)) {
    if (static_cast<std::size_t>(y->size()) != rows()) {
      throw DataError("dataset: response length " + std::to_string(y->size()) + " differs from row count " +
                      std::to_string(rows()));
    }
    if (!y->allFinite()) throw DataError("dataset: response has non-finite entries");
  } else {
    const auto& labels = std::get<Labels>(target_);
    if (labels.codes.size() != rows()) {
      throw DataError("dataset: label count " + std::to_string(labels.codes.size()) + " differs from row count " +
                      std::to_string(rows()));
    }
    for (int c : labels.codes) {
      if (c < 0 || static_cast<std::size_t>(c) >= labels.names.size()) {
        throw DataError("dataset: label code " + std::to_string(c) + " has no class name");
      }
    }
  }
}

const Vector& Dataset::response() const {
  if (const auto* y = std::get_if<Vector>(&target_)) return *y;
  throw DataError("dataset: numeric response requested but the target holds class labels");
}

const Labels& Dataset::labels() const {
  if (const auto* l = std::get_if<Labels>(&target_)) return *l;
  throw DataError("dataset: class labels requested but the target is numeric");
}

Dataset Dataset::with_features(Matrix X, std::optional<StandardizationStats> stats) const {
  auto names = static_cast<std::size_t>(X.cols()) == features() ? names_ : std::vector<std::string>{};
  Dataset out(std::move(X), target_, std::move(names));
  out.stats_ = std::move(stats);
  return out;
}

Dataset Dataset::rows_subset(const std::vector<std::size_t>& rows) const {
  Matrix X(static_cast<Eigen::Index>(rows.size()), X_.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) X.row(static_cast<Eigen::Index>(r)) = X_.row(static_cast<Eigen::Index>(rows[r]));

  std::variant<Vector, Labels> target;
  if (const auto* y = std::get_if<Vector>(&target_)) {
    Vector sub(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) sub(static_cast<Eigen::Index>(r)) = (*y)(static_cast<Eigen::Index>(rows[r]));
    target = std::move(sub);
  } else {
    const auto& labels = std::get<Labels>(target_);
    Labels sub;
    sub.names = labels.names;
    sub.codes.reserve(rows.size());
    for (std::size_t r : rows) sub.codes.push_back(labels.codes[r]);
    target = std::move(sub);
  }
  Dataset out(std::move(X), std::move(target), names_);
  out.stats_ = stats_;
  return out;
}

Dataset Dataset::columns_subset(std::span<const std::size_t> columns) const {
  check_subset(columns, features());
  std::vector<std::string> names;
  for (std::size_t c : columns) names.push_back(names_[c]);
  return Dataset(select_columns(X_, columns), target_, std::move(names));
}

}  // namespace fsel
