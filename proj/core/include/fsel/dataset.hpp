#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "fsel/linalg.hpp"

namespace fsel {

/// Class labels encoded as 0..C-1 with their original spellings.
struct Labels {
  std::vector<int> codes;
  std::vector<std::string> names;

  std::size_t class_count() const noexcept { return names.size(); }
  std::vector<std::size_t> counts() const;
};

/// Per-column affine map fitted on training data.
struct StandardizationStats {
  std::vector<double> mean;
  std::vector<double> scale;    // population std; 1 for constant columns
  std::vector<bool> constant;
};

/// Feature matrix plus either a numeric response or class labels.
class Dataset {
 public:
  Dataset() = default;

  static Dataset regression(Matrix X, Vector y, std::vector<std::string> names = {});
  static Dataset classification(Matrix X, Labels labels, std::vector<std::string> names = {});

  const Matrix& X() const noexcept { return X_; }
  std::size_t rows() const noexcept { return static_cast<std::size_t>(X_.rows()); }
  std::size_t features() const noexcept { return static_cast<std::size_t>(X_.cols()); }
  const std::vector<std::string>& column_names() const noexcept { return names_; }

  bool is_classification() const noexcept { return std::holds_alternative<Labels>(target_); }
  /// Throws DataError when the target is labels.
  const Vector& response() const;
  /// Throws DataError when the target is numeric.
  const Labels& labels() const;

  const std::optional<StandardizationStats>& stats() const noexcept { return stats_; }

  /// Same target, new features and optional stats. Names are kept when the
  /// column count matches and replaced by x1..xp otherwise.
  Dataset with_features(Matrix X, std::optional<StandardizationStats> stats = std::nullopt) const;

  /// Row subset, preserving column names and stats.
  Dataset rows_subset(const std::vector<std::size_t>& rows) const;

  /// Column subset.
  Dataset columns_subset(std::span<const std::size_t> columns) const;

 private:
  Dataset(Matrix X, std::variant<Vector, Labels> target, std::vector<std::string> names);
  void validate() const;

  Matrix X_;
  std::variant<Vector, Labels> target_;
  std::vector<std::string> names_;
  std::optional<StandardizationStats> stats_;
};

/// Maps label spellings to codes 0..C-1. Classes are ordered numerically when
/// every spelling parses as a number, lexicographically otherwise.
Labels encode_labels(const std::vector<std::string>& raw);

/// x1, x2, ... (1-based)
std::vector<std::string> default_column_names(std::size_t count);

}  // namespace fsel
