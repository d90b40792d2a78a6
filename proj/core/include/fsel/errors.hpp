#pragma once

#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>

namespace fsel {

/// Base class for numerical failures (singular designs, singular scatter).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input data.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Least-squares design is rank deficient. `column()` is the position of the
/// offending column inside the feature matrix handed to the fit, or
/// `intercept_column` when the intercept itself was found dependent.
class SingularFitError : public NumericalError {
 public:
  static constexpr std::size_t intercept_column = std::numeric_limits<std::size_t>::max();

  SingularFitError(std::size_t column, const std::string& what)
      : NumericalError(what), column_(column) {}

  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t column_;
};

/// Within-class scatter could not be inverted.
class SingularScatterError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace fsel
