#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fsel/dataset.hpp"
#include "fsel/linalg.hpp"
#include "fsel/selectors.hpp"

namespace fsel {

/// Chained splitmix64 over master, replication and stream.
///
/// A replication r of a Monte Carlo run gets dataset seed
/// derive_seed(master, r, 0) and coefficient seed derive_seed(master, r, 1).
/// simulate_regression(seed) in turn draws the design from
/// derive_seed(seed, 0, 0), the correlation matrix from derive_seed(seed, 0, 2)
/// and the noise from derive_seed(seed, 0, 3).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t replication, std::uint64_t stream);

/// Signal drawn fresh per replication: coefficients Uniform(low, high) on the
/// first `count` features.
struct RandomSignal {
  std::size_t count = 4;
  double low = 0.8;
  double high = 3.5;
};

struct SimulationSpec {
  std::size_t n = 80;
  std::size_t p = 80;
  std::map<std::size_t, double> coefficients;  // 0-based feature -> coefficient
  std::optional<RandomSignal> random_signal;   // replaces `coefficients` when set
  double intercept = 4.5;
  double noise_variance = 2.0;
  double max_corr = 0.0;
  std::size_t replications = 1;
  std::uint64_t seed = 1;

  /// Throws std::invalid_argument.
  void validate() const;

  /// Y = 4.5 + 3 X1 + 2.1 X2 + 3.5 X7 + 0.8 X12 + e, e ~ N(0, 2).
  static SimulationSpec reference_model(std::size_t p, std::size_t replications, std::uint64_t seed);
};

/// Symmetric, unit-diagonal, positive definite. Off-diagonals are drawn
/// Uniform(0, max_corr); eigenvalues below 1e-6 are clipped and the result is
/// rescaled to unit diagonal. Up to 5 attempts. Throws NumericalError.
Matrix random_correlation_matrix(std::size_t p, double max_corr, std::uint64_t seed);

/// n x p rows from N(0, correlation). Throws NumericalError when the
/// correlation is not positive definite.
Matrix sample_mvn(std::size_t n, const Matrix& correlation, std::uint64_t seed);

/// One regression dataset. Uses spec.seed directly, and `coefficients`
/// (random_signal is resolved by the Monte Carlo runner).
Dataset simulate_regression(const SimulationSpec& spec);

/// Dataset for replication `r`: derived seeds, random signal resolved.
Dataset simulate_replication(const SimulationSpec& spec, std::size_t replication);

/// True support of replication `r` (sorted).
std::vector<std::size_t> replication_support(const SimulationSpec& spec, std::size_t replication);

struct MethodSummary {
  Method method = Method::forward;
  double mean_selected = 0.0;
  double mean_backward_steps = 0.0;
  double mean_wall_time_seconds = 0.0;
  double mean_criterion_evals = 0.0;
  double exact_support_rate = 0.0;  // fraction of runs selecting exactly the true support
};

struct MonteCarloSummary {
  SimulationSpec spec;
  SelectionConfig config;
  std::size_t replications = 0;
  std::vector<MethodSummary> methods;

  const MethodSummary& at(Method method) const;
};

struct MonteCarloOptions {
  /// Worker threads for replications. Timings are only meaningful with 1.
  std::size_t threads = 1;
  /// sigma^2 for Cp when config has no override: the known noise variance.
  bool sigma2_from_spec = true;
};

/// Runs every method on every replication's dataset (same data per method
/// within a replication) and averages. Selector errors are rethrown as
/// the same category (std::runtime_error for unknown ones) naming the
/// replication.
MonteCarloSummary run_monte_carlo(const SimulationSpec& spec, const std::vector<Method>& methods,
                                  const SelectionConfig& config, const MonteCarloOptions& options = {});

}  // namespace fsel
