#include "fsel/datagen.hpp"

#include <cmath>
#include <exception>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>

#include <Eigen/Eigenvalues>

#include "fsel/errors.hpp"

namespace fsel {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Streams of simulate_regression relative to its own seed.
constexpr std::uint64_t kDesignStream = 0;
constexpr std::uint64_t kCorrelationStream = 2;
constexpr std::uint64_t kNoiseStream = 3;

}  // namespace

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t replication, std::uint64_t stream) {
  return splitmix64(splitmix64(splitmix64(master) ^ replication) ^ (stream + 0x9e3779b97f4a7c15ULL));
}

void SimulationSpec::validate() const {
  if (n < 2) throw std::invalid_argument("simulation: need n >= 2");
  if (p < 1) throw std::invalid_argument("simulation: need p >= 1");
  if (replications < 1) throw std::invalid_argument("simulation: need at least one replication");
  if (!(noise_variance >= 0.0) || !std::isfinite(noise_variance)) {
    throw std::invalid_argument("simulation: noise variance must be finite and nonnegative");
  }
  if (!(max_corr >= 0.0 && max_corr < 1.0)) throw std::invalid_argument("simulation: max_corr must lie in [0, 1)");
  for (const auto& [index, value] : coefficients) {
    if (index >= p) {
      throw std::invalid_argument("simulation: coefficient index " + std::to_string(index + 1) + " exceeds p = " +
                                  std::to_string(p));
    }
    if (!std::isfinite(value)) throw std::invalid_argument("simulation: non-finite coefficient");
  }
  if (random_signal) {
    if (random_signal->count > p) throw std::invalid_argument("simulation: random signal larger than p");
    if (!(random_signal->low <= random_signal->high)) throw std::invalid_argument("simulation: empty coefficient range");
  }
}

SimulationSpec SimulationSpec::reference_model(std::size_t p, std::size_t replications, std::uint64_t seed) {
  SimulationSpec spec;
  spec.n = 80;
  spec.p = p;
  spec.coefficients = {{0, 3.0}, {1, 2.1}, {6, 3.5}, {11, 0.8}};
  spec.intercept = 4.5;
  spec.noise_variance = 2.0;
  spec.max_corr = 0.0;
  spec.replications = replications;
  spec.seed = seed;
  return spec;
}

Matrix random_correlation_matrix(std::size_t p, double max_corr, std::uint64_t seed) {
  if (!(max_corr >= 0.0 && max_corr < 1.0)) {
    throw std::invalid_argument("random_correlation_matrix: max_corr must lie in [0, 1)");
  }
  const auto dim = static_cast<Eigen::Index>(p);
  if (max_corr == 0.0) return Matrix::Identity(dim, dim);

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(0.0, max_corr);
  constexpr int kAttempts = 5;
  for (int attempt = 0; attempt < kAttempts; ++attempt) {
    Matrix corr = Matrix::Identity(dim, dim);
    for (Eigen::Index i = 0; i < dim; ++i) {
      for (Eigen::Index j = i + 1; j < dim; ++j) corr(i, j) = corr(j, i) = uniform(rng);
    }

    Eigen::SelfAdjointEigenSolver<Matrix> eig(corr);
    if (eig.info() != Eigen::Success) continue;
    if (eig.eigenvalues().minCoeff() >= 1e-6) return corr;

    const Vector clipped = eig.eigenvalues().cwiseMax(1e-6);
    Matrix repaired = eig.eigenvectors() * clipped.asDiagonal() * eig.eigenvectors().transpose();
    const Vector inv_sd = repaired.diagonal().cwiseSqrt().cwiseInverse();
    repaired = inv_sd.asDiagonal() * repaired * inv_sd.asDiagonal();
    repaired = (0.5 * (repaired + repaired.transpose())).eval();
    repaired.diagonal().setOnes();

    Eigen::SelfAdjointEigenSolver<Matrix> check(repaired, Eigen::EigenvaluesOnly);
    if (check.info() == Eigen::Success && check.eigenvalues().minCoeff() >= 1e-8) return repaired;
  }
  throw NumericalError("random_correlation_matrix: could not repair to positive definite after 5 attempts");
}

Matrix sample_mvn(std::size_t n, const Matrix& correlation, std::uint64_t seed) {
  const Eigen::Index p = correlation.rows();
  if (correlation.cols() != p) throw std::invalid_argument("sample_mvn: correlation must be square");
  const Eigen::LLT<Matrix> llt(correlation);
  if (llt.info() != Eigen::Success) throw NumericalError("sample_mvn: correlation is not positive definite");

  const auto rows = static_cast<Eigen::Index>(n);
  Matrix z(rows, p);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < p; ++c) z(r, c) = normal(rng);
  }
  return z * llt.matrixL().transpose();
}

Dataset simulate_regression(const SimulationSpec& spec) {
  spec.validate();
  const auto p = static_cast<Eigen::Index>(spec.p);
  const Matrix corr = spec.max_corr > 0.0
                          ? random_correlation_matrix(spec.p, spec.max_corr, derive_seed(spec.seed, 0, kCorrelationStream))
                          : Matrix::Identity(p, p);
  Matrix X = sample_mvn(spec.n, corr, derive_seed(spec.seed, 0, kDesignStream));

  Vector y = Vector::Constant(X.rows(), spec.intercept);
  for (const auto& [index, value] : spec.coefficients) y += value * X.col(static_cast<Eigen::Index>(index));

  std::mt19937_64 rng(derive_seed(spec.seed, 0, kNoiseStream));
  std::normal_distribution<double> noise(0.0, std::sqrt(spec.noise_variance));
  for (Eigen::Index r = 0; r < y.size(); ++r) y(r) += noise(rng);

  return Dataset::regression(std::move(X), std::move(y));
}

namespace {

SimulationSpec resolve_replication(const SimulationSpec& spec, std::size_t replication) {
  SimulationSpec rep = spec;
  rep.seed = derive_seed(spec.seed, replication, 0);
  rep.replications = 1;
  if (spec.random_signal) {
    std::mt19937_64 rng(derive_seed(spec.seed, replication, 1));
    std::uniform_real_distribution<double> uniform(spec.random_signal->low, spec.random_signal->high);
    rep.coefficients.clear();
    for (std::size_t i = 0; i < spec.random_signal->count; ++i) rep.coefficients[i] = uniform(rng);
    rep.random_signal.reset();
  }
  return rep;
}

}  // namespace

Dataset simulate_replication(const SimulationSpec& spec, std::size_t replication) {
  return simulate_regression(resolve_replication(spec, replication));
}

std::vector<std::size_t> replication_support(const SimulationSpec& spec, std::size_t replication) {
  const SimulationSpec rep = resolve_replication(spec, replication);
  std::vector<std::size_t> support;
  for (const auto& [index, value] : rep.coefficients) {
    if (value != 0.0) support.push_back(index);
  }
  return support;
}

const MethodSummary& MonteCarloSummary::at(Method method) const {
  for (const auto& m : methods) {
    if (m.method == method) return m;
  }
  throw std::out_of_range("Monte Carlo summary has no entry for method " + std::string(method_name(method)));
}

namespace {

struct RunStats {
  std::size_t selected = 0;
  std::size_t backward_steps = 0;
  std::size_t criterion_evals = 0;
  double wall_time = 0.0;
  bool exact_support = false;
};

[[noreturn]] void rethrow_with_replication(std::exception_ptr error, std::size_t replication) {
  const std::string prefix = "replication " + std::to_string(replication) + ": ";
  try {
    std::rethrow_exception(error);
  } catch (const NumericalError& e) {
    throw NumericalError(prefix + e.what());
  } catch (const DataError& e) {
    throw DataError(prefix + e.what());
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(prefix + e.what());
  } catch (const std::exception& e) {
    throw std::runtime_error(prefix + e.what());
  }
}

}  // namespace

MonteCarloSummary run_monte_carlo(const SimulationSpec& spec, const std::vector<Method>& methods,
                                  const SelectionConfig& config, const MonteCarloOptions& options) {
  spec.validate();
  if (methods.empty()) throw std::invalid_argument("run_monte_carlo: no methods requested");

  SelectionConfig effective = config;
  if (options.sigma2_from_spec && effective.criterion.kind == CriterionKind::cp &&
      !effective.criterion.sigma2_override && spec.noise_variance > 0.0) {
    effective.criterion.sigma2_override = spec.noise_variance;
  }

  const std::size_t reps = spec.replications;
  std::vector<std::vector<RunStats>> results(reps, std::vector<RunStats>(methods.size()));
  std::vector<std::exception_ptr> errors(reps);

  auto run_one = [&](std::size_t r) {
    try {
      const Dataset data = simulate_replication(spec, r);
      const auto support = replication_support(spec, r);
      for (std::size_t m = 0; m < methods.size(); ++m) {
        const SelectionReport report = run_selector(methods[m], data, effective);
        auto sorted = report.selected;
        std::sort(sorted.begin(), sorted.end());
        results[r][m] = {report.selected.size(), report.backward_steps_taken, report.criterion_evals,
                         report.wall_time_seconds, sorted == support};
      }
    } catch (...) {
      errors[r] = std::current_exception();
    }
  };

  const std::size_t threads = std::max<std::size_t>(1, std::min(options.threads, reps));
  if (threads == 1) {
    for (std::size_t r = 0; r < reps; ++r) run_one(r);
  } else {
    std::vector<std::jthread> workers;
    for (std::size_t t = 0; t < threads; ++t) {
      workers.emplace_back([&, t] {
        for (std::size_t r = t; r < reps; r += threads) run_one(r);
      });
    }
  }

  for (std::size_t r = 0; r < reps; ++r) {
    if (errors[r]) rethrow_with_replication(errors[r], r);
  }

  MonteCarloSummary summary;
  summary.spec = spec;
  summary.config = effective;
  summary.replications = reps;
  const auto count = static_cast<double>(reps);
  for (std::size_t m = 0; m < methods.size(); ++m) {
    MethodSummary s;
    s.method = methods[m];
    for (std::size_t r = 0; r < reps; ++r) {
      const RunStats& run = results[r][m];
      s.mean_selected += static_cast<double>(run.selected);
      s.mean_backward_steps += static_cast<double>(run.backward_steps);
      s.mean_criterion_evals += static_cast<double>(run.criterion_evals);
      s.mean_wall_time_seconds += run.wall_time;
      s.exact_support_rate += run.exact_support ? 1.0 : 0.0;
    }
    s.mean_selected /= count;
    s.mean_backward_steps /= count;
    s.mean_criterion_evals /= count;
    s.mean_wall_time_seconds /= count;
    s.exact_support_rate /= count;
    summary.methods.push_back(s);
  }
  return summary;
}

}  // namespace fsel
