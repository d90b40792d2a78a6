// Acceptance checks. One PASS/FAIL line per criterion; exit status 1 when any
// selected criterion fails. `--only N` runs a single criterion.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cli/csv.hpp"
#include "fsel/criteria.hpp"
#include "fsel/datagen.hpp"
#include "fsel/evaluation.hpp"
#include "fsel/linalg.hpp"
#include "fsel/selectors.hpp"
#include "support/oracles.hpp"

using namespace fsel;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Outcome {
  bool pass = false;
  std::string detail;
};

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(double v, int precision = 4) {
  std::ostringstream os;
  os << std::setprecision(precision) << v;
  return os.str();
}

FeatureSet sorted(FeatureSet s) {
  std::sort(s.begin(), s.end());
  return s;
}

std::string join(const FeatureSet& s) {
  std::string out;
  for (std::size_t f : s) out += (out.empty() ? "" : ",") + std::to_string(f + 1);
  return "{" + out + "}";
}

SelectionConfig cp_config(double sigma2, double alpha = 0.01, double beta = 0.01) {
  SelectionConfig config;
  config.alpha = alpha;
  config.beta = beta;
  config.criterion.kind = CriterionKind::cp;
  config.criterion.sigma2_override = sigma2;
  return config;
}

SelectionConfig trace_config(double alpha = 0.01, double beta = 0.01) {
  SelectionConfig config;
  config.alpha = alpha;
  config.beta = beta;
  config.criterion.kind = CriterionKind::trace;
  return config;
}

// Gaussian n x p design with n in [10, 40], p in [2, 8].
Matrix random_design(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> rows(10, 40);
  std::uniform_int_distribution<int> cols(2, 8);
  const int n = rows(rng);
  const int p = cols(rng);
  return oracle::random_matrix(n, p, rng);
}

Matrix with_intercept(const Matrix& X) {
  Matrix A(X.rows(), X.cols() + 1);
  A.col(0).setOnes();
  A.rightCols(X.cols()) = X;
  return A;
}

// --- 1: coefficients follow a column swap ------------------------------------

Outcome column_swap() {
  const Stopwatch clock;
  std::mt19937_64 rng(101);
  double worst = 0.0;
  std::size_t swaps = 0;
  for (int d = 0; d < 100; ++d) {
    const Matrix X = random_design(rng);
    const Vector y = oracle::random_matrix(X.rows(), 1, rng).col(0);
    const Vector base = fit_ols(X, y, true).coefficients;
    const double scale = std::max(1.0, base.cwiseAbs().maxCoeff());
    const auto p = static_cast<std::size_t>(X.cols());
    for (std::size_t i = 0; i < p; ++i)
      for (std::size_t j = i + 1; j < p; ++j) {
        Vector expected = base;
        std::swap(expected(static_cast<Eigen::Index>(i + 1)), expected(static_cast<Eigen::Index>(j + 1)));
        const Vector swapped = fit_ols(swap_columns(X, i, j), y, true).coefficients;
        worst = std::max(worst, (swapped - expected).cwiseAbs().maxCoeff() / scale);
        ++swaps;
      }
  }
  const double elapsed = clock.seconds();
  return {worst <= 1e-10 && elapsed < 5.0, std::to_string(swaps) + " swaps, max relative deviation " + fmt(worst) +
                                               ", " + fmt(elapsed, 3) + " s (limits 1e-10, 5 s)"};
}

// --- 2: determinant and inverse-Gram exchange --------------------------------

Outcome gram_exchange() {
  const Stopwatch clock;
  std::mt19937_64 rng(202);
  double worst_det = 0.0;
  double worst_inv = 0.0;
  for (int d = 0; d < 100; ++d) {
    const Matrix X = random_design(rng);
    const auto p = static_cast<std::size_t>(X.cols());
    std::uniform_int_distribution<std::size_t> pick(0, p - 1);
    const std::size_t i = pick(rng);
    std::size_t j = pick(rng);
    if (j == i) j = (i + 1) % p;
    const Matrix A = with_intercept(X);
    const Matrix As = with_intercept(swap_columns(X, i, j));
    const Matrix gram = A.transpose() * A;
    const Matrix gram_s = As.transpose() * As;
    const double det = gram.determinant();
    worst_det = std::max(worst_det, std::abs(gram_s.determinant() - det) / std::abs(det));

    // Swapping two design columns exchanges the matching rows and columns of
    // the inverse Gram matrix.
    Matrix expected = gram.inverse();
    const auto a = static_cast<Eigen::Index>(i + 1);
    const auto b = static_cast<Eigen::Index>(j + 1);
    expected.row(a).swap(expected.row(b));
    expected.col(a).swap(expected.col(b));
    const Matrix inv_s = gram_s.inverse();
    worst_inv = std::max(worst_inv, (inv_s - expected).cwiseAbs().maxCoeff() /
                                        std::max(1.0, expected.cwiseAbs().maxCoeff()));
  }
  const double elapsed = clock.seconds();
  return {worst_det <= 1e-8 && worst_inv <= 1e-8 && elapsed < 5.0,
          "max relative determinant gap " + fmt(worst_det) + ", inverse gap " + fmt(worst_inv) + ", " +
              fmt(elapsed, 3) + " s (limits 1e-8, 5 s)"};
}

// --- 3: stepwise rarely backtracks -------------------------------------------

Outcome stepwise_backtracking() {
  const Stopwatch clock;
  std::vector<std::pair<std::string, SimulationSpec>> cells;
  for (std::size_t k : {4, 8, 12, 16, 20}) {
    SimulationSpec spec = SimulationSpec::reference_model(80, 200, 1);
    spec.coefficients.clear();
    spec.random_signal = RandomSignal{k};
    cells.emplace_back("model_size=" + std::to_string(k), spec);
  }
  for (double c : {0.3, 0.4, 0.5, 0.6, 0.7}) {
    SimulationSpec spec = SimulationSpec::reference_model(80, 200, 1);
    spec.max_corr = c;
    cells.emplace_back("max_corr=" + fmt(c, 2), spec);
  }
  MonteCarloOptions options;
  options.threads = 4;
  bool pass = true;
  std::string detail;
  for (const auto& [label, spec] : cells) {
    const auto summary = run_monte_carlo(spec, {Method::stepwise}, cp_config(2.0), options);
    const double mean = summary.at(Method::stepwise).mean_backward_steps;
    pass = pass && mean <= 0.05;
    detail += label + ":" + fmt(mean, 3) + " ";
  }
  const double elapsed = clock.seconds();
  pass = pass && elapsed < 600.0;
  return {pass, "mean backward steps " + detail + "(limit 0.05), " + fmt(elapsed, 3) + " s"};
}

// --- 4 and 5 share one single-threaded run per p ------------------------------

const std::vector<Method> kCompared{Method::dropping_forward_backward, Method::forward_backward, Method::stepwise};

const std::map<std::size_t, MonteCarloSummary>& selection_runs() {
  static const std::map<std::size_t, MonteCarloSummary> runs = [] {
    std::map<std::size_t, MonteCarloSummary> out;
    for (std::size_t p : {50, 60, 70, 80})
      out.emplace(p, run_monte_carlo(SimulationSpec::reference_model(p, 200, 1), kCompared, cp_config(2.0)));
    return out;
  }();
  return runs;
}

Outcome selected_counts() {
  bool pass = true;
  std::string detail;
  for (const auto& [p, summary] : selection_runs()) {
    detail += "p=" + std::to_string(p);
    for (Method m : kCompared) {
      const double mean = summary.at(m).mean_selected;
      pass = pass && mean >= 3.80 && mean <= 4.15;
      detail += " " + std::string(method_name(m)) + ":" + fmt(mean, 4);
    }
    detail += "; ";
  }
  return {pass, "mean selected " + detail + "(target [3.80, 4.15])"};
}

Outcome efficiency() {
  bool counts = true;
  std::string detail = "mean evals";
  for (const auto& [p, summary] : selection_runs()) {
    const double dfb = summary.at(Method::dropping_forward_backward).mean_criterion_evals;
    const double fb = summary.at(Method::forward_backward).mean_criterion_evals;
    const double sw = summary.at(Method::stepwise).mean_criterion_evals;
    counts = counts && dfb < fb && dfb < sw;
    detail += " p=" + std::to_string(p) + " dfb/fb/stepwise " + fmt(dfb, 5) + "/" + fmt(fb, 5) + "/" + fmt(sw, 5) + ";";
  }
  const auto& at70 = selection_runs().at(70);
  const double ratio = at70.at(Method::dropping_forward_backward).mean_wall_time_seconds /
                       at70.at(Method::stepwise).mean_wall_time_seconds;
  const bool timing = ratio <= 0.9;
  return {counts && timing, detail + " p=70 dfb/stepwise wall time ratio " + fmt(ratio, 3) + " (limit 0.9)"};
}

// --- 6: selectors agree with brute-force oracles ------------------------------

Outcome oracle_equivalence() {
  std::size_t mismatches = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const Dataset data = oracle::random_regression(12, 6, seed + 600, 2, 1.0);
    const oracle::Greedy greedy(oracle::cp_values(data, 1.0), true, data.features(), 0.01, 0.01);
    const auto config = cp_config(1.0);

    const auto fwd = forward_select(data, config);
    const auto fwd_oracle = greedy.forward_only();
    bool same = fwd.steps.size() == fwd_oracle.steps.size();
    for (std::size_t i = 0; same && i < fwd.steps.size(); ++i)
      same = fwd.steps[i].kind == StepKind::forward && fwd.steps[i].features.front() == fwd_oracle.steps[i].feature;
    same = same && fwd.selected == fwd_oracle.selected;
    same = same && sorted(stepwise_select(data, config).selected) == sorted(greedy.stepwise().selected);
    same = same && sorted(dropping_fb_select(data, config).selected) ==
                       sorted(greedy.dropping(config.effective_drop_beta()).selected);
    if (!same) ++mismatches;
  }
  return {mismatches == 0, std::to_string(mismatches) + " of 50 datasets disagree with the oracles"};
}

// --- 7: dfb with drop_beta = -inf is forward-backward --------------------------

Outcome dropping_conservatism() {
  std::size_t mismatches = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const bool regression = seed % 2 == 0;
    const Dataset data = regression ? oracle::random_regression(40, 15, seed + 700, 4, 1.0)
                                    : oracle::random_classification(60, 10, 3, seed + 700, 3, 0.8);
    auto config = regression ? cp_config(1.0) : trace_config();
    const auto fb = forward_backward_select(data, config);
    config.drop_beta = -kInf;
    const auto dfb = dropping_fb_select(data, config);
    if (sorted(dfb.selected) != sorted(fb.selected)) ++mismatches;
  }
  return {mismatches == 0, std::to_string(mismatches) + " of 100 datasets (50 Cp, 50 trace) differ"};
}

// --- 8: scatter decomposition and identical means ----------------------------

Outcome scatter_checks() {
  double worst_split = 0.0;
  double worst_zero = 0.0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const Dataset data = oracle::random_classification(50, 6, 3, seed + 800, 3, 1.0);
    const Matrix& X = data.X();
    const auto s = scatter_matrices(X, data.labels());
    const Matrix centred = X.rowwise() - X.colwise().mean();
    const Matrix total = centred.transpose() * centred;
    worst_split = std::max(worst_split, (s.between + s.within - total).cwiseAbs().maxCoeff() /
                                            std::max(1.0, total.cwiseAbs().maxCoeff()));

    // Same data with every class shifted onto a common mean.
    Matrix shifted = X;
    for (std::size_t r = 0; r < data.rows(); ++r) {
      const auto i = static_cast<Eigen::Index>(r);
      shifted.row(i) -= s.class_means.row(data.labels().codes[r]);
    }
    worst_zero = std::max(worst_zero, std::abs(trace_criterion(shifted, data.labels(), 0.0)));
  }
  return {worst_split <= 1e-9 && worst_zero <= 1e-9,
          "max relative S_b + S_w - S_t " + fmt(worst_split) + ", max criterion at equal means " + fmt(worst_zero) +
              " (limits 1e-9)"};
}

// --- 9: real-data smoke ------------------------------------------------------

std::string first_field(const std::filesystem::path& path, std::size_t* columns) {
  std::ifstream in(path);
  std::string line;
  while (std::getline(in, line) && line.find_first_not_of(" \t\r") == std::string::npos) {
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto fields = cli::split_record(line);
  *columns = fields.size();
  return fields.empty() ? std::string() : fields.front();
}

Outcome real_data() {
  const char* env = std::getenv("FSEL_IONOSPHERE_CSV");
  const bool external = env != nullptr && *env != '\0';
  const std::filesystem::path path =
      external ? std::filesystem::path(env) : std::filesystem::path(FSEL_TEST_DATA_DIR) / "synthetic_ionosphere.csv";

  std::size_t columns = 0;
  const std::string first = first_field(path, &columns);
  if (columns < 2) return {false, "cannot read " + path.string()};
  double ignored = 0.0;
  std::istringstream probe(first);
  cli::CsvOptions options;
  options.header = !(probe >> ignored && probe.eof());
  options.kind = cli::TargetKind::label;
  options.target = std::to_string(columns);
  const Dataset data = cli::load_csv(path, options);

  CompareOptions compare;
  compare.selection.alpha = 0.05;
  compare.selection.beta = 0.05;
  const auto report = compare_pipeline(data, std::nullopt, compare);
  const auto& sw = report.at("stepwise");
  const auto& fb = report.at("fb");
  const auto& dfb = report.at("dfb");

  bool pass = sorted(sw.selected) == sorted(fb.selected) && sw.test_error == fb.test_error;
  std::string detail = std::string(external ? "external " : "bundled ") + path.filename().string() +
                       ": stepwise " + join(sorted(sw.selected)) + " error " + fmt(sw.test_error) + ", fb " +
                       join(sorted(fb.selected)) + " error " + fmt(fb.test_error) + ", counts dfb/fb/stepwise " +
                       std::to_string(dfb.feature_count) + "/" + std::to_string(fb.feature_count) + "/" +
                       std::to_string(sw.feature_count);
  if (external) {
    for (const auto* o : {&sw, &fb, &dfb}) pass = pass && o->feature_count >= 10 && o->feature_count <= 18;
    detail += " (count target 14 +/- 4)";
  }
  return {pass, detail};
}

// --- 10: p >> n against PCA ---------------------------------------------------

Outcome wide_data() {
  const Dataset data = oracle::random_classification(150, 600, 2, 1000, 10, 1.0);
  CompareOptions options;
  options.with_pca = true;
  options.seed = 0;
  const auto report = compare_pipeline(data, std::nullopt, options);
  const double pca = report.at("pca").test_error;
  bool pass = true;
  std::string detail = "pca error " + fmt(pca) + " (" + std::to_string(report.at("pca").feature_count) + " components)";
  for (const char* m : {"dfb", "fb", "stepwise"}) {
    const auto& o = report.at(m);
    pass = pass && o.test_error < pca;
    detail += ", " + std::string(m) + " error " + fmt(o.test_error) + " (" + std::to_string(o.feature_count) + ")";
  }
  const double dfb_time = report.at("dfb").wall_time_seconds;
  const double sw_time = report.at("stepwise").wall_time_seconds;
  pass = pass && dfb_time < sw_time;
  return {pass, detail + ", wall time dfb " + fmt(dfb_time, 3) + " s vs stepwise " + fmt(sw_time, 3) + " s"};
}

struct Check {
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance checks for fsel"};
  std::optional<int> only;
  app.add_option("--only", only, "Run a single criterion (1-10)")->check(CLI::Range(1, 10));
  CLI11_PARSE(app, argc, argv);

  const std::vector<Check> criteria{
      {"column swap permutes coefficients", column_swap},
      {"Gram determinant and inverse exchange", gram_exchange},
      {"stepwise backward steps per cell", stepwise_backtracking},
      {"average selected count", selected_counts},
      {"dfb evaluation count and wall time", efficiency},
      {"selectors match brute-force oracles", oracle_equivalence},
      {"drop_beta = -inf reproduces forward-backward", dropping_conservatism},
      {"scatter decomposition and equal means", scatter_checks},
      {"real-data smoke", real_data},
      {"p >> n against PCA", wide_data},
  };

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int number = static_cast<int>(i + 1);
    if (only && *only != number) continue;
    Outcome outcome;
    try {
      outcome = criteria[i].run();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    if (!outcome.pass) ++failures;
    std::cout << "criterion " << std::setw(2) << std::setfill('0') << number << std::setfill(' ') << ' '
              << (outcome.pass ? "PASS" : "FAIL") << "  " << criteria[i].name << ": " << outcome.detail << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
