#include <algorithm>
#include <string>
#include <vector>

#include <benchmark/benchmark.h>

#include "fsel/criteria.hpp"
#include "fsel/datagen.hpp"
#include "fsel/linalg.hpp"
#include "fsel/selectors.hpp"

using namespace fsel;

namespace {

SelectionConfig cp_config() {
  SelectionConfig config;
  config.criterion.kind = CriterionKind::cp;
  config.criterion.sigma2_override = 2.0;
  return config;
}

Dataset reference_data(std::size_t p) { return simulate_replication(SimulationSpec::reference_model(p, 1, 7), 0); }

// Classification data: the reference design with the response split at its median.
Dataset labelled_data(std::size_t p) {
  const Dataset reg = reference_data(p);
  const Vector& y = reg.response();
  Vector s = y;
  std::sort(s.data(), s.data() + s.size());
  const double median = s(s.size() / 2);
  std::vector<std::string> raw;
  for (Eigen::Index i = 0; i < y.size(); ++i) raw.push_back(y(i) > median ? "hi" : "lo");
  return Dataset::classification(reg.X(), encode_labels(raw));
}

void run_method(benchmark::State& state, Method method) {
  const Dataset data = reference_data(static_cast<std::size_t>(state.range(0)));
  const auto criterion = make_criterion(data, cp_config().criterion);
  std::size_t evals = 0;
  for (auto _ : state) {
    const auto report = run_selector(method, *criterion, cp_config());
    evals = report.criterion_evals;
    benchmark::DoNotOptimize(report.selected.data());
  }
  state.counters["criterion_evals"] = static_cast<double>(evals);
}

void BM_Forward(benchmark::State& s) { run_method(s, Method::forward); }
void BM_Stepwise(benchmark::State& s) { run_method(s, Method::stepwise); }
void BM_ForwardBackward(benchmark::State& s) { run_method(s, Method::forward_backward); }
void BM_DroppingForwardBackward(benchmark::State& s) { run_method(s, Method::dropping_forward_backward); }

void BM_TraceDroppingForwardBackward(benchmark::State& state) {
  const Dataset data = labelled_data(static_cast<std::size_t>(state.range(0)));
  SelectionConfig config;
  config.criterion.kind = CriterionKind::trace;
  for (auto _ : state) benchmark::DoNotOptimize(dropping_fb_select(data, config).selected.data());
}

void BM_IncrementalAppend(benchmark::State& state) {
  const Dataset data = reference_data(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    IncrementalFit fit(data.response());
    for (Eigen::Index c = 0; c < 40; ++c) fit.append(data.X().col(c));
    benchmark::DoNotOptimize(fit.sse());
  }
}

void BM_FitOls(benchmark::State& state) {
  const Dataset data = reference_data(static_cast<std::size_t>(state.range(0)));
  const Matrix X = data.X().leftCols(40);
  for (auto _ : state) benchmark::DoNotOptimize(fit_ols(X, data.response(), true).sse);
}

}  // namespace

BENCHMARK(BM_Forward)->DenseRange(50, 80, 10)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Stepwise)->DenseRange(50, 80, 10)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_ForwardBackward)->DenseRange(50, 80, 10)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_DroppingForwardBackward)->DenseRange(50, 80, 10)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_TraceDroppingForwardBackward)->Arg(50)->Arg(80)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_IncrementalAppend)->Arg(80)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_FitOls)->Arg(80)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
