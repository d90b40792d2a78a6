#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fsel/criteria.hpp"
#include "fsel/dataset.hpp"

namespace fsel {

enum class Method { forward, backward, stepwise, forward_backward, dropping_forward_backward };

/// Short CLI spelling: forward, backward, stepwise, fb, dfb.
std::string_view method_name(Method method) noexcept;
/// Throws std::invalid_argument listing the valid names.
Method parse_method(std::string_view name);

struct SelectionConfig {
  double alpha = 0.01;                  // minimum gain to enter
  double beta = 0.01;                   // maximum degradation to remove
  std::optional<double> drop_beta;      // forward-dropping threshold, defaults to beta
  std::optional<std::size_t> max_features;
  CriterionOptions criterion;

  double effective_drop_beta() const noexcept { return drop_beta.value_or(beta); }
  /// Throws std::invalid_argument for NaN thresholds or a cap above p.
  void validate(std::size_t feature_count) const;
};

enum class StepKind { forward, backward, drop, reforward };

std::string_view step_kind_name(StepKind kind) noexcept;

struct SelectionStep {
  StepKind kind = StepKind::forward;
  std::vector<std::size_t> features;
  /// Gain of the move. For drop steps, the largest gain among the dropped.
  double gain = 0.0;
  double value_after = 0.0;
};

struct SelectionReport {
  std::vector<std::size_t> selected;  // order of entry
  std::vector<SelectionStep> steps;
  std::size_t backward_steps_taken = 0;
  std::size_t criterion_evals = 0;
  double wall_time_seconds = 0.0;
  double final_criterion_value = 0.0;
};

// Each selector has two entry points. The dataset overload builds the
// criterion from config.criterion and its wall time covers that
// construction; the Criterion overload reuses a prebuilt one.

SelectionReport forward_select(const Criterion& criterion, const SelectionConfig& config);
SelectionReport forward_select(const Dataset& data, const SelectionConfig& config);

/// Throws NumericalError when `initial` itself is singular.
SelectionReport backward_eliminate(const Criterion& criterion, const SelectionConfig& config,
                                   const FeatureSet& initial);
SelectionReport backward_eliminate(const Dataset& data, const SelectionConfig& config,
                                   const FeatureSet& initial);

SelectionReport stepwise_select(const Criterion& criterion, const SelectionConfig& config);
SelectionReport stepwise_select(const Dataset& data, const SelectionConfig& config);

SelectionReport forward_backward_select(const Criterion& criterion, const SelectionConfig& config);
SelectionReport forward_backward_select(const Dataset& data, const SelectionConfig& config);

SelectionReport dropping_fb_select(const Criterion& criterion, const SelectionConfig& config);
SelectionReport dropping_fb_select(const Dataset& data, const SelectionConfig& config);

/// Dispatch by method. `backward` starts from every feature.
SelectionReport run_selector(Method method, const Criterion& criterion, const SelectionConfig& config);
SelectionReport run_selector(Method method, const Dataset& data, const SelectionConfig& config);

}  // namespace fsel
