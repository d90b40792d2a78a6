#include "fsel/selectors.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>
#include <string>

namespace fsel {

std::string_view method_name(Method method) noexcept {
  switch (method) {
    case Method::forward: return "forward";
    case Method::backward: return "backward";
    case Method::stepwise: return "stepwise";
    case Method::forward_backward: return "fb";
    case Method::dropping_forward_backward: return "dfb";
  }
  return "?";
}

Method parse_method(std::string_view name) {
  for (Method m : {Method::forward, Method::backward, Method::stepwise, Method::forward_backward,
                   Method::dropping_forward_backward}) {
    if (method_name(m) == name) return m;
  }
  throw std::invalid_argument("unknown method '" + std::string(name) +
                              "' (valid: forward, backward, stepwise, fb, dfb)");
}

std::string_view step_kind_name(StepKind kind) noexcept {
  switch (kind) {
    case StepKind::forward: return "forward";
    case StepKind::backward: return "backward";
    case StepKind::drop: return "drop";
    case StepKind::reforward: return "re-forward";
  }
  return "?";
}

void SelectionConfig::validate(std::size_t feature_count) const {
  if (std::isnan(alpha) || std::isnan(beta) || (drop_beta && std::isnan(*drop_beta))) {
    throw std::invalid_argument("selection thresholds must not be NaN");
  }
  if (max_features && *max_features > feature_count) {
    throw std::invalid_argument("max_features " + std::to_string(*max_features) + " exceeds the " +
                                std::to_string(feature_count) + " available features");
  }
}

namespace {

using Clock = std::chrono::steady_clock;

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct Best {
  std::size_t feature = 0;
  double gain = kNegInf;
  bool found = false;
};

// One selection in progress: current criterion state plus the report.
class Search {
 public:
  Search(const Criterion& criterion, const SelectionConfig& config, FeatureSet initial)
      : criterion_(criterion),
        config_(config),
        state_(criterion.state(std::move(initial))),
        add_gains_(criterion.feature_count(), kUnknown) {}

  const FeatureSet& subset() const { return state_->subset(); }

  bool at_cap() const { return config_.max_features && subset().size() >= *config_.max_features; }

  // Features not in the subset, ascending.
  std::vector<std::size_t> complement() const {
    std::vector<bool> in(criterion_.feature_count(), false);
    for (std::size_t f : subset()) in[f] = true;
    std::vector<std::size_t> out;
    for (std::size_t f = 0; f < in.size(); ++f) {
      if (!in[f]) out.push_back(f);
    }
    return out;
  }

  // Add gains are remembered until the state changes, so a rescan of the
  // same state (dropping phase handing over to re-forward) costs nothing.
  double gain(std::size_t feature, Direction direction) {
    if (direction == Direction::add && !std::isnan(add_gains_[feature])) return add_gains_[feature];
    ++report_.criterion_evals;
    double g = state_->gain(feature, direction);
    if (std::isnan(g)) g = kNegInf;
    if (direction == Direction::add) add_gains_[feature] = g;
    return g;
  }

  // Add gains over an ascending pool; the first maximum wins ties.
  Best scan(const std::vector<std::size_t>& pool, std::vector<double>* gains = nullptr) {
    Best best;
    if (gains) gains->assign(pool.size(), kNegInf);
    for (std::size_t i = 0; i < pool.size(); ++i) {
      const double g = gain(pool[i], Direction::add);
      if (gains) (*gains)[i] = g;
      if (g > best.gain) best = {pool[i], g, true};
    }
    return best;
  }

  void add(std::size_t feature, double g, StepKind kind) {
    state_ = state_->moved(feature, Direction::add);
    forget_gains();
    report_.steps.push_back({kind, {feature}, g, state_->value()});
  }

  void record_drop(std::vector<std::size_t> dropped, double largest_gain) {
    report_.steps.push_back({StepKind::drop, std::move(dropped), largest_gain, state_->value()});
  }

  // Plain forward loop over the current complement.
  void forward(StepKind kind) {
    while (!at_cap()) {
      const auto pool = complement();
      if (pool.empty()) break;
      const Best best = scan(pool);
      if (!best.found || !(best.gain > config_.alpha)) break;
      add(best.feature, best.gain, kind);
    }
  }

  // Removes the least useful feature while its degradation is at most beta.
  std::size_t backward_sweep() {
    std::size_t removed = 0;
    while (!subset().empty()) {
      FeatureSet ordered = subset();
      std::sort(ordered.begin(), ordered.end());
      Best best;
      for (std::size_t f : ordered) {
        const double g = gain(f, Direction::remove);
        if (g > best.gain) best = {f, g, true};
      }
      if (!best.found || !(-best.gain <= config_.beta)) break;
      state_ = state_->moved(best.feature, Direction::remove);
      forget_gains();
      report_.steps.push_back({StepKind::backward, {best.feature}, best.gain, state_->value()});
      ++report_.backward_steps_taken;
      ++removed;
    }
    return removed;
  }

  SelectionReport finish(Clock::time_point start) {
    report_.selected = subset();
    report_.final_criterion_value = state_->value();
    report_.wall_time_seconds = std::chrono::duration<double>(Clock::now() - start).count();
    return std::move(report_);
  }

 private:
  static constexpr double kUnknown = std::numeric_limits<double>::quiet_NaN();

  void forget_gains() { std::fill(add_gains_.begin(), add_gains_.end(), kUnknown); }

  const Criterion& criterion_;
  const SelectionConfig& config_;
  std::unique_ptr<CriterionState> state_;
  std::vector<double> add_gains_;
  SelectionReport report_;
};

template <typename Fn>
SelectionReport with_criterion(const Dataset& data, const SelectionConfig& config, Fn&& fn) {
  const auto start = Clock::now();
  const auto criterion = make_criterion(data, config.criterion);
  SelectionReport report = fn(*criterion);
  report.wall_time_seconds = std::chrono::duration<double>(Clock::now() - start).count();
  return report;
}

}  // namespace

SelectionReport forward_select(const Criterion& criterion, const SelectionConfig& config) {
  const auto start = Clock::now();
  config.validate(criterion.feature_count());
  Search search(criterion, config, {});
  search.forward(StepKind::forward);
  return search.finish(start);
}

SelectionReport backward_eliminate(const Criterion& criterion, const SelectionConfig& config,
                                   const FeatureSet& initial) {
  const auto start = Clock::now();
  config.validate(criterion.feature_count());
  Search search(criterion, config, initial);
  search.backward_sweep();
  return search.finish(start);
}

SelectionReport stepwise_select(const Criterion& criterion, const SelectionConfig& config) {
  const auto start = Clock::now();
  config.validate(criterion.feature_count());
  Search search(criterion, config, {});
  // Sorted subsets seen after each forward+backward round; a repeat means
  // the alternation has entered a cycle (possible when beta > alpha).
  std::set<FeatureSet> seen;
  while (!search.at_cap()) {
    const auto pool = search.complement();
    if (pool.empty()) break;
    const Best best = search.scan(pool);
    if (!best.found || !(best.gain > config.alpha)) break;
    search.add(best.feature, best.gain, StepKind::forward);
    search.backward_sweep();
    FeatureSet key = search.subset();
    std::sort(key.begin(), key.end());
    if (!seen.insert(std::move(key)).second) break;
  }
  return search.finish(start);
}

SelectionReport forward_backward_select(const Criterion& criterion, const SelectionConfig& config) {
  const auto start = Clock::now();
  config.validate(criterion.feature_count());
  Search search(criterion, config, {});
  search.forward(StepKind::forward);
  search.backward_sweep();
  return search.finish(start);
}

SelectionReport dropping_fb_select(const Criterion& criterion, const SelectionConfig& config) {
  const auto start = Clock::now();
  config.validate(criterion.feature_count());
  const double drop_beta = config.effective_drop_beta();
  Search search(criterion, config, {});

  // Forward-dropping: one scan per step; the same gains decide the drops.
  std::vector<std::size_t> pool = search.complement();
  std::vector<double> gains;
  while (!pool.empty() && !search.at_cap()) {
    const Best best = search.scan(pool, &gains);
    if (!best.found || !(best.gain > config.alpha)) break;
    search.add(best.feature, best.gain, StepKind::forward);

    std::vector<std::size_t> kept;
    std::vector<std::size_t> dropped;
    double largest_dropped = kNegInf;
    for (std::size_t i = 0; i < pool.size(); ++i) {
      if (pool[i] == best.feature) continue;
      if (gains[i] <= drop_beta) {
        dropped.push_back(pool[i]);
        largest_dropped = std::max(largest_dropped, gains[i]);
      } else {
        kept.push_back(pool[i]);
      }
    }
    if (!dropped.empty()) search.record_drop(std::move(dropped), largest_dropped);
    pool = std::move(kept);
  }

  // Re-forward over every feature not yet selected.
  search.forward(StepKind::reforward);

  search.backward_sweep();
  return search.finish(start);
}

SelectionReport run_selector(Method method, const Criterion& criterion, const SelectionConfig& config) {
  switch (method) {
    case Method::forward: return forward_select(criterion, config);
    case Method::backward: {
      FeatureSet all(criterion.feature_count());
      for (std::size_t f = 0; f < all.size(); ++f) all[f] = f;
      return backward_eliminate(criterion, config, all);
    }
    case Method::stepwise: return stepwise_select(criterion, config);
    case Method::forward_backward: return forward_backward_select(criterion, config);
    case Method::dropping_forward_backward: return dropping_fb_select(criterion, config);
  }
  throw std::invalid_argument("unknown selection method");
}

SelectionReport forward_select(const Dataset& data, const SelectionConfig& config) {
  return with_criterion(data, config, [&](const Criterion& c) { return forward_select(c, config); });
}
SelectionReport backward_eliminate(const Dataset& data, const SelectionConfig& config, const FeatureSet& initial) {
  return with_criterion(data, config, [&](const Criterion& c) { return backward_eliminate(c, config, initial); });
}
SelectionReport stepwise_select(const Dataset& data, const SelectionConfig& config) {
  return with_criterion(data, config, [&](const Criterion& c) { return stepwise_select(c, config); });
}
SelectionReport forward_backward_select(const Dataset& data, const SelectionConfig& config) {
  return with_criterion(data, config, [&](const Criterion& c) { return forward_backward_select(c, config); });
}
SelectionReport dropping_fb_select(const Dataset& data, const SelectionConfig& config) {
  return with_criterion(data, config, [&](const Criterion& c) { return dropping_fb_select(c, config); });
}
SelectionReport run_selector(Method method, const Dataset& data, const SelectionConfig& config) {
  return with_criterion(data, config, [&](const Criterion& c) { return run_selector(method, c, config); });
}

}  // namespace fsel
