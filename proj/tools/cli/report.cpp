#include "cli/report.hpp"

#include <cmath>
#include <limits>

#include "fsel/errors.hpp"

namespace fsel::cli {

Json number(double value) {
  if (std::isfinite(value)) return value;
  if (std::isnan(value)) return "nan";
  return value > 0 ? "inf" : "-inf";
}

double to_number(const Json& json) {
  if (json.is_number()) return json.get<double>();
  if (json.is_string()) {
    const auto& s = json.get_ref<const std::string&>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  }
  throw DataError("report: expected a number, found " + json.dump());
}

double microseconds(double seconds) { return std::round(seconds * 1e6) / 1e6; }

Json mask_timings(Json json) {
  if (json.is_object()) {
    for (auto& [key, value] : json.items()) {
      if (key.find("wall_time") != std::string::npos)
        value = nullptr;
      else
        value = mask_timings(std::move(value));
    }
  } else if (json.is_array()) {
    for (auto& value : json) value = mask_timings(std::move(value));
  }
  return json;
}

Json ReportDocument::to_json() const {
  Json out;
  out["tool"] = tool;
  out["version"] = version;
  out["command"] = command;
  out["arguments"] = arguments;
  out["seed"] = seed ? Json(*seed) : Json(nullptr);
  out["note"] = note;
  out["payload"] = payload;
  return out;
}

ReportDocument ReportDocument::from_json(const Json& json) {
  try {
    ReportDocument doc;
    doc.tool = json.at("tool").get<std::string>();
    doc.version = json.at("version").get<std::string>();
    doc.command = json.at("command").get<std::string>();
    doc.arguments = json.at("arguments").get<std::vector<std::string>>();
    if (!json.at("seed").is_null()) doc.seed = json.at("seed").get<std::uint64_t>();
    doc.note = json.at("note").get<std::string>();
    doc.payload = json.at("payload");
    return doc;
  } catch (const Json::exception& e) {
    throw DataError(std::string("report: ") + e.what());
  }
}

std::string ReportDocument::dump() const { return to_json().dump(2) + "\n"; }

ReportDocument ReportDocument::parse(std::string_view text) {
  Json json;
  try {
    json = Json::parse(text);
  } catch (const Json::exception& e) {
    throw DataError(std::string("report: ") + e.what());
  }
  return from_json(json);
}

Json features_json(const std::vector<std::size_t>& features, const std::vector<std::string>& names) {
  Json out = Json::array();
  for (std::size_t f : features) {
    Json item;
    item["index"] = f + 1;
    item["name"] = f < names.size() ? names[f] : "x" + std::to_string(f + 1);
    out.push_back(std::move(item));
  }
  return out;
}

Json selection_json(const SelectionReport& report, const std::vector<std::string>& names) {
  Json out;
  out["selected"] = features_json(report.selected, names);
  out["selected_count"] = report.selected.size();
  out["backward_steps"] = report.backward_steps_taken;
  out["criterion_evals"] = report.criterion_evals;
  out["final_criterion_value"] = number(report.final_criterion_value);
  out["wall_time_seconds"] = microseconds(report.wall_time_seconds);
  Json steps = Json::array();
  for (const auto& step : report.steps) {
    Json s;
    s["kind"] = std::string(step_kind_name(step.kind));
    s["features"] = features_json(step.features, names);
    s["gain"] = number(step.gain);
    s["value_after"] = number(step.value_after);
    steps.push_back(std::move(s));
  }
  out["steps"] = std::move(steps);
  return out;
}

Json config_json(const SelectionConfig& config) {
  Json out;
  out["criterion"] = config.criterion.kind == CriterionKind::cp ? "cp" : "trace";
  out["alpha"] = number(config.alpha);
  out["beta"] = number(config.beta);
  out["drop_beta"] = number(config.effective_drop_beta());
  out["max_features"] = config.max_features ? Json(*config.max_features) : Json(nullptr);
  out["sigma2"] = config.criterion.sigma2_override ? number(*config.criterion.sigma2_override) : Json(nullptr);
  if (config.criterion.kind == CriterionKind::trace) out["ridge"] = number(config.criterion.trace.ridge);
  return out;
}

Json simulation_spec_json(const SimulationSpec& spec) {
  Json out;
  out["n"] = spec.n;
  out["p"] = spec.p;
  if (spec.random_signal) {
    Json signal;
    signal["count"] = spec.random_signal->count;
    signal["low"] = number(spec.random_signal->low);
    signal["high"] = number(spec.random_signal->high);
    out["random_signal"] = std::move(signal);
  } else {
    Json coefficients = Json::array();
    for (const auto& [index, value] : spec.coefficients) {
      Json c;
      c["index"] = index + 1;
      c["value"] = number(value);
      coefficients.push_back(std::move(c));
    }
    out["coefficients"] = std::move(coefficients);
  }
  out["intercept"] = number(spec.intercept);
  out["noise_variance"] = number(spec.noise_variance);
  out["max_corr"] = number(spec.max_corr);
  out["replications"] = spec.replications;
  out["seed"] = spec.seed;
  return out;
}

Json summary_json(const MonteCarloSummary& summary) {
  Json out;
  out["spec"] = simulation_spec_json(summary.spec);
  out["config"] = config_json(summary.config);
  out["replications"] = summary.replications;
  Json methods = Json::array();
  for (const auto& m : summary.methods) {
    Json row;
    row["method"] = std::string(method_name(m.method));
    row["mean_selected"] = number(m.mean_selected);
    row["mean_backward_steps"] = number(m.mean_backward_steps);
    row["mean_criterion_evals"] = number(m.mean_criterion_evals);
    row["exact_support_rate"] = number(m.exact_support_rate);
    row["mean_wall_time_seconds"] = microseconds(m.mean_wall_time_seconds);
    methods.push_back(std::move(row));
  }
  out["methods"] = std::move(methods);
  return out;
}

Json comparison_json(const ComparisonReport& report, const std::vector<std::string>& names) {
  Json out;
  out["train_rows"] = report.train_rows;
  out["test_rows"] = report.test_rows;
  Json constant = Json::array();
  for (std::size_t c = 0; c < report.train_stats.constant.size(); ++c)
    if (report.train_stats.constant[c]) constant.push_back(c + 1);
  out["constant_columns"] = std::move(constant);
  Json rows = Json::array();
  for (const auto& o : report.outcomes) {
    Json row;
    row["method"] = o.method;
    row["test_error"] = number(o.test_error);
    row["feature_count"] = o.feature_count;
    row["selected"] = o.method == "pca" ? Json(nullptr) : features_json(o.selected, names);
    row["criterion_evals"] = o.criterion_evals;
    row["backward_steps"] = o.backward_steps;
    row["explained"] = o.explained ? number(*o.explained) : Json(nullptr);
    row["wall_time_seconds"] = microseconds(o.wall_time_seconds);
    rows.push_back(std::move(row));
  }
  out["methods"] = std::move(rows);
  return out;
}

}  // namespace fsel::cli
