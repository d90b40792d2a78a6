#include "cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "cli/csv.hpp"
#include "cli/report.hpp"
#include "fsel/datagen.hpp"
#include "fsel/errors.hpp"
#include "fsel/evaluation.hpp"
#include "fsel/selectors.hpp"

#ifndef FSEL_VERSION
#define FSEL_VERSION "unknown"
#endif

namespace fsel::cli {

namespace {

struct Output {
  std::string out_path;
  std::string format = "json";
};

struct ThresholdFlags {
  double alpha = 0.01;
  double beta = 0.01;
  std::optional<double> drop_beta;
  std::optional<std::size_t> max_features;
};

struct SelectFlags {
  std::string data;
  std::string target = "y";
  std::string task;
  std::string method = "dfb";
  std::string criterion;
  ThresholdFlags thresholds;
  std::optional<double> sigma2;
  std::optional<double> ridge;
  std::uint64_t seed = 1;
  bool no_header = false;
  Output output;
};

struct SimulateFlags {
  std::optional<int> table;
  std::size_t n = 80;
  std::optional<std::size_t> p;
  std::optional<double> max_corr;
  std::optional<std::size_t> model_size;
  std::size_t reps = 200;
  std::uint64_t seed = 1;
  std::string methods;
  ThresholdFlags thresholds;
  std::optional<double> sigma2;
  double noise_variance = 2.0;
  std::size_t threads = 1;
  Output output;
};

struct CompareFlags {
  std::string data;
  std::string test;
  std::string target = "y";
  std::string methods = "dfb,stepwise,fb";
  bool with_all_features = false;
  bool with_pca = false;
  double pca_variance = 0.985;
  ThresholdFlags thresholds;
  double split = 0.7;
  std::uint64_t seed = 1;
  double lda_ridge = kDefaultLdaRidge;
  std::optional<double> ridge;
  bool no_header = false;
  std::string plot_data;
  Output output;
};

void add_thresholds(CLI::App* app, ThresholdFlags& t) {
  app->add_option("--alpha", t.alpha, "Minimum gain to add a feature")->capture_default_str();
  app->add_option("--beta", t.beta, "Maximum degradation to remove a feature")->capture_default_str();
  app->add_option("--drop-beta", t.drop_beta, "Dropping threshold for dfb (defaults to beta)");
  app->add_option("--max-features", t.max_features, "Cap on the selected set");
}

void add_output(CLI::App* app, Output& o) {
  app->add_option("--out", o.out_path, "Write the report here; a summary goes to stdout");
  app->add_option("--format", o.format, "Report format")->check(CLI::IsMember({"json", "csv"}))->capture_default_str();
}

SelectionConfig selection_config(const ThresholdFlags& t) {
  SelectionConfig config;
  config.alpha = t.alpha;
  config.beta = t.beta;
  config.drop_beta = t.drop_beta;
  config.max_features = t.max_features;
  return config;
}

std::vector<Method> parse_methods(const std::string& list) {
  std::vector<Method> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(0, item.find_first_not_of(' '));
    item.erase(item.find_last_not_of(' ') + 1);
    if (item.empty()) continue;
    try {
      out.push_back(parse_method(item));
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }
  if (out.empty()) throw UsageError("no methods given");
  return out;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

std::string csv_number(const Json& value) {
  if (value.is_null()) return "";
  if (value.is_string()) return value.get<std::string>();
  return value.dump();
}

std::string joined_indices(const Json& features, const char* key) {
  std::string out;
  if (!features.is_array()) return out;
  for (const auto& f : features) {
    if (!out.empty()) out += ';';
    out += f.at(key).is_string() ? f.at(key).get<std::string>() : f.at(key).dump();
  }
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw DataError(path + ": cannot open for writing");
  file << text;
  if (!file) throw DataError(path + ": write failed");
}

void emit(const ReportDocument& doc, const std::string& csv, const std::string& summary, const Output& output,
          std::ostream& out) {
  const std::string body = output.format == "csv" ? csv : doc.dump();
  if (output.out_path.empty()) {
    out << body;
  } else {
    write_text(output.out_path, body);
    out << summary;
  }
}

ReportDocument new_document(const std::string& command, const std::vector<std::string>& args, std::uint64_t seed) {
  ReportDocument doc;
  doc.version = FSEL_VERSION;
  doc.command = command;
  doc.arguments = args;
  doc.seed = seed;
  return doc;
}

// --- select ------------------------------------------------------------------

int cmd_select(const SelectFlags& f, const std::vector<std::string>& args, std::ostream& out) {
  const Method method = parse_methods(f.method).front();
  if (f.method.find(',') != std::string::npos) throw UsageError("select takes a single --method");

  std::string task = f.task;
  std::string criterion = f.criterion;
  if (task.empty()) task = criterion == "trace" ? "classification" : "regression";
  if (criterion.empty()) criterion = task == "classification" ? "trace" : "cp";
  if (criterion == "cp" && task != "regression") throw UsageError("--criterion cp needs --task regression");
  if (criterion == "trace" && task != "classification") throw UsageError("--criterion trace needs --task classification");
  if (f.sigma2 && criterion != "cp") throw UsageError("--sigma2 only applies to --criterion cp");
  if (f.ridge && criterion != "trace") throw UsageError("--ridge only applies to --criterion trace");
  if (f.thresholds.drop_beta && method != Method::dropping_forward_backward) {
    throw UsageError("--drop-beta only applies to --method dfb");
  }

  SelectionConfig config = selection_config(f.thresholds);
  config.criterion.kind = criterion == "cp" ? CriterionKind::cp : CriterionKind::trace;
  config.criterion.sigma2_override = f.sigma2;
  if (f.ridge) config.criterion.trace.ridge = *f.ridge;

  CsvOptions csv;
  csv.target = f.target;
  csv.kind = task == "classification" ? TargetKind::label : TargetKind::numeric;
  csv.header = !f.no_header;
  const Dataset data = load_csv(f.data, csv);
  config.validate(data.features());

  const auto criterion_ptr = make_criterion(data, config.criterion);
  if (const auto* cp = dynamic_cast<const CpCriterion*>(criterion_ptr.get())) config.criterion.sigma2_override = cp->sigma2();
  const SelectionReport report = run_selector(method, *criterion_ptr, config);

  ReportDocument doc = new_document("select", args, f.seed);
  Json data_json;
  data_json["path"] = f.data;
  data_json["target"] = f.target;
  data_json["task"] = task;
  data_json["rows"] = data.rows();
  data_json["features"] = data.features();
  doc.payload["data"] = std::move(data_json);
  Json config_doc = config_json(config);
  config_doc["method"] = std::string(method_name(method));
  doc.payload["config"] = std::move(config_doc);
  doc.payload["result"] = selection_json(report, data.column_names());

  const Json& result = doc.payload["result"];
  std::ostringstream csv_out;
  csv_out << "method,criterion,selected_count,selected_index,selected_name,backward_steps,criterion_evals,"
             "final_criterion_value,wall_time_seconds\n";
  csv_out << method_name(method) << ',' << criterion << ',' << report.selected.size() << ','
          << csv_field(joined_indices(result["selected"], "index")) << ','
          << csv_field(joined_indices(result["selected"], "name")) << ',' << report.backward_steps_taken << ','
          << report.criterion_evals << ',' << csv_number(result["final_criterion_value"]) << ','
          << csv_number(result["wall_time_seconds"]) << '\n';

  std::ostringstream summary;
  summary << method_name(method) << " (" << criterion << "): " << report.selected.size() << " selected";
  for (const auto& s : result["selected"]) summary << ' ' << s["name"].get<std::string>();
  summary << "\nbackward steps " << report.backward_steps_taken << ", criterion evals " << report.criterion_evals
          << ", wall time " << std::fixed << std::setprecision(6) << report.wall_time_seconds << " s\n";

  emit(doc, csv_out.str(), summary.str(), f.output, out);
  return exit_ok;
}

// --- simulate ----------------------------------------------------------------

struct Cell {
  std::string label;
  SimulationSpec spec;
  std::optional<std::size_t> model_size;
};

std::vector<Cell> simulation_cells(const SimulateFlags& f) {
  std::vector<Cell> cells;
  auto base = [&](std::size_t p) {
    SimulationSpec spec = SimulationSpec::reference_model(p, f.reps, f.seed);
    spec.n = f.n;
    spec.noise_variance = f.noise_variance;
    return spec;
  };
  const int table = f.table.value_or(0);
  if (table == 1) {
    if (f.max_corr) throw UsageError("--max-corr does not apply to --table 1");
    std::vector<std::size_t> sizes{4, 8, 12, 16, 20};
    if (f.model_size) sizes = {*f.model_size};
    for (std::size_t k : sizes) {
      SimulationSpec spec = base(f.p.value_or(80));
      spec.coefficients.clear();
      spec.random_signal = RandomSignal{k};
      cells.push_back({"model_size=" + std::to_string(k), spec, k});
    }
  } else if (table == 2) {
    if (f.model_size) throw UsageError("--model-size does not apply to --table 2");
    std::vector<double> corrs{0.3, 0.4, 0.5, 0.6, 0.7};
    if (f.max_corr) corrs = {*f.max_corr};
    for (double c : corrs) {
      SimulationSpec spec = base(f.p.value_or(80));
      spec.max_corr = c;
      std::ostringstream label;
      label << "max_corr=" << c;
      cells.push_back({label.str(), spec, std::nullopt});
    }
  } else if (table == 3) {
    if (f.model_size) throw UsageError("--model-size does not apply to --table 3");
    std::vector<std::size_t> ps{50, 60, 70, 80};
    if (f.p) ps = {*f.p};
    for (std::size_t p : ps) {
      SimulationSpec spec = base(p);
      if (f.max_corr) spec.max_corr = *f.max_corr;
      cells.push_back({"p=" + std::to_string(p), spec, std::nullopt});
    }
  } else {
    SimulationSpec spec = base(f.p.value_or(80));
    if (f.model_size) {
      spec.coefficients.clear();
      spec.random_signal = RandomSignal{*f.model_size};
    }
    if (f.max_corr) spec.max_corr = *f.max_corr;
    cells.push_back({"custom", spec, f.model_size});
  }
  for (const auto& cell : cells) {
    try {
      cell.spec.validate();
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }
  return cells;
}

int cmd_simulate(const SimulateFlags& f, const std::vector<std::string>& args, std::ostream& out) {
  const int table = f.table.value_or(0);
  const std::string default_methods = table == 1 || table == 2 ? "stepwise" : "dfb,fb,stepwise";
  const auto methods = parse_methods(f.methods.empty() ? default_methods : f.methods);
  const auto cells = simulation_cells(f);

  SelectionConfig config = selection_config(f.thresholds);
  config.criterion.kind = CriterionKind::cp;
  config.criterion.sigma2_override = f.sigma2;
  MonteCarloOptions options;
  options.threads = std::max<std::size_t>(1, f.threads);

  ReportDocument doc = new_document("simulate", args, f.seed);
  doc.payload["table"] = f.table ? Json(*f.table) : Json(nullptr);
  Json cells_json = Json::array();
  std::ostringstream csv;
  csv << "cell,n,p,max_corr,model_size,replications,method,mean_selected,mean_backward_steps,mean_criterion_evals,"
         "exact_support_rate,mean_wall_time_seconds\n";
  std::ostringstream text;
  text << std::left << std::setw(16) << "cell" << std::setw(10) << "method" << std::right << std::setw(10)
       << "selected" << std::setw(10) << "backward" << std::setw(12) << "evals" << std::setw(10) << "exact"
       << std::setw(14) << "time_ms" << '\n';

  for (const auto& cell : cells) {
    const MonteCarloSummary summary = run_monte_carlo(cell.spec, methods, config, options);
    Json cell_json;
    cell_json["cell"] = cell.label;
    cell_json["summary"] = summary_json(summary);
    for (const auto& m : cell_json["summary"]["methods"]) {
      csv << cell.label << ',' << cell.spec.n << ',' << cell.spec.p << ',' << Json(cell.spec.max_corr).dump() << ','
          << (cell.model_size ? std::to_string(*cell.model_size) : "") << ',' << summary.replications << ','
          << m["method"].get<std::string>() << ',' << csv_number(m["mean_selected"]) << ','
          << csv_number(m["mean_backward_steps"]) << ',' << csv_number(m["mean_criterion_evals"]) << ','
          << csv_number(m["exact_support_rate"]) << ',' << csv_number(m["mean_wall_time_seconds"]) << '\n';
      text << std::left << std::setw(16) << cell.label << std::setw(10) << m["method"].get<std::string>() << std::right
           << std::fixed << std::setprecision(3) << std::setw(10) << to_number(m["mean_selected"]) << std::setw(10)
           << to_number(m["mean_backward_steps"]) << std::setprecision(1) << std::setw(12)
           << to_number(m["mean_criterion_evals"]) << std::setprecision(3) << std::setw(10)
           << to_number(m["exact_support_rate"]) << std::setprecision(4) << std::setw(14)
           << 1e3 * to_number(m["mean_wall_time_seconds"]) << '\n';
    }
    cells_json.push_back(std::move(cell_json));
  }
  doc.payload["cells"] = std::move(cells_json);
  emit(doc, csv.str(), text.str(), f.output, out);
  return exit_ok;
}

// --- compare -----------------------------------------------------------------

void reject_continuous_target(const Dataset& data, const std::string& target) {
  const Labels& labels = data.labels();
  bool numeric = true;
  bool integral = true;
  for (const auto& name : labels.names) {
    double value = 0.0;
    std::istringstream in(name);
    if (!(in >> value) || !in.eof()) {
      numeric = false;
      break;
    }
    if (std::floor(value) != value) integral = false;
  }
  if (numeric && (!integral || labels.class_count() > std::max<std::size_t>(20, data.rows() / 2))) {
    throw DataError("target '" + target + "' looks like a numeric response (" + std::to_string(labels.class_count()) +
                    " distinct values); compare needs class labels");
  }
}

int cmd_compare(const CompareFlags& f, const std::vector<std::string>& args, std::ostream& out) {
  CompareOptions options;
  options.methods = parse_methods(f.methods);
  options.with_all_features = f.with_all_features;
  options.with_pca = f.with_pca;
  options.pca_variance = f.pca_variance;
  options.train_fraction = f.split;
  options.seed = f.seed;
  options.lda_ridge = f.lda_ridge;
  options.selection = selection_config(f.thresholds);
  options.selection.criterion.kind = CriterionKind::trace;
  if (f.ridge) options.selection.criterion.trace.ridge = *f.ridge;
  if (!(f.pca_variance > 0.0 && f.pca_variance <= 1.0)) throw UsageError("--pca-variance must lie in (0, 1]");
  if (!(f.split > 0.0 && f.split < 1.0)) throw UsageError("--split must lie strictly between 0 and 1");

  CsvOptions csv;
  csv.target = f.target;
  csv.kind = TargetKind::label;
  csv.header = !f.no_header;
  const Dataset data = load_csv(f.data, csv);
  reject_continuous_target(data, f.target);
  std::optional<Dataset> test;
  if (!f.test.empty()) {
    test = load_csv(f.test, csv);
    if (test->column_names() != data.column_names()) throw DataError("--test columns differ from --data columns");
  }
  options.selection.validate(data.features());

  const ComparisonReport report = compare_pipeline(data, test, options);

  ReportDocument doc = new_document("compare", args, f.seed);
  Json data_json;
  data_json["path"] = f.data;
  data_json["test_path"] = f.test.empty() ? Json(nullptr) : Json(f.test);
  data_json["target"] = f.target;
  data_json["rows"] = data.rows();
  data_json["features"] = data.features();
  data_json["classes"] = data.labels().names;
  doc.payload["data"] = std::move(data_json);
  Json config_doc = config_json(options.selection);
  config_doc["split"] = test ? Json(nullptr) : number(f.split);
  config_doc["pca_variance"] = options.with_pca ? number(f.pca_variance) : Json(nullptr);
  config_doc["lda_ridge"] = number(f.lda_ridge);
  doc.payload["config"] = std::move(config_doc);
  doc.payload["result"] = comparison_json(report, data.column_names());

  std::ostringstream csv_out;
  csv_out << "method,test_error,feature_count,selected_index,criterion_evals,backward_steps,explained,"
             "wall_time_seconds\n";
  std::ostringstream plot;
  plot << "method,test_error,feature_count\n";
  std::ostringstream text;
  text << "train rows " << report.train_rows << ", test rows " << report.test_rows << '\n';
  text << std::left << std::setw(14) << "method" << std::right << std::setw(12) << "test_error" << std::setw(10)
       << "features" << std::setw(10) << "evals" << std::setw(12) << "time_s" << '\n';
  for (const auto& row : doc.payload["result"]["methods"]) {
    const std::string name = row["method"].get<std::string>();
    csv_out << name << ',' << csv_number(row["test_error"]) << ',' << row["feature_count"].dump() << ','
            << csv_field(joined_indices(row["selected"], "index")) << ',' << row["criterion_evals"].dump() << ','
            << row["backward_steps"].dump() << ',' << csv_number(row["explained"]) << ','
            << csv_number(row["wall_time_seconds"]) << '\n';
    plot << name << ',' << csv_number(row["test_error"]) << ',' << row["feature_count"].dump() << '\n';
    text << std::left << std::setw(14) << name << std::right << std::fixed << std::setprecision(4) << std::setw(12)
         << to_number(row["test_error"]) << std::setw(10) << row["feature_count"].get<std::size_t>() << std::setw(10)
         << row["criterion_evals"].get<std::size_t>() << std::setprecision(6) << std::setw(12)
         << to_number(row["wall_time_seconds"]) << '\n';
  }
  if (!f.plot_data.empty()) write_text(f.plot_data, plot.str());
  emit(doc, csv_out.str(), text.str(), f.output, out);
  return exit_ok;
}

std::string one_line(std::string s) {
  std::replace(s.begin(), s.end(), '\n', ' ');
  std::replace(s.begin(), s.end(), '\r', ' ');
  return s;
}

int report_error(std::ostream& err, const char* kind, int code, const std::string& detail) {
  err << "fsel: error[" << kind << "]: " << one_line(detail) << '\n';
  return code;
}

}  // namespace

std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  std::vector<std::string> rest;
  std::vector<std::string> files;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw UsageError("--config needs a file argument");
      files.push_back(args[++i]);
    } else if (args[i].rfind("--config=", 0) == 0) {
      files.push_back(args[i].substr(9));
    } else {
      rest.push_back(args[i]);
    }
  }
  if (files.empty()) return args;

  std::vector<std::string> from_files;
  for (const auto& path : files) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot read config file " + path);
    std::vector<CLI::ConfigItem> items;
    try {
      items = CLI::ConfigINI().from_config(in);
    } catch (const CLI::Error& e) {
      throw UsageError("config file " + path + ": " + e.what());
    }
    for (const auto& item : items) {
      if (!item.parents.empty()) throw UsageError("config file " + path + ": sections are not supported");
      std::string value;
      for (const auto& input : item.inputs) value += (value.empty() ? "" : ",") + input;
      from_files.push_back("--" + item.name + "=" + value);
    }
  }

  // Insert right after the subcommand so the pairs bind to its options.
  std::vector<std::string> out;
  auto command = std::find_if(rest.begin(), rest.end(), [](const std::string& a) { return a.rfind("-", 0) != 0; });
  if (command == rest.end()) throw UsageError("--config needs a subcommand");
  out.insert(out.end(), rest.begin(), command + 1);
  out.insert(out.end(), from_files.begin(), from_files.end());
  out.insert(out.end(), command + 1, rest.end());
  return out;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Greedy wrapper feature selection: forward, backward, stepwise, forward-backward and dropping "
               "forward-backward search over Mallows's Cp or a scatter-trace criterion.",
               "fsel"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.set_version_flag("--version", std::string("fsel ") + FSEL_VERSION);
  app.require_subcommand(1);
  app.footer("Every subcommand also accepts --config FILE with key=value lines; explicit flags win.");

  SelectFlags sf;
  auto* select = app.add_subcommand("select", "Run one selector on a CSV dataset");
  select->add_option("--data", sf.data, "CSV file with a header row")->required();
  select->add_option("--target", sf.target, "Target column name or 1-based index")->capture_default_str();
  select->add_option("--task", sf.task, "regression or classification")
      ->check(CLI::IsMember({"regression", "classification"}));
  select->add_option("--method", sf.method, "forward, backward, stepwise, fb or dfb")->capture_default_str();
  select->add_option("--criterion", sf.criterion, "cp or trace")->check(CLI::IsMember({"cp", "trace"}));
  add_thresholds(select, sf.thresholds);
  select->add_option("--sigma2", sf.sigma2, "Known noise variance for Cp");
  select->add_option("--ridge", sf.ridge, "Fallback ridge for a singular within-class scatter");
  select->add_option("--seed", sf.seed, "Echoed in the report")->capture_default_str();
  select->add_flag("--no-header", sf.no_header, "First CSV row is data; columns are c1, c2, ...");
  add_output(select, sf.output);

  SimulateFlags mf;
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo runs on the simulated regression model");
  simulate->add_option("--table", mf.table, "Preset grid: 1 model sizes, 2 correlations, 3 dimensions")
      ->check(CLI::IsMember({1, 2, 3}));
  simulate->add_option("--n", mf.n, "Rows per replication")->capture_default_str();
  simulate->add_option("--p", mf.p, "Features per replication");
  simulate->add_option("--max-corr", mf.max_corr, "Maximum pairwise correlation in [0, 1)");
  simulate->add_option("--model-size", mf.model_size, "Random signal on the first k features");
  simulate->add_option("--reps", mf.reps, "Replications per cell")->capture_default_str();
  simulate->add_option("--seed", mf.seed, "Master seed")->capture_default_str();
  simulate->add_option("--methods", mf.methods, "Comma-separated methods");
  add_thresholds(simulate, mf.thresholds);
  simulate->add_option("--sigma2", mf.sigma2, "Cp sigma^2 (defaults to the noise variance)");
  simulate->add_option("--noise-variance", mf.noise_variance, "Variance of the added noise")->capture_default_str();
  simulate->add_option("--threads", mf.threads, "Replication workers; timings need 1")->capture_default_str();
  add_output(simulate, mf.output);

  CompareFlags cf;
  auto* compare = app.add_subcommand("compare", "Selection plus LDA versus all features and PCA");
  compare->add_option("--data", cf.data, "CSV file with a class-label target")->required();
  compare->add_option("--test", cf.test, "Separate test CSV (otherwise a stratified split)");
  compare->add_option("--target", cf.target, "Label column name or 1-based index")->capture_default_str();
  compare->add_option("--methods", cf.methods, "Comma-separated selectors")->capture_default_str();
  compare->add_flag("--with-all-features", cf.with_all_features, "Add an LDA row on every feature");
  compare->add_flag("--with-pca", cf.with_pca, "Add a PCA-then-LDA row");
  compare->add_option("--pca-variance", cf.pca_variance, "Explained-variance target")->capture_default_str();
  add_thresholds(compare, cf.thresholds);
  compare->add_option("--split", cf.split, "Training fraction")->capture_default_str();
  compare->add_option("--seed", cf.seed, "Split seed")->capture_default_str();
  compare->add_option("--lda-ridge", cf.lda_ridge, "Relative LDA ridge")->capture_default_str();
  compare->add_option("--ridge", cf.ridge, "Fallback ridge for the trace criterion");
  compare->add_flag("--no-header", cf.no_header, "First CSV row is data; columns are c1, c2, ...");
  compare->add_option("--plot-data", cf.plot_data, "Write method,test_error,feature_count here");
  add_output(compare, cf.output);

  try {
    const std::vector<std::string> expanded = expand_config(args);
    std::vector<std::string> reversed(expanded.rbegin(), expanded.rend());
    try {
      app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
      out << (app.get_subcommands().empty() ? app.help() : app.get_subcommands().front()->help());
      return exit_ok;
    } catch (const CLI::CallForAllHelp&) {
      out << app.help("", CLI::AppFormatMode::All);
      return exit_ok;
    } catch (const CLI::CallForVersion&) {
      out << "fsel " << FSEL_VERSION << '\n';
      return exit_ok;
    } catch (const CLI::ParseError& e) {
      return report_error(err, "usage", exit_usage, std::string(e.what()) + " (run fsel --help)");
    }

    if (select->parsed()) return cmd_select(sf, args, out);
    if (simulate->parsed()) return cmd_simulate(mf, args, out);
    return cmd_compare(cf, args, out);
  } catch (const UsageError& e) {
    return report_error(err, "usage", exit_usage, e.what());
  } catch (const std::invalid_argument& e) {
    return report_error(err, "usage", exit_usage, e.what());
  } catch (const DataError& e) {
    return report_error(err, "data", exit_data, e.what());
  } catch (const NumericalError& e) {
    return report_error(err, "numerical", exit_numerical, e.what());
  } catch (const std::exception& e) {
    return report_error(err, "internal", exit_internal, e.what());
  }
}

}  // namespace fsel::cli
