#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <random>
#include <sstream>

#include "cli/commands.hpp"
#include "cli/csv.hpp"
#include "cli/report.hpp"
#include "doctest.h"
#include "fsel/datagen.hpp"
#include "fsel/errors.hpp"
#include "fsel/selectors.hpp"

using namespace fsel;
using namespace fsel::cli;
namespace fs = std::filesystem;

namespace {

const fs::path kFixture = fs::path(FSEL_TEST_DATA_DIR) / "synthetic_ionosphere.csv";

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("fsel_cli_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  fs::path write(const std::string& name, const std::string& text) const {
    std::ofstream(path / name) << text;
    return path / name;
  }
};

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run_cli(const std::vector<std::string>& args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

void check_error_line(const Result& r, const std::string& kind) {
  CHECK(r.out.empty());
  CHECK(r.err.rfind("fsel: error[" + kind + "]: ", 0) == 0);
  CHECK(r.err.find('\n') == r.err.size() - 1);
}

std::string reference_csv(const TempDir& dir, std::size_t p, std::uint64_t seed) {
  const auto spec = SimulationSpec::reference_model(p, 1, seed);
  const auto path = dir.path / ("reference_" + std::to_string(p) + "_" + std::to_string(seed) + ".csv");
  save_csv(path, simulate_replication(spec, 0));
  return path.string();
}

std::vector<std::size_t> indices(const Json& features) {
  std::vector<std::size_t> out;
  for (const auto& f : features) out.push_back(f.at("index").get<std::size_t>());
  return out;
}

}  // namespace

TEST_CASE("load_csv") {
  TempDir dir;
  SUBCASE("three rows") {
    const auto path = dir.write("a.csv", "a,b,y\n1,2,3\n4,5,6.5\n7,8,9\n");
    const Dataset data = load_csv(path, {"y"});
    CHECK(data.rows() == 3);
    CHECK(data.features() == 2);
    CHECK(data.column_names() == std::vector<std::string>{"a", "b"});
    CHECK(data.response()(1) == 6.5);
    CHECK(data.X()(2, 1) == 8.0);
  }
  SUBCASE("target in the middle, quoted fields, CRLF") {
    const auto path = dir.write("b.csv", "\"x, one\",y,\"x2\"\r\n1.5,2,\"-3e2\"\r\n\n2,3,4\r\n");
    const Dataset data = load_csv(path, {"y"});
    CHECK(data.column_names() == std::vector<std::string>{"x, one", "x2"});
    CHECK(data.X()(0, 1) == -300.0);
    CHECK(data.response()(1) == 3.0);
  }
  SUBCASE("NaN cell names the line and column") {
    const auto path = dir.write("c.csv", "a,b,y\n1,2,3\n4,NaN,6\n");
    try {
      load_csv(path, {"y"});
      FAIL("expected DataError");
    } catch (const DataError& e) {
      const std::string what = e.what();
      CHECK(what.find("line 3") != std::string::npos);
      CHECK(what.find("column 2 (b)") != std::string::npos);
      CHECK(what.find("'NaN'") != std::string::npos);
    }
  }
  SUBCASE("error contract") {
    CHECK_THROWS_AS(load_csv(dir.path / "missing.csv", {"y"}), DataError);
    CHECK_THROWS_WITH_AS(load_csv(dir.write("d.csv", "a,b\n1,2\n"), {"y"}), doctest::Contains("'y' not found"),
                         DataError);
    CHECK_THROWS_WITH_AS(load_csv(dir.write("e.csv", ""), {"y"}), doctest::Contains("empty"), DataError);
    CHECK_THROWS_AS(load_csv(dir.write("f.csv", "a,y\n"), {"y"}), DataError);
    CHECK_THROWS_WITH_AS(load_csv(dir.write("g.csv", "a,y\n1,2\n3\n"), {"y"}), doctest::Contains("line 3"),
                         DataError);
    CHECK_THROWS_AS(load_csv(dir.write("h.csv", "a,y\n1,inf\n"), {"y"}), DataError);
    CHECK_THROWS_AS(load_csv(dir.write("i.csv", "a,y\n\"1,2\n"), {"y"}), DataError);
  }
  SUBCASE("no header, target by index") {
    const auto path = dir.write("j.csv", "1,2,0\n3,4,1\n5,6,1\n7,8,0\n");
    CsvOptions options{"3", TargetKind::label, false};
    const Dataset data = load_csv(path, options);
    CHECK(data.column_names() == std::vector<std::string>{"c1", "c2"});
    CHECK(data.labels().counts() == std::vector<std::size_t>{2, 2});
  }
  SUBCASE("fixture class counts match an independent scan") {
    std::ifstream in(kFixture);
    std::string line;
    std::getline(in, line);
    std::map<std::string, std::size_t> counts;
    std::size_t rows = 0;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      ++rows;
      ++counts[line.substr(line.rfind(',') + 1)];
    }
    const Dataset data = load_csv(kFixture, {"class", TargetKind::label});
    CHECK(data.rows() == rows);
    CHECK(data.features() == 34);
    const auto lc = data.labels().counts();
    for (std::size_t c = 0; c < data.labels().class_count(); ++c) CHECK(lc[c] == counts.at(data.labels().names[c]));
  }
  SUBCASE("save_csv round trip is exact") {
    const auto spec = SimulationSpec::reference_model(15, 1, 2);
    const Dataset data = simulate_replication(spec, 0);
    save_csv(dir.path / "k.csv", data);
    const Dataset back = load_csv(dir.path / "k.csv", {"y"});
    CHECK(back.X() == data.X());
    CHECK(back.response() == data.response());
  }
}

TEST_CASE("report document") {
  ReportDocument doc;
  doc.version = "1.2.3";
  doc.command = "select";
  doc.arguments = {"select", "--data", "x.csv"};
  doc.seed = std::numeric_limits<std::uint64_t>::max();
  doc.payload["values"] = {0.1, 1.0 / 3.0, 1e-300, -2.5e17, 4.9e-324};
  doc.payload["limits"] = {number(-std::numeric_limits<double>::infinity()), number(std::nan(""))};
  doc.payload["nested"]["wall_time_seconds"] = 0.123456;
  doc.payload["nested"]["runs"] = {{{"mean_wall_time_seconds", 1.5}, {"count", 3}}};

  const ReportDocument back = ReportDocument::parse(doc.dump());
  CHECK(back == doc);
  CHECK(back.payload["values"][1].get<double>() == 1.0 / 3.0);
  CHECK(back.payload["values"][4].get<double>() == 4.9e-324);
  CHECK(std::isinf(to_number(back.payload["limits"][0])));
  CHECK(std::isnan(to_number(back.payload["limits"][1])));
  CHECK(back.dump() == doc.dump());

  const Json masked = mask_timings(doc.payload);
  CHECK(masked["nested"]["wall_time_seconds"].is_null());
  CHECK(masked["nested"]["runs"][0]["mean_wall_time_seconds"].is_null());
  CHECK(masked["nested"]["runs"][0]["count"] == 3);
  CHECK(masked["values"] == doc.payload["values"]);

  CHECK(microseconds(0.1234567) == 0.123457);
  CHECK_THROWS_AS(ReportDocument::parse("{\"tool\": 1}"), DataError);
  CHECK_THROWS_AS(ReportDocument::parse("not json"), DataError);
  CHECK(features_json({0, 11}, {"a", "b"}) == Json::parse(R"([{"index":1,"name":"a"},{"index":12,"name":"x12"}])"));
}

TEST_CASE("expand_config") {
  TempDir dir;
  const auto cfg = dir.write("c.ini", "# defaults\nalpha = 0.2\nmethods=dfb,fb\n");
  const auto out = expand_config({"simulate", "--config", cfg.string(), "--alpha", "0.3"});
  CHECK(out == std::vector<std::string>{"simulate", "--alpha=0.2", "--methods=dfb,fb", "--alpha", "0.3"});
  CHECK(expand_config({"select", "--data", "x"}) == std::vector<std::string>{"select", "--data", "x"});
  CHECK_THROWS_AS(expand_config({"select", "--config", (dir.path / "none.ini").string()}), UsageError);
  CHECK_THROWS_AS(expand_config({"select", "--config"}), UsageError);
}

TEST_CASE("select command") {
  TempDir dir;
  const std::string data = reference_csv(dir, 50, 3);

  SUBCASE("reference model recovers the true support") {
    const auto r = run_cli({"select", "--data", data, "--method", "dfb", "--criterion", "cp", "--alpha", "0.01",
                            "--beta", "0.01", "--sigma2", "2"});
    REQUIRE(r.code == 0);
    const auto doc = ReportDocument::parse(r.out);
    CHECK(doc.command == "select");
    CHECK(doc.seed == 1u);
    const auto selected = indices(doc.payload["result"]["selected"]);
    for (std::size_t f : {1u, 2u, 7u, 12u}) CHECK(std::find(selected.begin(), selected.end(), f) != selected.end());
    CHECK(doc.payload["result"]["selected_count"] == selected.size());
    CHECK(doc.payload["config"]["drop_beta"] == 0.01);
    CHECK(doc.payload["result"]["wall_time_seconds"].is_number());
  }
  SUBCASE("cap, csv output and --out") {
    const auto path = (dir.path / "r.csv").string();
    const auto r = run_cli({"select", "--data", data, "--max-features", "2", "--format", "csv", "--out", path});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("2 selected") != std::string::npos);
    std::ifstream in(path);
    std::string header;
    std::string row;
    std::getline(in, header);
    std::getline(in, row);
    CHECK(header.rfind("method,criterion,selected_count,", 0) == 0);
    CHECK(row.rfind("dfb,cp,2,", 0) == 0);
  }
  SUBCASE("identical invocations give identical masked reports") {
    const std::vector<std::string> args{"select", "--data", data, "--method", "stepwise"};
    const auto a = ReportDocument::parse(run_cli(args).out);
    const auto b = ReportDocument::parse(run_cli(args).out);
    CHECK(mask_timings(a.to_json()).dump() == mask_timings(b.to_json()).dump());
  }
  SUBCASE("config file values lose to flags") {
    const auto cfg = dir.write("c.ini", "max-features=1\nformat=csv\n");
    const auto from_file = run_cli({"select", "--data", data, "--config", cfg.string()});
    REQUIRE(from_file.code == 0);
    CHECK(from_file.out.find("\ndfb,cp,1,") != std::string::npos);
    const auto overridden = run_cli({"select", "--config", cfg.string(), "--data", data, "--max-features", "3"});
    REQUIRE(overridden.code == 0);
    CHECK(overridden.out.find("\ndfb,cp,3,") != std::string::npos);
  }
  SUBCASE("usage errors") {
    check_error_line(run_cli({"select", "--method", "dfb"}), "usage");
    CHECK(run_cli({"select", "--method", "dfb"}).code == exit_usage);
    const auto bad_method = run_cli({"select", "--data", data, "--method", "sideways"});
    CHECK(bad_method.code == exit_usage);
    check_error_line(bad_method, "usage");
    CHECK(bad_method.err.find("forward, backward, stepwise, fb, dfb") != std::string::npos);
    CHECK(run_cli({"select", "--data", data, "--criterion", "cp", "--task", "classification"}).code == exit_usage);
    CHECK(run_cli({"select", "--data", data, "--criterion", "trace", "--sigma2", "1"}).code == exit_usage);
    CHECK(run_cli({"select", "--data", data, "--method", "fb", "--drop-beta", "1"}).code == exit_usage);
    CHECK(run_cli({"select", "--data", data, "--max-features", "99"}).code == exit_usage);
    CHECK(run_cli({"select", "--data", data, "--alpha", "abc"}).code == exit_usage);
    CHECK(run_cli({"select", "--data", data, "--format", "xml"}).code == exit_usage);
    CHECK(run_cli({"select", "--data", data, "--config", "/nonexistent/cfg"}).code == exit_usage);
    CHECK(run_cli({}).code == exit_usage);
  }
  SUBCASE("data and numerical errors") {
    const auto missing = run_cli({"select", "--data", (dir.path / "none.csv").string()});
    CHECK(missing.code == exit_data);
    check_error_line(missing, "data");
    const auto nan = dir.write("nan.csv", "a,b,y\n1,2,3\n4,nan,5\n");
    CHECK(run_cli({"select", "--data", nan.string()}).code == exit_data);
    CHECK(run_cli({"select", "--data", data, "--target", "label"}).code == exit_data);
    const auto dup = dir.write("dup.csv", "a,b,c,y\n1,1,2,1\n2,2,1,3\n3,3,5,2\n4,4,3,6\n5,5,4,5\n6,6,7,4\n");
    const auto singular = run_cli({"select", "--data", dup.string(), "--method", "backward", "--sigma2", "1"});
    CHECK(singular.code == exit_numerical);
    check_error_line(singular, "numerical");
  }
  SUBCASE("help and version") {
    const auto help = run_cli({"select", "--help"});
    CHECK(help.code == 0);
    CHECK(help.out.find("--drop-beta") != std::string::npos);
    CHECK(run_cli({"--version"}).out.find("fsel ") == 0);
  }
}

TEST_CASE("simulate command") {
  SUBCASE("one replication equals the single run") {
    const auto r = run_cli({"simulate", "--p", "30", "--reps", "1", "--seed", "5", "--methods", "stepwise,dfb"});
    REQUIRE(r.code == 0);
    const auto doc = ReportDocument::parse(r.out);
    const Json& summary = doc.payload["cells"][0]["summary"];
    CHECK(summary["replications"] == 1);
    auto spec = SimulationSpec::reference_model(30, 1, 5);
    const Dataset data = simulate_replication(spec, 0);
    SelectionConfig config;
    config.criterion.sigma2_override = 2.0;
    const auto step = stepwise_select(data, config);
    const auto dfb = dropping_fb_select(data, config);
    CHECK(to_number(summary["methods"][0]["mean_selected"]) == static_cast<double>(step.selected.size()));
    CHECK(to_number(summary["methods"][0]["mean_criterion_evals"]) == static_cast<double>(step.criterion_evals));
    CHECK(to_number(summary["methods"][1]["mean_selected"]) == static_cast<double>(dfb.selected.size()));
    CHECK(to_number(summary["methods"][1]["mean_backward_steps"]) == static_cast<double>(dfb.backward_steps_taken));
  }
  SUBCASE("deterministic apart from timings") {
    const std::vector<std::string> args{"simulate", "--table", "2", "--reps", "5", "--seed", "9"};
    const auto a = ReportDocument::parse(run_cli(args).out);
    const auto b = ReportDocument::parse(run_cli(args).out);
    CHECK(a.payload["cells"].size() == 5);
    CHECK(mask_timings(a.to_json()) == mask_timings(b.to_json()));
    CHECK(a.payload["cells"][0]["summary"]["methods"][0]["method"] == "stepwise");
  }
  SUBCASE("tables and csv") {
    const auto t1 = run_cli({"simulate", "--table", "1", "--model-size", "8", "--reps", "3", "--format", "csv"});
    REQUIRE(t1.code == 0);
    CHECK(t1.out.find("model_size=8,80,80,0.0,8,3,stepwise,") != std::string::npos);
    const auto t3 = run_cli({"simulate", "--table", "3", "--p", "60", "--reps", "2"});
    REQUIRE(t3.code == 0);
    CHECK(ReportDocument::parse(t3.out).payload["cells"][0]["summary"]["methods"].size() == 3);
  }
  SUBCASE("invalid specs") {
    CHECK(run_cli({"simulate", "--table", "4"}).code == exit_usage);
    CHECK(run_cli({"simulate", "--max-corr", "1.5", "--reps", "1"}).code == exit_usage);
    CHECK(run_cli({"simulate", "--p", "5", "--reps", "1"}).code == exit_usage);
    CHECK(run_cli({"simulate", "--table", "1", "--max-corr", "0.3"}).code == exit_usage);
    CHECK(run_cli({"simulate", "--reps", "0"}).code == exit_usage);
  }
}

TEST_CASE("compare command") {
  TempDir dir;
  SUBCASE("fixture: stepwise and fb agree, dfb evaluates less") {
    const auto plot = (dir.path / "plot.csv").string();
    const auto r = run_cli({"compare", "--data", kFixture.string(), "--target", "class", "--alpha", "0.05", "--beta",
                            "0.05", "--with-pca", "--with-all-features", "--plot-data", plot});
    REQUIRE(r.code == 0);
    const auto doc = ReportDocument::parse(r.out);
    std::map<std::string, Json> rows;
    for (const auto& row : doc.payload["result"]["methods"]) rows[row["method"].get<std::string>()] = row;
    REQUIRE(rows.size() == 5);
    CHECK(rows["stepwise"]["selected"] == rows["fb"]["selected"]);
    CHECK(rows["stepwise"]["test_error"] == rows["fb"]["test_error"]);
    CHECK(rows["dfb"]["criterion_evals"].get<std::size_t>() < rows["stepwise"]["criterion_evals"].get<std::size_t>());
    CHECK(rows["pca"]["selected"].is_null());
    CHECK(to_number(rows["pca"]["explained"]) >= 0.985);
    CHECK(doc.payload["result"]["constant_columns"] == Json::array({2}));

    std::ifstream in(plot);
    std::string line;
    std::getline(in, line);
    CHECK(line == "method,test_error,feature_count");
    std::size_t count = 0;
    while (std::getline(in, line)) ++count;
    CHECK(count == 5);
  }
  SUBCASE("provided test set") {
    const auto r = run_cli({"compare", "--data", kFixture.string(), "--test", kFixture.string(), "--target", "class",
                            "--methods", "fb", "--format", "csv"});
    REQUIRE(r.code == 0);
    CHECK(r.out.rfind("method,test_error,", 0) == 0);
  }
  SUBCASE("errors") {
    const std::string data = reference_csv(dir, 20, 1);
    const auto regression = run_cli({"compare", "--data", data, "--target", "y"});
    CHECK(regression.code == exit_data);
    check_error_line(regression, "data");
    const auto unknown = run_cli({"compare", "--data", kFixture.string(), "--target", "class", "--methods", "dfb,x"});
    CHECK(unknown.code == exit_usage);
    CHECK(unknown.err.find("valid: forward, backward, stepwise, fb, dfb") != std::string::npos);
    CHECK(run_cli({"compare", "--data", kFixture.string(), "--target", "class", "--split", "1"}).code == exit_usage);
  }
}
