#include "cli/csv.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <optional>
#include <sstream>

#include "fsel/errors.hpp"

namespace fsel::cli {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::optional<double> parse_number(const std::string& cell) {
  std::string text = trim(cell);
  if (!text.empty() && text.front() == '+') text.erase(0, 1);
  if (text.empty()) return std::nullopt;
  double value = 0.0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || end != text.data() + text.size() || !std::isfinite(value)) return std::nullopt;
  return value;
}

std::string quoted(const std::string& s) { return "'" + s + "'"; }

std::string field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

}  // namespace

std::vector<std::string> split_record(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  bool in_quotes = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (in_quotes) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cell += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        cell += ch;
      }
    } else if (ch == '"') {
      in_quotes = true;
    } else if (ch == ',') {
      out.push_back(cell);
      cell.clear();
    } else if (ch != '\r') {
      cell += ch;
    }
  }
  if (in_quotes) throw DataError("unterminated quoted field");
  out.push_back(cell);
  return out;
}

Dataset load_csv(const std::filesystem::path& path, const CsvOptions& options) {
  std::ifstream in(path);
  if (!in) throw DataError(path.string() + ": cannot open file");
  const std::string where = path.string();

  std::vector<std::vector<std::string>> records;
  std::vector<std::size_t> line_numbers;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      records.push_back(split_record(line));
    } catch (const DataError& e) {
      throw DataError(where + ": line " + std::to_string(line_no) + ": " + e.what());
    }
    line_numbers.push_back(line_no);
  }
  if (records.empty()) throw DataError(where + ": file is empty");

  std::vector<std::string> header;
  std::size_t first_row = 0;
  if (options.header) {
    for (const auto& h : records.front()) header.push_back(trim(h));
    first_row = 1;
  } else {
    for (std::size_t c = 0; c < records.front().size(); ++c) header.push_back("c" + std::to_string(c + 1));
  }
  if (records.size() == first_row) throw DataError(where + ": no data rows after the header");
  const std::size_t width = header.size();

  std::size_t target = width;
  if (const auto it = std::find(header.begin(), header.end(), options.target); it != header.end()) {
    target = static_cast<std::size_t>(it - header.begin());
  } else if (const auto index = parse_number(options.target);
             index && *index >= 1 && *index <= static_cast<double>(width) && std::floor(*index) == *index) {
    target = static_cast<std::size_t>(*index) - 1;
  }
  if (target == width) throw DataError(where + ": target column " + quoted(options.target) + " not found");
  if (width < 2) throw DataError(where + ": need at least one feature column besides the target");

  const std::size_t rows = records.size() - first_row;
  Matrix X(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(width - 1));
  Vector y(static_cast<Eigen::Index>(rows));
  std::vector<std::string> raw_labels;
  std::vector<std::string> names;
  for (std::size_t c = 0; c < width; ++c)
    if (c != target) names.push_back(header[c]);

  for (std::size_t r = 0; r < rows; ++r) {
    const auto& record = records[first_row + r];
    const std::size_t file_line = line_numbers[first_row + r];
    if (record.size() != width) {
      throw DataError(where + ": line " + std::to_string(file_line) + ": expected " + std::to_string(width) +
                      " fields, found " + std::to_string(record.size()));
    }
    Eigen::Index col = 0;
    for (std::size_t c = 0; c < width; ++c) {
      const auto& cell = record[c];
      if (c == target && options.kind == TargetKind::label) {
        const std::string label = trim(cell);
        if (label.empty()) {
          throw DataError(where + ": line " + std::to_string(file_line) + ", column " + std::to_string(c + 1) + " (" +
                          header[c] + "): empty class label");
        }
        raw_labels.push_back(label);
        continue;
      }
      const auto value = parse_number(cell);
      if (!value) {
        throw DataError(where + ": line " + std::to_string(file_line) + ", column " + std::to_string(c + 1) + " (" +
                        header[c] + "): cannot parse " + quoted(trim(cell)) + " as a finite number");
      }
      if (c == target)
        y(static_cast<Eigen::Index>(r)) = *value;
      else
        X(static_cast<Eigen::Index>(r), col++) = *value;
    }
  }

  if (options.kind == TargetKind::label) return Dataset::classification(std::move(X), encode_labels(raw_labels), names);
  return Dataset::regression(std::move(X), std::move(y), names);
}

void save_csv(const std::filesystem::path& path, const Dataset& data, const std::string& target_name) {
  std::ofstream out(path);
  if (!out) throw DataError(path.string() + ": cannot open for writing");
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (const auto& name : data.column_names()) out << field(name) << ',';
  out << field(target_name) << '\n';
  const Matrix& X = data.X();
  for (Eigen::Index r = 0; r < X.rows(); ++r) {
    for (Eigen::Index c = 0; c < X.cols(); ++c) out << X(r, c) << ',';
    if (data.is_classification())
      out << field(data.labels().names[static_cast<std::size_t>(data.labels().codes[static_cast<std::size_t>(r)])]);
    else
      out << data.response()(r);
    out << '\n';
  }
  if (!out) throw DataError(path.string() + ": write failed");
}

}  // namespace fsel::cli
