#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "fsel/dataset.hpp"

namespace fsel::cli {

enum class TargetKind { numeric, label };

struct CsvOptions {
  std::string target;  // column name; a 1-based index is accepted too
  TargetKind kind = TargetKind::numeric;
  bool header = true;  // without a header columns are named c1, c2, ...
};

/// Reads an RFC 4180 style file ('.' decimal point, quoted fields allowed).
/// Every non-target cell must parse as a finite number. Throws DataError
/// naming the line and column of the first bad cell.
Dataset load_csv(const std::filesystem::path& path, const CsvOptions& options);

/// Splits one record. Exposed for tests.
std::vector<std::string> split_record(const std::string& line);

/// Writes features then the target as the last column, full precision.
void save_csv(const std::filesystem::path& path, const Dataset& data, const std::string& target_name = "y");

}  // namespace fsel::cli
