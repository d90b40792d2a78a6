#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "fsel/datagen.hpp"
#include "fsel/evaluation.hpp"
#include "fsel/selectors.hpp"

namespace fsel::cli {

using Json = nlohmann::ordered_json;

inline constexpr std::string_view kTimingNote =
    "wall times are seconds from a monotonic clock at microsecond resolution and are not comparable across machines";

/// Top-level document written by every command. Field order is stable.
struct ReportDocument {
  std::string tool = "fsel";
  std::string version;
  std::string command;
  std::vector<std::string> arguments;
  std::optional<std::uint64_t> seed;
  std::string note{kTimingNote};
  Json payload = Json::object();

  Json to_json() const;
  /// Throws DataError on a malformed document.
  static ReportDocument from_json(const Json& json);

  std::string dump() const;
  static ReportDocument parse(std::string_view text);

  bool operator==(const ReportDocument&) const = default;
};

/// Finite values as numbers, others as "inf", "-inf" or "nan".
Json number(double value);
double to_number(const Json& json);

/// Seconds rounded to whole microseconds.
double microseconds(double seconds);

/// Copy with every "*wall_time*" field set to null, for comparisons.
Json mask_timings(Json json);

/// [{"index": 1-based, "name": ...}, ...]
Json features_json(const std::vector<std::size_t>& features, const std::vector<std::string>& names);

Json selection_json(const SelectionReport& report, const std::vector<std::string>& names);
Json config_json(const SelectionConfig& config);
Json simulation_spec_json(const SimulationSpec& spec);
Json summary_json(const MonteCarloSummary& summary);
Json comparison_json(const ComparisonReport& report, const std::vector<std::string>& names);

}  // namespace fsel::cli
