#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "cvdense/analysis.hpp"
#include "cvdense/detection.hpp"

namespace cvdense::cli {

inline constexpr const char* kToolName = "cvdense";
inline constexpr const char* kToolVersion = "1.0.0";

struct Provenance {
  std::string tool_version = kToolVersion;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> netlist_hash;

  bool operator==(const Provenance&) const = default;
};

/// Structured output of `paper-run` and `simulate`.
struct RunReport {
  analysis::ExperimentParams params;
  detection::NoiseBudget closed_form;
  std::optional<detection::NoiseBudget> circuit;
  double max_disagreement = 0.0;
  double g_opt = 0.0;
  double v_sum_helped_opt = 0.0;
  std::vector<analysis::CapacityPoint> capacities;
  Provenance provenance;
};

/// 64-bit FNV-1a, rendered as 16 hex digits.
std::string fnv1a_hex(std::string_view text);

nlohmann::json to_json(const detection::NoiseBudget& b);
detection::NoiseBudget budget_from_json(const nlohmann::json& j);

nlohmann::json to_json(const analysis::CapacityPoint& c);
analysis::CapacityPoint capacity_from_json(const nlohmann::json& j);

nlohmann::json to_json(const analysis::ExperimentParams& p);
analysis::ExperimentParams params_from_json(const nlohmann::json& j);

nlohmann::json to_json(const RunReport& r);
RunReport report_from_json(const nlohmann::json& j);

}  // namespace cvdense::cli
