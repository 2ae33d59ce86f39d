#include "report.hpp"

#include <cstdio>

namespace cvdense::cli {

using nlohmann::json;

std::string fnv1a_hex(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

json to_json(const detection::NoiseBudget& b) {
  json j = {
      {"v_sum", b.v_sum},
      {"v_diff", b.v_diff},
      {"v_sum_helped", b.v_sum_helped},
      {"g_used", b.g_used},
      {"v_sum_db", b.sum_db()},
      {"v_diff_db", b.diff_db()},
      {"v_sum_helped_db", b.sum_helped_db()},
  };
  j["enl_linear"] = b.enl_linear ? json(*b.enl_linear) : json(nullptr);
  return j;
}

detection::NoiseBudget budget_from_json(const json& j) {
  detection::NoiseBudget b;
  b.v_sum = j.at("v_sum").get<double>();
  b.v_diff = j.at("v_diff").get<double>();
  b.v_sum_helped = j.at("v_sum_helped").get<double>();
  b.g_used = j.at("g_used").get<double>();
  if (j.contains("enl_linear") && !j.at("enl_linear").is_null()) b.enl_linear = j.at("enl_linear").get<double>();
  return b;
}

json to_json(const analysis::CapacityPoint& c) {
  return {{"nbar", c.nbar},
          {"c_helped", c.c_helped},
          {"c_unhelped", c.c_unhelped},
          {"c_coherent", c.c_coherent},
          {"c_squeezed", c.c_squeezed}};
}

analysis::CapacityPoint capacity_from_json(const json& j) {
  return {j.at("nbar").get<double>(), j.at("c_helped").get<double>(), j.at("c_unhelped").get<double>(),
          j.at("c_coherent").get<double>(), j.at("c_squeezed").get<double>()};
}

json to_json(const analysis::ExperimentParams& p) {
  return {{"r", p.r},         {"xi1_sq", p.xi1_sq}, {"xi2_sq", p.xi2_sq},     {"eta_sq", p.eta_sq},
          {"gain", p.gain},   {"v_xs", p.v_xs},     {"v_ys", p.v_ys},         {"sigma_sq", p.sigma_sq}};
}

analysis::ExperimentParams params_from_json(const json& j) {
  analysis::ExperimentParams p;
  p.r = j.at("r").get<double>();
  p.xi1_sq = j.at("xi1_sq").get<double>();
  p.xi2_sq = j.at("xi2_sq").get<double>();
  p.eta_sq = j.at("eta_sq").get<double>();
  p.gain = j.at("gain").get<double>();
  p.v_xs = j.at("v_xs").get<double>();
  p.v_ys = j.at("v_ys").get<double>();
  p.sigma_sq = j.at("sigma_sq").get<double>();
  return p;
}

json to_json(const RunReport& r) {
  json j;
  j["params"] = to_json(r.params);
  j["closed_form"] = to_json(r.closed_form);
  j["circuit"] = r.circuit ? to_json(*r.circuit) : json(nullptr);
  j["max_disagreement"] = r.max_disagreement;
  j["g_opt"] = r.g_opt;
  j["v_sum_helped_opt"] = r.v_sum_helped_opt;
  j["capacities"] = json::array();
  for (const auto& c : r.capacities) j["capacities"].push_back(to_json(c));
  j["provenance"] = {
      {"tool", kToolName},
      {"tool_version", r.provenance.tool_version},
      {"seed", r.provenance.seed ? json(*r.provenance.seed) : json(nullptr)},
      {"netlist_hash", r.provenance.netlist_hash ? json(*r.provenance.netlist_hash) : json(nullptr)},
  };
  return j;
}

RunReport report_from_json(const json& j) {
  RunReport r;
  r.params = params_from_json(j.at("params"));
  r.closed_form = budget_from_json(j.at("closed_form"));
  if (!j.at("circuit").is_null()) r.circuit = budget_from_json(j.at("circuit"));
  r.max_disagreement = j.at("max_disagreement").get<double>();
  r.g_opt = j.at("g_opt").get<double>();
  r.v_sum_helped_opt = j.at("v_sum_helped_opt").get<double>();
  for (const auto& c : j.at("capacities")) r.capacities.push_back(capacity_from_json(c));
  const json& p = j.at("provenance");
  r.provenance.tool_version = p.at("tool_version").get<std::string>();
  if (!p.at("seed").is_null()) r.provenance.seed = p.at("seed").get<std::uint64_t>();
  if (!p.at("netlist_hash").is_null()) r.provenance.netlist_hash = p.at("netlist_hash").get<std::string>();
  return r;
}

}  // namespace cvdense::cli
