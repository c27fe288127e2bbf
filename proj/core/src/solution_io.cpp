#include "deconflict/solution_io.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace deconflict {

namespace {

constexpr double kPi = 3.14159265358979323846;

const char* status_name(SolveStatus s) {
  switch (s) {
    case SolveStatus::kOptimal:
      return "optimal";
    case SolveStatus::kTimeLimit:
      return "time_limit";
    default:
      return "infeasible";
  }
}

}  // namespace

std::string avoidance_to_json(const Instance& inst,
                              const AvoidanceSolution& sol) {
  nlohmann::ordered_json j;
  j["status"] = status_name(sol.status);
  j["objective"] = sol.objective;
  j["nodes"] = sol.nodes;
  j["runtime_s"] = sol.runtime_s;
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (size_t i = 0; i < sol.maneuvers.size(); ++i) {
    const Maneuver& m = sol.maneuvers[i];
    nlohmann::ordered_json e;
    e["id"] = m.aircraft_id;
    e["q"] = m.q;
    e["theta_deg"] = m.theta * 180.0 / kPi;
    e["cost"] = i < sol.deviation_costs.size() ? sol.deviation_costs[i] : 0.0;
    arr.push_back(std::move(e));
  }
  j["maneuvers"] = std::move(arr);
  (void)inst;
  return j.dump(2) + "\n";
}

std::string recovery_to_json(const Instance& inst, const RecoverySolution& sol,
                             const RecoveryGrid& grid,
                             const std::string& method) {
  nlohmann::ordered_json j;
  j["method"] = method;
  j["objective"] = sol.objective;
  j["optimal"] = sol.optimal;
  j["feasible"] = sol.feasible;
  j["incomplete"] = sol.incomplete;
  j["runtime_s"] = sol.runtime_s;
  if (!sol.feasible && sol.blocking_pair.first >= 0) {
    j["blocking_pair"] = {sol.blocking_pair.first, sol.blocking_pair.second};
  }
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (size_t i = 0; i < sol.period.size() && i < inst.aircraft.size(); ++i) {
    nlohmann::ordered_json e;
    e["id"] = inst.aircraft[i].id;
    e["period"] = sol.period[i];
    e["time_min"] = grid.time(sol.period[i]) * 60.0;
    arr.push_back(std::move(e));
  }
  j["aircraft"] = std::move(arr);
  return j.dump(2) + "\n";
}

std::string verification_to_json(const VerificationReport& report) {
  nlohmann::ordered_json j;
  // +inf (no pair ever en route together) has no JSON number; emit null.
  if (std::isfinite(report.min_separation)) {
    j["min_separation_nm"] = report.min_separation;
  } else {
    j["min_separation_nm"] = nullptr;
  }
  j["samples"] = report.samples;
  if (report.violating_pair) {
    nlohmann::ordered_json v;
    v["i"] = report.violating_pair->i;
    v["j"] = report.violating_pair->j;
    v["t_min"] = report.violating_pair->t * 60.0;
    j["violation"] = std::move(v);
  } else {
    j["violation"] = nullptr;
  }
  return j.dump(2) + "\n";
}

void write_text_file(const std::string& path, const std::string& text) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(p.parent_path(), ec);
  }
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace deconflict
