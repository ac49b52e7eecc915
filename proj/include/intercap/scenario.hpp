#pragma once

// Two-system study definition read from a JSON scenario file, and assembly of
// the study inputs (demand and wind pmfs, fleets, joint margin) from it.
//
// Unknown keys are rejected at every level. MW quantities are integers except
// load_offset_mw, which is written back by calibration.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "intercap/allocation.hpp"
#include "intercap/calibration.hpp"
#include "intercap/fleet.hpp"
#include "intercap/weather_demand.hpp"

namespace intercap {

using Json = nlohmann::ordered_json;

class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SystemConfig {
  std::string name;
  GeneratorSet generator_set;
  std::optional<int> n_sets;          // nullopt = "auto"
  std::optional<MW> load_offset;      // nullopt = "auto"
  MW wind_installed = 0.0;

  bool calibrated() const { return n_sets.has_value() && load_offset.has_value(); }
};

struct InterconnectionConfig {
  // Either n_lines identical lines, or an explicit level list.
  std::optional<int> n_lines;
  MW per_line = 0.0;
  double availability = 1.0;
  InterconnectionSpec explicit_levels;

  InterconnectionSpec spec() const {
    return n_lines ? binomial_lines(*n_lines, per_line, availability) : explicit_levels;
  }

  /// Same structure rescaled so the largest level equals `total`.
  InterconnectionSpec with_total_capacity(MW total) const {
    if (n_lines) {
      if (*n_lines == 0 || total == 0.0) return binomial_lines(0, 0.0, availability);
      return binomial_lines(*n_lines, total / *n_lines, availability);
    }
    InterconnectionSpec ic = explicit_levels;
    const MW top = ic.max_capacity();
    if (top == 0.0 || total == 0.0) return InterconnectionSpec{};
    for (auto& l : ic.levels) l.capacity *= total / top;
    return ic;
  }
};

enum class WindModel { Copula, Joint };

struct ScenarioSpec {
  SystemConfig a, b;
  std::filesystem::path demand_csv;
  std::filesystem::path wind_csv;
  WindModel wind_model = WindModel::Copula;
  CopulaSpec copula;
  double demand_scale_b = 1.0;
  InterconnectionConfig interconnection;
  double risk_standard = 3.0;  // h/yr
  MW step_1d = 10.0;
  MW step_2d = 50.0;
  TraceOptions trace;
  double trim_eps = 1e-14;

  bool calibrated() const { return a.calibrated() && b.calibrated(); }
};

namespace detail {

inline void check_keys(const Json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ScenarioError(where + ": expected an object");
  for (const auto& [key, _] : obj.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw ScenarioError(where + ": unknown key '" + key + "'");
  }
}

inline const Json& require(const Json& obj, const std::string& where, const char* key) {
  if (!obj.contains(key)) throw ScenarioError(where + ": missing key '" + key + "'");
  return obj.at(key);
}

inline double get_number(const Json& obj, const std::string& where, const char* key, double lo, double hi) {
  const Json& v = require(obj, where, key);
  if (!v.is_number()) throw ScenarioError(where + "." + key + ": expected a number");
  const double x = v.get<double>();
  if (!(x >= lo && x <= hi)) {
    throw ScenarioError(where + "." + key + ": " + std::to_string(x) + " outside [" + std::to_string(lo) + ", " +
                        std::to_string(hi) + "]");
  }
  return x;
}

inline long long get_int(const Json& obj, const std::string& where, const char* key, long long lo, long long hi) {
  const Json& v = require(obj, where, key);
  if (!v.is_number_integer()) throw ScenarioError(where + "." + key + ": expected an integer");
  const long long x = v.get<long long>();
  if (x < lo || x > hi) {
    throw ScenarioError(where + "." + key + ": " + std::to_string(x) + " outside [" + std::to_string(lo) + ", " +
                        std::to_string(hi) + "]");
  }
  return x;
}

inline bool is_auto(const Json& v) { return v.is_string() && v.get<std::string>() == "auto"; }

inline SystemConfig parse_system(const Json& j, const std::string& where) {
  check_keys(j, where, {"name", "units", "n_sets", "load_offset_mw", "wind_installed_mw"});
  SystemConfig s;
  s.name = j.value("name", where);
  const Json& units = require(j, where, "units");
  if (!units.is_array() || units.empty()) throw ScenarioError(where + ".units: expected a non-empty array");
  for (std::size_t k = 0; k < units.size(); ++k) {
    const std::string uw = where + ".units[" + std::to_string(k) + "]";
    check_keys(units[k], uw, {"capacity_mw", "availability", "count"});
    UnitClass u;
    u.capacity = static_cast<double>(get_int(units[k], uw, "capacity_mw", 1, 100000));
    u.availability = get_number(units[k], uw, "availability", 0.0, 1.0);
    u.count = units[k].contains("count") ? static_cast<int>(get_int(units[k], uw, "count", 0, 10000)) : 1;
    s.generator_set.units.push_back(u);
  }
  const Json& n = require(j, where, "n_sets");
  if (!is_auto(n)) s.n_sets = static_cast<int>(get_int(j, where, "n_sets", 1, 100000));
  const Json& off = require(j, where, "load_offset_mw");
  if (!is_auto(off)) s.load_offset = get_number(j, where, "load_offset_mw", -1e7, 1e7);
  s.wind_installed = static_cast<double>(get_int(j, where, "wind_installed_mw", 0, 10000000));
  return s;
}

}  // namespace detail

/// Parses a scenario; relative data paths are resolved against `base_dir`.
inline ScenarioSpec parse_scenario(const Json& j, const std::filesystem::path& base_dir) {
  using namespace detail;
  check_keys(j, "scenario",
             {"systems", "data", "wind_model", "copula_rho", "demand_scale_b", "interconnection",
              "risk_standard_h_per_year", "grid", "trace"});
  ScenarioSpec s;
  const Json& systems = require(j, "scenario", "systems");
  check_keys(systems, "systems", {"a", "b"});
  s.a = parse_system(require(systems, "systems", "a"), "systems.a");
  s.b = parse_system(require(systems, "systems", "b"), "systems.b");

  const Json& data = require(j, "scenario", "data");
  check_keys(data, "data", {"demand_csv", "wind_csv"});
  const auto path_of = [&](const char* key) {
    const Json& v = require(data, "data", key);
    if (!v.is_string()) throw ScenarioError(std::string("data.") + key + ": expected a path string");
    std::filesystem::path p = v.get<std::string>();
    return p.is_absolute() ? p : base_dir / p;
  };
  s.demand_csv = path_of("demand_csv");
  s.wind_csv = path_of("wind_csv");

  if (j.contains("wind_model")) {
    const std::string wm = j.at("wind_model").is_string() ? j.at("wind_model").get<std::string>() : "";
    if (wm == "copula") s.wind_model = WindModel::Copula;
    else if (wm == "joint") s.wind_model = WindModel::Joint;
    else throw ScenarioError("wind_model: expected \"copula\" or \"joint\"");
  }
  s.copula.rho = get_number(j, "scenario", "copula_rho", 0.0, 1.0);
  s.demand_scale_b = get_number(j, "scenario", "demand_scale_b", 1e-6, 1e6);
  s.risk_standard = get_number(j, "scenario", "risk_standard_h_per_year", 1e-9, kHoursPerYear);

  const Json& ic = require(j, "scenario", "interconnection");
  if (ic.contains("levels")) {
    check_keys(ic, "interconnection", {"levels"});
    s.interconnection.explicit_levels.levels.clear();
    const Json& lv = ic.at("levels");
    if (!lv.is_array() || lv.empty()) throw ScenarioError("interconnection.levels: expected a non-empty array");
    for (std::size_t k = 0; k < lv.size(); ++k) {
      const std::string w = "interconnection.levels[" + std::to_string(k) + "]";
      check_keys(lv[k], w, {"capacity_mw", "probability"});
      s.interconnection.explicit_levels.levels.push_back(
          {static_cast<double>(get_int(lv[k], w, "capacity_mw", 0, 10000000)), get_number(lv[k], w, "probability", 0.0, 1.0)});
    }
    try {
      s.interconnection.explicit_levels.validate();
    } catch (const std::invalid_argument& e) {
      throw ScenarioError(std::string("interconnection.levels: ") + e.what());
    }
  } else {
    check_keys(ic, "interconnection", {"n_lines", "per_line_mw", "availability"});
    s.interconnection.n_lines = static_cast<int>(get_int(ic, "interconnection", "n_lines", 0, 1000));
    s.interconnection.per_line = static_cast<double>(get_int(ic, "interconnection", "per_line_mw", 0, 1000000));
    s.interconnection.availability = get_number(ic, "interconnection", "availability", 0.0, 1.0);
  }

  if (j.contains("grid")) {
    const Json& g = j.at("grid");
    check_keys(g, "grid", {"step_1d_mw", "step_2d_mw"});
    if (g.contains("step_1d_mw")) s.step_1d = static_cast<double>(get_int(g, "grid", "step_1d_mw", 1, 100000));
    if (g.contains("step_2d_mw")) s.step_2d = static_cast<double>(get_int(g, "grid", "step_2d_mw", 1, 100000));
  }
  if (j.contains("trace")) {
    const Json& t = j.at("trace");
    check_keys(t, "trace", {"n_points", "tol_mw", "tol_risk"});
    if (t.contains("n_points")) s.trace.n_points = static_cast<int>(get_int(t, "trace", "n_points", 2, 100000));
    if (t.contains("tol_mw")) s.trace.tol_mw = static_cast<double>(get_int(t, "trace", "tol_mw", 1, 100000));
    if (t.contains("tol_risk")) s.trace.tol_r = get_number(t, "trace", "tol_risk", 0.0, 1.0);
  }
  return s;
}

inline Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot open scenario file " + path.string());
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ScenarioError(path.string() + ": " + e.what());
  }
}

inline ScenarioSpec load_scenario(const std::filesystem::path& path) {
  return parse_scenario(read_json_file(path), path.parent_path());
}

/// Demand and wind distributions plus per-system isolated inputs.
struct StudyInputs {
  Pmf2 demand;
  Pmf2 wind;
  IsolatedSystem iso_a;
  IsolatedSystem iso_b;
};

inline StudyInputs build_inputs(const ScenarioSpec& s, const DemandSeries& demand, const WindSeries& wind) {
  StudyInputs in;
  in.demand = joint_demand_pmf(demand.a, demand.b, s.demand_scale_b, s.step_2d);
  if (s.wind_model == WindModel::Joint) {
    if (!wind.cf_b) throw ScenarioError("wind_model \"joint\" needs a cf_b column in the wind file");
    in.wind = joint_wind_pmf_direct(wind.cf_a, *wind.cf_b, s.a.wind_installed, s.b.wind_installed, s.step_2d);
  } else {
    const Pmf1 marginal = wind_power_pmf(wind.cf_a, s.a.wind_installed, s.step_2d);
    in.wind = joint_wind_pmf(marginal, s.copula, s.a.wind_installed, s.b.wind_installed);
  }
  in.iso_a = {s.a.generator_set, marginal_a(in.wind), marginal_a(in.demand), s.step_1d, s.step_2d, s.trim_eps};
  in.iso_b = {s.b.generator_set, marginal_b(in.wind), marginal_b(in.demand), s.step_1d, s.step_2d, s.trim_eps};
  return in;
}

inline StudyInputs build_inputs(const ScenarioSpec& s) {
  for (const auto& f : {s.demand_csv, s.wind_csv}) {
    if (!std::filesystem::is_regular_file(f)) throw ScenarioError("data file not found: " + f.string());
  }
  return build_inputs(s, read_demand_csv(s.demand_csv.string()), read_wind_csv(s.wind_csv.string()));
}

/// Joint margin of a calibrated scenario.
inline Study build_study(const ScenarioSpec& s, const StudyInputs& in) {
  if (!s.calibrated()) {
    throw ScenarioError("scenario is not calibrated (n_sets or load_offset_mw is \"auto\"); run `intercap calibrate` first");
  }
  const Pmf1 ga = generation_pmf(s.a.generator_set, *s.a.n_sets, s.step_1d, s.step_2d, s.trim_eps);
  const Pmf1 gb = generation_pmf(s.b.generator_set, *s.b.n_sets, s.step_1d, s.step_2d, s.trim_eps);
  return Study(build_margin(ga, gb, in.wind, in.demand, {*s.a.load_offset, *s.b.load_offset}, s.trim_eps));
}

struct CalibrationOutcome {
  int n_sets = 0;
  MW load_offset = 0.0;
  double lole = 0.0;
};

/// Resolves "auto" fields of one system and reports its isolated LOLE. A solved
/// offset is rounded to 1e-3 MW, the precision kept in the scenario file.
inline CalibrationOutcome calibrate_system(const SystemConfig& sys, const IsolatedSystem& iso, double target,
                                           int max_sets = 500) {
  CalibrationOutcome out;
  out.n_sets = sys.n_sets ? *sys.n_sets : build_portfolio(iso, target, max_sets);
  out.load_offset =
      sys.load_offset ? *sys.load_offset : std::round(solve_load_offset(iso, out.n_sets, target) * 1000.0) / 1000.0;
  out.lole = isolated_lole(iso, out.n_sets, out.load_offset);
  return out;
}

}  // namespace intercap
