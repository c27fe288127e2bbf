#include "deconflict/instance.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace deconflict {

namespace {

constexpr double kPi = 3.14159265358979323846;

double deg_to_rad(double deg) { return deg * kPi / 180.0; }
double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

double wrap_angle(double rad) {
  double a = std::remainder(rad, 2.0 * kPi);
  if (a <= -kPi) a += 2.0 * kPi;
  return a;
}

[[noreturn]] void fail(const std::string& msg) {
  throw std::runtime_error(msg);
}

void check(bool ok, const std::string& msg) {
  if (!ok) fail(msg);
}

}  // namespace

std::vector<double> standard_heading_set() {
  std::vector<double> set;
  for (int k = -3; k <= 3; ++k) set.push_back(deg_to_rad(10.0 * k));
  return set;
}

Velocity2 nominal_velocity(const Aircraft& a) {
  return {a.speed * std::cos(a.heading), a.speed * std::sin(a.heading)};
}

RelativeState nominal_relative_state(const Instance& inst, int i, int j) {
  const Aircraft& ai = inst.aircraft[i];
  const Aircraft& aj = inst.aircraft[j];
  return relative_state(ai.origin, nominal_velocity(ai), aj.origin,
                        nominal_velocity(aj));
}

Instance generate_cp(int n, double radius, ScenarioConfig config) {
  if (n < 2) throw std::invalid_argument("generate_cp: need at least 2 aircraft");
  if (radius <= 0.0) throw std::invalid_argument("generate_cp: radius must be positive");
  Instance inst;
  inst.name = "cp-" + std::to_string(n);
  inst.config = std::move(config);
  for (int k = 0; k < n; ++k) {
    const double phi = 2.0 * kPi * k / n;
    Aircraft a;
    a.id = k;
    a.origin = {radius * std::cos(phi), radius * std::sin(phi)};
    a.heading = wrap_angle(phi + kPi);
    a.speed = 500.0;
    a.target = {-a.origin.x, -a.origin.y};
    inst.aircraft.push_back(a);
  }
  validate_instance(inst);
  return inst;
}

Instance generate_rcp(int n, double radius, ScenarioConfig config) {
  if (n < 2) throw std::invalid_argument("generate_rcp: need at least 2 aircraft");
  if (radius <= 0.0) throw std::invalid_argument("generate_rcp: radius must be positive");
  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> speed_dist(486.0, 594.0);
  std::uniform_real_distribution<double> dev_dist(-kPi / 6.0, kPi / 6.0);

  Instance inst;
  inst.name = "rcp-" + std::to_string(n) + "-s" + std::to_string(config.seed);
  inst.config = std::move(config);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    inst.aircraft.clear();
    for (int k = 0; k < n; ++k) {
      const double phi = 2.0 * kPi * k / n;
      Aircraft a;
      a.id = k;
      a.origin = {radius * std::cos(phi), radius * std::sin(phi)};
      a.heading = wrap_angle(phi + kPi + dev_dist(rng));
      a.speed = speed_dist(rng);
      a.target = {a.origin.x + 2.0 * radius * std::cos(a.heading),
                  a.origin.y + 2.0 * radius * std::sin(a.heading)};
      inst.aircraft.push_back(a);
    }
    bool ok = true;
    for (size_t i = 0; i + 1 < inst.aircraft.size() && ok; ++i)
      for (size_t j = i + 1; j < inst.aircraft.size() && ok; ++j) {
        const double dx = inst.aircraft[i].origin.x - inst.aircraft[j].origin.x;
        const double dy = inst.aircraft[i].origin.y - inst.aircraft[j].origin.y;
        ok = std::hypot(dx, dy) >= inst.config.d;
      }
    if (ok) {
      validate_instance(inst);
      return inst;
    }
  }
  throw std::runtime_error("generate_rcp: could not draw a separated instance");
}

int count_conflicts(const Instance& inst) {
  int count = 0;
  const int n = static_cast<int>(inst.aircraft.size());
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (!is_separated(nominal_relative_state(inst, i, j), inst.config.d))
        ++count;
  return count;
}

void validate_instance(const Instance& inst) {
  const ScenarioConfig& c = inst.config;
  check(c.d > 0.0, "config.d: must be positive");
  check(c.q_min > 0.0 && c.q_min <= 1.0, "config.q_min: must be in (0, 1]");
  check(c.q_max >= 1.0, "config.q_max: must be at least 1");
  check(!c.headings.empty(), "config.headings_deg: must not be empty");
  bool has_zero = false;
  for (double h : c.headings) has_zero = has_zero || std::abs(h) < 1e-12;
  check(has_zero, "config.headings_deg: must contain 0");
  check(c.n_periods >= 1, "config.n_periods: must be at least 1");
  check(c.period_len > 0.0, "config.period_len_min: must be positive");

  check(inst.aircraft.size() >= 2, "aircraft: need at least 2");
  for (size_t i = 0; i < inst.aircraft.size(); ++i) {
    const Aircraft& a = inst.aircraft[i];
    const std::string where = "aircraft[" + std::to_string(i) + "].";
    check(a.speed > 0.0, where + "speed: must be positive");
    check(std::hypot(a.target.x - a.origin.x, a.target.y - a.origin.y) > 1e-9,
          where + "target: must differ from the origin");
    for (size_t j = 0; j < i; ++j) {
      check(inst.aircraft[j].id != a.id,
            where + "id: duplicate of aircraft[" + std::to_string(j) + "]");
      const double gap = std::hypot(a.origin.x - inst.aircraft[j].origin.x,
                                    a.origin.y - inst.aircraft[j].origin.y);
      check(gap >= c.d, where + "origin: initial separation below d against aircraft[" +
                            std::to_string(j) + "]");
    }
  }
}

namespace {

const nlohmann::json& field(const nlohmann::json& j, const std::string& key,
                            const std::string& path) {
  auto it = j.find(key);
  if (it == j.end()) fail(path + key + ": missing");
  return *it;
}

double num(const nlohmann::json& j, const std::string& key,
           const std::string& path) {
  const auto& v = field(j, key, path);
  if (!v.is_number()) fail(path + key + ": expected a number");
  return v.get<double>();
}

}  // namespace

Instance load_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(path + ": cannot open");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    fail(path + ": invalid JSON: " + e.what());
  }

  Instance inst;
  const auto& name = field(j, "name", "");
  if (!name.is_string()) fail("name: expected a string");
  inst.name = name.get<std::string>();

  const auto& jc = field(j, "config", "");
  ScenarioConfig c;
  c.d = num(jc, "d", "config.");
  c.w = num(jc, "w", "config.");
  c.q_min = num(jc, "q_min", "config.");
  c.q_max = num(jc, "q_max", "config.");
  const auto& hd = field(jc, "headings_deg", "config.");
  if (!hd.is_array() || hd.empty()) fail("config.headings_deg: expected a non-empty array");
  c.headings.clear();
  for (const auto& h : hd) {
    if (!h.is_number()) fail("config.headings_deg: expected numbers");
    c.headings.push_back(deg_to_rad(h.get<double>()));
  }
  c.n_periods = static_cast<int>(num(jc, "n_periods", "config."));
  c.period_len = num(jc, "period_len_min", "config.") / 60.0;
  c.seed = static_cast<unsigned long long>(num(jc, "seed", "config."));
  inst.config = std::move(c);

  const auto& ja = field(j, "aircraft", "");
  if (!ja.is_array()) fail("aircraft: expected an array");
  for (size_t i = 0; i < ja.size(); ++i) {
    const std::string where = "aircraft[" + std::to_string(i) + "].";
    const auto& e = ja[i];
    if (!e.is_object()) fail(where + ": expected an object");
    Aircraft a;
    a.id = static_cast<int>(num(e, "id", where));
    a.origin = {num(e, "x", where), num(e, "y", where)};
    a.heading = deg_to_rad(num(e, "heading_deg", where));
    a.speed = num(e, "speed", where);
    a.target = {num(e, "target_x", where), num(e, "target_y", where)};
    inst.aircraft.push_back(a);
  }
  validate_instance(inst);
  return inst;
}

void save_instance(const Instance& inst, const std::string& path) {
  nlohmann::ordered_json j;
  j["name"] = inst.name;
  nlohmann::ordered_json jc;
  jc["d"] = inst.config.d;
  jc["w"] = inst.config.w;
  jc["q_min"] = inst.config.q_min;
  jc["q_max"] = inst.config.q_max;
  std::vector<double> hd;
  for (double h : inst.config.headings) hd.push_back(rad_to_deg(h));
  jc["headings_deg"] = hd;
  jc["n_periods"] = inst.config.n_periods;
  jc["period_len_min"] = inst.config.period_len * 60.0;
  jc["seed"] = inst.config.seed;
  j["config"] = std::move(jc);
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const Aircraft& a : inst.aircraft) {
    nlohmann::ordered_json e;
    e["id"] = a.id;
    e["x"] = a.origin.x;
    e["y"] = a.origin.y;
    e["heading_deg"] = rad_to_deg(a.heading);
    e["speed"] = a.speed;
    e["target_x"] = a.target.x;
    e["target_y"] = a.target.y;
    arr.push_back(std::move(e));
  }
  j["aircraft"] = std::move(arr);

  std::ofstream out(path);
  if (!out) fail(path + ": cannot open for writing");
  out << j.dump(2) << "\n";
}

}  // namespace deconflict
