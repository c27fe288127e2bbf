#pragma once

#include <string>
#include <vector>

#include "deconflict/kinematics.hpp"

namespace deconflict {

struct Aircraft {
  int id = 0;
  Point2 origin;
  double heading = 0.0;  // radians
  double speed = 0.0;    // NM/h
  Point2 target;
};

// Admissible heading deviations: -30 to +30 degrees in 10 degree steps.
std::vector<double> standard_heading_set();

struct ScenarioConfig {
  double d = 5.0;    // separation norm (NM)
  double w = 0.2;    // speed weight in the deviation cost
  double q_min = 0.9;
  double q_max = 1.1;
  std::vector<double> headings = standard_heading_set();  // radians, contains 0
  int n_periods = 15;
  double period_len = 2.0 / 60.0;  // hours
  unsigned long long seed = 0;
};

struct Instance {
  std::string name;
  ScenarioConfig config;
  std::vector<Aircraft> aircraft;
};

// Straight-path velocity at the filed heading and speed.
Velocity2 nominal_velocity(const Aircraft& a);

// Relative state of pair (i, j) under nominal velocities.
RelativeState nominal_relative_state(const Instance& inst, int i, int j);

// Circle problem: n aircraft evenly spaced on a circle of the given radius,
// flying at 500 NM/h through the centre to the antipodal point.
Instance generate_cp(int n, double radius, ScenarioConfig config = {});

// Random circle problem: positions stay on the circle; speeds are drawn from
// [486, 594] NM/h and headings deviate up to 30 degrees from the centre
// bearing, with the target placed one diameter along the drawn heading.
// Draws violating initial separation are redrawn a bounded number of times.
Instance generate_rcp(int n, double radius, ScenarioConfig config = {});

// Number of pairs in conflict under nominal velocities.
int count_conflicts(const Instance& inst);

// Throws std::runtime_error naming the offending field when an invariant is
// broken: unique ids, positive speeds, targets distinct from origins,
// pairwise initial separation >= d, and a heading set containing 0.
void validate_instance(const Instance& inst);

Instance load_instance(const std::string& path);
void save_instance(const Instance& inst, const std::string& path);

}  // namespace deconflict
