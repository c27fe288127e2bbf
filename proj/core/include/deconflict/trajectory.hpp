#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "deconflict/avoidance.hpp"
#include "deconflict/instance.hpp"
#include "deconflict/recovery.hpp"

namespace deconflict {

// Constant-velocity leg over [t_start, t_end].
struct Segment {
  double t_start = 0.0;
  Point2 start;
  Velocity2 velocity;
  double t_end = 0.0;

  Point2 at(double t) const {
    return {start.x + velocity.vx * (t - t_start),
            start.y + velocity.vy * (t - t_start)};
  }
};

// Full flight path of one aircraft: avoidance leg, then recovery leg, ending
// at the target. Segments are contiguous in time and space.
struct Trajectory {
  int aircraft_id = 0;
  std::vector<Segment> segments;
  double arrival_time = 0.0;
  // The avoidance leg runs through the target before the recovery time, so
  // the path was cut at the target and the recovery leg dropped.
  bool clamped = false;

  // Position at time t, held at the endpoints outside [0, arrival_time].
  Point2 position(double t) const;
};

struct ViolatingPair {
  int i = 0;
  int j = 0;
  double t = 0.0;  // hours
};

struct VerificationReport {
  // +infinity when there are no aircraft pairs to compare.
  double min_separation = std::numeric_limits<double>::infinity();
  // Earliest approach below the violation threshold, when any.
  std::optional<ViolatingPair> violating_pair;
  long long samples = 0;
};

// Builds one trajectory per aircraft: the stage-1 maneuver until the assigned
// recovery time, then straight to the target at nominal speed. A zero recovery
// time collapses to the single recovery leg (the nominal line when the
// maneuver is the identity). When the avoidance leg itself reaches the target
// before the recovery time the path is clamped there instead.
std::vector<Trajectory> assemble(const Instance& inst,
                                 const AvoidanceSolution& avoid,
                                 const RecoverySolution& recovery);

// Checks pairwise separation while both aircraft are en route: sampling at
// the given step plus the analytic closest approach of every segment pair,
// so the reported minimum is not limited by the sampling rate. Violations
// are approaches below d minus a small slack for roundoff.
VerificationReport verify(const std::vector<Trajectory>& trajectories, double d,
                          double step_seconds = 1.0);

struct TrajectoryMetrics {
  double min_period = 0.0;
  double mean_period = 0.0;
  double max_period = 0.0;
  double total_cost = 0.0;
  std::vector<double> arrival_delay;  // hours vs the nominal flight, per id
};

TrajectoryMetrics metrics(const Instance& inst,
                          const std::vector<Trajectory>& trajectories,
                          const AvoidanceSolution& avoid,
                          const RecoverySolution& recovery);

// Plot: dashed grey nominal lines, red avoidance legs, blue recovery legs.
// Returns false when the file cannot be written.
bool write_svg(const std::string& path, const Instance& inst,
               const std::vector<Trajectory>& trajectories);

}  // namespace deconflict
