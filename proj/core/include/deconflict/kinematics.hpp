#pragma once

#include <optional>

#include "deconflict/tolerances.hpp"

namespace deconflict {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

struct Velocity2 {
  double vx = 0.0;
  double vy = 0.0;
};

// State of aircraft i relative to aircraft j: p = p_i - p_j, v = v_i - v_j.
struct RelativeState {
  Point2 p;
  Velocity2 v;
};

// Open time window (hours, relative to now) during which the pair distance
// stays below the separation norm.
struct ConflictInterval {
  double t_in = 0.0;
  double t_out = 0.0;
};

// One branch of the velocity-space separation disjunction: a closed half-plane
// bounded by a tangent line of the protection disk, paired with the side
// condition selecting the half of the plane the branch is responsible for.
struct TangentBranch {
  double a = 0.0;  // tangent-line constraint a*vx + b*vy, sense per branch
  double b = 0.0;
  double div_a = 0.0;  // side condition div_a*vx + div_b*vy, same sense
  double div_b = 0.0;
};

// Two-branch disjunction over relative velocities. A velocity is conflict-free
// iff it satisfies the lower branch (both rows <= 0) or the upper branch
// (both rows >= 0).
struct HalfPlaneDisjunction {
  TangentBranch lower;
  TangentBranch upper;

  bool in_lower(const Velocity2& v) const {
    return lower.a * v.vx + lower.b * v.vy <= 0.0 &&
           lower.div_a * v.vx + lower.div_b * v.vy <= 0.0;
  }
  bool in_upper(const Velocity2& v) const {
    return upper.a * v.vx + upper.b * v.vy >= 0.0 &&
           upper.div_a * v.vx + upper.div_b * v.vy >= 0.0;
  }
  bool separates(const Velocity2& v) const { return in_lower(v) || in_upper(v); }
};

RelativeState relative_state(const Point2& pi, const Velocity2& vi,
                             const Point2& pj, const Velocity2& vj);

// Time-invariant separation function: negative iff the infinite relative
// trajectory line passes within distance d of the origin.
double g_value(const RelativeState& rs, double d);

// Time of closest approach; absent when relative motion is below the floor.
std::optional<double> t_min_sep(const RelativeState& rs);

// True iff the pair keeps distance >= d for all t >= 0 on straight paths.
// Static pairs fall back to the constant-gap rule.
bool is_separated(const RelativeState& rs, double d);

// Root window of ||p + v t|| = d; absent when the distance never drops below
// d. A static pair already inside the disk yields an unbounded window.
std::optional<ConflictInterval> conflict_interval(const RelativeState& rs,
                                                  double d);

// Tangent half-plane disjunction for relative position p, pre ||p|| > d.
// The union of the two branches equals the set of relative velocities for
// which is_separated holds.
HalfPlaneDisjunction tangent_halfplanes(const Point2& p, double d);

}  // namespace deconflict
