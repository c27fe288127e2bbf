#pragma once

#include <vector>

#include "deconflict/instance.hpp"
#include "deconflict/qp.hpp"

namespace deconflict {

struct Maneuver {
  int aircraft_id = 0;
  double q = 1.0;      // speed rate in [q_min, q_max]
  double theta = 0.0;  // heading deviation (radians), from the instance set
};

enum class SolveStatus { kOptimal, kTimeLimit, kInfeasible };

struct AvoidanceSolution {
  SolveStatus status = SolveStatus::kInfeasible;
  std::vector<Maneuver> maneuvers;      // instance order
  std::vector<double> deviation_costs;  // w(1-q*)^2 + (1-w)theta*^2 per aircraft
  double objective = 0.0;
  long long nodes = 0;
  double runtime_s = 0.0;
};

struct AvoidanceOptions {
  double time_limit_s = 300.0;
  // Tangent rows are tightened by this amount (unit-normalized coefficients)
  // so accepted solutions clear the separation boundary beyond QP roundoff.
  double row_margin = 1e-7;
};

// Velocity under a maneuver: nominal speed scaled by q on the deviated heading.
Velocity2 maneuver_velocity(const Aircraft& a, double q, double theta);

// Per-aircraft deviation cost w(1-q)^2 + (1-w)theta^2.
double deviation_cost(double q, double theta, double w);

enum class Branch { kLower, kUpper };

// Rows over (q_i, q_j) forcing the pair into one branch of its velocity-space
// disjunction at the given fixed headings: the tangent half-plane row
// (tightened by margin) plus the side-condition row. Coefficients are
// unit-normalized. Any point satisfying the rows is separated.
std::vector<LinearRow> pair_branch_constraints(const Instance& inst, int i,
                                               int j, double theta_i,
                                               double theta_j, Branch branch,
                                               double margin = 1e-7);

// Exact two-layer branch and bound: aircraft are assigned headings from the
// instance set (decreasing nominal conflict degree, deviations tried small
// first), and pairs still in conflict at the relaxation optimum are split
// into their two half-plane branches (most negative g first). Node bounds
// combine committed heading costs with the speed-rate QP over the rows
// accumulated so far. Ties within 1e-9 of the incumbent prefer the
// lexicographically smallest |theta| vector, then |1-q| vector.
AvoidanceSolution solve_avoidance(const Instance& inst,
                                  const AvoidanceOptions& opts = {});

}  // namespace deconflict
