#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "deconflict/avoidance.hpp"
#include "deconflict/instance.hpp"

namespace deconflict {

struct RecoveryGrid {
  int n_periods = 15;
  double period_len = 2.0 / 60.0;  // hours
  double time(int m) const { return m * period_len; }
};

// Pairwise conflict-free recovery-time tables for one ordered pair (i,j).
// Indexing is m*n_periods + n where m is i's recovery period and n is j's.
//   rr: both recovered, checked at reference max(t(m), t(n)).
//   ar: i avoiding, j recovered at t(n), checked at t(n); true when the lines
//       never conflict or i recovers before the conflict starts (t(m) <= tau).
//   ra: i recovered at t(m), j avoiding, checked at t(m); symmetric.
//   ra_pending: per m, the tau-free version of ra used when j's recovery
//       period is not yet known.
struct PairOmega {
  std::vector<uint8_t> rr, ar, ra;
  std::vector<uint8_t> ra_pending;
};

struct OmegaTables {
  int n_aircraft = 0;
  RecoveryGrid grid;
  std::vector<PairOmega> pair;  // ordered pairs, index i*n_aircraft + j
  const PairOmega& at(int i, int j) const { return pair[i * n_aircraft + j]; }
};

struct RecoverySolution {
  std::vector<int> period;  // per aircraft, instance order
  double objective = 0.0;   // sum of a_i * period_i^2
  bool feasible = false;
  bool optimal = false;    // exact search ran to completion
  bool incomplete = false;  // greedy could not place every aircraft
  std::pair<int, int> blocking_pair{-1, -1};
  long long nodes = 0;
  double runtime_s = 0.0;
};

struct RecoveryOptions {
  double time_limit_s = 300.0;
};

// Stage-1 cost of the chosen maneuver, the recovery priority weight.
double avoidance_cost(const Maneuver& m, double w);

// Position on the avoidance line at time t (hours).
Point2 avoidance_position(const Aircraft& a, const Maneuver& m, double t);

// Recovery velocity when turning back at time t_m: nominal speed, aimed from
// the avoidance position straight at the target. Empty when the aircraft is
// already on top of its target.
std::optional<Velocity2> recovery_velocity(const Aircraft& a, const Maneuver& m,
                                           double t_m);

// Builds all ordered-pair tables from the stage-1 solution. Each entry is
// computed from its own pair geometry; the (i,j)/(j,i) symmetry is a
// consequence, not an input.
OmegaTables build_omega(const Instance& inst, const AvoidanceSolution& avoid,
                        const RecoveryGrid& grid);

// Minimizes sum a_i * m_i^2 over period assignments subject to the pairwise
// state conditions: rr always, ra when m_i < m_j, ar when m_i > m_j.
// Depth-first search over aircraft in decreasing a_i order (ties by id),
// periods tried in increasing order, pruned on partial cost. On infeasible
// instances blocking_pair names the aircraft that ran out of periods and the
// fixed peer that vetoed its last attempt.
RecoverySolution solve_exact_recovery(const Instance& inst,
                                      const AvoidanceSolution& avoid,
                                      const OmegaTables& omega,
                                      const RecoveryOptions& opts = {});

// Priority-list heuristic: undisturbed aircraft recover at period 0; the rest
// are sorted by decreasing a_i (ties by id) and swept period by period,
// accepting an aircraft when it clears every recovered peer (rr) and every
// still-pending peer (tau-free ra). Each period is swept to a fixpoint.
// Aircraft left over after the last period get the final period and the
// solution is flagged incomplete.
RecoverySolution solve_greedy_recovery(const Instance& inst,
                                       const AvoidanceSolution& avoid,
                                       const OmegaTables& omega);

}  // namespace deconflict
