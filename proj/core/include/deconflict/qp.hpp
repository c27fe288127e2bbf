#pragma once

#include <vector>

#include "deconflict/tolerances.hpp"

namespace deconflict {

// One linear inequality over the speed-rate variables, nonzero on at most two
// of them: coeff[0]*q[idx[0]] + coeff[1]*q[idx[1]] <= rhs. Unused slots carry
// idx = -1.
struct LinearRow {
  int idx[2] = {-1, -1};
  double coeff[2] = {0.0, 0.0};
  double rhs = 0.0;
};

// minimize  weight * sum_i (1 - q_i)^2
// subject to lower_i <= q_i <= upper_i and every row.
struct BoxQP {
  int n = 0;
  double weight = 0.0;
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<LinearRow> rows;
};

enum class QpStatus { kOptimal, kInfeasible };

// kkt_residual is the largest of the stationarity, primal feasibility, dual
// feasibility and complementarity residuals over unit-normalized constraints.
// A zero weight is solved with unit weight as a deterministic tie-break; the
// reported objective is still weight-scaled (exactly zero).
struct QpSolution {
  QpStatus status = QpStatus::kInfeasible;
  std::vector<double> q;
  double objective = 0.0;
  double kkt_residual = 0.0;
};

// Resume state for chained solves that share a constraint prefix (a search
// tree appends rows and only tightens bounds). The solver validates the
// recorded basis against the new system constraint by constraint and falls
// back to a cold start on any mismatch, so a stale state costs time, never
// correctness. Refilled with the optimal basis after every successful solve.
struct QpWarmStart {
  bool valid = false;
  int n = 0;
  int k = 0;                    // basis size
  std::vector<int> active;     // constraint indices, box bounds first
  std::vector<double> mult;
  std::vector<double> q;
  std::vector<double> qmat;    // thin QR of the basis columns, ld = n
  std::vector<double> rmat;
  std::vector<int> basis_idx;    // (i0, i1) per basis constraint
  std::vector<double> basis_coef;  // (c0, c1, b) per basis constraint
};

// Dual active-set solve. Feasibility does not depend on a starting point; an
// infeasible constraint system is reported as kInfeasible.
QpSolution solve_convex_qp(const BoxQP& qp, QpWarmStart* warm = nullptr);

}  // namespace deconflict
