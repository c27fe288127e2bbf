#include "deconflict/qp.hpp"

#include <cassert>
#include <cmath>
#include <limits>
#include <vector>

namespace deconflict {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Internal form: n_i . q >= b_i with ||n_i|| = 1. Every constraint touches at
// most two variables (box bounds one, pair rows two), so normals are kept as
// index/coefficient pairs and all dot products run in constant time.
struct Constraint {
  int i0 = -1;
  int i1 = -1;
  double c0 = 0.0;
  double c1 = 0.0;
  double b = 0.0;

  double dot(const std::vector<double>& q) const {
    double s = c0 * q[i0];
    if (i1 >= 0) s += c1 * q[i1];
    return s;
  }
};

// Per-call workspace. The solver sits inside a branch-and-bound hot loop, so
// buffers are reused across calls instead of reallocated.
struct Workspace {
  std::vector<Constraint> cons;
  std::vector<double> q;
  std::vector<int> active;
  std::vector<double> mult;
  std::vector<char> in_active;
  // Thin QR of the active constraint normals: qmat is n x k with orthonormal
  // columns, rmat is k x k upper triangular, both column-major with leading
  // dimension n.
  std::vector<double> qmat;
  std::vector<double> rmat;
  std::vector<double> u;  // projection residual of the incoming normal
  std::vector<double> w;  // Q^T of the incoming normal
  std::vector<double> r;  // dual step coefficients, solves R r = w
};

Workspace& workspace() {
  thread_local Workspace ws;
  return ws;
}

}  // namespace

QpSolution solve_convex_qp(const BoxQP& qp, QpWarmStart* warm) {
  const int n = qp.n;
  assert(n >= 1);
  assert(static_cast<int>(qp.lower.size()) == n);
  assert(static_cast<int>(qp.upper.size()) == n);

  QpSolution sol;
  sol.status = QpStatus::kInfeasible;

  // Hessian is 2*lambda*I; a zero weight keeps the same minimizer structure
  // as a deterministic tie-break.
  const double lambda = qp.weight > 0.0 ? qp.weight : 1.0;

  Workspace& ws = workspace();
  std::vector<Constraint>& cons = ws.cons;
  cons.clear();
  cons.reserve(2 * n + qp.rows.size());
  for (int i = 0; i < n; ++i) {
    if (qp.lower[i] > qp.upper[i]) return sol;
    cons.push_back({i, -1, 1.0, 0.0, qp.lower[i]});
    cons.push_back({i, -1, -1.0, 0.0, -qp.upper[i]});
  }
  for (const LinearRow& row : qp.rows) {
    Constraint c;
    c.b = row.rhs;
    for (int k = 0; k < 2; ++k) {
      if (row.idx[k] < 0 || row.coeff[k] == 0.0) continue;
      assert(row.idx[k] < n);
      if (c.i0 < 0) {
        c.i0 = row.idx[k];
        c.c0 = row.coeff[k];
      } else if (row.idx[k] == c.i0) {
        c.c0 += row.coeff[k];
      } else {
        c.i1 = row.idx[k];
        c.c1 = row.coeff[k];
      }
    }
    const double norm = std::hypot(c.c0, c.c1);
    if (c.i0 < 0 || norm <= 1e-300) {
      if (row.rhs < 0.0) return sol;  // 0 <= rhs violated
      continue;
    }
    // Rows arrive as <= rhs; flip to the internal >= form and normalize.
    c.c0 = -c.c0 / norm;
    c.c1 = -c.c1 / norm;
    c.b = -c.b / norm;
    cons.push_back(c);
  }
  const int m = static_cast<int>(cons.size());

  ws.q.assign(n, 1.0);
  ws.active.clear();
  ws.mult.clear();
  ws.in_active.assign(m, 0);
  ws.qmat.resize(static_cast<size_t>(n) * n);
  ws.rmat.resize(static_cast<size_t>(n) * n);
  ws.u.resize(n);
  ws.w.resize(n);
  ws.r.resize(n);
  std::vector<double>& q = ws.q;
  std::vector<int>& active = ws.active;
  std::vector<double>& mult = ws.mult;
  double* qm = ws.qmat.data();
  double* rm = ws.rmat.data();
  double* u = ws.u.data();
  double* w = ws.w.data();
  double* r = ws.r.data();

  // Resume from a previous basis when every recorded constraint still exists
  // unchanged at its recorded index; the scan below picks up whatever the new
  // rows or tightened bounds violate.
  if (warm && warm->valid && warm->n == n && warm->k <= n &&
      static_cast<int>(warm->q.size()) == n) {
    const int k = warm->k;
    bool ok = true;
    for (int a = 0; ok && a < k; ++a) {
      const int id = warm->active[a];
      ok = id >= 0 && id < m && !ws.in_active[id] &&
           cons[id].i0 == warm->basis_idx[2 * a] &&
           cons[id].i1 == warm->basis_idx[2 * a + 1] &&
           cons[id].c0 == warm->basis_coef[3 * a] &&
           cons[id].c1 == warm->basis_coef[3 * a + 1] &&
           cons[id].b == warm->basis_coef[3 * a + 2];
      if (ok) ws.in_active[id] = 1;
    }
    if (ok) {
      std::copy(warm->q.begin(), warm->q.end(), q.begin());
      active.assign(warm->active.begin(), warm->active.end());
      mult.assign(warm->mult.begin(), warm->mult.end());
      std::copy(warm->qmat.begin(), warm->qmat.begin() + k * n, qm);
      std::copy(warm->rmat.begin(), warm->rmat.begin() + k * n, rm);
    } else {
      ws.in_active.assign(m, 0);
    }
  }

  const int max_iter = 100 * m + 200 * n + 1000;
  for (int iter = 0; iter < max_iter; ++iter) {
    int p = -1;
    double worst = -1e-11;
    for (int i = 0; i < m; ++i) {
      if (ws.in_active[i]) continue;
      const double s = cons[i].dot(q) - cons[i].b;
      if (s < worst) {
        worst = s;
        p = i;
      }
    }
    if (p < 0) {
      sol.status = QpStatus::kOptimal;
      break;
    }

    double pending = 0.0;
    while (true) {
      const Constraint& cp = cons[p];
      const int k = static_cast<int>(active.size());

      // Project the incoming normal against the active basis: u is the
      // orthogonal residual, w the basis coefficients. One reorthogonalization
      // pass keeps the factorization accurate for near-parallel normals.
      for (int i = 0; i < n; ++i) u[i] = 0.0;
      u[cp.i0] = cp.c0;
      if (cp.i1 >= 0) u[cp.i1] = cp.c1;
      for (int pass = 0; pass < 2; ++pass) {
        for (int a = 0; a < k; ++a) {
          const double* col = qm + static_cast<size_t>(a) * n;
          double d = 0.0;
          for (int i = 0; i < n; ++i) d += col[i] * u[i];
          for (int i = 0; i < n; ++i) u[i] -= d * col[i];
          w[a] = pass == 0 ? d : w[a] + d;
        }
      }
      double unorm2 = 0.0;
      for (int i = 0; i < n; ++i) unorm2 += u[i] * u[i];

      // z = u / (2 lambda) is the primal direction; zc = z . cp.
      const double zc = unorm2 / (2.0 * lambda);
      const double sp = cp.dot(q) - cp.b;

      // r solves R r = w, giving the multiplier decrease rates.
      for (int a = k - 1; a >= 0; --a) {
        double v = w[a];
        const double* cola = rm + static_cast<size_t>(a) * n;
        for (int s2 = a + 1; s2 < k; ++s2) v -= rm[static_cast<size_t>(s2) * n + a] * r[s2];
        r[a] = v / cola[a];
      }

      double t_dual = kInf;
      int drop = -1;
      for (int j = 0; j < k; ++j) {
        if (r[j] > 1e-12) {
          const double tt = mult[j] / r[j];
          if (tt < t_dual) {
            t_dual = tt;
            drop = j;
          }
        }
      }
      const double t_primal = zc > 1e-14 && k < n ? -sp / zc : kInf;

      if (t_dual == kInf && t_primal == kInf) return sol;  // dual unbounded

      if (t_primal <= t_dual) {
        const double scale = t_primal / (2.0 * lambda);
        for (int i = 0; i < n; ++i) q[i] += scale * u[i];
        for (int j = 0; j < k; ++j) mult[j] -= t_primal * r[j];
        // Append the residual direction as a new orthonormal column.
        const double unorm = std::sqrt(unorm2);
        double* qcol = qm + static_cast<size_t>(k) * n;
        double* rcol = rm + static_cast<size_t>(k) * n;
        for (int i = 0; i < n; ++i) qcol[i] = u[i] / unorm;
        for (int a = 0; a < k; ++a) rcol[a] = w[a];
        rcol[k] = unorm;
        active.push_back(p);
        mult.push_back(pending + t_primal);
        ws.in_active[p] = 1;
        break;
      }

      const double scale = t_dual / (2.0 * lambda);
      for (int i = 0; i < n; ++i) q[i] += scale * u[i];
      for (int j = 0; j < k; ++j) mult[j] -= t_dual * r[j];
      pending += t_dual;
      ws.in_active[active[drop]] = 0;
      active.erase(active.begin() + drop);
      mult.erase(mult.begin() + drop);
      // Delete column `drop` from R and restore the triangle with Givens
      // rotations, rotating the matching columns of Q.
      for (int c = drop; c < k - 1; ++c) {
        double* dst = rm + static_cast<size_t>(c) * n;
        const double* src = rm + static_cast<size_t>(c + 1) * n;
        for (int i = 0; i <= c + 1; ++i) dst[i] = src[i];
      }
      for (int c = drop; c < k - 1; ++c) {
        double* col = rm + static_cast<size_t>(c) * n;
        const double a = col[c];
        const double bsub = col[c + 1];
        const double rad = std::hypot(a, bsub);
        if (rad <= 0.0) continue;
        const double cs = a / rad;
        const double sn = bsub / rad;
        col[c] = rad;
        col[c + 1] = 0.0;
        for (int c2 = c + 1; c2 < k - 1; ++c2) {
          double* col2 = rm + static_cast<size_t>(c2) * n;
          const double x = col2[c];
          const double y = col2[c + 1];
          col2[c] = cs * x + sn * y;
          col2[c + 1] = -sn * x + cs * y;
        }
        double* qa = qm + static_cast<size_t>(c) * n;
        double* qb = qm + static_cast<size_t>(c + 1) * n;
        for (int i = 0; i < n; ++i) {
          const double x = qa[i];
          const double y = qb[i];
          qa[i] = cs * x + sn * y;
          qb[i] = -sn * x + cs * y;
        }
      }
    }
  }

  if (sol.status != QpStatus::kOptimal) {
    if (warm) warm->valid = false;
    return sol;
  }

  if (warm) {
    const int k = static_cast<int>(active.size());
    warm->valid = true;
    warm->n = n;
    warm->k = k;
    warm->active.assign(active.begin(), active.end());
    warm->mult.assign(mult.begin(), mult.end());
    warm->q.assign(q.begin(), q.end());
    warm->qmat.assign(qm, qm + k * n);
    warm->rmat.assign(rm, rm + k * n);
    warm->basis_idx.resize(2 * k);
    warm->basis_coef.resize(3 * k);
    for (int a = 0; a < k; ++a) {
      const Constraint& ca = cons[active[a]];
      warm->basis_idx[2 * a] = ca.i0;
      warm->basis_idx[2 * a + 1] = ca.i1;
      warm->basis_coef[3 * a] = ca.c0;
      warm->basis_coef[3 * a + 1] = ca.c1;
      warm->basis_coef[3 * a + 2] = ca.b;
    }
  }

  sol.q = q;
  double obj = 0.0;
  for (int i = 0; i < n; ++i) obj += (1.0 - q[i]) * (1.0 - q[i]);
  sol.objective = qp.weight * obj;

  // Residuals over the normalized constraint system.
  std::vector<double> grad(n);
  for (int i = 0; i < n; ++i) grad[i] = 2.0 * lambda * (q[i] - 1.0);
  for (size_t j = 0; j < active.size(); ++j) {
    const Constraint& ca = cons[active[j]];
    grad[ca.i0] -= mult[j] * ca.c0;
    if (ca.i1 >= 0) grad[ca.i1] -= mult[j] * ca.c1;
  }
  double res = 0.0;
  for (int i = 0; i < n; ++i) res = std::max(res, std::abs(grad[i]));
  for (int i = 0; i < m; ++i) {
    const double s = cons[i].dot(q) - cons[i].b;
    res = std::max(res, -s);
  }
  for (size_t j = 0; j < active.size(); ++j) {
    res = std::max(res, -mult[j]);
    const double s = cons[active[j]].dot(q) - cons[active[j]].b;
    res = std::max(res, std::abs(mult[j] * s));
  }
  sol.kkt_residual = res;
  return sol;
}

}  // namespace deconflict
