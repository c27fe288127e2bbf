#include "deconflict/avoidance.hpp"

#include <algorithm>
#include <array>
#include <cassert>
#include <chrono>
#include <cmath>
#include <limits>

namespace deconflict {

Velocity2 maneuver_velocity(const Aircraft& a, double q, double theta) {
  const double h = a.heading + theta;
  return {q * a.speed * std::cos(h), q * a.speed * std::sin(h)};
}

double deviation_cost(double q, double theta, double w) {
  return w * (1.0 - q) * (1.0 - q) + (1.0 - w) * theta * theta;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Rows of one branch in (q_i, q_j) coordinates, unit-normalized.
struct Rows2 {
  double tc_i = 0.0, tc_j = 0.0, t_rhs = 0.0;  // tangent row, <= t_rhs
  double dc_i = 0.0, dc_j = 0.0;               // side row, <= 0
  bool has_side = false;
};

Rows2 branch_rows2(const HalfPlaneDisjunction& hp, const Velocity2& wi,
                   const Velocity2& wj, Branch branch, double margin) {
  const TangentBranch& tb = branch == Branch::kLower ? hp.lower : hp.upper;
  const double sign = branch == Branch::kLower ? 1.0 : -1.0;
  Rows2 r;
  r.tc_i = sign * (tb.a * wi.vx + tb.b * wi.vy);
  r.tc_j = -sign * (tb.a * wj.vx + tb.b * wj.vy);
  r.dc_i = sign * (tb.div_a * wi.vx + tb.div_b * wi.vy);
  r.dc_j = -sign * (tb.div_a * wj.vx + tb.div_b * wj.vy);
  const double tn = std::hypot(r.tc_i, r.tc_j);
  if (tn > 1e-300) {
    r.tc_i /= tn;
    r.tc_j /= tn;
  } else {
    r.tc_i = r.tc_j = 0.0;  // velocity locked to the tangent line
  }
  r.t_rhs = -margin;
  const double dn = std::hypot(r.dc_i, r.dc_j);
  if (dn > 1e-300) {
    r.dc_i /= dn;
    r.dc_j /= dn;
    r.has_side = true;
  }
  return r;
}

using Pt = std::array<double, 2>;

// Clip a convex polygon against a*x + b*y <= c.
std::vector<Pt> clip_halfplane(const std::vector<Pt>& poly, double a, double b,
                               double c) {
  std::vector<Pt> out;
  const size_t n = poly.size();
  for (size_t k = 0; k < n; ++k) {
    const Pt& p = poly[k];
    const Pt& q = poly[(k + 1) % n];
    const double fp = a * p[0] + b * p[1] - c;
    const double fq = a * q[0] + b * q[1] - c;
    if (fp <= 0.0) out.push_back(p);
    if ((fp < 0.0 && fq > 0.0) || (fp > 0.0 && fq < 0.0)) {
      const double t = fp / (fp - fq);
      out.push_back({p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])});
    }
  }
  return out;
}

bool branch_box_feasible(const Rows2& r, double q_min, double q_max) {
  std::vector<Pt> poly{{q_min, q_min}, {q_max, q_min}, {q_max, q_max}, {q_min, q_max}};
  if (r.tc_i == 0.0 && r.tc_j == 0.0 && r.t_rhs < 0.0) return false;
  poly = clip_halfplane(poly, r.tc_i, r.tc_j, r.t_rhs);
  if (poly.empty()) return false;
  if (r.has_side) poly = clip_halfplane(poly, r.dc_i, r.dc_j, 0.0);
  return !poly.empty();
}

struct PairInfo {
  int i, j;
  Point2 p;                    // origin_i - origin_j
  HalfPlaneDisjunction hp;
  std::vector<uint8_t> combo_ok;        // H*H, indexed ki*H+kj
  std::vector<uint32_t> allowed_for_j;  // per ki: bitmask of feasible kj
  std::vector<uint32_t> allowed_for_i;  // per kj: bitmask of feasible ki
  bool straight_ok = true;              // some zero-cost heading combo works
};

struct Search {
  const Instance& inst;
  const AvoidanceOptions& opts;
  int n, H;
  double w, q_min, q_max;
  std::vector<double> thetas;            // heading set values
  std::vector<int> try_order;            // heading indices, small |theta| first
  std::vector<Velocity2> unit_vel;       // [i*H+k]
  std::vector<PairInfo> pairs;
  std::vector<int> pair_at;              // [i*n+j] -> pair index or -1
  std::vector<int> ac_order;             // decreasing nominal conflict degree

  std::vector<int> head;                 // heading index per aircraft, -1 open
  std::vector<LinearRow> rows;
  std::vector<signed char> branched;     // per pair: -1 none, 0 lower, 1 upper
  std::vector<signed char> match_used;   // scratch for future_bound

  bool have_inc = false;
  double inc_obj = kInf;
  std::vector<double> inc_q, inc_abs_theta, inc_theta;
  long long nodes = 0;
  bool timed_out = false;
  int tick = 0;
  std::chrono::steady_clock::time_point t_start;

  // Relaxation resume state: children append rows to the parent's system, so
  // the parent's optimal basis is the natural starting point. One snapshot
  // slot per depth restores it between siblings.
  QpWarmStart qp_warm;
  std::vector<QpWarmStart> warm_saved;

  explicit Search(const Instance& ins, const AvoidanceOptions& o)
      : inst(ins), opts(o) {
    n = static_cast<int>(inst.aircraft.size());
    H = static_cast<int>(inst.config.headings.size());
    assert(H >= 1 && H <= 32);
    w = inst.config.w;
    q_min = inst.config.q_min;
    q_max = inst.config.q_max;
    thetas = inst.config.headings;

    try_order.resize(H);
    for (int k = 0; k < H; ++k) try_order[k] = k;
    std::stable_sort(try_order.begin(), try_order.end(), [&](int a, int b) {
      const double fa = std::abs(thetas[a]), fb = std::abs(thetas[b]);
      if (fa != fb) return fa < fb;
      return thetas[a] < thetas[b];
    });

    unit_vel.resize(static_cast<size_t>(n) * H);
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < H; ++k)
        unit_vel[i * H + k] = maneuver_velocity(inst.aircraft[i], 1.0, thetas[k]);

    pair_at.assign(static_cast<size_t>(n) * n, -1);
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        PairInfo pi;
        pi.i = i;
        pi.j = j;
        pi.p = {inst.aircraft[i].origin.x - inst.aircraft[j].origin.x,
                inst.aircraft[i].origin.y - inst.aircraft[j].origin.y};
        pi.hp = tangent_halfplanes(pi.p, inst.config.d);
        pi.combo_ok.assign(static_cast<size_t>(H) * H, 1);
        pi.allowed_for_j.assign(H, 0);
        pi.allowed_for_i.assign(H, 0);
        for (int ki = 0; ki < H; ++ki)
          for (int kj = 0; kj < H; ++kj) {
            const Velocity2& wi = unit_vel[i * H + ki];
            const Velocity2& wj = unit_vel[j * H + kj];
            const bool ok =
                branch_box_feasible(
                    branch_rows2(pi.hp, wi, wj, Branch::kLower, opts.row_margin),
                    q_min, q_max) ||
                branch_box_feasible(
                    branch_rows2(pi.hp, wi, wj, Branch::kUpper, opts.row_margin),
                    q_min, q_max);
            pi.combo_ok[ki * H + kj] = ok ? 1 : 0;
            if (ok) {
              pi.allowed_for_j[ki] |= 1u << kj;
              pi.allowed_for_i[kj] |= 1u << ki;
            }
          }
        pi.straight_ok = false;
        for (int ki = 0; ki < H && !pi.straight_ok; ++ki)
          for (int kj = 0; kj < H && !pi.straight_ok; ++kj)
            if (heading_cost_k(ki) == 0.0 && heading_cost_k(kj) == 0.0 &&
                pi.combo_ok[ki * H + kj])
              pi.straight_ok = true;
        pair_at[i * n + j] = static_cast<int>(pairs.size());
        pairs.push_back(std::move(pi));
      }
    match_used.assign(n, 0);

    std::vector<int> degree(n, 0);
    for (const PairInfo& pi : pairs)
      if (!is_separated(
              relative_state(inst.aircraft[pi.i].origin,
                             nominal_velocity(inst.aircraft[pi.i]),
                             inst.aircraft[pi.j].origin,
                             nominal_velocity(inst.aircraft[pi.j])),
              inst.config.d)) {
        ++degree[pi.i];
        ++degree[pi.j];
      }
    ac_order.resize(n);
    for (int i = 0; i < n; ++i) ac_order[i] = i;
    std::stable_sort(ac_order.begin(), ac_order.end(), [&](int a, int b) {
      if (degree[a] != degree[b]) return degree[a] > degree[b];
      return a < b;
    });

    head.assign(n, -1);
    branched.assign(pairs.size(), -1);
    t_start = std::chrono::steady_clock::now();
  }

  bool time_up() {
    if (timed_out) return true;
    if (++tick < 64) return false;
    tick = 0;
    const double el = std::chrono::duration<double>(
                          std::chrono::steady_clock::now() - t_start)
                          .count();
    if (el >= opts.time_limit_s) timed_out = true;
    return timed_out;
  }

  // Interval tightening from committed rows; false when a variable empties.
  bool propagate(std::vector<double>& lo, std::vector<double>& hi) const {
    for (int pass = 0; pass < 8; ++pass) {
      bool changed = false;
      for (const LinearRow& row : rows) {
        for (int s = 0; s < 2; ++s) {
          const int a = row.idx[s];
          if (a < 0) continue;
          const double ca = row.coeff[s];
          if (ca == 0.0) continue;
          double rest = row.rhs;
          const int o = 1 - s;
          if (row.idx[o] >= 0 && row.coeff[o] != 0.0) {
            const double cb = row.coeff[o];
            rest -= cb > 0.0 ? cb * lo[row.idx[o]] : cb * hi[row.idx[o]];
          }
          const double bound = rest / ca;
          if (ca > 0.0) {
            if (bound < hi[a] - 1e-12) {
              hi[a] = bound;
              changed = true;
            }
          } else {
            if (bound > lo[a] + 1e-12) {
              lo[a] = bound;
              changed = true;
            }
          }
          if (lo[a] > hi[a] + 1e-12) return false;
        }
      }
      if (!changed) break;
    }
    return true;
  }

  double heading_cost_k(int k) const {
    return (1.0 - w) * thetas[k] * thetas[k];
  }

  double heading_cost(int i) const { return heading_cost_k(head[i]); }

  double min_future_cost(uint32_t mask) const {
    double best = kInf;
    for (int k = 0; k < H; ++k)
      if (mask & (1u << k)) best = std::min(best, heading_cost_k(k));
    return best;
  }

  double min_turn_cost(uint32_t mask) const {
    double best = kInf;
    for (int k = 0; k < H; ++k)
      if ((mask & (1u << k)) && thetas[k] != 0.0)
        best = std::min(best, heading_cost_k(k));
    return best;
  }

  // Lower bound on the heading cost still to come. Every open aircraft pays
  // at least its cheapest allowed heading. On top of that, a pair that cannot
  // fly straight-straight needs a turn on one side, and vertex-disjoint pairs
  // force turns on distinct aircraft, so a greedy matching over such pairs
  // adds the cheaper minimum turn cost of each matched pair.
  double future_bound(const std::vector<uint32_t>& mask) {
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      match_used[i] = head[i] >= 0 ? 1 : 0;
      if (head[i] >= 0) continue;
      const double base = min_future_cost(mask[i]);
      total += base;
      if (base > 0.0) match_used[i] = 1;  // edge already covered
    }
    for (const PairInfo& pi : pairs) {
      if (pi.straight_ok || match_used[pi.i] || match_used[pi.j]) continue;
      const double turn =
          std::min(min_turn_cost(mask[pi.i]), min_turn_cost(mask[pi.j]));
      if (turn == kInf) return kInf;  // neither side can turn, yet one must
      total += turn;
      match_used[pi.i] = match_used[pi.j] = 1;
    }
    return total;
  }

  void accept_leaf(const std::vector<double>& q) {
    double obj = 0.0;
    std::vector<double> abs_theta(n), theta(n);
    for (int i = 0; i < n; ++i) {
      theta[i] = thetas[head[i]];
      abs_theta[i] = std::abs(theta[i]);
      obj += deviation_cost(q[i], theta[i], w);
    }
    bool better = false;
    if (!have_inc || obj < inc_obj - 1e-9) {
      better = true;
    } else if (std::abs(obj - inc_obj) <= 1e-9) {
      // Deterministic tie-break: smallest |theta| vector, then |1-q| vector.
      int cmp = 0;
      for (int i = 0; i < n && cmp == 0; ++i)
        cmp = abs_theta[i] < inc_abs_theta[i] - 1e-15   ? -1
              : abs_theta[i] > inc_abs_theta[i] + 1e-15 ? 1
                                                        : 0;
      for (int i = 0; i < n && cmp == 0; ++i) {
        const double da = std::abs(1.0 - q[i]), db = std::abs(1.0 - inc_q[i]);
        cmp = da < db - 1e-15 ? -1 : da > db + 1e-15 ? 1 : 0;
      }
      better = cmp < 0;
    }
    if (better) {
      have_inc = true;
      inc_obj = obj;
      inc_q = q;
      inc_theta = std::move(theta);
      inc_abs_theta = std::move(abs_theta);
    }
  }

  void dfs(std::vector<uint32_t> mask, std::vector<double> lo,
           std::vector<double> hi, std::vector<double> qhat, double qp_obj,
           bool rows_dirty, int depth) {
    ++nodes;
    if (time_up()) return;

    if (rows_dirty) {
      if (!propagate(lo, hi)) return;
      BoxQP qp;
      qp.n = n;
      qp.weight = w;
      qp.lower = lo;
      qp.upper = hi;
      qp.rows = rows;
      const QpSolution sol = solve_convex_qp(qp, &qp_warm);
      if (sol.status != QpStatus::kOptimal) return;
      qhat = sol.q;
      qp_obj = sol.objective;
    }

    double bound = qp_obj + future_bound(mask);
    if (bound == kInf) return;
    for (int i = 0; i < n; ++i)
      if (head[i] >= 0) bound += heading_cost(i);
    if (have_inc && bound >= inc_obj - 1e-9) return;

    // Most violated assigned pair at the relaxation point.
    int worst_pair = -1;
    double worst_g = kInf;
    for (size_t pid = 0; pid < pairs.size(); ++pid) {
      const PairInfo& pi = pairs[pid];
      if (head[pi.i] < 0 || head[pi.j] < 0) continue;
      const Velocity2& wi = unit_vel[pi.i * H + head[pi.i]];
      const Velocity2& wj = unit_vel[pi.j * H + head[pi.j]];
      const Velocity2 v{qhat[pi.i] * wi.vx - qhat[pi.j] * wj.vx,
                        qhat[pi.i] * wi.vy - qhat[pi.j] * wj.vy};
      const RelativeState rs{pi.p, v};
      if (is_separated(rs, inst.config.d)) continue;
      const double g = g_value(rs, inst.config.d);
      if (g < worst_g) {
        worst_g = g;
        worst_pair = static_cast<int>(pid);
      }
    }

    if (worst_pair >= 0) {
      const PairInfo& pi = pairs[worst_pair];
      assert(branched[worst_pair] < 0);
      if (warm_saved.size() <= static_cast<size_t>(depth))
        warm_saved.resize(depth + 1);
      warm_saved[depth] = qp_warm;
      for (int br = 0; br < 2; ++br) {
        if (br == 1) qp_warm = warm_saved[depth];
        const Rows2 r2 =
            branch_rows2(pi.hp, unit_vel[pi.i * H + head[pi.i]],
                         unit_vel[pi.j * H + head[pi.j]],
                         br == 0 ? Branch::kLower : Branch::kUpper,
                         opts.row_margin);
        size_t added = 0;
        LinearRow t;
        t.idx[0] = pi.i;
        t.coeff[0] = r2.tc_i;
        t.idx[1] = pi.j;
        t.coeff[1] = r2.tc_j;
        t.rhs = r2.t_rhs;
        rows.push_back(t);
        ++added;
        if (r2.has_side) {
          LinearRow dv;
          dv.idx[0] = pi.i;
          dv.coeff[0] = r2.dc_i;
          dv.idx[1] = pi.j;
          dv.coeff[1] = r2.dc_j;
          dv.rhs = 0.0;
          rows.push_back(dv);
          ++added;
        }
        branched[worst_pair] = static_cast<signed char>(br);
        dfs(mask, lo, hi, qhat, qp_obj, true, depth + 1);
        branched[worst_pair] = -1;
        rows.resize(rows.size() - added);
        if (timed_out) return;
      }
      return;
    }

    int next = -1;
    for (int i : ac_order)
      if (head[i] < 0) {
        next = i;
        break;
      }
    if (next < 0) {
      accept_leaf(qhat);
      return;
    }

    if (warm_saved.size() <= static_cast<size_t>(depth))
      warm_saved.resize(depth + 1);
    warm_saved[depth] = qp_warm;
    bool first_child = true;
    for (int k : try_order) {
      if (!(mask[next] & (1u << k))) continue;
      std::vector<uint32_t> child_mask = mask;
      child_mask[next] = 1u << k;
      bool dead = false;
      for (int u = 0; u < n && !dead; ++u) {
        if (u == next || head[u] >= 0) continue;
        const int pid = next < u ? pair_at[next * n + u] : pair_at[u * n + next];
        if (pid < 0) continue;
        const PairInfo& pi = pairs[pid];
        child_mask[u] &= pi.i == next ? pi.allowed_for_j[k] : pi.allowed_for_i[k];
        dead = child_mask[u] == 0;
      }
      if (dead) continue;
      if (!first_child) qp_warm = warm_saved[depth];
      first_child = false;
      head[next] = k;
      dfs(std::move(child_mask), lo, hi, qhat, qp_obj, false, depth + 1);
      head[next] = -1;
      if (timed_out) return;
    }
  }
};

}  // namespace

std::vector<LinearRow> pair_branch_constraints(const Instance& inst, int i,
                                               int j, double theta_i,
                                               double theta_j, Branch branch,
                                               double margin) {
  const Aircraft& ai = inst.aircraft[i];
  const Aircraft& aj = inst.aircraft[j];
  const Point2 p{ai.origin.x - aj.origin.x, ai.origin.y - aj.origin.y};
  const HalfPlaneDisjunction hp = tangent_halfplanes(p, inst.config.d);
  const Rows2 r2 = branch_rows2(hp, maneuver_velocity(ai, 1.0, theta_i),
                                maneuver_velocity(aj, 1.0, theta_j), branch,
                                margin);
  std::vector<LinearRow> out;
  LinearRow t;
  t.idx[0] = i;
  t.coeff[0] = r2.tc_i;
  t.idx[1] = j;
  t.coeff[1] = r2.tc_j;
  t.rhs = r2.t_rhs;
  out.push_back(t);
  if (r2.has_side) {
    LinearRow dv;
    dv.idx[0] = i;
    dv.coeff[0] = r2.dc_i;
    dv.idx[1] = j;
    dv.coeff[1] = r2.dc_j;
    dv.rhs = 0.0;
    out.push_back(dv);
  }
  return out;
}

AvoidanceSolution solve_avoidance(const Instance& inst,
                                  const AvoidanceOptions& opts) {
  validate_instance(inst);
  Search search(inst, opts);

  const int n = search.n;
  const uint32_t all = search.H >= 32 ? 0xffffffffu : (1u << search.H) - 1u;
  std::vector<uint32_t> mask(n, all);
  search.dfs(std::move(mask), std::vector<double>(n, search.q_min),
             std::vector<double>(n, search.q_max), std::vector<double>(n, 1.0),
             0.0, true, 0);

  AvoidanceSolution sol;
  sol.nodes = search.nodes;
  sol.runtime_s = std::chrono::duration<double>(
                      std::chrono::steady_clock::now() - search.t_start)
                      .count();
  if (search.have_inc) {
    sol.status = search.timed_out ? SolveStatus::kTimeLimit : SolveStatus::kOptimal;
    sol.maneuvers.resize(n);
    sol.deviation_costs.resize(n);
    double obj = 0.0;
    for (int i = 0; i < n; ++i) {
      sol.maneuvers[i] = {inst.aircraft[i].id, search.inc_q[i], search.inc_theta[i]};
      sol.deviation_costs[i] =
          deviation_cost(search.inc_q[i], search.inc_theta[i], inst.config.w);
      obj += sol.deviation_costs[i];
    }
    sol.objective = obj;
  } else {
    sol.status = search.timed_out ? SolveStatus::kTimeLimit : SolveStatus::kInfeasible;
  }
  return sol;
}

}  // namespace deconflict
