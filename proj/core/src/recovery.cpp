#include "deconflict/recovery.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

namespace deconflict {

double avoidance_cost(const Maneuver& m, double w) {
  return deviation_cost(m.q, m.theta, w);
}

Point2 avoidance_position(const Aircraft& a, const Maneuver& m, double t) {
  const Velocity2 v = maneuver_velocity(a, m.q, m.theta);
  return {a.origin.x + v.vx * t, a.origin.y + v.vy * t};
}

std::optional<Velocity2> recovery_velocity(const Aircraft& a, const Maneuver& m,
                                           double t_m) {
  const Point2 p = avoidance_position(a, m, t_m);
  const double dx = a.target.x - p.x;
  const double dy = a.target.y - p.y;
  if (std::hypot(dx, dy) < 1e-9) return std::nullopt;
  const double h = std::atan2(dy, dx);
  return Velocity2{a.speed * std::cos(h), a.speed * std::sin(h)};
}

namespace {

struct AircraftMotion {
  Velocity2 avoid;                              // stage-1 velocity
  std::vector<std::optional<Velocity2>> rec;    // recovery velocity per period
  std::vector<Point2> turn;                     // avoidance position per period
};

Point2 recovered_position(const AircraftMotion& mo, int m, double t,
                          const RecoveryGrid& grid) {
  const Point2& s = mo.turn[m];
  const Velocity2& v = *mo.rec[m];
  const double dt = t - grid.time(m);
  return {s.x + v.vx * dt, s.y + v.vy * dt};
}

}  // namespace

OmegaTables build_omega(const Instance& inst, const AvoidanceSolution& avoid,
                        const RecoveryGrid& grid) {
  const int n = static_cast<int>(inst.aircraft.size());
  const int T = grid.n_periods;
  const double d = inst.config.d;

  std::vector<AircraftMotion> motion(n);
  for (int i = 0; i < n; ++i) {
    const Maneuver& m = avoid.maneuvers[i];
    motion[i].avoid = maneuver_velocity(inst.aircraft[i], m.q, m.theta);
    motion[i].rec.resize(T);
    motion[i].turn.resize(T);
    for (int k = 0; k < T; ++k) {
      motion[i].turn[k] = avoidance_position(inst.aircraft[i], m, grid.time(k));
      motion[i].rec[k] = recovery_velocity(inst.aircraft[i], m, grid.time(k));
    }
  }

  OmegaTables om;
  om.n_aircraft = n;
  om.grid = grid;
  om.pair.resize(static_cast<size_t>(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      PairOmega& po = om.pair[i * n + j];
      po.rr.assign(static_cast<size_t>(T) * T, 1);
      po.ar.assign(static_cast<size_t>(T) * T, 1);
      po.ra.assign(static_cast<size_t>(T) * T, 1);
      po.ra_pending.assign(T, 1);
      for (int m = 0; m < T; ++m) {
        if (!motion[i].rec[m]) continue;  // arrived, nothing left to check
        // i recovered at t(m), j on its avoidance line, reference t(m).
        {
          const Point2 pj = avoidance_position(inst.aircraft[j],
                                               avoid.maneuvers[j], grid.time(m));
          const RelativeState rs = relative_state(
              motion[i].turn[m], *motion[i].rec[m], pj, motion[j].avoid);
          const bool sep = is_separated(rs, d);
          po.ra_pending[m] = sep ? 1 : 0;
          if (!sep) {
            const auto win = conflict_interval(rs, d);
            const double tau = grid.time(m) + (win ? win->t_in
                                                   : -std::numeric_limits<double>::infinity());
            for (int nn = 0; nn < T; ++nn)
              po.ra[m * T + nn] = grid.time(nn) <= tau ? 1 : 0;
          }
        }
        for (int nn = 0; nn < T; ++nn) {
          if (!motion[j].rec[nn]) continue;
          // Both recovered, reference max(t(m), t(nn)).
          const double t0 = std::max(grid.time(m), grid.time(nn));
          const RelativeState rs = relative_state(
              recovered_position(motion[i], m, t0, grid), *motion[i].rec[m],
              recovered_position(motion[j], nn, t0, grid), *motion[j].rec[nn]);
          po.rr[m * T + nn] = is_separated(rs, d) ? 1 : 0;
        }
      }
      // i avoiding, j recovered at t(nn), reference t(nn).
      for (int nn = 0; nn < T; ++nn) {
        if (!motion[j].rec[nn]) continue;
        const Point2 pi = avoidance_position(inst.aircraft[i],
                                             avoid.maneuvers[i], grid.time(nn));
        const RelativeState rs = relative_state(pi, motion[i].avoid,
                                                motion[j].turn[nn],
                                                *motion[j].rec[nn]);
        if (is_separated(rs, d)) continue;
        const auto win = conflict_interval(rs, d);
        const double tau = grid.time(nn) + (win ? win->t_in
                                                : -std::numeric_limits<double>::infinity());
        for (int m = 0; m < T; ++m)
          po.ar[m * T + nn] = grid.time(m) <= tau ? 1 : 0;
      }
    }
  return om;
}

namespace {

// Pair condition for fixed periods, canonical orientation i<j.
bool pair_admissible(const OmegaTables& om, int i, int j, int mi, int mj) {
  const int T = om.grid.n_periods;
  const PairOmega& po = om.at(i, j);
  if (!po.rr[mi * T + mj]) return false;
  if (mi < mj) return po.ra[mi * T + mj] != 0;
  if (mi > mj) return po.ar[mi * T + mj] != 0;
  return true;
}

// Depth-first search over the aircraft in a fixed priority order, with the
// feasible periods of every unassigned aircraft kept as a bitmask. Assigning
// i intersects each open mask with the precomputed row of periods compatible
// with that assignment, so dead subtrees die at the top, not at the bottom.
// Pruning only removes subtrees whose cheapest possible completion already
// loses to a known feasible objective (costs are nonnegative, so minimal
// leaves are never pruned and the first one found in search order is the
// same with or without the bound).
struct ExactSearch {
  const OmegaTables& om;
  const std::vector<double>& cost;  // a_i per aircraft
  const RecoveryOptions& opts;
  int n = 0, T = 0, W = 0;    // W = 64-bit words per period mask
  std::vector<int> order;     // aircraft by decreasing cost
  std::vector<int> assigned;  // period per aircraft, -1 open
  std::vector<uint64_t> allow;  // [(i*n + j)*T + m] periods of j open under i@m
  std::vector<uint64_t> mask;   // current masks, n*W
  std::vector<uint64_t> saved;  // per-depth snapshots of mask
  std::vector<int> best;
  double best_obj = std::numeric_limits<double>::infinity();
  bool have_best = false;
  double ub = std::numeric_limits<double>::infinity();  // seed or best
  long long nodes = 0;
  bool timed_out = false;
  int tick = 0;
  int fail_depth = -1;
  std::pair<int, int> fail_pair{-1, -1};
  std::chrono::steady_clock::time_point t0 =
      std::chrono::steady_clock::now();

  double canonical_objective(const std::vector<int>& period) const {
    double obj = 0.0;
    for (int i = 0; i < n; ++i)
      obj += cost[i] * static_cast<double>(period[i]) * period[i];
    return obj;
  }

  void build_tables() {
    W = (T + 63) / 64;
    allow.assign(static_cast<size_t>(n) * n * T * W, 0);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        if (i == j) continue;
        for (int m = 0; m < T; ++m) {
          uint64_t* row = allow.data() + ((static_cast<size_t>(i) * n + j) * T + m) * W;
          for (int t = 0; t < T; ++t) {
            const bool fine = i < j ? pair_admissible(om, i, j, m, t)
                                    : pair_admissible(om, j, i, t, m);
            if (fine) row[t >> 6] |= uint64_t{1} << (t & 63);
          }
        }
      }
    mask.assign(static_cast<size_t>(n) * W, 0);
    for (int i = 0; i < n; ++i)
      for (int t = 0; t < T; ++t)
        mask[static_cast<size_t>(i) * W + (t >> 6)] |= uint64_t{1} << (t & 63);
    saved.assign(static_cast<size_t>(n) * W * (n + 1), 0);
  }

  int lowest_period(const uint64_t* m) const {
    for (int w = 0; w < W; ++w)
      if (m[w]) return w * 64 + __builtin_ctzll(m[w]);
    return -1;
  }

  bool time_up() {
    if (timed_out) return true;
    if (++tick < 1024) return false;
    tick = 0;
    timed_out = std::chrono::duration<double>(
                    std::chrono::steady_clock::now() - t0)
                    .count() >= opts.time_limit_s;
    return timed_out;
  }

  void dfs(size_t depth, double partial) {
    ++nodes;
    if (time_up()) return;
    if (depth == order.size()) {
      const double obj = canonical_objective(assigned);
      if (!have_best || obj < best_obj) {
        have_best = true;
        best_obj = obj;
        best = assigned;
        ub = std::min(ub, best_obj);
      }
      return;
    }
    const int i = order[depth];
    uint64_t* snap = saved.data() + depth * static_cast<size_t>(n) * W;
    for (int m = lowest_period(mask.data() + static_cast<size_t>(i) * W);
         m >= 0 && m < T; ++m) {
      if (!(mask[static_cast<size_t>(i) * W + (m >> 6)] &
            (uint64_t{1} << (m & 63))))
        continue;
      const double here = partial + cost[i] * static_cast<double>(m) * m;
      // cost[i]*m^2 is nondecreasing in m, so later periods cannot recover.
      if (here >= ub + 1e-9) break;
      std::copy(mask.begin(), mask.end(), snap);
      bool dead = false;
      double future = 0.0;
      for (size_t e = depth + 1; e < order.size() && !dead; ++e) {
        const int j = order[e];
        uint64_t* mj = mask.data() + static_cast<size_t>(j) * W;
        const uint64_t* row =
            allow.data() + ((static_cast<size_t>(i) * n + j) * T + m) * W;
        uint64_t live = 0;
        for (int w = 0; w < W; ++w) {
          mj[w] &= row[w];
          live |= mj[w];
        }
        if (!live) {
          dead = true;
          if (static_cast<int>(depth) > fail_depth) {
            fail_depth = static_cast<int>(depth);
            fail_pair = {j, i};
          }
        } else {
          const int low = lowest_period(mj);
          future += cost[j] * static_cast<double>(low) * low;
        }
      }
      if (!dead && here + future < ub + 1e-9) {
        assigned[i] = m;
        dfs(depth + 1, here);
        assigned[i] = -1;
      }
      std::copy(snap, snap + static_cast<size_t>(n) * W, mask.begin());
      if (timed_out) return;
    }
  }
};

}  // namespace

RecoverySolution solve_exact_recovery(const Instance& inst,
                                      const AvoidanceSolution& avoid,
                                      const OmegaTables& omega,
                                      const RecoveryOptions& opts) {
  const int n = static_cast<int>(inst.aircraft.size());
  std::vector<double> cost(n);
  for (int i = 0; i < n; ++i)
    cost[i] = avoidance_cost(avoid.maneuvers[i], inst.config.w);

  ExactSearch search{omega, cost, opts};
  search.n = n;
  search.T = omega.grid.n_periods;
  search.order.resize(n);
  for (int i = 0; i < n; ++i) search.order[i] = i;
  std::stable_sort(search.order.begin(), search.order.end(), [&](int a, int b) {
    if (cost[a] != cost[b]) return cost[a] > cost[b];
    return a < b;
  });
  search.assigned.assign(n, -1);
  search.build_tables();

  // A complete heuristic plan, when it checks out pairwise, caps the search
  // from the start and doubles as the incumbent should the clock run out.
  // It only tightens pruning; the optimum and the assignment returned on a
  // completed search are unchanged.
  std::vector<int> seed;
  double seed_obj = 0.0;
  {
    const RecoverySolution greedy =
        solve_greedy_recovery(inst, avoid, omega);
    if (!greedy.period.empty()) {
      bool admissible = static_cast<int>(greedy.period.size()) == n;
      for (int i = 0; i < n && admissible; ++i) {
        admissible = greedy.period[i] >= 0 && greedy.period[i] < search.T;
        for (int j = i + 1; j < n && admissible; ++j)
          admissible = pair_admissible(omega, i, j, greedy.period[i],
                                       greedy.period[j]);
      }
      if (admissible) {
        seed = greedy.period;
        seed_obj = search.canonical_objective(seed);
        search.ub = seed_obj;
      }
    }
  }

  search.dfs(0, 0.0);

  RecoverySolution sol;
  sol.nodes = search.nodes;
  sol.runtime_s = std::chrono::duration<double>(
                      std::chrono::steady_clock::now() - search.t0)
                      .count();
  if (search.have_best) {
    sol.period = search.best;
    sol.objective = search.best_obj;
    sol.feasible = true;
    sol.optimal = !search.timed_out;
  } else if (search.timed_out && !seed.empty()) {
    sol.period = seed;
    sol.objective = seed_obj;
    sol.feasible = true;
  } else if (!search.timed_out) {
    sol.blocking_pair = search.fail_pair;
  }
  return sol;
}

RecoverySolution solve_greedy_recovery(const Instance& inst,
                                       const AvoidanceSolution& avoid,
                                       const OmegaTables& omega) {
  const auto t0 = std::chrono::steady_clock::now();
  const int n = static_cast<int>(inst.aircraft.size());
  const int T = omega.grid.n_periods;
  std::vector<double> cost(n);
  for (int i = 0; i < n; ++i)
    cost[i] = avoidance_cost(avoid.maneuvers[i], inst.config.w);

  RecoverySolution sol;
  sol.period.assign(n, -1);
  std::vector<int> pending;
  for (int i = 0; i < n; ++i) {
    if (cost[i] == 0.0)
      sol.period[i] = 0;  // undisturbed, its line never changes
    else
      pending.push_back(i);
  }
  std::stable_sort(pending.begin(), pending.end(), [&](int a, int b) {
    if (cost[a] != cost[b]) return cost[a] > cost[b];
    return a < b;
  });

  long long checks = 0;
  for (int t = 0; t < T && !pending.empty(); ++t) {
    bool update = true;
    while (update) {
      update = false;
      for (auto it = pending.begin(); it != pending.end();) {
        const int i = *it;
        bool ok = true;
        for (int j = 0; j < n && ok; ++j) {
          if (j == i) continue;
          ++checks;
          if (sol.period[j] >= 0) {
            // The mixed window was cleared when j was accepted; only the
            // both-recovered state is new.
            ok = omega.at(i, j).rr[t * T + sol.period[j]] != 0;
          } else {
            ok = omega.at(i, j).ra_pending[t] != 0;
          }
        }
        if (ok) {
          sol.period[i] = t;
          it = pending.erase(it);
          update = true;
        } else {
          ++it;
        }
      }
    }
  }
  for (int i : pending) sol.period[i] = T - 1;
  sol.incomplete = !pending.empty();
  sol.feasible = !sol.incomplete;

  double obj = 0.0;
  for (int i = 0; i < n; ++i)
    obj += cost[i] * static_cast<double>(sol.period[i]) * sol.period[i];
  sol.objective = obj;
  sol.nodes = checks;
  sol.runtime_s = std::chrono::duration<double>(
                      std::chrono::steady_clock::now() - t0)
                      .count();
  return sol;
}

}  // namespace deconflict
