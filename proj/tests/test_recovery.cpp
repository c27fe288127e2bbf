#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "deconflict/avoidance.hpp"
#include "deconflict/instance.hpp"
#include "deconflict/recovery.hpp"

using namespace deconflict;

namespace {

constexpr double kPi = 3.14159265358979323846;

// Piecewise position: avoidance line until the recovery period, then straight
// at the target at nominal speed.
Point2 piecewise_position(const Aircraft& a, const Maneuver& m, int period,
                          const RecoveryGrid& grid, double t) {
  const double tr = grid.time(period);
  if (t <= tr) return avoidance_position(a, m, t);
  const Point2 s = avoidance_position(a, m, tr);
  const auto rv = recovery_velocity(a, m, tr);
  if (!rv) return s;
  return {s.x + rv->vx * (t - tr), s.y + rv->vy * (t - tr)};
}

double arrival_time(const Aircraft& a, const Maneuver& m, int period,
                    const RecoveryGrid& grid) {
  const double tr = grid.time(period);
  const Point2 s = avoidance_position(a, m, tr);
  return tr + std::hypot(a.target.x - s.x, a.target.y - s.y) / a.speed;
}

// 1 s stepped minimum pairwise distance while both aircraft are en route.
double simulated_min_distance(const Instance& inst, const AvoidanceSolution& av,
                              const std::vector<int>& period,
                              const RecoveryGrid& grid, int i, int j) {
  const double step = 1.0 / 3600.0;
  const double end = std::min(
      arrival_time(inst.aircraft[i], av.maneuvers[i], period[i], grid),
      arrival_time(inst.aircraft[j], av.maneuvers[j], period[j], grid));
  double worst = std::numeric_limits<double>::infinity();
  for (double t = 0.0; t <= end; t += step) {
    const Point2 pi =
        piecewise_position(inst.aircraft[i], av.maneuvers[i], period[i], grid, t);
    const Point2 pj =
        piecewise_position(inst.aircraft[j], av.maneuvers[j], period[j], grid, t);
    worst = std::min(worst, std::hypot(pi.x - pj.x, pi.y - pj.y));
  }
  return worst;
}

bool assignment_admissible(const OmegaTables& om, const std::vector<int>& mi) {
  const int n = om.n_aircraft;
  const int T = om.grid.n_periods;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const PairOmega& po = om.at(i, j);
      const int a = mi[i], b = mi[j];
      if (!po.rr[a * T + b]) return false;
      if (a < b && !po.ra[a * T + b]) return false;
      if (a > b && !po.ar[a * T + b]) return false;
    }
  return true;
}

// Exhaustive minimum over all |T|^n assignments; objective summed in id order.
RecoverySolution brute_force(const Instance& inst, const AvoidanceSolution& av,
                             const OmegaTables& om) {
  const int n = om.n_aircraft;
  const int T = om.grid.n_periods;
  std::vector<double> cost(n);
  for (int i = 0; i < n; ++i)
    cost[i] = avoidance_cost(av.maneuvers[i], inst.config.w);
  RecoverySolution best;
  std::vector<int> mi(n, 0);
  while (true) {
    if (assignment_admissible(om, mi)) {
      double obj = 0.0;
      for (int i = 0; i < n; ++i)
        obj += cost[i] * static_cast<double>(mi[i]) * mi[i];
      if (!best.feasible || obj < best.objective) {
        best.feasible = true;
        best.objective = obj;
        best.period = mi;
      }
    }
    int p = 0;
    while (p < n && ++mi[p] == T) mi[p++] = 0;
    if (p == n) break;
  }
  best.optimal = best.feasible;
  return best;
}

OmegaTables random_tables(std::mt19937_64& rng, int n, int T, double p_true) {
  std::bernoulli_distribution keep(p_true);
  OmegaTables om;
  om.n_aircraft = n;
  om.grid.n_periods = T;
  om.pair.resize(static_cast<size_t>(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      PairOmega& fw = om.pair[i * n + j];
      PairOmega& bw = om.pair[j * n + i];
      fw.rr.assign(T * T, 1);
      fw.ar.assign(T * T, 1);
      fw.ra.assign(T * T, 1);
      fw.ra_pending.assign(T, 1);
      bw = fw;
      for (int m = 0; m < T; ++m)
        for (int nn = 0; nn < T; ++nn) {
          fw.rr[m * T + nn] = keep(rng);
          fw.ar[m * T + nn] = keep(rng);
          fw.ra[m * T + nn] = keep(rng);
          bw.rr[nn * T + m] = fw.rr[m * T + nn];
          bw.ra[nn * T + m] = fw.ar[m * T + nn];
          bw.ar[nn * T + m] = fw.ra[m * T + nn];
        }
      for (int m = 0; m < T; ++m) {
        fw.ra_pending[m] = keep(rng);
        bw.ra_pending[m] = keep(rng);
      }
    }
  return om;
}

AvoidanceSolution synthetic_avoidance(std::mt19937_64& rng, int n, double w) {
  std::uniform_real_distribution<double> c(0.01, 1.0);
  AvoidanceSolution av;
  av.status = SolveStatus::kOptimal;
  av.maneuvers.resize(n);
  av.deviation_costs.resize(n);
  for (int i = 0; i < n; ++i) {
    // Invert a random target cost through the q term so avoidance_cost is the
    // sampled value exactly at theta = 0.
    const double target = c(rng);
    av.maneuvers[i] = {i, 1.0 - std::sqrt(target / w), 0.0};
    av.deviation_costs[i] = target;
    av.objective += target;
  }
  return av;
}

Instance solved_instance(int n, AvoidanceSolution* out) {
  const Instance inst = generate_cp(n, 200.0);
  *out = solve_avoidance(inst);
  REQUIRE(out->status == SolveStatus::kOptimal);
  return inst;
}

}  // namespace

TEST_CASE("avoidance position and cost match hand values") {
  Aircraft a;
  a.heading = 0.0;
  a.speed = 500.0;
  a.target = {400.0, 0.0};
  const Maneuver m{0, 1.0, kPi / 18.0};
  const Point2 p = avoidance_position(a, m, 0.1);
  CHECK(p.x == doctest::Approx(49.240387650610407).epsilon(1e-12));
  CHECK(p.y == doctest::Approx(8.6824088833465152).epsilon(1e-12));
  const Point2 p0 = avoidance_position(a, m, 0.0);
  CHECK(p0.x == 0.0);
  CHECK(p0.y == 0.0);
  CHECK(avoidance_cost(m, 0.2) == doctest::Approx(0.024369393582936686));
  CHECK(avoidance_cost({0, 1.0, 0.0}, 0.2) == 0.0);
}

TEST_CASE("recovery velocity restores speed and heads at the target") {
  Aircraft a;
  a.origin = {10.0, -5.0};
  a.heading = 0.3;
  a.speed = 480.0;
  a.target = {10.0 + 300.0 * std::cos(0.3), -5.0 + 300.0 * std::sin(0.3)};

  // Undisturbed: recovery equals the nominal velocity at any time.
  const auto v0 = recovery_velocity(a, {0, 1.0, 0.0}, 0.25);
  REQUIRE(v0.has_value());
  const Velocity2 nom = nominal_velocity(a);
  CHECK(v0->vx == doctest::Approx(nom.vx).epsilon(1e-12));
  CHECK(v0->vy == doctest::Approx(nom.vy).epsilon(1e-12));

  // Speed-only maneuver: same heading, nominal magnitude restored.
  const auto v1 = recovery_velocity(a, {0, 0.92, 0.0}, 0.25);
  REQUIRE(v1.has_value());
  CHECK(v1->vx == doctest::Approx(nom.vx).epsilon(1e-12));
  CHECK(v1->vy == doctest::Approx(nom.vy).epsilon(1e-12));
  CHECK(std::hypot(v1->vx, v1->vy) == doctest::Approx(480.0).epsilon(1e-12));

  // At the target: nothing left to aim at.
  Aircraft b = a;
  b.target = b.origin;
  CHECK(!recovery_velocity(b, {0, 1.0, 0.0}, 0.0).has_value());
}

TEST_CASE("avoidance and recovery legs have equal cross-track offsets") {
  // Both d_A*sin(theta_A) and d_R*sin(theta_R) measure the offset of the turn
  // point from the nominal track, so they agree to roundoff.
  std::mt19937_64 rng(321);
  std::uniform_real_distribution<double> ang(-kPi, kPi);
  std::uniform_real_distribution<double> dev(-kPi / 6.0, kPi / 6.0);
  std::uniform_real_distribution<double> spd(420.0, 580.0);
  std::uniform_real_distribution<double> qd(0.9, 1.1);
  std::uniform_real_distribution<double> tm(0.01, 0.5);
  for (int trial = 0; trial < 500; ++trial) {
    Aircraft a;
    a.origin = {ang(rng) * 10.0, ang(rng) * 10.0};
    a.heading = ang(rng);
    a.speed = spd(rng);
    a.target = {a.origin.x + 400.0 * std::cos(a.heading),
                a.origin.y + 400.0 * std::sin(a.heading)};
    const Maneuver m{0, qd(rng), dev(rng)};
    const double t = tm(rng);
    const Point2 p = avoidance_position(a, m, t);
    const auto rv = recovery_velocity(a, m, t);
    REQUIRE(rv.has_value());
    const double d_avoid = m.q * a.speed * t;
    const double lhs = d_avoid * std::abs(std::sin(m.theta));
    const double d_rec = std::hypot(a.target.x - p.x, a.target.y - p.y);
    const double theta_rec =
        std::atan2(a.target.y - p.y, a.target.x - p.x) - a.heading;
    const double rhs = d_rec * std::abs(std::sin(theta_rec));
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-9));
    const double offset =
        std::abs((p.x - a.origin.x) * std::sin(a.heading) -
                 (p.y - a.origin.y) * std::cos(a.heading));
    CHECK(lhs == doctest::Approx(offset).epsilon(1e-9));
  }
}

TEST_CASE("omega tables obey the ordered-pair symmetry") {
  AvoidanceSolution av;
  const Instance inst = solved_instance(6, &av);
  const RecoveryGrid grid{inst.config.n_periods, inst.config.period_len};
  const OmegaTables om = build_omega(inst, av, grid);
  const int T = grid.n_periods;
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) {
      if (i == j) continue;
      const PairOmega& fw = om.at(i, j);
      const PairOmega& bw = om.at(j, i);
      for (int m = 0; m < T; ++m)
        for (int n = 0; n < T; ++n) {
          CHECK(fw.rr[m * T + n] == bw.rr[n * T + m]);
          CHECK(fw.ar[m * T + n] == bw.ra[n * T + m]);
          CHECK(fw.ra[m * T + n] == bw.ar[n * T + m]);
        }
    }
}

TEST_CASE("undisturbed aircraft have monotone recovery tables") {
  // An undisturbed aircraft flies its nominal line regardless of its period,
  // so its rr entry depends on the peer through the reference time only:
  // constant while m <= n and non-decreasing afterwards as the check window
  // shrinks to a suffix of the same pair of lines.
  const Instance inst = generate_cp(4, 200.0);
  AvoidanceSolution av;
  av.status = SolveStatus::kOptimal;
  av.maneuvers = {{0, 0.95, kPi / 18.0},
                  {1, 1.05, -kPi / 18.0},
                  {2, 1.0, 0.0},
                  {3, 0.98, kPi / 9.0}};
  const RecoveryGrid grid{inst.config.n_periods, inst.config.period_len};
  const OmegaTables om = build_omega(inst, av, grid);
  const int T = grid.n_periods;
  const int i = 2;  // the untouched aircraft
  for (int j = 0; j < 4; ++j) {
    if (j == i) continue;
    const PairOmega& po = om.at(i, j);
    for (int n = 0; n < T; ++n) {
      for (int m = 1; m <= n; ++m)
        CHECK(po.rr[m * T + n] == po.rr[0 * T + n]);
      for (int m = std::max(n, 1); m < T; ++m)
        CHECK(po.rr[m * T + n] >= po.rr[(m - 1) * T + n]);
    }
  }
}

TEST_CASE("table membership is conservative against simulation") {
  // True table entries must never hide a simulated separation loss in the
  // window the entry covers: full piecewise simulation for admissible pairs.
  AvoidanceSolution av;
  const Instance inst = solved_instance(5, &av);
  const RecoveryGrid grid{inst.config.n_periods, inst.config.period_len};
  const OmegaTables om = build_omega(inst, av, grid);
  const int T = grid.n_periods;
  std::mt19937_64 rng(777);
  std::uniform_int_distribution<int> pm(0, T - 1);
  int admissible_checked = 0;
  for (int trial = 0; trial < 400; ++trial) {
    const int i = trial % 5;
    const int j = (i + 1 + trial % 4) % 5;
    if (i == j) continue;
    const int a = std::min(i, j), b = std::max(i, j);
    std::vector<int> period(5, 0);
    period[a] = pm(rng);
    period[b] = pm(rng);
    const PairOmega& po = om.at(a, b);
    const int m = period[a], n = period[b];
    bool ok = po.rr[m * T + n] != 0;
    if (m < n) ok = ok && po.ra[m * T + n] != 0;
    if (m > n) ok = ok && po.ar[m * T + n] != 0;
    if (!ok) continue;
    ++admissible_checked;
    const double dmin = simulated_min_distance(inst, av, period, grid, a, b);
    CHECK(dmin >= inst.config.d - 1e-4);
  }
  CHECK(admissible_checked > 100);
}

TEST_CASE("exact recovery matches brute force on random tables") {
  std::mt19937_64 rng(4242);
  std::uniform_int_distribution<int> nn(2, 4), tt(2, 6);
  std::uniform_real_distribution<double> pt(0.55, 0.95);
  const Instance dummy4 = generate_cp(4, 200.0);
  int feasible = 0, infeasible = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = nn(rng), T = tt(rng);
    Instance inst = dummy4;
    inst.aircraft.resize(n);
    const AvoidanceSolution av = synthetic_avoidance(rng, n, inst.config.w);
    const OmegaTables om = random_tables(rng, n, T, pt(rng));
    const RecoverySolution ex = solve_exact_recovery(inst, av, om);
    const RecoverySolution bf = brute_force(inst, av, om);
    REQUIRE(ex.optimal == bf.feasible);
    CHECK(ex.feasible == bf.feasible);
    if (bf.feasible) {
      ++feasible;
      CHECK(ex.objective == bf.objective);  // bitwise: same id-order summation
      CHECK(assignment_admissible(om, ex.period));
    } else {
      ++infeasible;
      CHECK(ex.blocking_pair.first >= 0);
    }
  }
  CHECK(feasible > 50);
  CHECK(infeasible > 5);
}

TEST_CASE("single aircraft and all-true tables are trivial") {
  const Instance cp2 = generate_cp(2, 200.0);
  Instance one = cp2;
  one.aircraft.resize(1);
  AvoidanceSolution av;
  av.maneuvers = {{0, 0.95, 0.0}};
  const OmegaTables om = [&] {
    OmegaTables o;
    o.n_aircraft = 1;
    o.grid = RecoveryGrid{};
    o.pair.resize(1);
    return o;
  }();
  const RecoverySolution ex = solve_exact_recovery(one, av, om);
  REQUIRE(ex.feasible);
  CHECK(ex.period == std::vector<int>{0});
  CHECK(ex.objective == 0.0);

  std::mt19937_64 rng(9);
  const AvoidanceSolution av3 = synthetic_avoidance(rng, 3, 0.2);
  Instance three = generate_cp(3, 200.0);
  const OmegaTables allok = random_tables(rng, 3, 5, 1.0);  // always true
  const RecoverySolution ex3 = solve_exact_recovery(three, av3, allok);
  REQUIRE(ex3.feasible);
  CHECK(ex3.objective == 0.0);
  for (int p : ex3.period) CHECK(p == 0);
  const RecoverySolution gr3 = solve_greedy_recovery(three, av3, allok);
  REQUIRE(gr3.feasible);
  for (int p : gr3.period) CHECK(p == 0);
}

TEST_CASE("greedy never beats exact and stays close on the benchmark shape") {
  for (int n : {4, 6, 8}) {
    AvoidanceSolution av;
    const Instance inst = solved_instance(n, &av);
    const RecoveryGrid grid{inst.config.n_periods, inst.config.period_len};
    const OmegaTables om = build_omega(inst, av, grid);
    const RecoverySolution ex = solve_exact_recovery(inst, av, om);
    const RecoverySolution gr = solve_greedy_recovery(inst, av, om);
    REQUIRE(ex.feasible);
    REQUIRE(ex.optimal);
    REQUIRE(gr.feasible);
    CHECK(gr.objective >= ex.objective - 1e-12);
    CHECK(assignment_admissible(om, ex.period));
    // Every greedy plan must survive simulation pair by pair.
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        CHECK(simulated_min_distance(inst, av, gr.period, grid, i, j) >=
              inst.config.d - 1e-4);
  }
}

TEST_CASE("greedy is deterministic and respects priorities") {
  std::mt19937_64 rng(31);
  const int n = 6, T = 8;
  Instance inst = generate_cp(6, 200.0);
  const AvoidanceSolution av = synthetic_avoidance(rng, n, inst.config.w);
  const OmegaTables om = random_tables(rng, n, T, 0.8);
  const RecoverySolution a = solve_greedy_recovery(inst, av, om);
  const RecoverySolution b = solve_greedy_recovery(inst, av, om);
  CHECK(a.period == b.period);
  CHECK(a.objective == b.objective);
}

TEST_CASE("undisturbed aircraft recover immediately in greedy") {
  std::mt19937_64 rng(8);
  const int n = 4, T = 6;
  Instance inst = generate_cp(4, 200.0);
  AvoidanceSolution av = synthetic_avoidance(rng, n, inst.config.w);
  av.maneuvers[2] = {2, 1.0, 0.0};  // untouched aircraft
  const OmegaTables om = random_tables(rng, n, T, 0.7);
  const RecoverySolution gr = solve_greedy_recovery(inst, av, om);
  CHECK(gr.period[2] == 0);
}

TEST_CASE("greedy work grows at most cubically with fleet size") {
  std::mt19937_64 rng(55);
  std::vector<double> sizes, ops;
  for (int n : {8, 16, 32}) {
    Instance inst = generate_cp(n, 200.0);
    AvoidanceSolution av = synthetic_avoidance(rng, n, inst.config.w);
    const OmegaTables om = random_tables(rng, n, 6, 1.0);  // all true
    const RecoverySolution gr = solve_greedy_recovery(inst, av, om);
    REQUIRE(gr.feasible);
    sizes.push_back(std::log(static_cast<double>(n)));
    ops.push_back(std::log(static_cast<double>(gr.nodes)));
  }
  const double slope =
      (ops.back() - ops.front()) / (sizes.back() - sizes.front());
  CHECK(slope < 3.5);
}

TEST_CASE("impossible tables yield an infeasible report with a blocking pair") {
  std::mt19937_64 rng(12);
  Instance inst = generate_cp(2, 200.0);
  const AvoidanceSolution av = synthetic_avoidance(rng, 2, inst.config.w);
  OmegaTables om = random_tables(rng, 2, 4, 1.0);
  om.pair[0 * 2 + 1].rr.assign(16, 0);  // nothing works for the pair
  om.pair[1 * 2 + 0].rr.assign(16, 0);
  const RecoverySolution ex = solve_exact_recovery(inst, av, om);
  CHECK(!ex.feasible);
  CHECK(!ex.optimal);
  CHECK(ex.blocking_pair.first >= 0);
  CHECK(ex.blocking_pair.second >= 0);

  const RecoverySolution gr = solve_greedy_recovery(inst, av, om);
  CHECK(gr.incomplete);
  CHECK(!gr.feasible);
}
