#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "deconflict/avoidance.hpp"
#include "deconflict/instance.hpp"
#include "deconflict/recovery.hpp"
#include "deconflict/trajectory.hpp"

using namespace deconflict;

namespace {

constexpr double kPi = 3.14159265358979323846;

double dist(const Point2& a, const Point2& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

struct Pipeline {
  Instance inst;
  AvoidanceSolution avoid;
  RecoverySolution recovery;
  std::vector<Trajectory> trajectories;
};

Pipeline run_exact(int n) {
  Pipeline p;
  p.inst = generate_cp(n, 200.0);
  p.avoid = solve_avoidance(p.inst);
  REQUIRE(p.avoid.status == SolveStatus::kOptimal);
  const RecoveryGrid grid{p.inst.config.n_periods, p.inst.config.period_len};
  const OmegaTables om = build_omega(p.inst, p.avoid, grid);
  p.recovery = solve_exact_recovery(p.inst, p.avoid, om);
  REQUIRE(p.recovery.feasible);
  p.trajectories = assemble(p.inst, p.avoid, p.recovery);
  return p;
}

AvoidanceSolution identity_solution(const Instance& inst) {
  AvoidanceSolution av;
  av.status = SolveStatus::kOptimal;
  for (size_t i = 0; i < inst.aircraft.size(); ++i) {
    av.maneuvers.push_back({inst.aircraft[i].id, 1.0, 0.0});
    av.deviation_costs.push_back(0.0);
  }
  return av;
}

RecoverySolution all_zero_periods(int n) {
  RecoverySolution r;
  r.period.assign(n, 0);
  r.feasible = true;
  return r;
}

}  // namespace

TEST_CASE("undisturbed aircraft fly one nominal segment") {
  const Instance inst = generate_cp(4, 200.0);
  const AvoidanceSolution av = identity_solution(inst);
  const auto trajs = assemble(inst, av, all_zero_periods(4));
  REQUIRE(trajs.size() == 4);
  for (int i = 0; i < 4; ++i) {
    const Aircraft& a = inst.aircraft[i];
    REQUIRE(trajs[i].segments.size() == 1);
    const Segment& s = trajs[i].segments.front();
    CHECK(s.t_start == 0.0);
    CHECK(dist(s.start, a.origin) == 0.0);
    const double nominal = dist(a.origin, a.target) / a.speed;
    CHECK(trajs[i].arrival_time == doctest::Approx(nominal).epsilon(1e-12));
    CHECK(dist(s.at(s.t_end), a.target) < 1e-6);
  }
}

TEST_CASE("two-leg trajectories are continuous and land on the target") {
  const Instance inst = generate_cp(4, 200.0);
  AvoidanceSolution av = identity_solution(inst);
  av.maneuvers[1] = {1, 1.0, kPi / 18.0};
  av.maneuvers[2] = {2, 0.93, -kPi / 9.0};
  RecoverySolution rec = all_zero_periods(4);
  rec.period = {0, 3, 5, 2};
  const auto trajs = assemble(inst, av, rec);
  const RecoveryGrid grid{inst.config.n_periods, inst.config.period_len};
  for (int i = 0; i < 4; ++i) {
    const Trajectory& tr = trajs[i];
    const Aircraft& a = inst.aircraft[i];
    if (rec.period[i] > 0) {
      REQUIRE(tr.segments.size() == 2);
      const Segment& s0 = tr.segments[0];
      const Segment& s1 = tr.segments[1];
      CHECK(s0.t_end == s1.t_start);
      CHECK(s0.t_end == doctest::Approx(grid.time(rec.period[i])));
      CHECK(dist(s0.at(s0.t_end), s1.start) <= 1e-9);
      const double rec_speed = std::hypot(s1.velocity.vx, s1.velocity.vy);
      CHECK(rec_speed == doctest::Approx(a.speed).epsilon(1e-12));
    }
    CHECK(dist(tr.segments.back().at(tr.segments.back().t_end), a.target) <=
          1e-6);
    CHECK(tr.arrival_time == tr.segments.back().t_end);
  }
}

TEST_CASE("junction cross-track offset matches on both legs") {
  // The lateral offset of the turn point from the nominal track is the same
  // whether measured along the avoidance leg or the recovery leg.
  const Instance inst = generate_cp(5, 200.0);
  AvoidanceSolution av = identity_solution(inst);
  av.maneuvers[0] = {0, 1.05, kPi / 18.0};
  RecoverySolution rec = all_zero_periods(5);
  rec.period[0] = 4;
  const auto trajs = assemble(inst, av, rec);
  const Trajectory& tr = trajs[0];
  REQUIRE(tr.segments.size() == 2);
  const Aircraft& a = inst.aircraft[0];
  const Point2 junction = tr.segments[1].start;
  const double d_avoid = dist(a.origin, junction);
  const double d_rec = dist(junction, a.target);
  const double theta_rec =
      std::atan2(a.target.y - junction.y, a.target.x - junction.x) - a.heading;
  const double lhs = d_avoid * std::abs(std::sin(kPi / 18.0));
  const double rhs = d_rec * std::abs(std::sin(theta_rec));
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-9));
}

TEST_CASE("avoidance leg overrunning the target is clamped") {
  // Fast straight maneuver with a recovery period far beyond target arrival.
  Instance inst = generate_cp(2, 200.0);
  inst.config.n_periods = 40;
  AvoidanceSolution av = identity_solution(inst);
  av.maneuvers[0] = {0, 1.1, 0.0};
  RecoverySolution rec = all_zero_periods(2);
  rec.period[0] = 39;  // 78 min, past the ~44 min accelerated flight
  const auto trajs = assemble(inst, av, rec);
  const Trajectory& tr = trajs[0];
  CHECK(tr.clamped);
  REQUIRE(tr.segments.size() == 1);
  const Aircraft& a = inst.aircraft[0];
  CHECK(dist(tr.segments[0].at(tr.segments[0].t_end), a.target) <= 1e-6);
  const double nominal = dist(a.origin, a.target) / a.speed;
  CHECK(tr.arrival_time == doctest::Approx(nominal / 1.1).epsilon(1e-12));
}

TEST_CASE("solved pipeline verifies conflict-free end to end") {
  const Pipeline p = run_exact(4);
  const VerificationReport rep = verify(p.trajectories, p.inst.config.d);
  CHECK(rep.min_separation >= p.inst.config.d - 1e-4);
  CHECK(!rep.violating_pair.has_value());
  CHECK(rep.samples > 1000);
}

TEST_CASE("nominal circle traffic is flagged at the centre") {
  const Instance inst = generate_cp(4, 200.0);
  const auto trajs = assemble(inst, identity_solution(inst),
                              all_zero_periods(4));
  const VerificationReport rep = verify(trajs, inst.config.d);
  REQUIRE(rep.violating_pair.has_value());
  CHECK(rep.min_separation < 1.0);
  // All aircraft meet at the centre at radius/speed hours; the earliest
  // violation must occur before that.
  CHECK(rep.violating_pair->t <= 200.0 / 500.0);
  CHECK(rep.violating_pair->t > 0.0);
}

TEST_CASE("single aircraft reports the infinite sentinel") {
  Instance inst = generate_cp(2, 200.0);
  inst.aircraft.resize(1);
  const auto trajs = assemble(inst, identity_solution(inst),
                              all_zero_periods(1));
  const VerificationReport rep = verify(trajs, inst.config.d);
  CHECK(std::isinf(rep.min_separation));
  CHECK(!rep.violating_pair.has_value());
  CHECK(rep.samples == 0);
}

TEST_CASE("reported minimum does not depend on the sampling step") {
  const Pipeline p = run_exact(5);
  const VerificationReport fine = verify(p.trajectories, p.inst.config.d, 0.5);
  const VerificationReport coarse = verify(p.trajectories, p.inst.config.d,
                                           60.0);
  CHECK(fine.min_separation ==
        doctest::Approx(coarse.min_separation).epsilon(1e-12));
  CHECK(fine.samples > coarse.samples);
}

TEST_CASE("metrics summarize periods, cost and delays") {
  const Pipeline p = run_exact(4);
  const TrajectoryMetrics met =
      metrics(p.inst, p.trajectories, p.avoid, p.recovery);
  int lo = p.recovery.period[0], hi = lo, sum = 0;
  for (int m : p.recovery.period) {
    lo = std::min(lo, m);
    hi = std::max(hi, m);
    sum += m;
  }
  CHECK(met.min_period == lo);
  CHECK(met.max_period == hi);
  CHECK(met.mean_period == doctest::Approx(sum / 4.0).epsilon(1e-12));
  CHECK(met.total_cost == doctest::Approx(p.avoid.objective).epsilon(1e-12));
  REQUIRE(met.arrival_delay.size() == 4);

  // A slowed aircraft arrives late.
  Instance inst = generate_cp(3, 200.0);
  AvoidanceSolution av = identity_solution(inst);
  av.maneuvers[0] = {0, 0.9, 0.0};
  RecoverySolution rec = all_zero_periods(3);
  rec.period[0] = 6;
  const auto trajs = assemble(inst, av, rec);
  const TrajectoryMetrics met2 = metrics(inst, trajs, av, rec);
  CHECK(met2.arrival_delay[0] > 0.0);
  CHECK(met2.arrival_delay[1] == doctest::Approx(0.0));
}

TEST_CASE("svg plot writes phase-colored lines") {
  const Pipeline p = run_exact(4);
  const std::string path = "trajectory_test.svg";
  REQUIRE(write_svg(path, p.inst, p.trajectories));
  std::ifstream f(path);
  std::string body((std::istreambuf_iterator<char>(f)),
                   std::istreambuf_iterator<char>());
  CHECK(body.find("<svg") != std::string::npos);
  CHECK(body.find("stroke-dasharray") != std::string::npos);
  CHECK(body.find("#1976d2") != std::string::npos);
  CHECK(body.find("</svg>") != std::string::npos);
  std::remove(path.c_str());
}
