#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "deconflict/instance.hpp"

using namespace deconflict;

TEST_CASE("cp layout places aircraft on the circle flying through the centre") {
  const Instance inst = generate_cp(4, 200.0);
  REQUIRE(inst.aircraft.size() == 4);
  CHECK(inst.name == "cp-4");
  const Aircraft& a0 = inst.aircraft[0];
  CHECK(a0.origin.x == doctest::Approx(200.0));
  CHECK(a0.origin.y == doctest::Approx(0.0));
  CHECK(std::abs(a0.heading) == doctest::Approx(M_PI));
  CHECK(a0.speed == 500.0);
  CHECK(a0.target.x == doctest::Approx(-200.0));
  CHECK(a0.target.y == doctest::Approx(0.0));
  for (const Aircraft& a : inst.aircraft) {
    const double r = std::hypot(a.origin.x, a.origin.y);
    CHECK(r == doctest::Approx(200.0).epsilon(1e-12));
    // Nominal velocity points at the centre.
    const Velocity2 v = nominal_velocity(a);
    const double cross = a.origin.x * v.vy - a.origin.y * v.vx;
    const double dot = a.origin.x * v.vx + a.origin.y * v.vy;
    CHECK(std::abs(cross) <= 1e-6);
    CHECK(dot < 0.0);
  }
}

TEST_CASE("cp instances with at least 3 aircraft are fully conflicting") {
  for (int n : {3, 4, 5, 7, 10, 15}) {
    const Instance inst = generate_cp(n, 200.0);
    CHECK(count_conflicts(inst) == n * (n - 1) / 2);
  }
}

TEST_CASE("head-on cp pair is a single conflict") {
  CHECK(count_conflicts(generate_cp(2, 200.0)) == 1);
}

TEST_CASE("generators reject degenerate sizes") {
  CHECK_THROWS_AS(generate_cp(1, 200.0), std::invalid_argument);
  CHECK_THROWS_AS(generate_rcp(0, 200.0), std::invalid_argument);
}

TEST_CASE("rcp draws are deterministic per seed and respect the bounds") {
  ScenarioConfig cfg;
  cfg.seed = 11;
  const Instance a = generate_rcp(10, 200.0, cfg);
  const Instance b = generate_rcp(10, 200.0, cfg);
  cfg.seed = 12;
  const Instance c = generate_rcp(10, 200.0, cfg);
  REQUIRE(a.aircraft.size() == 10);
  CHECK(a.name == "rcp-10-s11");
  bool any_diff = false;
  for (int i = 0; i < 10; ++i) {
    CHECK(a.aircraft[i].speed == b.aircraft[i].speed);
    CHECK(a.aircraft[i].heading == b.aircraft[i].heading);
    any_diff = any_diff || a.aircraft[i].speed != c.aircraft[i].speed;
  }
  CHECK(any_diff);
  for (const Aircraft& ac : a.aircraft) {
    CHECK(ac.speed >= 486.0);
    CHECK(ac.speed <= 594.0);
    CHECK(std::hypot(ac.origin.x, ac.origin.y) == doctest::Approx(200.0));
    // Target sits one diameter ahead along the filed heading.
    const double dist = std::hypot(ac.target.x - ac.origin.x, ac.target.y - ac.origin.y);
    CHECK(dist == doctest::Approx(400.0).epsilon(1e-12));
    const double bearing = std::atan2(ac.target.y - ac.origin.y, ac.target.x - ac.origin.x);
    CHECK(std::remainder(bearing - ac.heading, 2.0 * M_PI) ==
          doctest::Approx(0.0).epsilon(1e-9));
  }
}

TEST_CASE("instance json round-trips through disk") {
  ScenarioConfig cfg;
  cfg.seed = 3;
  const Instance inst = generate_rcp(6, 150.0, cfg);
  const std::string path = "roundtrip_instance.json";
  save_instance(inst, path);
  const Instance back = load_instance(path);
  CHECK(back.name == inst.name);
  CHECK(back.config.d == inst.config.d);
  CHECK(back.config.n_periods == inst.config.n_periods);
  CHECK(back.config.period_len == doctest::Approx(inst.config.period_len).epsilon(1e-15));
  REQUIRE(back.aircraft.size() == inst.aircraft.size());
  for (size_t i = 0; i < inst.aircraft.size(); ++i) {
    CHECK(back.aircraft[i].id == inst.aircraft[i].id);
    CHECK(back.aircraft[i].origin.x == inst.aircraft[i].origin.x);
    CHECK(back.aircraft[i].heading ==
          doctest::Approx(inst.aircraft[i].heading).epsilon(1e-14));
    CHECK(back.aircraft[i].speed == inst.aircraft[i].speed);
  }
  std::remove(path.c_str());
}

TEST_CASE("schema violations name the offending field") {
  const std::string path = "broken_instance.json";
  {
    std::ofstream out(path);
    out << R"({"name":"x","config":{"d":5,"w":0.2,"q_min":0.9,"q_max":1.1,)"
        << R"("headings_deg":[-10,0,10],"n_periods":15,"period_len_min":2,"seed":0},)"
        << R"("aircraft":[{"id":0,"x":0,"y":0,"heading_deg":0,"speed":500,"target_x":100,"target_y":0},)"
        << R"({"id":1,"x":100,"y":0,"heading_deg":180,"target_x":0,"target_y":0}]})";
  }
  CHECK_THROWS_WITH_AS(load_instance(path), "aircraft[1].speed: missing",
                       std::runtime_error);
  std::remove(path.c_str());
}

TEST_CASE("initial separation below d is rejected on load") {
  const std::string path = "tight_instance.json";
  {
    std::ofstream out(path);
    out << R"({"name":"x","config":{"d":5,"w":0.2,"q_min":0.9,"q_max":1.1,)"
        << R"("headings_deg":[0],"n_periods":15,"period_len_min":2,"seed":0},)"
        << R"("aircraft":[{"id":0,"x":0,"y":0,"heading_deg":0,"speed":500,"target_x":100,"target_y":0},)"
        << R"({"id":1,"x":3,"y":0,"heading_deg":180,"speed":500,"target_x":0,"target_y":0}]})";
  }
  CHECK_THROWS_AS(load_instance(path), std::runtime_error);
  std::remove(path.c_str());
}
