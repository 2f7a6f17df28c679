#include <doctest.h>

#include <cmath>

#include "afdi/scenario.hpp"

using namespace afdi;

TEST_CASE("builtin vehicle scenario") {
  ScenarioConfig c = load_scenario("vehicle-s5");
  CHECK(c.name == "vehicle-s5");
  CHECK(c.N == 3);
  REQUIRE(c.modes.size() == 2);
  REQUIRE(c.modes[0].vertex_count() == 4);

  // A = (1 - 0.3*theta_x) I, B = 0.5*theta_u I at each vertex.
  for (size_t v = 0; v < 4; ++v) {
    const auto& th = c.modes[0].thetas[v];
    CHECK(c.modes[0].A[v](0, 0) == doctest::Approx(1.0 - 0.3 * th(0)));
    CHECK(c.modes[0].A[v](0, 1) == doctest::Approx(0.0));
    CHECK(c.modes[0].B[v](0, 0) == doctest::Approx(0.5 * th(1)));
    CHECK(c.modes[1].B[v](0, 0) == doctest::Approx(0.8 * 0.5 * th(1)));
    CHECK(c.modes[1].B[v](1, 1) == doctest::Approx(0.4 * 0.5 * th(1)));
  }
  CHECK(c.modes[0].A_nom(0, 0) == doctest::Approx(1.0 - 0.3 * 0.65));
  CHECK(c.cost.gamma == doctest::Approx(1.0));
  CHECK(c.sets.U.dim() == 2);
}

TEST_CASE("builtin quadrotor scenario") {
  ScenarioConfig c = load_scenario("quadrotor-s5");
  CHECK(c.N == 4);
  CHECK(c.n_x() == 10);
  CHECK(c.n_u() == 3);
  REQUIRE(c.modes.size() == 2);

  // Output map picks the three position coordinates.
  const auto& C = c.modes[0].C;
  CHECK(C.rows() == 3);
  CHECK(C(0, 4) == 1.0);
  CHECK(C(1, 6) == 1.0);
  CHECK(C(2, 8) == 1.0);
  CHECK(C.sum() == doctest::Approx(3.0));

  // Thrust effectiveness halves between modes at the nominal angles.
  CHECK(c.modes[0].B_nom(5, 2) == doctest::Approx(2.0 * c.modes[1].B_nom(5, 2)));
  // Gravity enters the vertical-velocity disturbance center.
  CHECK(c.sets.W.c(5) == doctest::Approx(0.2 * 9.81));
  CHECK(c.cost.gamma == doctest::Approx(0.5));
}

TEST_CASE("json round trip is stable") {
  for (const char* name : {"vehicle-s5", "quadrotor-s5"}) {
    ScenarioConfig c = load_scenario(name);
    std::string once = to_json(c);
    ScenarioConfig back = scenario_from_json(once);
    std::string twice = to_json(back);
    CHECK(once == twice);
    CHECK(back.N == c.N);
    CHECK(back.modes.size() == c.modes.size());
    CHECK((back.modes[1].B[2] - c.modes[1].B[2]).norm() == doctest::Approx(0.0));
  }
}

TEST_CASE("missing fields are named") {
  CHECK_THROWS_WITH_AS(scenario_from_json("{\"name\":\"x\"}"),
                       doctest::Contains("horizon"), ConfigError);
  CHECK_THROWS_WITH_AS(scenario_from_json("{\"name\":\"x\",\"horizon\":2}"),
                       doctest::Contains("modes"), ConfigError);
  CHECK_THROWS_AS(scenario_from_json("not json"), ConfigError);
  CHECK_THROWS_AS(load_scenario("/nonexistent/path.json"), ConfigError);
}

TEST_CASE("schedule and method validation") {
  ScenarioConfig c = load_scenario("vehicle-s5");
  std::string txt = to_json(c);
  auto swap = [&](const std::string& from, const std::string& to) {
    std::string s = txt;
    auto pos = s.find(from);
    REQUIRE(pos != std::string::npos);
    s.replace(pos, from.size(), to);
    return s;
  };
  CHECK_THROWS_AS(scenario_from_json(swap("\"ccg\"", "\"bogus\"")), ConfigError);
  CHECK(scenario_from_json(swap("\"vertex\"", "\"per-step\"")).schedule ==
        SchedulePolicy::PerStepHull);
}
