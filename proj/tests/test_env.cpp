#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "mppi/env.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace mppi;

TEST_CASE("terrain lookup is right-continuous and matches the scan oracle") {
  Terrain stairs({{0.0, 0.0}, {0.8, 0.15}, {1.6, 0.30}, {2.4, 0.45}, {3.2, 0.60}});
  CHECK(stairs.height_at(0.1) == 0.0);
  CHECK(stairs.height_at(0.9) == 0.15);
  CHECK(stairs.height_at(0.8) == 0.15);   // right-continuous at the riser
  CHECK(stairs.height_at(3.3) == 0.60);   // past the last riser
  CHECK(stairs.max_height() == 0.60);

  const std::vector<std::pair<double, double>> segs = {
      {0.0, 0.0}, {0.8, 0.15}, {1.6, 0.30}, {2.4, 0.45}, {3.2, 0.60}};
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> dist(-0.5, 4.5);
  for (int i = 0; i < 10000; ++i) {
    const double x = dist(rng);
    CHECK(stairs.height_at(x) == oracle::terrain_scan(segs, x));
  }
}

TEST_CASE("terrain validates its segment list") {
  CHECK_THROWS_AS(Terrain({{0.0, 0.0}, {0.0, 0.1}}), std::invalid_argument);
  CHECK_THROWS_AS(Terrain({{0.0, -0.1}}), std::invalid_argument);
  CHECK_THROWS_AS(Terrain({{1.0, 0.1}, {0.5, 0.2}}), std::invalid_argument);
  CHECK_THROWS_AS(Terrain(std::vector<TerrainSegment>{}), std::invalid_argument);
}

TEST_CASE("terrain table export") {
  Terrain box({{0.0, 0.0}, {0.4, 0.4}, {0.6, 0.0}});
  std::ostringstream os;
  box.write_table(os, 1.0);
  CHECK(os.str() ==
        "0 0\n0.4 0\n0.4 0.4\n0.6 0.4\n0.6 0\n1 0\n");
}

TEST_CASE("task defaults encode the three benchmark scenes") {
  const auto flat = default_task_spec(TaskKind::kFlat);
  CHECK(flat.goal_x == 1.0);
  CHECK(flat.max_steps == 4000);
  CHECK(flat.dt == 0.02);

  Environment stairs(default_task_spec(TaskKind::kStairs));
  CHECK(stairs.spec().goal_x == 3.3);
  CHECK(stairs.terrain().height_at(0.1) == 0.0);
  CHECK(stairs.terrain().height_at(0.9) == 0.15);

  Environment box(default_task_spec(TaskKind::kBigBox));
  CHECK(box.terrain().height_at(0.5) == 0.4);
  CHECK(box.terrain().height_at(0.3) == 0.0);
  CHECK(box.terrain().height_at(0.7) == 0.0);

  TaskSpec bad = flat;
  bad.max_steps = 0;
  CHECK_THROWS_AS(Environment{bad}, std::invalid_argument);
}

TEST_CASE("gravity pulls an uncontrolled mass into the ground") {
  Environment env(default_task_spec(TaskKind::kFlat));
  EnvState state = env.initial_state();
  const Eigen::Vector2d zero(0.0, 0.0);
  double prev_z = state.position[1];
  int steps = 0;
  while (state.status == EnvStatus::kRunning && steps < 100) {
    state = env.step(state, zero);
    CHECK(state.position[1] < prev_z);  // monotone descent
    prev_z = state.position[1];
    ++steps;
  }
  CHECK(state.status == EnvStatus::kCrashed);
  CHECK(steps < 100);
}

TEST_CASE("semi-implicit Euler stepping") {
  TaskSpec spec = default_task_spec(TaskKind::kFlat);
  Environment env(spec);

  SUBCASE("hover holds altitude to machine precision") {
    EnvState s = env.initial_state();
    for (int i = 0; i < 50; ++i) {
      s = env.step(s, env.hover_control());
      CHECK(std::abs(s.position[1] - 0.05) <= 1e-12);
    }
    CHECK(s.step_count == 50);
  }

  SUBCASE("coasting advances x by dt * vx exactly") {
    EnvState s = env.initial_state();
    s.velocity[0] = 0.75;
    const double x0 = s.position[0];
    auto next = env.step(s, env.hover_control());
    CHECK(next.position[0] == x0 + spec.dt * 0.75);
  }

  SUBCASE("constant horizontal force matches the loop and closed-form oracles") {
    TaskSpec small = spec;
    small.dt = 0.01;
    // keep gravity balanced so only x moves
    Environment env2(small);
    EnvState s = env2.initial_state();
    for (int i = 0; i < 10; ++i) {
      s = env2.step(s, Eigen::Vector2d(1.0, kGravity));
    }
    const double loop = oracle::euler_position_loop(0.0, 1.0, 0.01, 10);
    const double closed = oracle::euler_position_closed_form(0.0, 1.0, 0.01, 10);
    CHECK(std::abs(loop - closed) <= 1e-15);
    CHECK(std::abs(s.position[0] - closed) <= 1e-9);
  }

  SUBCASE("stepping is pure and deterministic") {
    EnvState s = env.initial_state();
    s.velocity = Eigen::Vector2d(0.3, 0.1);
    auto a = env.step(s, Eigen::Vector2d(0.5, 9.0));
    auto b = env.step(s, Eigen::Vector2d(0.5, 9.0));
    CHECK(testutil::exact_equal(a.position, b.position));
    CHECK(testutil::exact_equal(a.velocity, b.velocity));
    CHECK(a.status == b.status);
  }
}

TEST_CASE("step rejects terminal states and bad controls") {
  Environment env(default_task_spec(TaskKind::kFlat));
  EnvState s = env.initial_state();
  s.status = EnvStatus::kCrashed;
  CHECK_THROWS_AS(env.step(s, Eigen::Vector2d(0, 0)), std::invalid_argument);

  EnvState ok = env.initial_state();
  Eigen::VectorXd nan_control(2);
  nan_control << 0.0, std::nan("");
  CHECK_THROWS_AS(env.step(ok, nan_control), std::invalid_argument);
  CHECK_THROWS_AS(env.step(ok, Eigen::VectorXd::Zero(3)), std::invalid_argument);
}

TEST_CASE("success requires reaching the goal with a soft landing") {
  Environment env(default_task_spec(TaskKind::kFlat));
  for (double x0 : {1.01, 2.0, 5.0}) {  // monotone in x
    EnvState s = env.initial_state();
    s.position[0] = x0;
    auto next = env.step(s, env.hover_control());
    CHECK(next.status == EnvStatus::kSuccess);
  }
  // fast vertical motion at the goal defers success
  EnvState fast = env.initial_state();
  fast.position = Eigen::Vector2d(1.5, 3.0);
  fast.velocity = Eigen::Vector2d(0.0, 2.0);
  auto next = env.step(fast, env.hover_control());
  CHECK(next.status == EnvStatus::kRunning);
}

TEST_CASE("running cost terms") {
  TaskSpec spec = default_task_spec(TaskKind::kFlat);
  Environment env(spec);

  SUBCASE("zero at the goal with clearance and idle actuators") {
    EnvState s = env.initial_state();
    s.position = Eigen::Vector2d(1.2, 0.5);
    CHECK(env.running_cost(s, Eigen::Vector2d(0.0, 0.0)) == 0.0);
  }

  SUBCASE("control term is quadratic") {
    EnvState s = env.initial_state();
    s.position = Eigen::Vector2d(2.0, 0.5);  // other terms vanish
    const double c1 = env.running_cost(s, Eigen::Vector2d(0.4, 0.3));
    const double c2 = env.running_cost(s, Eigen::Vector2d(0.8, 0.6));
    CHECK(c2 == doctest::Approx(4.0 * c1).epsilon(1e-12));
  }

  SUBCASE("specific tuple against the formula oracle") {
    EnvState s = env.initial_state();
    s.position = Eigen::Vector2d(0.3, 0.02);
    const Eigen::Vector2d u(0.7, 8.0);
    const double dx = 1.0 - 0.3;
    const double deficit = 0.0 + 0.05 - 0.02;
    const double expected =
        1.0 * dx * dx + 10.0 * deficit * deficit + 1e-3 * (0.7 * 0.7 + 8.0 * 8.0);
    CHECK(env.running_cost(s, u) == doctest::Approx(expected).epsilon(1e-12));
  }

  SUBCASE("rejected on terminal states") {
    EnvState s = env.initial_state();
    s.status = EnvStatus::kSuccess;
    CHECK_THROWS_AS(env.running_cost(s, Eigen::Vector2d(0, 0)), std::invalid_argument);
  }
}

TEST_CASE("terminal cost") {
  Environment env(default_task_spec(TaskKind::kFlat));
  EnvState s = env.initial_state();

  s.position[0] = 1.0;
  CHECK(env.terminal_cost(s) == 0.0);
  s.position[0] = 1.7;
  CHECK(env.terminal_cost(s) == 0.0);
  s.position[0] = 0.0;
  CHECK(env.terminal_cost(s) == 100.0);
  s.position[0] = 0.5;
  CHECK(env.terminal_cost(s) == 25.0);
}

TEST_CASE("crash penalty scales with the remaining steps") {
  Environment env(default_task_spec(TaskKind::kStairs));
  const double base = env.crash_penalty(0);
  CHECK(base == 1e6);
  CHECK(env.crash_penalty(10) ==
        doctest::Approx(1e6 + 10 * env.max_running_cost_estimate()).epsilon(1e-12));
  CHECK(env.max_running_cost_estimate() > 0.0);
}
