#include <doctest.h>

#include <cmath>
#include <limits>

#include "crossflow/dynamics.hpp"
#include "crossflow/errors.hpp"
#include "crossflow/random.hpp"
#include "support/qp_oracle.hpp"

using namespace crossflow;
using crossflow::testing::control_energy_by_quadrature;
using crossflow::testing::discretized_qp;
using crossflow::testing::integrate_min_time;

namespace {

KinematicLimits fast_limits() {
  KinematicLimits lim;
  lim.v_max = 25.0;
  lim.v_f = 15.0;
  return lim;
}

}  // namespace

TEST_CASE("cruising at v_max the whole way") {
  const auto lim = fast_limits();
  CHECK(min_arrival_time(250.0, 25.0, lim) == doctest::Approx(10.0).epsilon(1e-12));
}

TEST_CASE("accelerate then cruise") {
  const auto lim = fast_limits();
  const double t = min_arrival_time(250.0, 15.0, lim);
  CHECK(t == doctest::Approx(10.0 / 3.0 + (250.0 - 200.0 / 3.0) / 25.0).epsilon(1e-12));
  CHECK(t == doctest::Approx(10.6667).epsilon(1e-5));
  CHECK(t == doctest::Approx(integrate_min_time(250.0, 15.0, lim)).epsilon(1e-5));
}

TEST_CASE("minimum arrival vanishes with the distance and grows with it") {
  const auto lim = fast_limits();
  double prev = 0.0;
  for (double d : {1e-6, 1e-3, 0.1, 1.0, 10.0, 100.0, 500.0}) {
    const double t = min_arrival_time(d, 25.0, lim);
    CHECK(t > prev);
    prev = t;
  }
  CHECK(min_arrival_time(1e-6, 25.0, lim) < 1e-6);
  CHECK_THROWS_AS(min_arrival_time(0.0, 10.0, lim), std::domain_error);
}

TEST_CASE("minimum arrival matches numerical integration on random states") {
  const auto lim = fast_limits();
  Rng rng(7, 0);
  for (int i = 0; i < 50; ++i) {
    const double d = 5.0 + 300.0 * rng.uniform();
    const double v0 = 25.0 * rng.uniform();
    CHECK(min_arrival_time(d, v0, lim) ==
          doctest::Approx(integrate_min_time(d, v0, lim)).epsilon(1e-4));
  }
}

TEST_CASE("feasible arrival has to leave room to brake to v_f") {
  const auto lim = fast_limits();
  // v0 = 25 must shed 10 m/s at 3 m/s^2, needing 66.67 m
  CHECK(std::isinf(min_feasible_arrival_time(50.0, 25.0, lim)));
  CHECK(min_feasible_arrival_time(250.0, 25.0, lim) > min_arrival_time(250.0, 25.0, lim));
  const KinematicLimits def;
  CHECK(min_feasible_arrival_time(120.0, 8.0, def) == min_arrival_time(120.0, 8.0, def));
}

TEST_CASE("constant speed is the zero-cost solution") {
  KinematicLimits lim;
  lim.v_f = 10.0;
  const auto t = solve_energy_optimal(100.0, 10.0, 0.0, 10.0, lim);
  for (double s = 0.0; s <= 10.0; s += 0.5) CHECK(t.control(s) == doctest::Approx(0.0));
  CHECK(t.energy() == doctest::Approx(0.0));
  CHECK(t.position(10.0) == doctest::Approx(100.0));
}

TEST_CASE("linear control through the boundary system") {
  KinematicLimits lim;
  lim.v_f = 10.0;
  const auto t = solve_energy_optimal(120.0, 10.0, 0.0, 10.0, lim);
  CHECK(t.kind() == TrajectoryKind::unconstrained);
  for (double s = 0.0; s <= 10.0; s += 0.25) {
    CHECK(t.control(s) == doctest::Approx(1.2 - 0.24 * s).epsilon(1e-9));
  }
  CHECK(t.energy() == doctest::Approx(4.8).epsilon(1e-12));
  CHECK(energy_of(t) == doctest::Approx(control_energy_by_quadrature(t)).epsilon(1e-9));
  CHECK(t.position(10.0) == doctest::Approx(120.0).epsilon(1e-12));
  CHECK(t.velocity(10.0) == doctest::Approx(10.0).epsilon(1e-12));

  const auto qp = discretized_qp(120.0, 10.0, 10.0, 10.0, 0.05);
  CHECK(qp.final_x == doctest::Approx(120.0).epsilon(1e-9));
  CHECK(qp.final_v == doctest::Approx(10.0).epsilon(1e-9));
  CHECK(std::abs(qp.cost - 4.8) < 1e-3);
  CHECK(t.energy() <= qp.cost + 1e-3);
}

TEST_CASE("minimum horizon gives full acceleration then cruise") {
  const KinematicLimits lim;  // v_f == v_max
  const double d = 200.0, v0 = 6.0;
  const double tmin = min_arrival_time(d, v0, lim);
  const auto t = solve_energy_optimal(d, v0, 0.0, tmin, lim);
  const double ramp = (lim.v_max - v0) / lim.a_max;
  CHECK(t.control(0.5 * ramp) == doctest::Approx(lim.a_max));
  CHECK(t.control(ramp + 0.5 * (tmin - ramp)) == doctest::Approx(0.0));
  CHECK(t.position(tmin) == doctest::Approx(d).epsilon(1e-9));
  CHECK(t.velocity(tmin) == doctest::Approx(lim.v_f).epsilon(1e-9));
  CHECK(within_limits(t, lim));
  CHECK_THROWS_AS(solve_energy_optimal(d, v0, 0.0, tmin - 0.01, lim), InfeasibleError);
}

TEST_CASE("clamped profiles still meet the boundary conditions") {
  const KinematicLimits lim;
  // Long delay from full speed needs a stop-like profile, well outside the linear solution.
  const double d = 150.0;
  const double arrival = d / 15.0 + 12.0;
  const auto t = solve_energy_optimal(d, 15.0, 2.0, 2.0 + arrival, lim);
  CHECK(t.position(2.0 + arrival) == doctest::Approx(d).epsilon(1e-9));
  CHECK(t.velocity(2.0 + arrival) == doctest::Approx(15.0).epsilon(1e-9));
  CHECK(within_limits(t, lim));
  CHECK(t.energy() == doctest::Approx(control_energy_by_quadrature(t)).epsilon(1e-6));
}

TEST_CASE("energy scales with the square of the control") {
  for (double c : {0.5, 2.0, 3.0}) {
    Trajectory base({ControlPiece{0.0, 10.0, 0.0, 10.0, 1.2, -0.24}}, TrajectoryKind::unconstrained);
    Trajectory scaled({ControlPiece{0.0, 10.0, 0.0, 10.0, 1.2 * c, -0.24 * c}},
                      TrajectoryKind::unconstrained);
    CHECK(scaled.energy() == doctest::Approx(c * c * base.energy()));
  }
  CHECK(Trajectory::cruise(0.0, 0.0, 12.0, 5.0).energy() == 0.0);
}

TEST_CASE("truncate and splice keep the state continuous") {
  KinematicLimits lim;
  lim.v_f = 10.0;
  const auto t = solve_energy_optimal(120.0, 10.0, 0.0, 10.0, lim);
  const auto head = t.truncated(4.0);
  CHECK(head.terminal_time() == doctest::Approx(4.0));
  CHECK(head.position(4.0) == doctest::Approx(t.position(4.0)));
  const auto tail = plan_trajectory(4.0, t.position(4.0), t.velocity(4.0), 120.0, 12.0, lim);
  const auto joined = t.spliced(tail);
  CHECK(joined.position(3.0) == doctest::Approx(t.position(3.0)));
  CHECK(joined.position(12.0) == doctest::Approx(120.0).epsilon(1e-9));
  CHECK(joined.time_at_position(120.0) == doctest::Approx(12.0).epsilon(1e-6));
}

TEST_CASE("equal profiles at a safe distance never violate") {
  const auto leader = Trajectory::cruise(0.0, 20.0, 15.0, 10.0);
  const auto follower = Trajectory::cruise(0.0, 0.0, 15.0, 10.0);
  auto r = check_rear_end(follower, leader, 10.0);
  CHECK(r.clear());
  CHECK(r.min_gap == doctest::Approx(20.0));
  CHECK(keeps_gap(follower, leader, 20.0));
}

TEST_CASE("stationary leader inside the gap violates from the start") {
  const auto leader = Trajectory::cruise(1.0, 9.9, 0.0, 10.0);
  const auto follower = Trajectory::cruise(1.0, 0.0, 0.0, 10.0);
  auto r = check_rear_end(follower, leader, 10.0);
  CHECK_FALSE(r.clear());
  CHECK(r.first_violation_time == doctest::Approx(1.0));
  CHECK_FALSE(keeps_gap(follower, leader, 10.0));
}

TEST_CASE("headway-separated energy-optimal pairs keep the gap") {
  const KinematicLimits lim;
  const double d = 250.0, headway = 1.5;
  Rng rng(11, 0);
  int checked = 0;
  while (checked < 100) {
    const double v0 = 10.0 + 5.0 * rng.uniform();
    const double leader_t0 = 0.0;
    const double leader_arrival = leader_t0 + min_arrival_time(d, v0, lim) + 4.0 * rng.uniform();
    const double follower_t0 = leader_t0 + headway + 2.0 * rng.uniform();
    const double follower_min = follower_t0 + min_arrival_time(d, v0, lim);
    const double follower_arrival = std::max(follower_min, leader_arrival + headway);
    const auto leader = solve_energy_optimal(d, v0, leader_t0, leader_arrival, lim);
    const auto follower = solve_energy_optimal(d, v0, follower_t0, follower_arrival, lim);
    CHECK(check_rear_end(follower, leader, lim.gap).clear());
    ++checked;
  }
}

TEST_CASE("limit validation") {
  KinematicLimits lim;
  CHECK_NOTHROW(lim.validate());
  lim.v_f = 20.0;
  CHECK_THROWS_AS(lim.validate(), ConfigError);
  lim = {};
  lim.a_min = 1.0;
  CHECK_THROWS_AS(lim.validate(), ConfigError);
  lim = {};
  lim.gap = 0.0;
  CHECK_THROWS_AS(lim.validate(), ConfigError);
}
