#include <doctest.h>

#include <cmath>

#include "crossflow/audit.hpp"
#include "crossflow/metrics.hpp"
#include "crossflow/simulator.hpp"

using namespace crossflow;

namespace {

VehicleRecord cruiser(const IntersectionGeometry& g, VehicleId id, LaneId lane, Movement m,
                      double t0) {
  VehicleRecord r;
  r.id = id;
  r.lane = lane;
  r.movement = m;
  r.route = g.route(lane, m);
  r.lane_length = g.lane_length(lane);
  r.generated = t0;
  r.t0 = t0;
  r.v0 = 15.0;
  r.sigma_first = t0 + r.lane_length / 15.0;
  r.scheduled_arrival = r.sigma_first;
  r.trajectory = Trajectory::cruise(t0, 0.0, 15.0, t0 + 40.0);
  return r;
}

History two_crossing(double separation) {
  History h;
  // vehicle 1 (lane 1 straight) reaches subzone 4 one chord after its zone entry;
  // vehicle 2 (lane 2 straight) enters through subzone 4.
  const double chord = h.geometry.subzone_side() / 15.0;
  h.vehicles.push_back(cruiser(h.geometry, 1, 1, Movement::straight, 0.0));
  h.vehicles.push_back(cruiser(h.geometry, 2, 2, Movement::straight, chord + separation));
  h.end_time = 60.0;
  h.generated = 2;
  return h;
}

}  // namespace

TEST_CASE("planted subzone conflict is caught") {
  const auto bad = audit_safety(two_crossing(0.5));
  CHECK(bad.lateral == 1);
  CHECK(bad.rear_end == 0);
  CHECK_FALSE(bad.clean());
  CHECK(audit_safety(two_crossing(1.5)).clean());
}

TEST_CASE("audit reads trajectories, not schedules") {
  auto h = two_crossing(0.5);
  const auto before = audit_safety(h);
  h.vehicles[1].scheduled_arrival += 10.0;
  h.vehicles[1].sigma_first -= 3.0;
  const auto after = audit_safety(h);
  CHECK(after.lateral == before.lateral);
  CHECK(after.violations == before.violations);

  auto good = two_crossing(2.0);
  good.vehicles[1].scheduled_arrival = good.vehicles[0].scheduled_arrival;
  CHECK(audit_safety(good).clean());
}

TEST_CASE("same-lane gap breach is caught") {
  History h;
  h.vehicles.push_back(cruiser(h.geometry, 1, 3, Movement::left, 0.0));
  h.vehicles.push_back(cruiser(h.geometry, 2, 3, Movement::right, 0.5));  // 7.5 m behind
  h.end_time = 60.0;
  const auto a = audit_safety(h);
  CHECK(a.rear_end == 1);
  h.vehicles[1] = cruiser(h.geometry, 2, 3, Movement::right, 1.5);
  CHECK(audit_safety(h).clean());
}

TEST_CASE("delay is arrival minus minimum arrival") {
  History h;
  VehicleRecord r = cruiser(h.geometry, 1, 1, Movement::straight, 12.0 - 250.0 / 15.0);
  r.sigma_first = 10.0;
  h.vehicles.push_back(r);
  h.end_time = 60.0;
  const auto m = collect_metrics(h);
  REQUIRE(m.vehicle_count == 1);
  CHECK(m.vehicles[0].arrival == doctest::Approx(12.0));
  CHECK(m.vehicles[0].delay == doctest::Approx(2.0));
  CHECK(m.mean_delay == doctest::Approx(2.0));
  CHECK(m.mean_energy == 0.0);
}

TEST_CASE("energy counts only the approach") {
  History h;
  KinematicLimits lim;
  lim.v_f = 10.0;
  VehicleRecord r = cruiser(h.geometry, 1, 1, Movement::straight, 0.0);
  r.lane_length = 120.0;
  r.sigma_first = 8.0;
  r.trajectory = solve_energy_optimal(120.0, 10.0, 0.0, 10.0, lim)
                     .spliced(Trajectory::cruise(10.0, 120.0, 10.0, 30.0));
  h.vehicles.push_back(r);
  h.end_time = 60.0;
  const auto m = collect_metrics(h);
  CHECK(m.mean_energy == doctest::Approx(4.8));
  CHECK(m.mean_travel_time == doctest::Approx(10.0));
  CHECK(m.mean_delay == doctest::Approx(2.0));
}

TEST_CASE("aggregates are means and population deviations") {
  History h;
  for (int k = 0; k < 4; ++k) {
    VehicleRecord r = cruiser(h.geometry, k + 1, 1 + k, Movement::right, 5.0 * k);
    r.sigma_first -= k;  // delays 0, 1, 2, 3
    h.vehicles.push_back(r);
  }
  h.end_time = 100.0;
  h.invocations.push_back({1.0, 2, 3, 0.5, true, false});
  h.invocations.push_back({2.0, 3, 5, 0.1, false, true});
  const auto m = collect_metrics(h);
  CHECK(m.mean_delay == doctest::Approx(1.5));
  CHECK(m.std_delay == doctest::Approx(std::sqrt(1.25)));
  CHECK(m.std_travel_time == doctest::Approx(0.0));
  CHECK(m.mean_sequences_considered == doctest::Approx(4.0));
  CHECK(m.window_invocations == 1);
  CHECK(m.event_invocations == 1);
}

TEST_CASE("vehicles short of the zone are excluded") {
  History h;
  h.vehicles.push_back(cruiser(h.geometry, 1, 1, Movement::straight, 0.0));
  h.vehicles.push_back(cruiser(h.geometry, 2, 2, Movement::straight, 10.0));
  h.end_time = 20.0;
  const auto m = collect_metrics(h);
  CHECK(m.vehicle_count == 1);
  CHECK(m.excluded_in_system == 1);
}
