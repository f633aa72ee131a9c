#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "crossflow/dynamics.hpp"
#include "crossflow/geometry.hpp"
#include "crossflow/scheduling.hpp"
#include "crossflow/strategies.hpp"

namespace crossflow {

struct ScenarioConfig {
  std::string id = "scenario";
  IntersectionGeometry geometry = IntersectionGeometry::symmetric();
  std::array<double, kLaneCount> rates{0.0, 0.0, 0.0, 0.0};  // veh/s per lane
  double duration = 1200.0;                                  // s of arrivals
  double dt = 0.1;
  bool drain = true;
  double drain_limit = 3600.0;  // s after `duration` before giving up on draining
  std::array<double, 3> movement_mix{1.0, 1.0, 1.0};  // left, straight, right weights
  HeadwayConfig headways;
  KinematicLimits limits;
  StrategyConfig strategy;
  double freeze_horizon = 1.0;  // s before the conflict zone
  std::uint64_t seed = 1;

  /// Throws ConfigError on any invalid field.
  void validate() const;
};

struct Arrival {
  double time = 0.0;
  Movement movement = Movement::straight;
};

using ArrivalPlan = std::array<std::vector<Arrival>, kLaneCount>;

/// Poisson arrivals on each lane from an independent substream of `seed`, movements drawn from
/// `movement_mix`. Arrivals at or before `duration`.
ArrivalPlan generate_arrivals(const std::array<double, kLaneCount>& rates, double duration,
                              const std::array<double, 3>& movement_mix, std::uint64_t seed);

/// Per-lane FIFO of generated vehicles waiting to enter the control zone.
class PointQueue {
 public:
  void push(LaneId lane, Arrival arrival);
  [[nodiscard]] bool empty(LaneId lane) const;
  [[nodiscard]] const Arrival& front(LaneId lane) const;
  Arrival pop(LaneId lane);
  [[nodiscard]] std::size_t size(LaneId lane) const;
  [[nodiscard]] std::size_t total() const;

 private:
  std::array<std::vector<Arrival>, kLaneCount> lanes_;
  std::array<std::size_t, kLaneCount> head_{};
};

/// Realized history of one vehicle. Positions are measured from the lane entry, so the conflict
/// zone spans [lane_length, lane_length + route.clear_distance].
struct VehicleRecord {
  VehicleId id = 0;
  LaneId lane = 1;
  Movement movement = Movement::straight;
  Route route;
  double lane_length = 0.0;
  double generated = 0.0;
  double t0 = 0.0;
  double v0 = 0.0;
  double sigma_first = 0.0;
  Trajectory trajectory;
  double scheduled_arrival = 0.0;
  double exit_time = std::numeric_limits<double>::infinity();
  std::size_t replans = 0;
  std::size_t bumps = 0;
};

struct InvocationRecord {
  double time = 0.0;
  std::size_t active = 0;  // vehicles in the scheduling problem
  std::size_t sequences_considered = 1;
  double compute_time = 0.0;
  bool in_window = true;  // invoked at or before the arrival duration
  bool exit_event = false;
};

struct History {
  std::string scenario_id;
  StrategyKind strategy = StrategyKind::fifo;
  std::uint64_t seed = 0;
  IntersectionGeometry geometry = IntersectionGeometry::symmetric();
  HeadwayConfig headways;
  KinematicLimits limits;
  double dt = 0.1;
  double duration = 0.0;
  double end_time = 0.0;
  std::vector<VehicleRecord> vehicles;  // in entry (id) order
  std::vector<InvocationRecord> invocations;
  std::size_t generated = 0;
  std::size_t queued_at_end = 0;
  /// Strategy outputs dropped because a replanned vehicle could not keep the safety gap; the
  /// previous plan (entry order for a newcomer) was kept instead.
  std::size_t rejected_commits = 0;
};

/// Fixed-step simulation of one scenario.
class Simulator {
 public:
  explicit Simulator(ScenarioConfig config);

  /// Advances one step: retirements, freezing, admissions and entry events, periodic
  /// invocations, then time moves forward by dt.
  void step();
  [[nodiscard]] bool finished() const;
  /// Steps until finished() and returns the history.
  History run();

  [[nodiscard]] double time() const { return static_cast<double>(step_) * config_.dt; }
  [[nodiscard]] const History& history() const { return history_; }
  [[nodiscard]] const CrossingSequence& sequence() const { return sequence_; }
  [[nodiscard]] std::size_t in_system() const;

 private:
  struct Live {
    std::size_t record = 0;  // index into history_.vehicles
    bool frozen = false;
    bool in_zone = false;
    bool retired = false;
  };

  [[nodiscard]] Vehicle snapshot(const Live& live, double t) const;
  [[nodiscard]] SchedulingProblem problem_for(const std::vector<VehicleId>& ids,
                                              const Vehicle* extra) const;
  void retire_and_freeze(double t);
  void admit(double t);
  bool try_admit(LaneId lane, double t);
  void invoke_periodic(double t);
  void commit(const SchedulingProblem& problem, const CrossingSequence& next, double t);
  /// commit(), undone when some vehicle cannot be given a safe plan.
  bool try_commit(const SchedulingProblem& problem, const CrossingSequence& next, double t);
  void plan_with_bumps(Live& live, double arrival, double t, bool fresh);
  [[nodiscard]] const VehicleRecord* lane_leader(const VehicleRecord& follower) const;
  [[nodiscard]] Live& live_of(VehicleId id);
  void record_invocation(double t, std::size_t active, const StrategyInvocationStats& stats,
                         bool exit_event);

  ScenarioConfig config_;
  History history_;
  PointQueue queue_;
  ArrivalPlan arrivals_;
  std::array<std::size_t, kLaneCount> next_arrival_{};
  std::vector<Live> live_;
  std::array<std::int64_t, kLaneCount> last_on_lane_{-1, -1, -1, -1};  // record index
  CrossingSequence sequence_;  // unfrozen vehicles still approaching, in crossing order
  OccupancyState committed_;   // frozen vehicles
  std::vector<std::pair<std::size_t, VehicleRecord>> journal_;
  bool journaling_ = false;
  long step_ = 0;
  std::size_t next_period_ = 1;
  std::size_t mcts_calls_ = 0;
  bool done_ = false;
};

History simulate(const ScenarioConfig& config);

}  // namespace crossflow
