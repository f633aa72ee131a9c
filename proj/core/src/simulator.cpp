#include "crossflow/simulator.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <optional>
#include <string>

#include "crossflow/errors.hpp"
#include "crossflow/mcts.hpp"
#include "crossflow/random.hpp"

namespace crossflow {

namespace {

constexpr double kEps = 1e-9;
constexpr double kBumpStep = 0.1;
constexpr int kMaxBumps = 600;
constexpr double kAbsorbMargin = 1.0;  // m of slack beyond a stop-and-go manoeuvre

struct SafePlan {
  Trajectory tail;
  double arrival = 0.0;
  std::size_t bumps = 0;
};

// Plans from (t, x, v) to the conflict zone at `arrival`, pushing the arrival back in fixed
// steps until the follower keeps the safety gap to `leader` on the check grid.
std::optional<SafePlan> find_safe_plan(double t, double x, double v, double lane_length,
                                       double arrival, const Trajectory* leader,
                                       const KinematicLimits& limits, int max_bumps) {
  for (int attempt = 0; attempt <= max_bumps; ++attempt) {
    const double a = arrival + kBumpStep * attempt;
    Trajectory tail = plan_trajectory(t, x, v, lane_length, a, limits);
    if (!leader || keeps_gap(tail, *leader, limits.gap)) {
      return SafePlan{std::move(tail), a, static_cast<std::size_t>(attempt)};
    }
    // Shedding speed early usually opens the gap the energy-optimal profile closes.
    if (tail.kind() != TrajectoryKind::unconstrained || attempt > 0) {
      Trajectory early = plan_full_ramps(t, x, v, lane_length, a, limits);
      if (keeps_gap(early, *leader, limits.gap)) {
        return SafePlan{std::move(early), a, static_cast<std::size_t>(attempt)};
      }
    }
  }
  return std::nullopt;
}

void occupy_state(OccupancyState& state, const VehicleRecord& r, double first,
                  const IntersectionGeometry& geometry) {
  const auto lane = static_cast<std::size_t>(r.lane - 1);
  state.lane_time[lane] = first;
  state.lane_movement[lane] = r.movement;
  const auto offsets = subzone_offsets(geometry, r.route);
  for (std::size_t k = 0; k < offsets.size(); ++k) {
    const auto z = static_cast<std::size_t>(r.route.subzones[k] - 1);
    state.subzone_time[z] = first + offsets[k];
    state.subzone_movement[z] = r.movement;
  }
}

}  // namespace

void ScenarioConfig::validate() const {
  if (!(duration > 0.0)) throw ConfigError("scenario.duration must be positive");
  if (!(dt > 0.0)) throw ConfigError("scenario.dt must be positive");
  if (!(drain_limit > 0.0)) throw ConfigError("scenario.drain_limit must be positive");
  for (double r : rates) {
    if (!(r >= 0.0) || !std::isfinite(r)) throw ConfigError("scenario.rates must be >= 0");
  }
  double mix = 0.0;
  for (double w : movement_mix) {
    if (!(w >= 0.0)) throw ConfigError("scenario.movement_mix weights must be >= 0");
    mix += w;
  }
  if (!(mix > 0.0)) throw ConfigError("scenario.movement_mix needs a positive weight");
  if (!(freeze_horizon >= 0.0)) throw ConfigError("simulation.freeze_horizon must be >= 0");
  headways.validate();
  limits.validate();
  strategy.validate();
  if (std::abs(limits.v_f - geometry.conflict_zone_speed()) > kEps) {
    throw ConfigError("limits.v_f must equal the conflict-zone speed");
  }
}

ArrivalPlan generate_arrivals(const std::array<double, kLaneCount>& rates, double duration,
                              const std::array<double, 3>& movement_mix, std::uint64_t seed) {
  const double total = movement_mix[0] + movement_mix[1] + movement_mix[2];
  ArrivalPlan plan;
  for (std::size_t l = 0; l < kLaneCount; ++l) {
    if (!(rates[l] > 0.0)) continue;
    Rng rng(seed, l + 1);
    double t = 0.0;
    for (;;) {
      t += rng.exponential(rates[l]);
      if (t > duration) break;
      const double u = rng.uniform() * total;
      Movement m = Movement::right;
      if (u < movement_mix[0]) {
        m = Movement::left;
      } else if (u < movement_mix[0] + movement_mix[1]) {
        m = Movement::straight;
      }
      plan[l].push_back({t, m});
    }
  }
  return plan;
}

void PointQueue::push(LaneId lane, Arrival arrival) {
  lanes_[static_cast<std::size_t>(lane - 1)].push_back(arrival);
}

bool PointQueue::empty(LaneId lane) const { return size(lane) == 0; }

const Arrival& PointQueue::front(LaneId lane) const {
  const auto l = static_cast<std::size_t>(lane - 1);
  return lanes_[l][head_[l]];
}

Arrival PointQueue::pop(LaneId lane) {
  const auto l = static_cast<std::size_t>(lane - 1);
  return lanes_[l][head_[l]++];
}

std::size_t PointQueue::size(LaneId lane) const {
  const auto l = static_cast<std::size_t>(lane - 1);
  return lanes_[l].size() - head_[l];
}

std::size_t PointQueue::total() const {
  std::size_t n = 0;
  for (LaneId lane = 1; lane <= kLaneCount; ++lane) n += size(lane);
  return n;
}

Simulator::Simulator(ScenarioConfig config) : config_(std::move(config)) {
  config_.validate();
  history_.scenario_id = config_.id;
  history_.strategy = config_.strategy.kind;
  history_.seed = config_.seed;
  history_.geometry = config_.geometry;
  history_.headways = config_.headways;
  history_.limits = config_.limits;
  history_.dt = config_.dt;
  history_.duration = config_.duration;
  arrivals_ = generate_arrivals(config_.rates, config_.duration, config_.movement_mix, config_.seed);
  for (const auto& lane : arrivals_) history_.generated += lane.size();
}

std::size_t Simulator::in_system() const {
  return static_cast<std::size_t>(
      std::count_if(live_.begin(), live_.end(), [](const Live& l) { return !l.retired; }));
}

bool Simulator::finished() const { return done_; }

Simulator::Live& Simulator::live_of(VehicleId id) {
  return live_.at(static_cast<std::size_t>(id - 1));
}

const VehicleRecord* Simulator::lane_leader(const VehicleRecord& follower) const {
  for (auto k = static_cast<std::int64_t>(follower.id) - 2; k >= 0; --k) {
    const auto& r = history_.vehicles[static_cast<std::size_t>(k)];
    if (r.lane == follower.lane) return &r;
  }
  return nullptr;
}

Vehicle Simulator::snapshot(const Live& live, double t) const {
  const VehicleRecord& r = history_.vehicles[live.record];
  Vehicle v;
  v.id = r.id;
  v.lane = r.lane;
  v.movement = r.movement;
  v.route = r.route;
  v.t0 = r.t0;
  v.v0 = r.v0;
  v.sigma_first = r.sigma_first;
  const double x = r.trajectory.position(t);
  const double speed = r.trajectory.velocity(t);
  v.distance = r.lane_length - x;
  v.earliest_first = v.distance > 0.0
                         ? t + min_feasible_arrival_time(v.distance, speed, config_.limits)
                         : t;
  return v;
}

SchedulingProblem Simulator::problem_for(const std::vector<VehicleId>& ids,
                                         const Vehicle* extra) const {
  std::vector<Vehicle> vehicles;
  vehicles.reserve(ids.size() + 1);
  const double t = time();
  for (VehicleId id : ids) vehicles.push_back(snapshot(live_[static_cast<std::size_t>(id - 1)], t));
  if (extra) vehicles.push_back(*extra);
  return SchedulingProblem(config_.geometry, config_.headways, std::move(vehicles), committed_);
}

void Simulator::record_invocation(double t, std::size_t active,
                                  const StrategyInvocationStats& stats, bool exit_event) {
  InvocationRecord rec;
  rec.time = t;
  rec.active = active;
  rec.sequences_considered = stats.sequences_considered;
  rec.compute_time = stats.compute_time;
  rec.in_window = t <= config_.duration + kEps;
  rec.exit_event = exit_event;
  history_.invocations.push_back(rec);
}

void Simulator::retire_and_freeze(double t) {
  for (auto& live : live_) {
    if (live.retired) continue;
    auto& r = history_.vehicles[live.record];
    const double x = r.trajectory.position(t);
    if (!live.in_zone && x >= r.lane_length - kEps) {
      if (!live.frozen) {
        throw SimulationError("vehicle " + std::to_string(r.id) +
                              " reached the conflict zone without a committed arrival");
      }
      live.in_zone = true;
    }
    const double exit_x = r.lane_length + r.route.clear_distance;
    if (x >= exit_x) {
      live.retired = true;
      r.exit_time = r.trajectory.time_at_position(exit_x);
      if (config_.strategy.kind == StrategyKind::fifo) {
        const auto start = std::chrono::steady_clock::now();
        SchedulingProblem problem = problem_for(sequence_, nullptr);
        CrossingSequence next = fifo(sequence_, problem.vehicles());
        StrategyInvocationStats stats;
        stats.compute_time =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        commit(problem, next, t);
        record_invocation(t, problem.size(), stats, true);
      }
    }
  }

  // Freeze the longest prefix ending at a vehicle that can no longer be rescheduled.
  std::size_t freeze_count = 0;
  for (std::size_t p = 0; p < sequence_.size(); ++p) {
    const auto& r = history_.vehicles[live_of(sequence_[p]).record];
    const double remaining = r.lane_length - r.trajectory.position(t);
    const double v = r.trajectory.velocity(t);
    const bool near = r.scheduled_arrival - t < config_.freeze_horizon;
    const bool cannot_absorb = config_.limits.v_min > 0.0
                                   ? false
                                   : remaining < stop_and_go_distance(v, config_.limits) +
                                                     kAbsorbMargin;
    if (near || cannot_absorb) freeze_count = p + 1;
  }
  for (std::size_t p = 0; p < freeze_count; ++p) {
    auto& live = live_of(sequence_[p]);
    live.frozen = true;
    const auto& r = history_.vehicles[live.record];
    occupy_state(committed_, r, r.scheduled_arrival, config_.geometry);
  }
  sequence_.erase(sequence_.begin(), sequence_.begin() + static_cast<std::ptrdiff_t>(freeze_count));
}

bool Simulator::try_admit(LaneId lane, double t) {
  const auto lane_index = static_cast<std::size_t>(lane - 1);
  const VehicleRecord* leader = last_on_lane_[lane_index] >= 0
                                    ? &history_.vehicles[static_cast<std::size_t>(
                                          last_on_lane_[lane_index])]
                                    : nullptr;
  if (leader && leader->trajectory.position(t) < config_.limits.gap - kEps) return false;

  const Arrival& head = queue_.front(lane);
  const double length = config_.geometry.lane_length(lane);
  const double v0 = config_.limits.v_f;

  Vehicle candidate;
  candidate.id = static_cast<VehicleId>(history_.vehicles.size() + 1);
  candidate.lane = lane;
  candidate.movement = head.movement;
  candidate.route = config_.geometry.route(lane, head.movement);
  candidate.t0 = t;
  candidate.v0 = v0;
  candidate.sigma_first = t + min_arrival_time(length, v0, config_.limits);
  candidate.earliest_first = t + min_feasible_arrival_time(length, v0, config_.limits);
  candidate.distance = length;

  if (!std::isfinite(candidate.earliest_first)) return false;

  OccupancyState tail = committed_;
  for (VehicleId id : sequence_) {
    const auto& r = history_.vehicles[live_of(id).record];
    occupy_state(tail, r, r.scheduled_arrival, config_.geometry);
  }
  const Trajectory* leader_path = leader ? &leader->trajectory : nullptr;
  double tentative = 0.0;
  {
    const SchedulingProblem appended = problem_for(sequence_, &candidate);
    tentative = appended.first_arrival(appended.size() - 1, tail);
  }
  try {
    // Entry needs a tail plan that keeps the gap as is; otherwise the vehicle keeps waiting.
    if (!find_safe_plan(t, 0.0, v0, length, tentative, leader_path, config_.limits, 0)) {
      return false;
    }
    if (leader) {
      // Earlier slots are only usable from the first arrival that is safe behind the leader.
      const double base =
          std::max(candidate.earliest_first,
                   leader->scheduled_arrival +
                       config_.headways.between(candidate.movement, leader->movement));
      const int steps = static_cast<int>(std::ceil((tentative - base) / kBumpStep - kEps));
      if (steps > 0) {
        const auto safe =
            find_safe_plan(t, 0.0, v0, length, base, leader_path, config_.limits, steps);
        candidate.earliest_first = std::min(safe ? safe->arrival : tentative, tentative);
      } else {
        candidate.earliest_first = std::max(candidate.earliest_first, std::min(base, tentative));
      }
    }
  } catch (const InfeasibleError&) {
    return false;
  }
  SchedulingProblem problem = problem_for(sequence_, &candidate);

  const Arrival arrival = queue_.pop(lane);
  VehicleRecord record;
  record.id = candidate.id;
  record.lane = lane;
  record.movement = arrival.movement;
  record.route = candidate.route;
  record.lane_length = length;
  record.generated = arrival.time;
  record.t0 = t;
  record.v0 = v0;
  record.sigma_first = candidate.sigma_first;
  history_.vehicles.push_back(std::move(record));
  live_.push_back(Live{history_.vehicles.size() - 1});
  last_on_lane_[lane_index] = static_cast<std::int64_t>(history_.vehicles.size() - 1);

  const auto start = std::chrono::steady_clock::now();
  StrategyInvocationStats stats;
  CrossingSequence next;
  switch (config_.strategy.kind) {
    case StrategyKind::dr: {
      StrategyResult result =
          dynamic_resequencing(problem, sequence_, candidate.id, config_.strategy.alpha);
      next = std::move(result.sequence);
      stats = result.stats;
      break;
    }
    case StrategyKind::fifo:
      next = fifo(sequence_, problem.vehicles());
      break;
    case StrategyKind::modified_fifo:
    case StrategyKind::mcts:
      next = sequence_;
      next.push_back(candidate.id);
      break;
  }
  stats.compute_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!try_commit(problem, next, t)) {
    // Appending at the tail reproduces the plan checked above.
    next = sequence_;
    next.push_back(candidate.id);
    commit(problem, next, t);
  }
  if (is_event_driven(config_.strategy.kind)) record_invocation(t, problem.size(), stats, false);
  return true;
}

void Simulator::admit(double t) {
  if (t > config_.duration + kEps) return;
  for (std::size_t l = 0; l < kLaneCount; ++l) {
    while (next_arrival_[l] < arrivals_[l].size() && arrivals_[l][next_arrival_[l]].time <= t) {
      queue_.push(static_cast<LaneId>(l + 1), arrivals_[l][next_arrival_[l]++]);
    }
  }
  for (LaneId lane = 1; lane <= kLaneCount; ++lane) {
    if (!queue_.empty(lane)) try_admit(lane, t);
  }
}

void Simulator::invoke_periodic(double t) {
  if (is_event_driven(config_.strategy.kind)) return;
  const double due = static_cast<double>(next_period_) * config_.strategy.period;
  if (t < due - kEps) return;
  ++next_period_;

  const auto start = std::chrono::steady_clock::now();
  SchedulingProblem problem = problem_for(sequence_, nullptr);
  CrossingSequence next;
  StrategyInvocationStats stats;
  if (config_.strategy.kind == StrategyKind::modified_fifo) {
    next = modified_fifo(problem.vehicles());
  } else {
    const std::uint64_t seed = config_.seed * 1000003ULL + mcts_calls_++;
    StrategyResult result = mcts_search(problem, sequence_, config_.strategy.mcts, seed);
    next = std::move(result.sequence);
    stats = result.stats;
  }
  stats.compute_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  try_commit(problem, next, t);
  record_invocation(t, problem.size(), stats, false);
}

void Simulator::plan_with_bumps(Live& live, double arrival, double t, bool fresh) {
  VehicleRecord& r = history_.vehicles[live.record];
  const double x = fresh ? 0.0 : r.trajectory.position(t);
  const double v = fresh ? r.v0 : r.trajectory.velocity(t);
  const VehicleRecord* leader = lane_leader(r);
  std::optional<SafePlan> plan;
  try {
    plan = find_safe_plan(t, x, v, r.lane_length, arrival, leader ? &leader->trajectory : nullptr,
                          config_.limits, kMaxBumps);
  } catch (const InfeasibleError& e) {
    throw SimulationError("vehicle " + std::to_string(r.id) + " at t=" + std::to_string(t) +
                          ": " + e.what());
  }
  if (!plan) {
    throw SimulationError("vehicle " + std::to_string(r.id) + " at t=" + std::to_string(t) +
                          ": no rear-end-safe arrival found");
  }
  if (journaling_) journal_.emplace_back(live.record, r);
  r.trajectory = fresh ? plan->tail : r.trajectory.spliced(plan->tail);
  r.scheduled_arrival = plan->arrival;
  r.bumps += plan->bumps;
  ++r.replans;
}

void Simulator::commit(const SchedulingProblem& problem, const CrossingSequence& next, double t) {
  if (!is_feasible_sequence(next, problem.vehicles())) {
    throw SimulationError("strategy returned a sequence that breaks per-lane order");
  }
  OccupancyState state = committed_;
  bool diverged = false;
  std::array<bool, kLaneCount> lane_replanned{};
  for (std::size_t p = 0; p < next.size(); ++p) {
    const VehicleId id = next[p];
    const std::size_t k = problem.index_of(id);
    Live& live = live_of(id);
    VehicleRecord& r = history_.vehicles[live.record];
    const bool fresh = r.trajectory.empty();
    const auto lane = static_cast<std::size_t>(r.lane - 1);
    if (!diverged && !fresh && p < sequence_.size() && sequence_[p] == id) {
      problem.occupy(k, r.scheduled_arrival, state);
      continue;
    }
    diverged = true;
    const double a = problem.first_arrival(k, state);
    if (fresh || std::abs(a - r.scheduled_arrival) > kEps) {
      plan_with_bumps(live, a, t, fresh);
      lane_replanned[lane] = true;
    } else if (lane_replanned[lane]) {
      const VehicleRecord* leader = lane_leader(r);
      if (leader && !keeps_gap(r.trajectory, leader->trajectory, config_.limits.gap)) {
        plan_with_bumps(live, a, t, false);
      }
    }
    problem.occupy(k, r.scheduled_arrival, state);
  }
  sequence_ = next;
}

bool Simulator::try_commit(const SchedulingProblem& problem, const CrossingSequence& next,
                           double t) {
  journal_.clear();
  journaling_ = true;
  try {
    commit(problem, next, t);
  } catch (const SimulationError&) {
    for (auto it = journal_.rbegin(); it != journal_.rend(); ++it) {
      history_.vehicles[it->first] = std::move(it->second);
    }
    journaling_ = false;
    journal_.clear();
    ++history_.rejected_commits;
    return false;
  }
  journaling_ = false;
  journal_.clear();
  return true;
}

void Simulator::step() {
  if (done_) return;
  const double t = time();
  retire_and_freeze(t);
  admit(t);
  invoke_periodic(t);
  history_.end_time = t;
  if (t >= config_.duration - kEps) {
    if (!config_.drain || in_system() == 0 || t >= config_.duration + config_.drain_limit) {
      done_ = true;
      std::size_t queued = queue_.total();
      for (std::size_t l = 0; l < kLaneCount; ++l) queued += arrivals_[l].size() - next_arrival_[l];
      history_.queued_at_end = queued;
    }
  }
  ++step_;
}

History Simulator::run() {
  while (!done_) step();
  return history_;
}

History simulate(const ScenarioConfig& config) {
  Simulator sim(config);
  return sim.run();
}

}  // namespace crossflow
