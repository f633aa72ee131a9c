#include "crossflow/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <string>

#include "crossflow/errors.hpp"

namespace crossflow {

namespace {

void check_cap(const SchedulingProblem& problem, std::size_t cap, const char* name) {
  if (problem.size() > cap) {
    throw OracleCapError(std::string(name) + " oracle refuses " + std::to_string(problem.size()) +
                         " vehicles (cap " + std::to_string(cap) + ")");
  }
}

// Lane fronts in ascending id order.
std::vector<std::size_t> fronts(const SchedulingProblem& problem,
                                const std::array<std::size_t, kLaneCount>& next) {
  std::vector<std::size_t> out;
  for (std::size_t l = 0; l < kLaneCount; ++l) {
    const auto& lane = problem.lanes()[l];
    if (next[l] < lane.size()) out.push_back(lane[next[l]]);
  }
  std::sort(out.begin(), out.end(), [&](std::size_t a, std::size_t b) {
    return problem.vehicle(a).id < problem.vehicle(b).id;
  });
  return out;
}

struct Search {
  const SchedulingProblem& problem;
  CrossingSequence current;
  CrossingSequence best;
  double best_j = std::numeric_limits<double>::infinity();
  std::uint64_t leaves = 0;

  void descend(const OccupancyState& state, std::array<std::size_t, kLaneCount>& next, double j) {
    if (current.size() == problem.size()) {
      ++leaves;
      if (j < best_j) {
        best_j = j;
        best = current;
      }
      return;
    }
    for (std::size_t k : fronts(problem, next)) {
      OccupancyState child = state;
      const double first = problem.first_arrival(k, child);
      problem.occupy(k, first, child);
      const auto lane = static_cast<std::size_t>(problem.vehicle(k).lane - 1);
      ++next[lane];
      current.push_back(problem.vehicle(k).id);
      descend(child, next, j + problem.delay(k, first));
      current.pop_back();
      --next[lane];
    }
  }
};

struct Node {
  double bound = 0.0;
  double j = 0.0;
  CrossingSequence sequence;
  OccupancyState state;
  std::array<std::size_t, kLaneCount> next{};
};

struct WorseFirst {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;
    return b.sequence < a.sequence;
  }
};

double lower_bound(const SchedulingProblem& problem, const Node& node) {
  double bound = node.j;
  for (std::size_t l = 0; l < kLaneCount; ++l) {
    const auto& lane = problem.lanes()[l];
    double previous = OccupancyState::kNone;
    for (std::size_t p = node.next[l]; p < lane.size(); ++p) {
      const std::size_t k = lane[p];
      double a = problem.first_arrival(k, node.state);
      if (p > node.next[l]) {
        const Movement prev_movement = problem.vehicle(lane[p - 1]).movement;
        a = std::max(a, previous + problem.headways().between(prev_movement,
                                                              problem.vehicle(k).movement));
      }
      previous = a;
      bound += problem.delay(k, a);
    }
  }
  return bound;
}

}  // namespace

OracleResult exhaustive_oracle(const SchedulingProblem& problem, std::size_t cap) {
  check_cap(problem, cap, "exhaustive");
  Search search{problem, {}, {}};
  search.current.reserve(problem.size());
  std::array<std::size_t, kLaneCount> next{};
  search.descend(problem.seed(), next, 0.0);
  OracleResult result;
  result.sequence = std::move(search.best);
  result.schedule = problem.propagate(result.sequence);
  result.nodes = search.leaves;
  return result;
}

OracleResult branch_and_bound_oracle(const SchedulingProblem& problem, std::size_t cap) {
  check_cap(problem, cap, "branch-and-bound");
  std::priority_queue<Node, std::vector<Node>, WorseFirst> open;
  Node root;
  root.state = problem.seed();
  root.bound = lower_bound(problem, root);
  open.push(std::move(root));

  // Keep popping until nothing left in the queue can tie the incumbent, so exact floating-point
  // ties resolve to the lexicographically smallest sequence like the exhaustive search does.
  CrossingSequence best;
  double best_j = std::numeric_limits<double>::infinity();
  std::uint64_t expanded = 0;
  while (!open.empty()) {
    Node node = open.top();
    open.pop();
    if (node.bound > best_j + 1e-9) break;
    if (node.sequence.size() == problem.size()) {
      if (node.j < best_j || (node.j == best_j && node.sequence < best)) {
        best_j = node.j;
        best = node.sequence;
      }
      continue;
    }
    ++expanded;
    for (std::size_t k : fronts(problem, node.next)) {
      Node child;
      child.state = node.state;
      child.next = node.next;
      const double first = problem.first_arrival(k, child.state);
      problem.occupy(k, first, child.state);
      ++child.next[static_cast<std::size_t>(problem.vehicle(k).lane - 1)];
      child.j = node.j + problem.delay(k, first);
      child.sequence = node.sequence;
      child.sequence.push_back(problem.vehicle(k).id);
      child.bound = lower_bound(problem, child);
      if (child.bound > best_j + 1e-9) continue;
      open.push(std::move(child));
    }
  }
  OracleResult result;
  result.sequence = std::move(best);
  result.schedule = problem.propagate(result.sequence);
  result.nodes = expanded;
  return result;
}

std::uint64_t count_feasible_sequences(const SchedulingProblem& problem) {
  // Product of binomials C(placed + n_l, n_l) stays exact in 64 bits for the sizes used here.
  std::uint64_t count = 1;
  std::uint64_t placed = 0;
  for (const auto& lane : problem.lanes()) {
    for (std::uint64_t k = 1; k <= lane.size(); ++k) {
      count = count * (placed + k) / k;
    }
    placed += lane.size();
  }
  return count;
}

double big_m_bound(double latest_min_arrival, std::size_t vehicle_count, double headway) {
  return latest_min_arrival + static_cast<double>(vehicle_count) * headway;
}

double big_m(const SchedulingProblem& problem) {
  double latest = 0.0;
  for (std::size_t k = 0; k < problem.size(); ++k) {
    const auto offsets = problem.offsets(k);
    const auto& v = problem.vehicle(k);
    latest = std::max(latest, std::max(v.sigma_first, v.earliest_first) + offsets.back());
  }
  return big_m_bound(latest, problem.size(), problem.headways().max());
}

SchedulingProblem random_instance(std::size_t n, Rng& rng, const IntersectionGeometry& geometry,
                                  const HeadwayConfig& headways, const KinematicLimits& limits) {
  std::vector<Vehicle> vehicles(n);
  for (auto& v : vehicles) {
    v.lane = static_cast<LaneId>(rng.index(kLaneCount) + 1);
    v.movement = kMovements[rng.index(kMovements.size())];
    v.route = geometry.route(v.lane, v.movement);
    v.distance = 10.0 + 140.0 * rng.uniform();
    v.v0 = 5.0 + (limits.v_f - 5.0) * rng.uniform();
    v.earliest_first = min_feasible_arrival_time(v.distance, v.v0, limits);
    v.sigma_first = v.earliest_first - 5.0 * rng.uniform();
  }
  std::sort(vehicles.begin(), vehicles.end(),
            [](const Vehicle& a, const Vehicle& b) { return a.distance < b.distance; });
  for (std::size_t k = 0; k < n; ++k) vehicles[k].id = static_cast<VehicleId>(k + 1);
  return SchedulingProblem(geometry, headways, std::move(vehicles));
}

}  // namespace crossflow
