#include "crossflow/strategies.hpp"

#include <algorithm>
#include <string>

#include "crossflow/errors.hpp"

namespace crossflow {

std::string_view to_string(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::fifo:
      return "fifo";
    case StrategyKind::modified_fifo:
      return "modified_fifo";
    case StrategyKind::dr:
      return "dr";
    case StrategyKind::mcts:
      return "mcts";
  }
  return "?";
}

StrategyKind parse_strategy(std::string_view name) {
  for (auto kind : {StrategyKind::fifo, StrategyKind::modified_fifo, StrategyKind::dr,
                    StrategyKind::mcts}) {
    if (to_string(kind) == name) return kind;
  }
  throw ConfigError("unknown strategy '" + std::string(name) + "'");
}

bool is_event_driven(StrategyKind kind) {
  return kind == StrategyKind::fifo || kind == StrategyKind::dr;
}

void StrategyConfig::validate() const {
  if (!(period > 0.0)) throw ConfigError("strategy.period must be positive");
  if (!(alpha >= 0.0 && alpha < 1.0)) throw ConfigError("dr.alpha must be in [0, 1)");
  if (!(mcts.exploration_c > 0.0)) throw ConfigError("mcts.exploration_c must be positive");
  if (!(mcts.beta <= 0.0)) throw ConfigError("mcts.beta must be <= 0");
  if (!(mcts.wall_clock_ms >= 0.0)) throw ConfigError("mcts.wall_clock_ms must be >= 0");
  if (mcts.rollouts == 0) throw ConfigError("mcts.rollouts must be >= 1");
  if (!(mcts.epsilon >= 0.0 && mcts.epsilon <= 1.0)) {
    throw ConfigError("mcts.epsilon must be in [0, 1]");
  }
}

CrossingSequence fifo(const CrossingSequence& previous, std::span<const Vehicle> vehicles) {
  auto active = [&](VehicleId id) {
    return std::any_of(vehicles.begin(), vehicles.end(),
                       [id](const Vehicle& v) { return v.id == id; });
  };
  CrossingSequence out;
  for (VehicleId id : previous) {
    if (active(id)) out.push_back(id);
  }
  std::vector<VehicleId> fresh;
  for (const auto& v : vehicles) {
    if (std::find(out.begin(), out.end(), v.id) == out.end()) fresh.push_back(v.id);
  }
  std::sort(fresh.begin(), fresh.end());
  out.insert(out.end(), fresh.begin(), fresh.end());
  return out;
}

CrossingSequence modified_fifo(std::span<const Vehicle> vehicles) {
  std::vector<const Vehicle*> order;
  for (const auto& v : vehicles) order.push_back(&v);
  std::stable_sort(order.begin(), order.end(), [](const Vehicle* a, const Vehicle* b) {
    if (a->distance != b->distance) return a->distance < b->distance;
    return a->id < b->id;
  });
  CrossingSequence out;
  for (const auto* v : order) out.push_back(v->id);
  return out;
}

std::vector<CrossingSequence> insertion_candidates(const CrossingSequence& previous,
                                                   VehicleId new_vehicle,
                                                   std::span<const Vehicle> vehicles) {
  auto lane_of = [&](VehicleId id) {
    for (const auto& v : vehicles) {
      if (v.id == id) return v.lane;
    }
    throw std::out_of_range("unknown vehicle id " + std::to_string(id));
  };
  const LaneId lane = lane_of(new_vehicle);
  // k = number of leading elements up to and including the same-lane predecessor.
  std::size_t k = 0;
  for (std::size_t p = 0; p < previous.size(); ++p) {
    if (lane_of(previous[p]) == lane) k = p + 1;
  }
  std::vector<CrossingSequence> out;
  for (std::size_t pos = previous.size() + 1; pos-- > k;) {
    CrossingSequence candidate = previous;
    candidate.insert(candidate.begin() + static_cast<std::ptrdiff_t>(pos), new_vehicle);
    out.push_back(std::move(candidate));
  }
  return out;
}

StrategyResult dynamic_resequencing(const SchedulingProblem& problem,
                                    const CrossingSequence& previous, VehicleId new_vehicle,
                                    double alpha) {
  const auto candidates = insertion_candidates(previous, new_vehicle, problem.vehicles());
  std::size_t best = 0;
  double best_j = problem.objective(candidates.front());
  for (std::size_t c = 1; c < candidates.size(); ++c) {
    const double j = problem.objective(candidates[c]);
    if (improves_enough(j, best_j, alpha)) {
      best = c;
      best_j = j;
    }
  }
  StrategyResult result;
  result.sequence = candidates[best];
  result.schedule = problem.propagate(result.sequence);
  result.stats.sequences_considered = candidates.size();
  return result;
}

}  // namespace crossflow
