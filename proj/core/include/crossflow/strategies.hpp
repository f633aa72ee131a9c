#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

#include "crossflow/scheduling.hpp"

namespace crossflow {

enum class StrategyKind : std::uint8_t { fifo, modified_fifo, dr, mcts };

std::string_view to_string(StrategyKind kind);
/// Throws ConfigError on an unknown name.
StrategyKind parse_strategy(std::string_view name);
/// fifo and dr react to entry (and, for fifo, exit) events; the others run every period.
bool is_event_driven(StrategyKind kind);

struct MctsConfig {
  std::size_t iterations = 2000;
  double wall_clock_ms = 0.0;  // 0 disables the wall-clock budget
  double exploration_c = 0.7;
  double beta = 0.0;  // penalty weight on order distance to the reference, <= 0
  std::size_t rollouts = 1;
  double epsilon = 0.1;  // probability a rollout step picks a random lane front
};

struct StrategyConfig {
  StrategyKind kind = StrategyKind::fifo;
  double period = 2.0;  // s, time-driven strategies
  double alpha = 0.0;   // DR balancing factor
  MctsConfig mcts;

  void validate() const;
};

struct StrategyInvocationStats {
  std::size_t sequences_considered = 1;
  double compute_time = 0.0;  // s
};

struct StrategyResult {
  CrossingSequence sequence;
  Schedule schedule;
  StrategyInvocationStats stats;
};

/// `previous` without ids missing from `vehicles`, followed by the remaining ids in entry order.
CrossingSequence fifo(const CrossingSequence& previous, std::span<const Vehicle> vehicles);

/// Ascending distance to the conflict zone, ties by id.
CrossingSequence modified_fifo(std::span<const Vehicle> vehicles);

/// Inserts `new_vehicle` into `previous` (which must not contain it) at each position after its
/// same-lane predecessor, scanning from the tail. A position replaces the incumbent only when
/// J_new < J_best - alpha * J_new.
StrategyResult dynamic_resequencing(const SchedulingProblem& problem,
                                    const CrossingSequence& previous, VehicleId new_vehicle,
                                    double alpha);

/// Candidate insertion sequences dynamic_resequencing evaluates, tail first.
std::vector<CrossingSequence> insertion_candidates(const CrossingSequence& previous,
                                                   VehicleId new_vehicle,
                                                   std::span<const Vehicle> vehicles);

/// Balancing-factor acceptance test.
inline bool improves_enough(double j_new, double j_best, double alpha) {
  return j_new < j_best - alpha * j_new;
}

}  // namespace crossflow
