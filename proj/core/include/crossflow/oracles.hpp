#pragma once

#include <cstddef>
#include <cstdint>

#include "crossflow/dynamics.hpp"
#include "crossflow/random.hpp"
#include "crossflow/scheduling.hpp"

namespace crossflow {

inline constexpr std::size_t kExhaustiveCap = 10;
inline constexpr std::size_t kBranchAndBoundCap = 14;

struct OracleResult {
  CrossingSequence sequence;
  Schedule schedule;
  std::uint64_t nodes = 0;  // complete sequences (exhaustive) or expanded nodes (B&B)
};

/// Enumerates every per-lane-order-preserving interleaving. Ties keep the lexicographically
/// smallest sequence. Throws OracleCapError above `cap` vehicles.
OracleResult exhaustive_oracle(const SchedulingProblem& problem, std::size_t cap = kExhaustiveCap);

/// Best-first search over partial sequences. A partial node's bound adds, for each unplaced
/// vehicle, the delay it already suffers against the partial occupancy. Returns the same
/// optimum and tie-break as exhaustive_oracle.
OracleResult branch_and_bound_oracle(const SchedulingProblem& problem,
                                     std::size_t cap = kBranchAndBoundCap);

/// Multinomial n! / prod(n_lane!) of feasible sequences.
std::uint64_t count_feasible_sequences(const SchedulingProblem& problem);

/// a_max_z + N * dt
double big_m_bound(double latest_min_arrival, std::size_t vehicle_count, double headway);
/// big_m_bound over the latest minimum subzone arrival, vehicle count and largest headway.
double big_m(const SchedulingProblem& problem);

/// Static snapshot of `n` vehicles with random lanes, movements, distances (10-150 m) and
/// speeds (5 m/s to v_f), each already up to 5 s behind its minimum arrival. Ids follow
/// distance, so same-lane order is physical order.
SchedulingProblem random_instance(std::size_t n, Rng& rng,
                                  const IntersectionGeometry& geometry = IntersectionGeometry::symmetric(),
                                  const HeadwayConfig& headways = {},
                                  const KinematicLimits& limits = {});

}  // namespace crossflow
