#pragma once

#include <array>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "crossflow/geometry.hpp"
#include "crossflow/vehicle.hpp"

namespace crossflow {

/// Safety time headway (s) per movement class. A pair is separated by the larger of the two.
struct HeadwayConfig {
  double left = 1.5;
  double straight = 1.5;
  double right = 1.5;

  [[nodiscard]] double of(Movement m) const;
  [[nodiscard]] double between(Movement a, Movement b) const;
  [[nodiscard]] double max() const;
  void validate() const;
};

/// Total order over the vehicles still approaching the conflict zone.
using CrossingSequence = std::vector<VehicleId>;

/// b_{i,j} for one conflicting pair with first < second.
struct PairPriority {
  VehicleId first = 0;
  VehicleId second = 0;
  bool first_goes_first = true;

  friend bool operator==(const PairPriority&, const PairPriority&) = default;
};

using PriorityVector = std::vector<PairPriority>;

/// True when `sequence` is a permutation of the ids in `vehicles` and same-lane vehicles appear
/// in increasing id order.
bool is_feasible_sequence(const CrossingSequence& sequence, std::span<const Vehicle> vehicles);

/// Priorities for every conflicting pair, ordered (1,2), (1,3), ..., (n-1,n).
PriorityVector sequence_to_priorities(const CrossingSequence& sequence,
                                      std::span<const Vehicle> vehicles);

/// A sequence consistent with `priorities` and per-lane precedence; among several, the
/// lexicographically smallest. Throws std::invalid_argument when the priorities contain a cycle.
CrossingSequence priorities_to_sequence(const PriorityVector& priorities,
                                        std::span<const Vehicle> vehicles);

struct SubzoneArrival {
  SubzoneId subzone = 0;
  double time = 0.0;
};

struct ScheduledVehicle {
  VehicleId id = 0;
  double first_arrival = 0.0;
  std::vector<SubzoneArrival> arrivals;  // in route order
};

struct Schedule {
  std::vector<ScheduledVehicle> entries;  // in sequence order
  double objective = 0.0;                 // sum of first-subzone delays

  [[nodiscard]] const ScheduledVehicle* find(VehicleId id) const;
  /// Arrival of `id` at subzone `z`; NaN when absent.
  [[nodiscard]] double arrival(VehicleId id, SubzoneId z) const;
  [[nodiscard]] double first_arrival(VehicleId id) const;
};

/// Latest committed occupant of every subzone and lane. Vehicles propagated against this state
/// are placed after each of those occupants.
struct OccupancyState {
  static constexpr double kNone = -std::numeric_limits<double>::infinity();

  std::array<double, kSubzoneCount> subzone_time{kNone, kNone, kNone, kNone};
  std::array<Movement, kSubzoneCount> subzone_movement{};
  std::array<double, kLaneCount> lane_time{kNone, kNone, kNone, kNone};
  std::array<Movement, kLaneCount> lane_movement{};
};

/// Pre-indexed scheduling instance: vehicles plus the geometry data propagation needs.
class SchedulingProblem {
 public:
  SchedulingProblem(const IntersectionGeometry& geometry, const HeadwayConfig& headways,
                    std::vector<Vehicle> vehicles, OccupancyState seed = {});

  [[nodiscard]] std::size_t size() const { return vehicles_.size(); }
  [[nodiscard]] std::span<const Vehicle> vehicles() const { return vehicles_; }
  [[nodiscard]] const Vehicle& vehicle(std::size_t index) const { return vehicles_[index]; }
  [[nodiscard]] const OccupancyState& seed() const { return seed_; }
  [[nodiscard]] const HeadwayConfig& headways() const { return headways_; }

  /// Index of `id` in vehicles(); throws std::out_of_range for unknown ids.
  [[nodiscard]] std::size_t index_of(VehicleId id) const;

  /// Vehicle indices per lane (0-based lane index), in id order.
  [[nodiscard]] const std::array<std::vector<std::size_t>, kLaneCount>& lanes() const {
    return lanes_;
  }

  /// Earliest admissible first-subzone arrival of vehicle `index` after everything in `state`.
  [[nodiscard]] double first_arrival(std::size_t index, const OccupancyState& state) const;
  /// Records vehicle `index` crossing with first-subzone time `first`.
  void occupy(std::size_t index, double first, OccupancyState& state) const;
  /// a - sigma for vehicle `index`.
  [[nodiscard]] double delay(std::size_t index, double first) const {
    return first - vehicles_[index].sigma_first;
  }
  [[nodiscard]] std::span<const double> offsets(std::size_t index) const { return offsets_[index]; }

  /// Arrival times for `sequence` in one pass (see propagate_arrivals).
  [[nodiscard]] Schedule propagate(const CrossingSequence& sequence) const;
  /// Objective of propagate(sequence) without materialising the schedule.
  [[nodiscard]] double objective(const CrossingSequence& sequence) const;

 private:
  HeadwayConfig headways_;
  std::vector<Vehicle> vehicles_;
  std::vector<std::vector<double>> offsets_;
  std::array<std::vector<std::size_t>, kLaneCount> lanes_;
  std::vector<std::pair<VehicleId, std::size_t>> id_index_;  // sorted by id
  OccupancyState seed_;
};

/// Walks `sequence` once. Each vehicle's first-subzone arrival is the largest of its earliest
/// reachable time, the same-lane predecessor's arrival plus headway, and, for every subzone on
/// its route, the last occupant's arrival plus headway minus the in-zone offset. Later
/// subzones follow at the offsets. Objective is the summed first-subzone delay.
Schedule propagate_arrivals(const CrossingSequence& sequence, std::span<const Vehicle> vehicles,
                            const IntersectionGeometry& geometry, const HeadwayConfig& headways,
                            const OccupancyState& seed = {});

/// Re-checks every pairwise constraint of `schedule` from scratch; empty when it is valid.
std::vector<std::string> verify_schedule(const Schedule& schedule,
                                         std::span<const Vehicle> vehicles,
                                         const IntersectionGeometry& geometry,
                                         const HeadwayConfig& headways, double tolerance = 1e-9);

/// Number of conflicting pairs whose relative order differs between `sequence` and
/// `reference`. Pairs with a vehicle missing from either sequence are skipped.
std::size_t order_distance(const CrossingSequence& sequence, const CrossingSequence& reference,
                           std::span<const Vehicle> vehicles);

}  // namespace crossflow
