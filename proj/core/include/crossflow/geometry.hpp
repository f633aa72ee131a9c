#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace crossflow {

inline constexpr int kLaneCount = 4;
inline constexpr int kSubzoneCount = 4;

using LaneId = int;     // 1..4
using SubzoneId = int;  // 1..4
using VehicleId = int;  // positive, increasing with entry time

enum class Movement : std::uint8_t { left, straight, right };

inline constexpr std::array<Movement, 3> kMovements{Movement::left, Movement::straight,
                                                    Movement::right};

std::string_view to_string(Movement m);
/// Throws ConfigError on anything other than left | straight | right.
Movement parse_movement(std::string_view name);

/// Path of one (lane, movement) pair through the conflict zone.
struct Route {
  std::vector<SubzoneId> subzones;
  /// Metres travelled from the conflict-zone entry to the entry of each subzone; front() == 0.
  std::vector<double> entry_distance;
  /// Metres travelled from the conflict-zone entry until the last subzone is cleared.
  double clear_distance = 0.0;

  [[nodiscard]] SubzoneId first() const { return subzones.front(); }
  [[nodiscard]] bool contains(SubzoneId z) const;

  friend bool operator==(const Route&, const Route&) = default;
};

/// Indexed [lane - 1][movement].
using RouteTable = std::array<std::array<Route, 3>, kLaneCount>;

/// Subzones 1..4 are numbered counterclockwise (1 = NE, 2 = NW, 3 = SW, 4 = SE); lanes 1..4 are
/// the west, south, east and north approaches under right-hand traffic, so lane l enters through
/// subzone ((l + 1) mod 4) + 1. Right turns clip the entry subzone; straight and left movements
/// run through the entry subzone and the one straight ahead of it. Straight paths are chords,
/// turns are arcs of the quarter circle that joins the approach and exit lane centres.
RouteTable default_route_table(double subzone_side);

class IntersectionGeometry {
 public:
  IntersectionGeometry(std::array<double, kLaneCount> lane_lengths, double subzone_side,
                       double conflict_zone_speed, RouteTable routes);

  /// Four equal lanes with the default route table.
  static IntersectionGeometry symmetric(double lane_length = 250.0, double subzone_side = 3.5,
                                        double conflict_zone_speed = 15.0);

  [[nodiscard]] double lane_length(LaneId lane) const;
  [[nodiscard]] const std::array<double, kLaneCount>& lane_lengths() const { return lane_lengths_; }
  [[nodiscard]] double subzone_side() const { return subzone_side_; }
  [[nodiscard]] double conflict_zone_speed() const { return speed_; }
  [[nodiscard]] const RouteTable& route_table() const { return routes_; }
  [[nodiscard]] SubzoneId entry_subzone(LaneId lane) const;

  /// Throws ConfigError for a lane outside 1..4.
  [[nodiscard]] const Route& route(LaneId lane, Movement movement) const;

  [[nodiscard]] IntersectionGeometry with_lane_length(LaneId lane, double length) const;
  [[nodiscard]] IntersectionGeometry with_conflict_zone_speed(double speed) const;
  [[nodiscard]] IntersectionGeometry with_route(LaneId lane, Movement movement, Route route) const;

 private:
  void validate() const;

  std::array<double, kLaneCount> lane_lengths_;
  double subzone_side_;
  double speed_;
  RouteTable routes_;
};

/// Z_i for a vehicle entering on `lane` with `movement`.
const Route& route_of(const IntersectionGeometry& geometry, LaneId lane, Movement movement);

/// Time offsets (s) of each subzone entry relative to the first, at the conflict-zone speed.
std::vector<double> subzone_offsets(const IntersectionGeometry& geometry, const Route& route);

struct Vehicle;

/// Ids of every other vehicle in `active` whose route also uses `z`, excluding vehicles on the
/// same lane as `vehicle` (those are separated by the rear-end constraint). Sorted ascending.
std::vector<VehicleId> conflict_set(const Vehicle& vehicle, SubzoneId z,
                                    std::span<const Vehicle> active);

/// True when the two vehicles are on different lanes and share at least one subzone.
bool conflicting(const Vehicle& a, const Vehicle& b);

}  // namespace crossflow
