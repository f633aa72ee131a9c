#include "crossflow/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "crossflow/errors.hpp"
#include "crossflow/vehicle.hpp"

namespace crossflow {

namespace {

std::size_t lane_index(LaneId lane) {
  if (lane < 1 || lane > kLaneCount) {
    throw ConfigError("lane id must be in 1..4, got " + std::to_string(lane));
  }
  return static_cast<std::size_t>(lane - 1);
}

SubzoneId ahead_of(SubzoneId z) { return z % kSubzoneCount + 1; }

bool adjacent(SubzoneId a, SubzoneId b) {
  const int d = std::abs(a - b);
  return d == 1 || d == 3;
}

}  // namespace

std::string_view to_string(Movement m) {
  switch (m) {
    case Movement::left:
      return "left";
    case Movement::straight:
      return "straight";
    case Movement::right:
      return "right";
  }
  return "?";
}

Movement parse_movement(std::string_view name) {
  for (Movement m : kMovements) {
    if (to_string(m) == name) return m;
  }
  throw ConfigError("unknown movement '" + std::string(name) + "'");
}

bool Route::contains(SubzoneId z) const {
  return std::find(subzones.begin(), subzones.end(), z) != subzones.end();
}

RouteTable default_route_table(double side) {
  // Conflict zone is the square [-s, s]^2; approaching lane centres sit at +-s/2.
  const double right_arc = std::numbers::pi / 4.0 * side;           // radius s/2
  const double left_to_second = 1.5 * side * std::asin(2.0 / 3.0);  // radius 3s/2
  const double left_clear = 1.5 * side * std::acos(2.0 / 3.0);

  RouteTable table;
  for (LaneId lane = 1; lane <= kLaneCount; ++lane) {
    const SubzoneId entry = (lane + 1) % kLaneCount + 1;
    const SubzoneId next = ahead_of(entry);
    auto& row = table[lane_index(lane)];
    row[static_cast<std::size_t>(Movement::left)] = Route{{entry, next}, {0.0, left_to_second}, left_clear};
    row[static_cast<std::size_t>(Movement::straight)] = Route{{entry, next}, {0.0, side}, 2.0 * side};
    row[static_cast<std::size_t>(Movement::right)] = Route{{entry}, {0.0}, right_arc};
  }
  return table;
}

IntersectionGeometry::IntersectionGeometry(std::array<double, kLaneCount> lane_lengths,
                                           double subzone_side, double conflict_zone_speed,
                                           RouteTable routes)
    : lane_lengths_(lane_lengths),
      subzone_side_(subzone_side),
      speed_(conflict_zone_speed),
      routes_(std::move(routes)) {
  validate();
}

IntersectionGeometry IntersectionGeometry::symmetric(double lane_length, double subzone_side,
                                                     double conflict_zone_speed) {
  return IntersectionGeometry({lane_length, lane_length, lane_length, lane_length}, subzone_side,
                              conflict_zone_speed, default_route_table(subzone_side));
}

double IntersectionGeometry::lane_length(LaneId lane) const {
  return lane_lengths_[lane_index(lane)];
}

SubzoneId IntersectionGeometry::entry_subzone(LaneId lane) const {
  return routes_[lane_index(lane)][0].first();
}

const Route& IntersectionGeometry::route(LaneId lane, Movement movement) const {
  return routes_[lane_index(lane)][static_cast<std::size_t>(movement)];
}

IntersectionGeometry IntersectionGeometry::with_lane_length(LaneId lane, double length) const {
  auto lengths = lane_lengths_;
  lengths[lane_index(lane)] = length;
  return IntersectionGeometry(lengths, subzone_side_, speed_, routes_);
}

IntersectionGeometry IntersectionGeometry::with_conflict_zone_speed(double speed) const {
  return IntersectionGeometry(lane_lengths_, subzone_side_, speed, routes_);
}

IntersectionGeometry IntersectionGeometry::with_route(LaneId lane, Movement movement,
                                                      Route route) const {
  auto routes = routes_;
  routes[lane_index(lane)][static_cast<std::size_t>(movement)] = std::move(route);
  return IntersectionGeometry(lane_lengths_, subzone_side_, speed_, std::move(routes));
}

void IntersectionGeometry::validate() const {
  for (double length : lane_lengths_) {
    if (!(length > 0.0)) throw ConfigError("lane lengths must be positive");
  }
  if (!(subzone_side_ > 0.0)) throw ConfigError("subzone side must be positive");
  if (!(speed_ > 0.0)) throw ConfigError("conflict-zone speed must be positive");

  for (LaneId lane = 1; lane <= kLaneCount; ++lane) {
    const auto& row = routes_[lane_index(lane)];
    const std::string where = "route table lane " + std::to_string(lane);
    for (Movement m : kMovements) {
      const Route& r = row[static_cast<std::size_t>(m)];
      const std::string here = where + " " + std::string(to_string(m));
      if (r.subzones.empty() || r.subzones.size() > 3) {
        throw ConfigError(here + ": routes must cover 1-3 subzones");
      }
      if (r.entry_distance.size() != r.subzones.size()) {
        throw ConfigError(here + ": one entry distance per subzone required");
      }
      if (r.entry_distance.front() != 0.0) {
        throw ConfigError(here + ": first entry distance must be 0");
      }
      for (std::size_t k = 0; k < r.subzones.size(); ++k) {
        const SubzoneId z = r.subzones[k];
        if (z < 1 || z > kSubzoneCount) throw ConfigError(here + ": subzone ids must be in 1..4");
        for (std::size_t j = 0; j < k; ++j) {
          if (r.subzones[j] == z) throw ConfigError(here + ": subzones must be distinct");
        }
        if (k > 0) {
          if (!adjacent(r.subzones[k - 1], z)) {
            throw ConfigError(here + ": consecutive subzones must share an edge");
          }
          if (!(r.entry_distance[k] > r.entry_distance[k - 1])) {
            throw ConfigError(here + ": entry distances must be strictly increasing");
          }
        }
      }
      if (!(r.clear_distance > r.entry_distance.back())) {
        throw ConfigError(here + ": clear distance must exceed the last entry distance");
      }
      if (r.first() != row[0].first()) {
        throw ConfigError(where + ": all movements must share the lane's entry subzone");
      }
    }
  }
}

const Route& route_of(const IntersectionGeometry& geometry, LaneId lane, Movement movement) {
  return geometry.route(lane, movement);
}

std::vector<double> subzone_offsets(const IntersectionGeometry& geometry, const Route& route) {
  std::vector<double> offsets;
  offsets.reserve(route.entry_distance.size());
  for (double d : route.entry_distance) offsets.push_back(d / geometry.conflict_zone_speed());
  return offsets;
}

bool conflicting(const Vehicle& a, const Vehicle& b) {
  if (a.lane == b.lane) return false;
  return std::any_of(a.route.subzones.begin(), a.route.subzones.end(),
                     [&](SubzoneId z) { return b.route.contains(z); });
}

std::vector<VehicleId> conflict_set(const Vehicle& vehicle, SubzoneId z,
                                    std::span<const Vehicle> active) {
  std::vector<VehicleId> ids;
  if (!vehicle.route.contains(z)) return ids;
  for (const Vehicle& other : active) {
    if (other.id == vehicle.id || other.lane == vehicle.lane) continue;
    if (other.route.contains(z)) ids.push_back(other.id);
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

}  // namespace crossflow
