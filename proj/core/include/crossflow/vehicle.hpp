#pragma once

#include "crossflow/geometry.hpp"

namespace crossflow {

/// Scheduling view of one vehicle inside the control zone.
struct Vehicle {
  VehicleId id = 0;
  LaneId lane = 1;
  Movement movement = Movement::straight;
  Route route;
  double t0 = 0.0;  // control-zone entry time (s)
  double v0 = 0.0;  // entry speed (m/s)
  /// Minimum arrival time at the first subzone measured from the entry state; delays are
  /// measured against it.
  double sigma_first = 0.0;
  /// Earliest arrival still reachable from the vehicle's current state. Equal to sigma_first
  /// for a fresh vehicle; never smaller once the vehicle has been slowed down.
  double earliest_first = 0.0;
  /// Remaining distance (m) to the conflict zone at the snapshot time.
  double distance = 0.0;
};

}  // namespace crossflow
