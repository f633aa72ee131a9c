#pragma once

#include <cstddef>
#include <vector>

#include "crossflow/simulator.hpp"

namespace crossflow {

struct VehicleMetrics {
  VehicleId id = 0;
  LaneId lane = 1;
  Movement movement = Movement::straight;
  double t0 = 0.0;
  double sigma = 0.0;
  double arrival = 0.0;
  double delay = 0.0;
  double energy = 0.0;
  double travel_time = 0.0;
};

struct MetricsReport {
  std::vector<VehicleMetrics> vehicles;  // vehicles that reached the conflict zone
  std::size_t vehicle_count = 0;
  double mean_delay = 0.0;
  double std_delay = 0.0;
  double mean_energy = 0.0;
  double mean_travel_time = 0.0;
  double std_travel_time = 0.0;

  std::size_t invocations = 0;
  std::size_t window_invocations = 0;  // at or before the arrival duration
  std::size_t event_invocations = 0;   // everything except exit events
  double mean_compute_time = 0.0;
  double mean_sequences_considered = 0.0;

  std::size_t generated = 0;
  std::size_t excluded_in_system = 0;  // still before the conflict zone at the end
  std::size_t queued_at_end = 0;
};

/// Delay against the minimum arrival from the actual entry state, energy as the integral of
/// u^2 up to the conflict zone, aggregates as means and population standard deviations.
MetricsReport collect_metrics(const History& history);

}  // namespace crossflow
