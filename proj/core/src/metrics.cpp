#include "crossflow/metrics.hpp"

#include <cmath>

namespace crossflow {

namespace {

struct RunningMean {
  double sum = 0.0;
  std::size_t n = 0;

  void add(double x) {
    sum += x;
    ++n;
  }
  [[nodiscard]] double mean() const { return n ? sum / static_cast<double>(n) : 0.0; }
};

}  // namespace

MetricsReport collect_metrics(const History& history) {
  MetricsReport report;
  report.generated = history.generated;
  report.queued_at_end = history.queued_at_end;

  std::vector<double> delays;
  std::vector<double> travel;
  double energy_sum = 0.0;
  for (const auto& r : history.vehicles) {
    const double arrival = r.trajectory.time_at_position(r.lane_length);
    if (!(arrival <= history.end_time)) {
      ++report.excluded_in_system;
      continue;
    }
    VehicleMetrics m;
    m.id = r.id;
    m.lane = r.lane;
    m.movement = r.movement;
    m.t0 = r.t0;
    m.sigma = r.sigma_first;
    m.arrival = arrival;
    m.delay = arrival - r.sigma_first;
    m.energy = r.trajectory.truncated(arrival).energy();
    m.travel_time = arrival - r.t0;
    delays.push_back(m.delay);
    travel.push_back(m.travel_time);
    energy_sum += m.energy;
    report.vehicles.push_back(m);
  }
  report.vehicle_count = report.vehicles.size();

  auto mean_of = [](const std::vector<double>& xs) {
    double s = 0.0;
    for (double x : xs) s += x;
    return xs.empty() ? 0.0 : s / static_cast<double>(xs.size());
  };
  auto std_of = [](const std::vector<double>& xs, double mean) {
    double s = 0.0;
    for (double x : xs) s += (x - mean) * (x - mean);
    return xs.empty() ? 0.0 : std::sqrt(s / static_cast<double>(xs.size()));
  };
  report.mean_delay = mean_of(delays);
  report.std_delay = std_of(delays, report.mean_delay);
  report.mean_travel_time = mean_of(travel);
  report.std_travel_time = std_of(travel, report.mean_travel_time);
  report.mean_energy =
      report.vehicles.empty() ? 0.0 : energy_sum / static_cast<double>(report.vehicles.size());

  RunningMean compute;
  RunningMean considered;
  for (const auto& inv : history.invocations) {
    ++report.invocations;
    if (inv.in_window) ++report.window_invocations;
    if (!inv.exit_event) ++report.event_invocations;
    compute.add(inv.compute_time);
    considered.add(static_cast<double>(inv.sequences_considered));
  }
  report.mean_compute_time = compute.mean();
  report.mean_sequences_considered = considered.mean();
  return report;
}

}  // namespace crossflow
