#include "crossflow/audit.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace crossflow {

namespace {

struct Occupancy {
  double time;
  VehicleId id;
  Movement movement;
};

}  // namespace

AuditReport audit_safety(const History& history, const IntersectionGeometry& geometry,
                         const HeadwayConfig& headways, double gap, double tolerance) {
  AuditReport report;
  std::array<std::vector<Occupancy>, kSubzoneCount> by_subzone;
  for (const auto& r : history.vehicles) {
    const Route& route = geometry.route(r.lane, r.movement);
    const double length = geometry.lane_length(r.lane);
    for (std::size_t k = 0; k < route.subzones.size(); ++k) {
      const double t = r.trajectory.time_at_position(length + route.entry_distance[k]);
      if (!(t <= history.end_time)) continue;
      by_subzone[static_cast<std::size_t>(route.subzones[k] - 1)].push_back({t, r.id, r.movement});
    }
  }
  // Pair headways are the larger of the two classes, so checking neighbours in time suffices.
  for (std::size_t z = 0; z < kSubzoneCount; ++z) {
    auto& list = by_subzone[z];
    std::sort(list.begin(), list.end(), [](const Occupancy& a, const Occupancy& b) {
      return a.time != b.time ? a.time < b.time : a.id < b.id;
    });
    for (std::size_t i = 1; i < list.size(); ++i) {
      const double sep = list[i].time - list[i - 1].time;
      const double need = headways.between(list[i].movement, list[i - 1].movement);
      if (sep < need - tolerance) {
        ++report.lateral;
        std::ostringstream os;
        os << "subzone " << z + 1 << ": vehicles " << list[i - 1].id << " and " << list[i].id
           << " enter " << sep << " s apart (need " << need << ")";
        report.violations.push_back(os.str());
      }
    }
  }

  std::array<const VehicleRecord*, kLaneCount> previous{};
  for (const auto& r : history.vehicles) {
    const auto lane = static_cast<std::size_t>(r.lane - 1);
    const VehicleRecord* leader = previous[lane];
    previous[lane] = &r;
    if (!leader) continue;
    const double length = geometry.lane_length(r.lane);
    const double arrival = std::min(r.trajectory.time_at_position(length), history.end_time);
    const auto first = static_cast<long>(std::ceil(r.t0 / history.dt - 1e-9));
    const auto last = static_cast<long>(std::floor(arrival / history.dt + 1e-9));
    for (long k = first; k <= last; ++k) {
      const double t = static_cast<double>(k) * history.dt;
      const double g = leader->trajectory.position(t) - r.trajectory.position(t);
      if (g < gap - tolerance) {
        ++report.rear_end;
        std::ostringstream os;
        os << "lane " << r.lane << ": vehicle " << r.id << " is " << g << " m behind "
           << leader->id << " at t=" << t;
        report.violations.push_back(os.str());
        break;
      }
    }
  }
  return report;
}

AuditReport audit_safety(const History& history) {
  return audit_safety(history, history.geometry, history.headways, history.limits.gap);
}

}  // namespace crossflow
