#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "crossflow/simulator.hpp"

namespace crossflow {

struct AuditReport {
  std::size_t lateral = 0;   // subzone headway breaches
  std::size_t rear_end = 0;  // same-lane gap breaches
  std::vector<std::string> violations;

  [[nodiscard]] bool clean() const { return violations.empty(); }
};

/// Re-derives subzone entry times and same-lane gaps from the realized trajectories alone.
/// Consecutive occupants of a subzone must be at least the pair headway apart; followers must
/// stay `gap` behind their lane leader at every simulation step while in the control zone.
AuditReport audit_safety(const History& history, const IntersectionGeometry& geometry,
                         const HeadwayConfig& headways, double gap, double tolerance = 1e-6);

/// audit_safety with the geometry, headways and gap recorded in `history`.
AuditReport audit_safety(const History& history);

}  // namespace crossflow
