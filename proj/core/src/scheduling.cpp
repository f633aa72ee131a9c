#include "crossflow/scheduling.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <sstream>
#include <stdexcept>

#include "crossflow/errors.hpp"

namespace crossflow {

namespace {

std::vector<std::size_t> positions_of(const CrossingSequence& sequence,
                                      std::span<const Vehicle> vehicles) {
  // position[k] = index of vehicles[k] in sequence, or npos.
  std::vector<std::size_t> position(vehicles.size(), std::string::npos);
  for (std::size_t k = 0; k < vehicles.size(); ++k) {
    auto it = std::find(sequence.begin(), sequence.end(), vehicles[k].id);
    if (it != sequence.end()) position[k] = static_cast<std::size_t>(it - sequence.begin());
  }
  return position;
}

}  // namespace

double HeadwayConfig::of(Movement m) const {
  switch (m) {
    case Movement::left:
      return left;
    case Movement::straight:
      return straight;
    case Movement::right:
      return right;
  }
  return straight;
}

double HeadwayConfig::between(Movement a, Movement b) const { return std::max(of(a), of(b)); }

double HeadwayConfig::max() const { return std::max({left, straight, right}); }

void HeadwayConfig::validate() const {
  if (!(left > 0.0 && straight > 0.0 && right > 0.0)) {
    throw ConfigError("headways must be positive");
  }
}

bool is_feasible_sequence(const CrossingSequence& sequence, std::span<const Vehicle> vehicles) {
  if (sequence.size() != vehicles.size()) return false;
  std::array<VehicleId, kLaneCount> last_on_lane{0, 0, 0, 0};
  std::vector<VehicleId> seen;
  seen.reserve(sequence.size());
  for (VehicleId id : sequence) {
    auto it = std::find_if(vehicles.begin(), vehicles.end(),
                           [id](const Vehicle& v) { return v.id == id; });
    if (it == vehicles.end()) return false;
    if (std::find(seen.begin(), seen.end(), id) != seen.end()) return false;
    seen.push_back(id);
    auto& last = last_on_lane[static_cast<std::size_t>(it->lane - 1)];
    if (id < last) return false;
    last = id;
  }
  return true;
}

PriorityVector sequence_to_priorities(const CrossingSequence& sequence,
                                      std::span<const Vehicle> vehicles) {
  std::vector<const Vehicle*> by_id;
  for (const auto& v : vehicles) by_id.push_back(&v);
  std::sort(by_id.begin(), by_id.end(), [](auto* a, auto* b) { return a->id < b->id; });
  auto pos = [&](VehicleId id) {
    return std::find(sequence.begin(), sequence.end(), id) - sequence.begin();
  };
  PriorityVector out;
  for (std::size_t i = 0; i < by_id.size(); ++i) {
    for (std::size_t j = i + 1; j < by_id.size(); ++j) {
      if (!conflicting(*by_id[i], *by_id[j])) continue;
      out.push_back({by_id[i]->id, by_id[j]->id, pos(by_id[i]->id) < pos(by_id[j]->id)});
    }
  }
  return out;
}

CrossingSequence priorities_to_sequence(const PriorityVector& priorities,
                                        std::span<const Vehicle> vehicles) {
  const std::size_t n = vehicles.size();
  std::vector<std::vector<std::size_t>> after(n);
  std::vector<int> indegree(n, 0);
  auto index = [&](VehicleId id) {
    for (std::size_t k = 0; k < n; ++k) {
      if (vehicles[k].id == id) return k;
    }
    throw std::invalid_argument("priority names unknown vehicle " + std::to_string(id));
  };
  auto edge = [&](std::size_t from, std::size_t to) {
    after[from].push_back(to);
    ++indegree[to];
  };
  for (const auto& p : priorities) {
    const auto a = index(p.first);
    const auto b = index(p.second);
    if (p.first_goes_first) {
      edge(a, b);
    } else {
      edge(b, a);
    }
  }
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      if (vehicles[a].lane == vehicles[b].lane && vehicles[a].id < vehicles[b].id) edge(a, b);
    }
  }
  using Item = std::pair<VehicleId, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> ready;
  for (std::size_t k = 0; k < n; ++k) {
    if (indegree[k] == 0) ready.emplace(vehicles[k].id, k);
  }
  CrossingSequence out;
  while (!ready.empty()) {
    const auto [id, k] = ready.top();
    ready.pop();
    out.push_back(id);
    for (std::size_t next : after[k]) {
      if (--indegree[next] == 0) ready.emplace(vehicles[next].id, next);
    }
  }
  if (out.size() != n) throw std::invalid_argument("priorities contain a cycle");
  return out;
}

const ScheduledVehicle* Schedule::find(VehicleId id) const {
  for (const auto& e : entries) {
    if (e.id == id) return &e;
  }
  return nullptr;
}

double Schedule::arrival(VehicleId id, SubzoneId z) const {
  if (const auto* e = find(id)) {
    for (const auto& a : e->arrivals) {
      if (a.subzone == z) return a.time;
    }
  }
  return std::nan("");
}

double Schedule::first_arrival(VehicleId id) const {
  const auto* e = find(id);
  return e ? e->first_arrival : std::nan("");
}

SchedulingProblem::SchedulingProblem(const IntersectionGeometry& geometry,
                                     const HeadwayConfig& headways, std::vector<Vehicle> vehicles,
                                     OccupancyState seed)
    : headways_(headways), vehicles_(std::move(vehicles)), seed_(seed) {
  offsets_.reserve(vehicles_.size());
  id_index_.reserve(vehicles_.size());
  for (std::size_t k = 0; k < vehicles_.size(); ++k) {
    const Vehicle& v = vehicles_[k];
    if (v.lane < 1 || v.lane > kLaneCount) throw ConfigError("vehicle lane must be in 1..4");
    offsets_.push_back(subzone_offsets(geometry, v.route));
    id_index_.emplace_back(v.id, k);
  }
  std::sort(id_index_.begin(), id_index_.end());
  for (std::size_t k = 1; k < id_index_.size(); ++k) {
    if (id_index_[k].first == id_index_[k - 1].first) {
      throw std::invalid_argument("duplicate vehicle id " + std::to_string(id_index_[k].first));
    }
  }
  for (const auto& [id, k] : id_index_) {
    lanes_[static_cast<std::size_t>(vehicles_[k].lane - 1)].push_back(k);
  }
}

std::size_t SchedulingProblem::index_of(VehicleId id) const {
  auto it = std::lower_bound(id_index_.begin(), id_index_.end(), std::make_pair(id, std::size_t{0}));
  if (it == id_index_.end() || it->first != id) {
    throw std::out_of_range("unknown vehicle id " + std::to_string(id));
  }
  return it->second;
}

double SchedulingProblem::first_arrival(std::size_t index, const OccupancyState& state) const {
  const Vehicle& v = vehicles_[index];
  double a = std::max(v.earliest_first, v.sigma_first);
  const auto lane = static_cast<std::size_t>(v.lane - 1);
  if (state.lane_time[lane] != OccupancyState::kNone) {
    a = std::max(a, state.lane_time[lane] + headways_.between(state.lane_movement[lane], v.movement));
  }
  const auto& offsets = offsets_[index];
  for (std::size_t k = 0; k < v.route.subzones.size(); ++k) {
    const auto z = static_cast<std::size_t>(v.route.subzones[k] - 1);
    if (state.subzone_time[z] == OccupancyState::kNone) continue;
    a = std::max(a, state.subzone_time[z] +
                        headways_.between(state.subzone_movement[z], v.movement) - offsets[k]);
  }
  return a;
}

void SchedulingProblem::occupy(std::size_t index, double first, OccupancyState& state) const {
  const Vehicle& v = vehicles_[index];
  const auto lane = static_cast<std::size_t>(v.lane - 1);
  state.lane_time[lane] = first;
  state.lane_movement[lane] = v.movement;
  const auto& offsets = offsets_[index];
  for (std::size_t k = 0; k < v.route.subzones.size(); ++k) {
    const auto z = static_cast<std::size_t>(v.route.subzones[k] - 1);
    state.subzone_time[z] = first + offsets[k];
    state.subzone_movement[z] = v.movement;
  }
}

Schedule SchedulingProblem::propagate(const CrossingSequence& sequence) const {
  Schedule schedule;
  schedule.entries.reserve(sequence.size());
  OccupancyState state = seed_;
  for (VehicleId id : sequence) {
    const std::size_t k = index_of(id);
    const double first = first_arrival(k, state);
    occupy(k, first, state);
    ScheduledVehicle entry{id, first, {}};
    const Vehicle& v = vehicles_[k];
    for (std::size_t j = 0; j < v.route.subzones.size(); ++j) {
      entry.arrivals.push_back({v.route.subzones[j], first + offsets_[k][j]});
    }
    schedule.objective += delay(k, first);
    schedule.entries.push_back(std::move(entry));
  }
  return schedule;
}

double SchedulingProblem::objective(const CrossingSequence& sequence) const {
  OccupancyState state = seed_;
  double total = 0.0;
  for (VehicleId id : sequence) {
    const std::size_t k = index_of(id);
    const double first = first_arrival(k, state);
    occupy(k, first, state);
    total += delay(k, first);
  }
  return total;
}

Schedule propagate_arrivals(const CrossingSequence& sequence, std::span<const Vehicle> vehicles,
                            const IntersectionGeometry& geometry, const HeadwayConfig& headways,
                            const OccupancyState& seed) {
  SchedulingProblem problem(geometry, headways, {vehicles.begin(), vehicles.end()}, seed);
  return problem.propagate(sequence);
}

std::vector<std::string> verify_schedule(const Schedule& schedule,
                                         std::span<const Vehicle> vehicles,
                                         const IntersectionGeometry& geometry,
                                         const HeadwayConfig& headways, double tolerance) {
  std::vector<std::string> issues;
  auto report = [&](auto&&... parts) {
    std::ostringstream os;
    (os << ... << parts);
    issues.push_back(os.str());
  };
  double objective = 0.0;
  for (const auto& v : vehicles) {
    const auto* e = schedule.find(v.id);
    if (!e) {
      report("vehicle ", v.id, " missing from schedule");
      continue;
    }
    if (e->first_arrival < v.sigma_first - tolerance) {
      report("vehicle ", v.id, " arrives before its minimum arrival time");
    }
    objective += e->first_arrival - v.sigma_first;
    const auto offsets = subzone_offsets(geometry, v.route);
    if (e->arrivals.size() != v.route.subzones.size()) {
      report("vehicle ", v.id, " has ", e->arrivals.size(), " subzone arrivals, expected ",
             v.route.subzones.size());
      continue;
    }
    for (std::size_t k = 0; k < offsets.size(); ++k) {
      if (e->arrivals[k].subzone != v.route.subzones[k] ||
          std::abs(e->arrivals[k].time - (e->first_arrival + offsets[k])) > tolerance) {
        report("vehicle ", v.id, " subzone ", v.route.subzones[k], " time off its route offset");
      }
    }
  }
  for (std::size_t i = 0; i < vehicles.size(); ++i) {
    for (std::size_t j = i + 1; j < vehicles.size(); ++j) {
      const Vehicle& a = vehicles[i];
      const Vehicle& b = vehicles[j];
      const double h = headways.between(a.movement, b.movement);
      if (a.lane == b.lane) {
        const Vehicle& lead = a.id < b.id ? a : b;
        const Vehicle& follow = a.id < b.id ? b : a;
        const double gap = schedule.first_arrival(follow.id) - schedule.first_arrival(lead.id);
        if (!(gap >= h - tolerance)) {
          report("rear-end: vehicle ", follow.id, " follows ", lead.id, " by ", gap, " s");
        }
      }
      for (SubzoneId z : a.route.subzones) {
        if (!b.route.contains(z)) continue;
        const double gap = std::abs(schedule.arrival(a.id, z) - schedule.arrival(b.id, z));
        if (!(gap >= h - tolerance)) {
          report("lateral: vehicles ", a.id, " and ", b.id, " share subzone ", z, " ", gap,
                 " s apart");
        }
      }
    }
  }
  if (std::abs(objective - schedule.objective) > tolerance * std::max(1.0, std::abs(objective)) &&
      std::abs(objective - schedule.objective) > 1e-6) {
    report("objective ", schedule.objective, " differs from recomputed ", objective);
  }
  return issues;
}

std::size_t order_distance(const CrossingSequence& sequence, const CrossingSequence& reference,
                           std::span<const Vehicle> vehicles) {
  const auto pos = positions_of(sequence, vehicles);
  const auto ref = positions_of(reference, vehicles);
  std::size_t count = 0;
  for (std::size_t i = 0; i < vehicles.size(); ++i) {
    if (pos[i] == std::string::npos || ref[i] == std::string::npos) continue;
    for (std::size_t j = i + 1; j < vehicles.size(); ++j) {
      if (pos[j] == std::string::npos || ref[j] == std::string::npos) continue;
      if (!conflicting(vehicles[i], vehicles[j])) continue;
      if ((pos[i] < pos[j]) != (ref[i] < ref[j])) ++count;
    }
  }
  return count;
}

}  // namespace crossflow
