#include "crossflow/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>

#include "crossflow/errors.hpp"

namespace crossflow {

namespace {

constexpr double kBoundTol = 1e-9;
constexpr double kCheckGrid = 0.01;
constexpr double kInf = std::numeric_limits<double>::infinity();

double piece_position(const ControlPiece& p, double tau) {
  return p.x_begin + p.v_begin * tau + p.control * tau * tau / 2.0 + p.jerk * tau * tau * tau / 6.0;
}

double piece_velocity(const ControlPiece& p, double tau) {
  return p.v_begin + p.control * tau + p.jerk * tau * tau / 2.0;
}

double piece_energy(const ControlPiece& p) {
  const double len = p.t_end - p.t_begin;
  return p.control * p.control * len + p.control * p.jerk * len * len +
         p.jerk * p.jerk * len * len * len / 3.0;
}

// Three-phase profile: constant acceleration from v0 to `cruise`, hold, constant acceleration
// to v_f. Ramp magnitudes are `scale` times the acceleration limits.
struct Ramps {
  double up;
  double down;

  [[nodiscard]] double duration(double from, double to) const {
    return to >= from ? (to - from) / up : (from - to) / down;
  }
};

struct ThreePhase {
  double v0, vf, horizon;
  Ramps ramps;

  [[nodiscard]] double ramp_time(double c) const {
    return ramps.duration(v0, c) + ramps.duration(c, vf);
  }

  [[nodiscard]] double distance(double c) const {
    const double t1 = ramps.duration(v0, c);
    const double t3 = ramps.duration(c, vf);
    return (v0 + c) / 2.0 * t1 + c * (horizon - t1 - t3) + (c + vf) / 2.0 * t3;
  }

  // Cruise speeds whose ramps fit in the horizon: an interval because ramp_time is convex.
  [[nodiscard]] std::optional<std::pair<double, double>> cruise_range(double v_min,
                                                                     double v_max) const {
    const double lo_v = std::min(v0, vf);
    const double hi_v = std::max(v0, vf);
    if (ramp_time(lo_v) > horizon + kBoundTol) return std::nullopt;
    const double inv_up = 1.0 / ramps.up;
    const double inv_down = 1.0 / ramps.down;
    // Below both: (v0 - c)/down + (vf - c)/up == horizon.
    double c_lo = (v0 * inv_down + vf * inv_up - horizon) / (inv_down + inv_up);
    // Above both: (c - v0)/up + (c - vf)/down == horizon.
    double c_hi = (horizon + v0 * inv_up + vf * inv_down) / (inv_up + inv_down);
    c_lo = std::min(c_lo, lo_v);
    c_hi = std::max(c_hi, hi_v);
    c_lo = std::max(c_lo, v_min);
    c_hi = std::min(c_hi, v_max);
    if (c_lo > c_hi) return std::nullopt;
    return std::make_pair(c_lo, c_hi);
  }
};

enum class Reach { ok, too_short, too_long };

Reach reachable(const ThreePhase& shape, double target, const KinematicLimits& limits) {
  const auto range = shape.cruise_range(limits.v_min, limits.v_max);
  if (!range) return Reach::too_short;
  if (target > shape.distance(range->second) + 1e-9) return Reach::too_short;
  if (target < shape.distance(range->first) - 1e-9) return Reach::too_long;
  return Reach::ok;
}

Trajectory build_three_phase(double t0, double x0, double v0, double target_x, double arrival,
                             const KinematicLimits& limits, double scale) {
  const double horizon = arrival - t0;
  const double distance = target_x - x0;
  ThreePhase shape{v0, limits.v_f, horizon, Ramps{limits.a_max * scale, -limits.a_min * scale}};
  const auto range = shape.cruise_range(limits.v_min, limits.v_max);
  if (!range) throw InfeasibleError("horizon too short: no ramp fits the time window");

  double c_lo = range->first;
  double c_hi = range->second;
  for (int it = 0; it < 200 && c_hi - c_lo > 1e-14; ++it) {
    const double mid = 0.5 * (c_lo + c_hi);
    if (shape.distance(mid) < distance) {
      c_lo = mid;
    } else {
      c_hi = mid;
    }
  }
  const double cruise = 0.5 * (c_lo + c_hi);
  const double t1 = shape.ramps.duration(v0, cruise);
  const double t3 = shape.ramps.duration(cruise, limits.v_f);
  const double t2 = std::max(0.0, horizon - t1 - t3);
  const double u1 = cruise >= v0 ? shape.ramps.up : -shape.ramps.down;
  const double u3 = limits.v_f >= cruise ? shape.ramps.up : -shape.ramps.down;

  std::vector<ControlPiece> pieces;
  double t = t0;
  double x = x0;
  double v = v0;
  auto push = [&](double len, double u) {
    if (len <= 0.0) return;
    ControlPiece p{t, t + len, x, v, u, 0.0};
    x = piece_position(p, len);
    v = piece_velocity(p, len);
    t += len;
    pieces.push_back(p);
  };
  push(t1, u1);
  push(t2, 0.0);
  push(t3, u3);
  if (pieces.empty()) {
    pieces.push_back(ControlPiece{t0, arrival, x0, v0, 0.0, 0.0});
  }
  pieces.back().t_end = arrival;
  return Trajectory(std::move(pieces), TrajectoryKind::clamped);
}

void require_reachable(const ThreePhase& shape, double distance, const KinematicLimits& limits) {
  switch (reachable(shape, distance, limits)) {
    case Reach::too_short:
      throw InfeasibleError("horizon too short: arrival needs more than v_max/a_max allow");
    case Reach::too_long:
      throw InfeasibleError("horizon too long: arrival needs speed below v_min");
    case Reach::ok:
      break;
  }
}

Trajectory three_phase(double t0, double x0, double v0, double target_x, double arrival,
                       const KinematicLimits& limits) {
  const double horizon = arrival - t0;
  const double distance = target_x - x0;
  const Ramps full{limits.a_max, -limits.a_min};
  require_reachable(ThreePhase{v0, limits.v_f, horizon, full}, distance, limits);

  // Smallest ramp scale that still reaches the target.
  double lo = 0.0;
  double hi = 1.0;
  for (int it = 0; it < 100; ++it) {
    const double mid = 0.5 * (lo + hi);
    ThreePhase probe{v0, limits.v_f, horizon, Ramps{full.up * mid, full.down * mid}};
    if (mid > 0.0 && reachable(probe, distance, limits) == Reach::ok) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return build_three_phase(t0, x0, v0, target_x, arrival, limits, hi);
}

}  // namespace

void KinematicLimits::validate() const {
  if (!(v_min >= 0.0)) throw ConfigError("limits: v_min must be >= 0");
  if (!(v_min <= v_f && v_f <= v_max)) throw ConfigError("limits: require v_min <= v_f <= v_max");
  if (!(a_min < 0.0 && a_max > 0.0)) throw ConfigError("limits: require a_min < 0 < a_max");
  if (!(gap > 0.0)) throw ConfigError("limits: safety gap must be positive");
}

double min_arrival_time(double distance, double v0, const KinematicLimits& limits) {
  if (!(distance > 0.0)) throw std::domain_error("min_arrival_time: distance must be positive");
  const double v_start = std::min(v0, limits.v_max);
  const double accel_time = (limits.v_max - v_start) / limits.a_max;
  const double accel_dist = (limits.v_max * limits.v_max - v_start * v_start) / (2.0 * limits.a_max);
  if (accel_dist >= distance) {
    // v_max is never reached: v0 t + a t^2 / 2 = distance.
    const double disc = v_start * v_start + 2.0 * limits.a_max * distance;
    return (std::sqrt(disc) - v_start) / limits.a_max;
  }
  return accel_time + (distance - accel_dist) / limits.v_max;
}

double min_feasible_arrival_time(double distance, double v0, const KinematicLimits& limits) {
  if (!(distance > 0.0)) {
    throw std::domain_error("min_feasible_arrival_time: distance must be positive");
  }
  const double vf = limits.v_f;
  if (vf >= limits.v_max) return min_arrival_time(distance, v0, limits);
  const double up = limits.a_max;
  const double down = -limits.a_min;
  const double v_start = std::min(v0, limits.v_max);
  if (v_start > vf && (v_start * v_start - vf * vf) / (2.0 * down) > distance) return kInf;
  // Peak speed p: (p^2 - v0^2) / 2up + (p^2 - vf^2) / 2down = distance.
  const double peak_sq =
      (2.0 * distance + v_start * v_start / up + vf * vf / down) / (1.0 / up + 1.0 / down);
  double peak = std::sqrt(std::max(peak_sq, 0.0));
  peak = std::clamp(peak, std::max(v_start, vf), limits.v_max);
  const double d_up = (peak * peak - v_start * v_start) / (2.0 * up);
  const double d_down = (peak * peak - vf * vf) / (2.0 * down);
  const double cruise = std::max(0.0, distance - d_up - d_down);
  return (peak - v_start) / up + (peak - vf) / down + cruise / peak;
}

double stop_and_go_distance(double v, const KinematicLimits& limits) {
  return v * v / (-2.0 * limits.a_min) + limits.v_f * limits.v_f / (2.0 * limits.a_max);
}

Trajectory::Trajectory(std::vector<ControlPiece> pieces, TrajectoryKind kind)
    : pieces_(std::move(pieces)), kind_(kind) {}

Trajectory Trajectory::cruise(double t_begin, double x_begin, double v, double t_end) {
  return Trajectory({ControlPiece{t_begin, t_end, x_begin, v, 0.0, 0.0}},
                    TrajectoryKind::unconstrained);
}

double Trajectory::start_time() const { return pieces_.empty() ? 0.0 : pieces_.front().t_begin; }

double Trajectory::terminal_time() const { return pieces_.empty() ? 0.0 : pieces_.back().t_end; }

const ControlPiece& Trajectory::piece_at(double t) const {
  auto it = std::upper_bound(pieces_.begin(), pieces_.end(), t,
                             [](double value, const ControlPiece& p) { return value < p.t_begin; });
  if (it == pieces_.begin()) return pieces_.front();
  return *std::prev(it);
}

double Trajectory::position(double t) const {
  if (pieces_.empty()) return 0.0;
  const auto& first = pieces_.front();
  if (t <= first.t_begin) return first.x_begin;
  const auto& last = pieces_.back();
  if (t >= last.t_end) {
    const double len = last.t_end - last.t_begin;
    return piece_position(last, len) + piece_velocity(last, len) * (t - last.t_end);
  }
  const auto& p = piece_at(t);
  return piece_position(p, t - p.t_begin);
}

double Trajectory::velocity(double t) const {
  if (pieces_.empty()) return 0.0;
  const auto& first = pieces_.front();
  if (t <= first.t_begin) return first.v_begin;
  const auto& last = pieces_.back();
  if (t >= last.t_end) return piece_velocity(last, last.t_end - last.t_begin);
  const auto& p = piece_at(t);
  return piece_velocity(p, t - p.t_begin);
}

double Trajectory::control(double t) const {
  if (pieces_.empty()) return 0.0;
  if (t < pieces_.front().t_begin || t > pieces_.back().t_end) return 0.0;
  const auto& p = piece_at(t);
  return p.control + p.jerk * (std::min(t, p.t_end) - p.t_begin);
}

double Trajectory::energy() const {
  double total = 0.0;
  for (const auto& p : pieces_) total += piece_energy(p);
  return total;
}

Trajectory Trajectory::truncated(double t) const {
  std::vector<ControlPiece> kept;
  for (const auto& p : pieces_) {
    if (p.t_begin >= t) break;
    kept.push_back(p);
    if (kept.back().t_end > t) kept.back().t_end = t;
  }
  return Trajectory(std::move(kept), kind_);
}

Trajectory Trajectory::spliced(const Trajectory& tail) const {
  if (pieces_.empty() || tail.empty() || tail.start_time() <= start_time()) return tail;
  Trajectory head = truncated(tail.start_time());
  head.pieces_.insert(head.pieces_.end(), tail.pieces_.begin(), tail.pieces_.end());
  head.kind_ = TrajectoryKind::composite;
  return head;
}

double Trajectory::time_at_position(double x) const {
  if (pieces_.empty()) return kInf;
  if (position(start_time()) >= x) return start_time();
  for (const auto& p : pieces_) {
    const double len = p.t_end - p.t_begin;
    if (piece_position(p, len) < x) continue;
    double lo = 0.0;
    double hi = len;
    for (int it = 0; it < 100 && hi - lo > 1e-13; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (piece_position(p, mid) < x) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    return p.t_begin + hi;
  }
  const auto& last = pieces_.back();
  const double len = last.t_end - last.t_begin;
  const double v_end = piece_velocity(last, len);
  if (v_end <= 0.0) return kInf;
  return last.t_end + (x - piece_position(last, len)) / v_end;
}

Trajectory unconstrained_solution(double t0, double x0, double v0, double target_x, double arrival,
                                  double v_final) {
  const double T = arrival - t0;
  const double dv = v_final - v0;
  const double dx = target_x - x0 - v0 * T;
  const double jerk = 6.0 * (dv * T - 2.0 * dx) / (T * T * T);
  const double control = (dv - jerk * T * T / 2.0) / T;
  return Trajectory({ControlPiece{t0, arrival, x0, v0, control, jerk}},
                    TrajectoryKind::unconstrained);
}

bool within_limits(const Trajectory& trajectory, const KinematicLimits& limits, double dt) {
  const double t0 = trajectory.start_time();
  const double t1 = trajectory.terminal_time();
  auto ok_at = [&](double t) {
    const double v = trajectory.velocity(t);
    const double u = trajectory.control(t);
    return v >= limits.v_min - kBoundTol && v <= limits.v_max + kBoundTol &&
           u >= limits.a_min - kBoundTol && u <= limits.a_max + kBoundTol;
  };
  const auto steps = static_cast<long>(std::floor((t1 - t0) / dt));
  for (long k = 0; k <= steps; ++k) {
    if (!ok_at(t0 + static_cast<double>(k) * dt)) return false;
  }
  return ok_at(t1);
}

Trajectory plan_trajectory(double t0, double x0, double v0, double target_x, double arrival,
                           const KinematicLimits& limits) {
  const double distance = target_x - x0;
  if (!(distance > 0.0)) throw InfeasibleError("no distance left to plan over");
  const double earliest = t0 + min_feasible_arrival_time(distance, v0, limits);
  if (arrival < earliest - 1e-9) {
    throw InfeasibleError("horizon too short: arrival precedes minimum arrival time (a_max/v_max)");
  }
  if (arrival > earliest + 1e-9) {
    Trajectory candidate = unconstrained_solution(t0, x0, v0, target_x, arrival, limits.v_f);
    const auto& p = candidate.pieces().front();
    // Extremal speed inside the window, where u(t) crosses zero.
    bool extremum_ok = true;
    if (p.jerk != 0.0) {
      const double tau = -p.control / p.jerk;
      if (tau > 0.0 && tau < arrival - t0) {
        const double v = piece_velocity(p, tau);
        extremum_ok = v >= limits.v_min - kBoundTol && v <= limits.v_max + kBoundTol;
      }
    }
    if (extremum_ok && within_limits(candidate, limits, kCheckGrid)) return candidate;
  }
  return three_phase(t0, x0, v0, target_x, std::max(arrival, earliest), limits);
}

Trajectory plan_full_ramps(double t0, double x0, double v0, double target_x, double arrival,
                           const KinematicLimits& limits) {
  const double distance = target_x - x0;
  if (!(distance > 0.0)) throw InfeasibleError("no distance left to plan over");
  require_reachable(ThreePhase{v0, limits.v_f, arrival - t0, Ramps{limits.a_max, -limits.a_min}},
                    distance, limits);
  return build_three_phase(t0, x0, v0, target_x, arrival, limits, 1.0);
}

Trajectory solve_energy_optimal(double distance, double v0, double t0, double arrival,
                                const KinematicLimits& limits) {
  return plan_trajectory(t0, 0.0, v0, distance, arrival, limits);
}

double energy_of(const Trajectory& trajectory) { return trajectory.energy(); }

RearEndReport check_rear_end(const Trajectory& follower, const Trajectory& leader, double gap,
                             double dt) {
  RearEndReport report;
  report.min_gap = kInf;
  if (follower.empty() || leader.empty()) return report;
  const double begin = std::max(follower.start_time(), leader.start_time());
  const double end = follower.terminal_time();
  if (end < begin) return report;
  auto probe = [&](double t) {
    const double g = leader.position(t) - follower.position(t);
    report.min_gap = std::min(report.min_gap, g);
    if (g < gap - 1e-9) {
      if (report.violations == 0) report.first_violation_time = t;
      ++report.violations;
    }
  };
  const auto steps = static_cast<long>(std::floor((end - begin) / dt));
  for (long k = 0; k <= steps; ++k) probe(begin + static_cast<double>(k) * dt);
  probe(end);
  return report;
}

bool keeps_gap(const Trajectory& follower, const Trajectory& leader, double gap, double dt) {
  if (follower.empty() || leader.empty()) return true;
  const double begin = std::max(follower.start_time(), leader.start_time());
  const double end = follower.terminal_time();
  if (end < begin) return true;
  auto ok = [&](double t) { return leader.position(t) - follower.position(t) >= gap - 1e-9; };
  const auto steps = static_cast<long>(std::floor((end - begin) / dt));
  for (long k = 0; k <= steps; ++k) {
    if (!ok(begin + static_cast<double>(k) * dt)) return false;
  }
  return ok(end);
}

}  // namespace crossflow
