#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace crossflow {

/// Uniform kinematic limits shared by every vehicle.
struct KinematicLimits {
  double v_min = 0.0;   // m/s
  double v_max = 15.0;  // m/s
  double a_min = -3.0;  // m/s^2
  double a_max = 3.0;   // m/s^2
  double gap = 10.0;    // rear-end safety distance l (m)
  double v_f = 15.0;    // terminal speed at the conflict zone (m/s)

  /// Throws ConfigError when v_min <= v_f <= v_max, a_min < 0 < a_max or gap > 0 fails.
  void validate() const;
};

/// Minimum time (relative to entry) to cover `distance` from `v0`: accelerate at a_max up to
/// v_max, then cruise. Throws std::domain_error for distance <= 0.
double min_arrival_time(double distance, double v0, const KinematicLimits& limits);

/// Like min_arrival_time, but the vehicle must also end at v_f. Equal to min_arrival_time when
/// v_f == v_max. Returns +inf when the vehicle cannot slow down to v_f within `distance`.
double min_feasible_arrival_time(double distance, double v0, const KinematicLimits& limits);

/// Distance needed to brake from `v` to a standstill and accelerate back to v_f.
double stop_and_go_distance(double v, const KinematicLimits& limits);

/// u(t) = control + jerk * (t - t_begin) on [t_begin, t_end].
struct ControlPiece {
  double t_begin = 0.0;
  double t_end = 0.0;
  double x_begin = 0.0;
  double v_begin = 0.0;
  double control = 0.0;
  double jerk = 0.0;
};

enum class TrajectoryKind { unconstrained, clamped, composite };

/// Piecewise control profile. Outside its support the state is extrapolated at constant speed.
class Trajectory {
 public:
  Trajectory() = default;
  Trajectory(std::vector<ControlPiece> pieces, TrajectoryKind kind);

  /// Holds speed `v` from (t_begin, x_begin) until t_end.
  static Trajectory cruise(double t_begin, double x_begin, double v, double t_end);

  [[nodiscard]] bool empty() const { return pieces_.empty(); }
  [[nodiscard]] std::span<const ControlPiece> pieces() const { return pieces_; }
  [[nodiscard]] TrajectoryKind kind() const { return kind_; }
  [[nodiscard]] double start_time() const;
  [[nodiscard]] double terminal_time() const;

  [[nodiscard]] double position(double t) const;
  [[nodiscard]] double velocity(double t) const;
  [[nodiscard]] double control(double t) const;

  /// Analytic integral of u^2 over the support.
  [[nodiscard]] double energy() const;

  /// The part of this trajectory on [start_time, t].
  [[nodiscard]] Trajectory truncated(double t) const;
  /// This trajectory up to tail.start_time(), followed by `tail`.
  [[nodiscard]] Trajectory spliced(const Trajectory& tail) const;

  /// First time at which the position reaches `x`; +inf if it never does.
  [[nodiscard]] double time_at_position(double x) const;

 private:
  [[nodiscard]] const ControlPiece& piece_at(double t) const;

  std::vector<ControlPiece> pieces_;
  TrajectoryKind kind_ = TrajectoryKind::unconstrained;
};

/// Energy-minimal profile from (t0, x0, v0) to (arrival, target_x, v_f). Uses the linear-control
/// solution of the unconstrained problem when it stays within the limits on a 0.01 s grid,
/// otherwise a three-phase ramp/cruise/ramp profile that meets the same boundary conditions.
/// Throws InfeasibleError, naming the binding limit, when no such profile exists.
Trajectory plan_trajectory(double t0, double x0, double v0, double target_x, double arrival,
                           const KinematicLimits& limits);

/// Ramp/cruise/ramp profile with both ramps at the full acceleration limits, so the speed
/// change happens as early as possible. Same boundary conditions and errors as plan_trajectory.
Trajectory plan_full_ramps(double t0, double x0, double v0, double target_x, double arrival,
                           const KinematicLimits& limits);

/// plan_trajectory from the control-zone entry (x = 0) to the conflict zone (x = distance).
Trajectory solve_energy_optimal(double distance, double v0, double t0, double arrival,
                                const KinematicLimits& limits);

/// Linear-control solution to the boundary-value problem, ignoring every limit.
Trajectory unconstrained_solution(double t0, double x0, double v0, double target_x,
                                  double arrival, double v_final);

/// True when v and u stay within `limits` on a `dt` grid over the support (endpoints included).
bool within_limits(const Trajectory& trajectory, const KinematicLimits& limits, double dt = 0.01);

double energy_of(const Trajectory& trajectory);

struct RearEndReport {
  std::size_t violations = 0;
  double first_violation_time = 0.0;
  double min_gap = 0.0;

  [[nodiscard]] bool clear() const { return violations == 0; }
};

/// Gap leader.position - follower.position on a `dt` grid over the overlap of the two supports,
/// up to the follower's terminal time. Both positions are measured from the same lane entry.
RearEndReport check_rear_end(const Trajectory& follower, const Trajectory& leader, double gap,
                             double dt = 0.01);

/// check_rear_end(...).clear(), stopping at the first violation.
bool keeps_gap(const Trajectory& follower, const Trajectory& leader, double gap, double dt = 0.01);

}  // namespace crossflow
