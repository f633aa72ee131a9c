#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "crossflow/dynamics.hpp"

namespace crossflow::testing {

struct QpSolution {
  std::vector<double> u;  // one value per dt interval
  double cost = 0.0;      // sum u_k^2 dt
  double final_x = 0.0;
  double final_v = 0.0;
};

// Least-norm zero-order-hold control that reaches (target_x, v_f) after `horizon` seconds.
// Closed form from the 2x2 normal equations of the two terminal constraints.
inline QpSolution discretized_qp(double distance, double v0, double v_f, double horizon,
                                 double dt) {
  const auto n = static_cast<std::size_t>(std::llround(horizon / dt));
  const double h = horizon / static_cast<double>(n);
  std::vector<double> av(n, h), ax(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double tk = static_cast<double>(k) * h;
    ax[k] = h * (horizon - tk - h / 2.0);
  }
  const double bv = v_f - v0;
  const double bx = distance - v0 * horizon;
  double g11 = 0, g12 = 0, g22 = 0;
  for (std::size_t k = 0; k < n; ++k) {
    g11 += av[k] * av[k];
    g12 += av[k] * ax[k];
    g22 += ax[k] * ax[k];
  }
  const double det = g11 * g22 - g12 * g12;
  const double lv = (g22 * bv - g12 * bx) / det;
  const double lx = (g11 * bx - g12 * bv) / det;

  QpSolution s;
  s.u.resize(n);
  double x = 0.0, v = v0;
  for (std::size_t k = 0; k < n; ++k) {
    s.u[k] = lv * av[k] + lx * ax[k];
    s.cost += s.u[k] * s.u[k] * h;
    x += v * h + 0.5 * s.u[k] * h * h;
    v += s.u[k] * h;
  }
  s.final_x = x;
  s.final_v = v;
  return s;
}

// Composite Simpson rule with an even number of panels.
inline double simpson(const std::function<double(double)>& f, double a, double b,
                      std::size_t panels = 20000) {
  if (panels % 2) ++panels;
  const double h = (b - a) / static_cast<double>(panels);
  double sum = f(a) + f(b);
  for (std::size_t k = 1; k < panels; ++k) {
    sum += f(a + static_cast<double>(k) * h) * (k % 2 ? 4.0 : 2.0);
  }
  return sum * h / 3.0;
}

inline double control_energy_by_quadrature(const Trajectory& t) {
  double total = 0.0;
  for (const auto& p : t.pieces()) {
    if (p.t_end <= p.t_begin) continue;
    total += simpson(
        [&](double s) {
          const double u = p.control + p.jerk * (s - p.t_begin);
          return u * u;
        },
        p.t_begin, p.t_end, 2000);
  }
  return total;
}

// Forward-Euler accelerate-then-cruise time to cover `distance`.
inline double integrate_min_time(double distance, double v0, const KinematicLimits& lim,
                                 double dt = 1e-4) {
  double x = 0.0, v = v0, t = 0.0;
  while (x < distance) {
    const double a = v < lim.v_max ? lim.a_max : 0.0;
    const double v_next = std::min(lim.v_max, v + a * dt);
    const double step = 0.5 * (v + v_next) * dt;
    if (x + step >= distance) {
      t += (distance - x) / (0.5 * (v + v_next));
      return t;
    }
    x += step;
    v = v_next;
    t += dt;
  }
  return t;
}

}  // namespace crossflow::testing
