#ifndef LATLAB_OPTIM_HPP
#define LATLAB_OPTIM_HPP

#include "latlab/core.hpp"

#include <algorithm>
#include <deque>
#include <limits>

namespace latlab::optim {

struct SpgOptions {
  int max_iterations = 5000;
  /// Stop when the projected-gradient step is below this (relative to the
  /// gradient scale at the start point).
  double tolerance = 1e-12;
  /// Non-monotone line-search memory.
  int memory = 10;
  double step_min = 1e-30;
  double step_max = 1e30;
  /// When positive: also stop once the best value improved by less than
  /// stall_tolerance * |best| over the last stall_window iterations.
  int stall_window = 0;
  double stall_tolerance = 1e-13;
};

struct SpgResult {
  Vector x;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Spectral projected gradient: Barzilai-Borwein steps along the projection
/// arc with a non-monotone Armijo backtracking search. `project` must be the
/// Euclidean projection onto a closed convex set.
template <class Objective, class Gradient, class Projection>
SpgResult spg_minimize(Objective&& f, Gradient&& grad, Projection&& project, Vector x0,
                       const SpgOptions& opts = {}) {
  constexpr double armijo = 1e-4;
  SpgResult out;
  Vector x = project(std::move(x0));
  double fx = f(x);
  Vector g = grad(x);
  std::deque<double> history{fx};
  Vector best_x = x;
  double best_f = fx;
  double window_start_f = fx;

  auto pg_norm = [&](const Vector& point, const Vector& gradient) {
    return max_abs(project(Vector(point - gradient)) - point);
  };
  const double scale = std::max(1.0, max_abs(g));
  double pg = pg_norm(x, g);
  double alpha = pg > 0.0 ? std::clamp(1.0 / pg, opts.step_min, opts.step_max) : 1.0;

  int iter = 0;
  for (; iter < opts.max_iterations; ++iter) {
    if (pg <= opts.tolerance * scale) {
      out.converged = true;
      break;
    }
    const Vector d = project(Vector(x - alpha * g)) - x;
    const double slope = g.dot(d);
    if (!(slope < 0.0)) {
      out.converged = true;  // no descent direction left at working precision
      break;
    }
    const double reference = *std::max_element(history.begin(), history.end());
    double lambda = 1.0;
    Vector trial = x + d;
    double ftrial = f(trial);
    while (!(ftrial <= reference + armijo * lambda * slope)) {
      lambda *= 0.5;
      if (lambda < 1e-20) break;
      trial = x + lambda * d;
      ftrial = f(trial);
    }
    if (lambda < 1e-20) {
      out.converged = true;  // stalled: cannot decrease further
      break;
    }
    const Vector s = trial - x;
    const Vector gnew = grad(trial);
    const Vector y = gnew - g;
    const double sty = s.dot(y);
    alpha = sty > 0.0 ? std::clamp(s.squaredNorm() / sty, opts.step_min, opts.step_max)
                      : opts.step_max;
    x = trial;
    fx = ftrial;
    g = gnew;
    if (fx < best_f) {
      best_f = fx;
      best_x = x;
    }
    if (opts.stall_window > 0 && (iter + 1) % opts.stall_window == 0) {
      if (window_start_f - best_f <= opts.stall_tolerance * std::abs(best_f)) {
        ++iter;
        out.converged = true;
        break;
      }
      window_start_f = best_f;
    }
    history.push_back(fx);
    if (static_cast<int>(history.size()) > opts.memory) history.pop_front();
    pg = pg_norm(x, g);
  }
  out.iterations = iter;
  out.x = std::move(best_x);
  out.value = best_f;
  return out;
}

inline Vector project_nonnegative(Vector v) { return v.cwiseMax(0.0); }
inline Vector project_identity(Vector v) { return v; }

}  // namespace latlab::optim

#endif  // LATLAB_OPTIM_HPP
