#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "llrgd/objective.hpp"

namespace llrgd {

struct OptimizerConfig {
  double gamma = 0.0;          ///< step size; <= 0 selects the default rule
  double theta = 0.0;          ///< small-gradient threshold; <= 0 disables regularization
  double eps_converge = 1e-6;  ///< convergence tolerance on the active gradient
  std::size_t max_iters = 10000;
  double escape_radius = 10.0;
  Vector escape_center;        ///< empty means the centre of the domain box
  std::size_t record_stride = 1;  ///< store every k-th iterate (the last one is always stored)
};

enum class Mode { Plain, Regularized };
enum class RunStatus { Converged, Diverged, MaxIters, NumericalFailure };

inline std::string_view to_string(Mode m) { return m == Mode::Plain ? "plain" : "regularized"; }

inline std::string_view to_string(RunStatus s) {
  switch (s) {
    case RunStatus::Converged: return "Converged";
    case RunStatus::Diverged: return "Diverged";
    case RunStatus::MaxIters: return "MaxIters";
    case RunStatus::NumericalFailure: return "NumericalFailure";
  }
  return "?";
}

struct RegularizationEvent {
  std::size_t k_entry = 0;
  Vector x_entry;
  Vector l;  ///< ∇f(x_entry), verbatim
  std::optional<std::size_t> k_exit;
};

struct TrajectoryRecord {
  std::vector<std::size_t> ks;
  std::vector<Vector> iterates;
  std::vector<double> values;
  std::vector<double> grad_norms;   ///< ‖∇f(iterates[i])‖₂, unregularized
  std::vector<Mode> modes;          ///< update law applied at iterates[i]
  std::vector<int> event_ids;       ///< index into events, or -1
  std::vector<RegularizationEvent> events;
  RunStatus status = RunStatus::MaxIters;
  std::size_t iterations = 0;       ///< index of the final iterate
  Vector final_x;
  double final_value = 0.0;
  double final_grad_norm = 0.0;     ///< ‖∇f(final_x)‖₂
  double final_active_grad_norm = 0.0;  ///< ‖∇f(final_x) + l‖₂ for the final mode
  double gamma = 0.0;
  std::size_t stride = 1;
  std::vector<std::string> warnings;
};

/// g(x) = x − γ∇f(x)
inline Vector gd_step(const Objective& f, const Vector& x, double gamma) {
  if (!all_finite(x)) throw NumericalError("gd_step: non-finite iterate");
  const Vector g = f.gradient(x);
  if (!all_finite(g)) throw NumericalError("gd_step: non-finite gradient");
  return axpy(x, -gamma, g);
}

/// g_l(x) = x − γ(∇f(x) + l)
inline Vector reg_step(const Objective& f, const Vector& x, const Vector& l, double gamma) {
  require_dim(l.size(), x.size(), "reg_step");
  if (!all_finite(x)) throw NumericalError("reg_step: non-finite iterate");
  const Vector g = f.gradient(x);
  if (!all_finite(g)) throw NumericalError("reg_step: non-finite gradient");
  return axpy(x, -gamma, add(g, l));
}

/// γ = 1/(2·L̂) with L̂ = ‖∇²f(x0)‖₂, floored at 1e-3.
inline double default_gamma(const Objective& f, const Vector& x0) {
  const double L = std::max(spectral_norm(f.hessian(x0)), 1e-3);
  return 1.0 / (2.0 * L);
}

namespace detail {

inline void validate(const OptimizerConfig& cfg, const Objective& f, const Vector& x0) {
  require_dim(x0.size(), f.dim(), "optimizer x0");
  if (!all_finite(x0)) throw ConfigError("optimizer: x0 must be finite");
  if (!std::isfinite(cfg.gamma)) throw ConfigError("optimizer: gamma must be finite");
  if (!(cfg.eps_converge > 0.0)) throw ConfigError("optimizer: eps_converge must be positive");
  if (cfg.max_iters == 0) throw ConfigError("optimizer: max_iters must be positive");
  if (!(cfg.escape_radius > 0.0)) throw ConfigError("optimizer: escape_radius must be positive");
  if (cfg.theta > 0.0 && !(cfg.theta > cfg.eps_converge))
    throw ConfigError("optimizer: theta must exceed eps_converge");
  if (!cfg.escape_center.empty()) require_dim(cfg.escape_center.size(), f.dim(), "escape_center");
}

inline TrajectoryRecord run(const Objective& f, const Vector& x0, const OptimizerConfig& cfg, bool regularize) {
  validate(cfg, f, x0);

  TrajectoryRecord rec;
  rec.stride = std::max<std::size_t>(1, cfg.record_stride);
  rec.gamma = cfg.gamma > 0.0 ? cfg.gamma : default_gamma(f, x0);
  if (auto L = f.lipschitz_hint(); L && rec.gamma >= 1.0 / *L) {
    rec.warnings.push_back("gamma " + std::to_string(rec.gamma) + " >= 1/L = " + std::to_string(1.0 / *L));
  }
  const bool use_theta = regularize && cfg.theta > 0.0;
  const Vector center = cfg.escape_center.empty() ? box_center(f.domain_box()) : cfg.escape_center;

  Vector x = x0;
  Vector l(f.dim(), 0.0);
  Mode mode = Mode::Plain;
  int event = -1;

  auto store = [&](std::size_t k, const Vector& at, double gnorm, bool force) {
    if (!force && k % rec.stride != 0) return;
    if (!rec.ks.empty() && rec.ks.back() == k) return;
    rec.ks.push_back(k);
    rec.iterates.push_back(at);
    rec.values.push_back(f.value(at));
    rec.grad_norms.push_back(gnorm);
    rec.modes.push_back(mode);
    rec.event_ids.push_back(event);
  };
  auto finish = [&](std::size_t k, RunStatus status, double gnorm, double active_norm) {
    rec.status = status;
    rec.iterations = k;
    rec.final_x = x;
    rec.final_value = f.value(x);
    rec.final_grad_norm = gnorm;
    rec.final_active_grad_norm = active_norm;
  };

  for (std::size_t k = 0;; ++k) {
    Vector g;
    try {
      g = f.gradient(x);
    } catch (const NumericalError&) {
      g.assign(f.dim(), std::numeric_limits<double>::quiet_NaN());
    }
    const double gnorm = norm2(g);
    if (!all_finite(x) || !all_finite(g) || !std::isfinite(gnorm)) {
      rec.status = RunStatus::NumericalFailure;
      rec.iterations = k;
      rec.final_x = x;
      rec.final_value = std::numeric_limits<double>::quiet_NaN();
      rec.final_grad_norm = gnorm;
      rec.final_active_grad_norm = gnorm;
      return rec;
    }

    if (use_theta) {
      if (gnorm > cfg.theta) {
        if (mode == Mode::Regularized) {
          rec.events.back().k_exit = k;
          mode = Mode::Plain;
          std::fill(l.begin(), l.end(), 0.0);
          event = -1;
        }
      } else if (mode == Mode::Plain) {
        // Entering L_θ (or starting inside it): sample a fresh regularizer.
        l = g;
        mode = Mode::Regularized;
        rec.events.push_back(RegularizationEvent{k, x, g, std::nullopt});
        event = static_cast<int>(rec.events.size()) - 1;
      }
    }

    const double active_norm = mode == Mode::Plain ? gnorm : norm2(add(g, l));
    if (distance(x, center) > cfg.escape_radius) {
      store(k, x, gnorm, true);
      finish(k, RunStatus::Diverged, gnorm, active_norm);
      return rec;
    }
    if (active_norm < cfg.eps_converge) {
      store(k, x, gnorm, true);
      finish(k, RunStatus::Converged, gnorm, active_norm);
      return rec;
    }
    if (k >= cfg.max_iters) {
      store(k, x, gnorm, true);
      finish(k, RunStatus::MaxIters, gnorm, active_norm);
      return rec;
    }
    store(k, x, gnorm, false);

    if (mode == Mode::Plain) {
      x = axpy(x, -rec.gamma, g);
    } else {
      x = axpy(x, -rec.gamma, add(g, l));
    }
  }
}

}  // namespace detail

/// Locally linearly regularized gradient descent.
///
/// Plain steps while ‖∇f(x_k)‖ > θ. On entering the small-gradient region the
/// regularizer is frozen at l = ∇f(x_k) and regularized steps are taken until
/// the gradient norm exceeds θ again, which closes the event. A start inside
/// the region counts as an entry at k = 0. θ <= 0 disables regularization.
///
/// Terminates with Converged when the active gradient (∇f + l) has norm below
/// eps_converge, Diverged when ‖x − center‖ > escape_radius, NumericalFailure
/// on non-finite values, and MaxIters otherwise.
inline TrajectoryRecord run_algorithm1(const Objective& f, const Vector& x0, const OptimizerConfig& cfg) {
  return detail::run(f, x0, cfg, true);
}

/// Baseline gradient descent; identical to run_algorithm1 with θ disabled.
inline TrajectoryRecord run_plain_gd(const Objective& f, const Vector& x0, const OptimizerConfig& cfg) {
  return detail::run(f, x0, cfg, false);
}

}  // namespace llrgd
