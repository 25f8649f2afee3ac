#pragma once

// Locating critical points (damped Newton multistart on ∇f = 0) and tracing
// them through the homotopy ∇f(x) + μl = 0.

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "llrgd/classification.hpp"
#include "llrgd/objective.hpp"

namespace llrgd {

inline constexpr double kCriticalGradTol = 1e-8;
inline constexpr double kDedupRadius = 1e-4;

struct NewtonOptions {
  int max_steps = 50;
  int max_halvings = 40;
};

enum class NewtonOutcome { Converged, Singular, Stalled, NonFinite };

struct NewtonResult {
  Vector x;
  double residual = 0.0;
  int steps = 0;
  NewtonOutcome outcome = NewtonOutcome::Stalled;
};

/// Damped Newton iteration on F(x) = ∇f(x) + shift, Jacobian ∇²f. The step
/// length is halved until ‖F‖ decreases. Iteration continues past `tol` until
/// the step stalls or max_steps is reached, so degenerate roots (linear
/// Newton convergence) are still refined well below the tolerance.
inline NewtonResult newton_solve(const Objective& f, const Vector& seed, const Vector& shift, double tol,
                                 const NewtonOptions& opts = {}) {
  auto residual_vec = [&](const Vector& x) { return add(f.gradient(x), shift); };
  NewtonResult res{seed, 0.0, 0, NewtonOutcome::Stalled};
  Vector F = residual_vec(res.x);
  res.residual = norm2(F);
  if (!std::isfinite(res.residual)) {
    res.outcome = NewtonOutcome::NonFinite;
    return res;
  }
  for (; res.steps < opts.max_steps && res.residual > 0.0; ++res.steps) {
    Vector p;
    try {
      p = solve_symmetric(f.hessian(res.x), scale(F, -1.0));
    } catch (const NumericalError&) {
      res.outcome = res.residual < tol ? NewtonOutcome::Converged : NewtonOutcome::Singular;
      return res;
    }
    double alpha = 1.0;
    bool accepted = false;
    for (int h = 0; h < opts.max_halvings; ++h, alpha *= 0.5) {
      Vector trial = axpy(res.x, alpha, p);
      Vector Ft = residual_vec(trial);
      const double rt = norm2(Ft);
      if (std::isfinite(rt) && rt < res.residual) {
        res.x = std::move(trial);
        F = std::move(Ft);
        res.residual = rt;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    if (alpha * norm2(p) <= 1e-15 * std::max(1.0, norm2(res.x))) break;
  }
  res.outcome = res.residual < tol ? NewtonOutcome::Converged : NewtonOutcome::Stalled;
  return res;
}

/// Grid nodes (endpoints included) with `density` nodes per axis.
inline std::vector<Vector> grid_nodes(const Box& box, std::size_t density) {
  const std::size_t n = box.size();
  std::size_t total = 1;
  for (std::size_t i = 0; i < n; ++i) total *= density;
  std::vector<Vector> out;
  out.reserve(total);
  for (std::size_t idx = 0; idx < total; ++idx) {
    Vector x(n);
    std::size_t r = idx;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t k = r % density;
      r /= density;
      const double t = density == 1 ? 0.5 : static_cast<double>(k) / static_cast<double>(density - 1);
      x[i] = box[i].lo + t * box[i].width();
    }
    out.push_back(std::move(x));
  }
  return out;
}

struct CriticalPointSet {
  std::vector<CriticalPointReport> points;  ///< sorted lexicographically by location
  std::size_t seeds = 0;
  std::size_t seeds_skipped = 0;  ///< singular Newton system before convergence
};

/// Keeps the best-converged representative of each cluster of radius `radius`.
inline std::vector<NewtonResult> deduplicate(std::vector<NewtonResult> found, double radius) {
  std::stable_sort(found.begin(), found.end(),
                   [](const NewtonResult& a, const NewtonResult& b) { return a.residual < b.residual; });
  std::vector<NewtonResult> kept;
  for (auto& r : found) {
    const bool dup = std::any_of(kept.begin(), kept.end(),
                                 [&](const NewtonResult& k) { return distance(k.x, r.x) <= radius; });
    if (!dup) kept.push_back(std::move(r));
  }
  return kept;
}

/// Newton multistart from every node of a `grid_density`-per-axis grid on
/// `box`. Converged points (‖∇f‖ < tol) inside the box are deduplicated at
/// radius 1e-4 and classified.
inline CriticalPointSet find_critical_points(const Objective& f, const Box& box, std::size_t grid_density,
                                             double tol = kCriticalGradTol, double tau = kDefaultZeroTau) {
  require_dim(box.size(), f.dim(), "find_critical_points box");
  for (const auto& iv : box)
    if (!(iv.hi >= iv.lo)) throw ConfigError("find_critical_points: empty box");
  if (grid_density == 0) throw ConfigError("find_critical_points: grid density must be positive");

  const Vector zero(f.dim(), 0.0);
  CriticalPointSet out;
  std::vector<NewtonResult> found;
  for (const Vector& seed : grid_nodes(box, grid_density)) {
    ++out.seeds;
    NewtonResult r = newton_solve(f, seed, zero, tol);
    if (r.outcome == NewtonOutcome::Singular) ++out.seeds_skipped;
    if (r.outcome != NewtonOutcome::Converged) continue;
    if (!box_contains(box, r.x, 1e-9)) continue;
    found.push_back(std::move(r));
  }
  for (const NewtonResult& r : deduplicate(std::move(found), kDedupRadius)) {
    CriticalPointReport rep = classify_point(f, r.x, tau);
    out.points.push_back(std::move(rep));
  }
  std::sort(out.points.begin(), out.points.end(),
            [](const CriticalPointReport& a, const CriticalPointReport& b) { return a.location < b.location; });
  return out;
}

// ---------------------------------------------------------------------------
// Continuation of ∇f(x) + μl = 0 from μ = 1 down to μ = 0
// ---------------------------------------------------------------------------

struct ContinuationSample {
  double mu = 0.0;
  Vector x;
  double grad_norm = 0.0;  ///< ‖∇f(x)‖₂ (unregularized)
  double residual = 0.0;   ///< ‖∇f(x) + μl‖₂
};

struct ContinuationPath {
  std::vector<ContinuationSample> samples;
  bool reached_zero = false;  ///< last sample is at μ = 0
  bool fold = false;          ///< Hessian became singular before μ = 0
  std::optional<double> fold_mu;
};

struct ContinuationOptions {
  double start_tol = 1e-6;        ///< required ‖∇f(x1) + l‖ at μ = 1
  double corrector_tol = 1e-12;   ///< relative to max(1, ‖l‖)
  double accept_tol = 1e-8;       ///< residual still accepted if the corrector stalls
  int corrector_steps = 100;
  double fold_det_tol = 1e-10;    ///< |det ∇²f| < fold_det_tol·scaleⁿ signals a fold
};

/// Predictor–corrector continuation. The tangent predictor is
/// dx/dμ = −∇²f(x)⁻¹ l; each μ is corrected with damped Newton. A singular
/// Hessian before μ = 0 ends the path with the fold flag set; a partial path
/// is returned rather than an error.
inline ContinuationPath continuation_trace(const Objective& f, const Vector& x_at_mu1, const Vector& l,
                                           std::size_t steps, const ContinuationOptions& opts = {}) {
  require_dim(x_at_mu1.size(), f.dim(), "continuation_trace start");
  require_dim(l.size(), f.dim(), "continuation_trace regularizer");
  if (steps == 0) throw ConfigError("continuation_trace: steps must be positive");
  const double r0 = norm2(add(f.gradient(x_at_mu1), l));
  if (!(r0 < opts.start_tol)) throw ConfigError("continuation_trace: start point is not a critical point of f_l");

  const std::size_t n = f.dim();
  const EigenDecomposition e0 = sym_eigen(f.hessian(x_at_mu1));
  const double scale_n = std::pow(std::max(1.0, e0.max_abs()), static_cast<double>(n));
  const double det_floor = opts.fold_det_tol * scale_n;
  if (std::abs(determinant(e0)) < det_floor)
    throw ConfigError("continuation_trace: Hessian is singular at the start point");

  const double ltol = opts.corrector_tol * std::max(1.0, norm2(l));
  NewtonOptions nopts;
  nopts.max_steps = opts.corrector_steps;

  ContinuationPath path;
  path.samples.push_back({1.0, x_at_mu1, norm2(f.gradient(x_at_mu1)), r0});
  Vector x = x_at_mu1;
  for (std::size_t i = 1; i <= steps; ++i) {
    const double mu_prev = 1.0 - static_cast<double>(i - 1) / static_cast<double>(steps);
    const double mu = i == steps ? 0.0 : 1.0 - static_cast<double>(i) / static_cast<double>(steps);

    Vector predicted = x;
    try {
      const Vector tangent = solve_symmetric(f.hessian(x), scale(l, -1.0));
      predicted = axpy(x, mu - mu_prev, tangent);
    } catch (const NumericalError&) {
      path.fold = true;
      path.fold_mu = mu_prev;
      return path;
    }

    NewtonResult corr = newton_solve(f, predicted, scale(l, mu), ltol, nopts);
    if (corr.outcome != NewtonOutcome::Converged && corr.residual >= opts.accept_tol) {
      // Corrector failed from the predictor; retry from the previous point.
      corr = newton_solve(f, x, scale(l, mu), ltol, nopts);
    }
    if (corr.residual >= opts.accept_tol) {
      path.fold = true;
      path.fold_mu = mu_prev;
      return path;
    }
    x = corr.x;
    path.samples.push_back({mu, x, norm2(f.gradient(x)), corr.residual});

    if (mu > 0.0) {
      const double det = determinant(sym_eigen(f.hessian(x)));
      if (std::abs(det) < det_floor) {
        path.fold = true;
        path.fold_mu = mu;
        return path;
      }
    }
  }
  path.reached_zero = true;
  return path;
}

}  // namespace llrgd
