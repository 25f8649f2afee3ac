#pragma once

// Statistical and structural checks built on critical-point location and
// small-gradient regions: θ-separation of critical points, Milnor sampling,
// stable-set measurement, the PL regularization-error bound and false-minimum
// witnesses.

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <vector>

#include "llrgd/classification.hpp"
#include "llrgd/critical_points.hpp"
#include "llrgd/optimizer.hpp"
#include "llrgd/parallel.hpp"
#include "llrgd/region.hpp"

namespace llrgd {

// ---------------------------------------------------------------------------
// θ-separation of critical points
// ---------------------------------------------------------------------------

struct SeparationResult {
  Vector location;
  bool passed = true;
  std::vector<Vector> violating;  ///< other critical points inside Θ(location) but not in Φ(location)
};

/// Cells whose centre is within one cell of a zero of ∇f by a first-order
/// estimate: ‖∇f(c)‖ ≤ ‖∇²f(c)‖₂ · (half cell diagonal).
inline std::vector<std::uint8_t> near_critical_cells(const Objective& f, const CellGrid& grid) {
  double half_diag = 0.0;
  for (std::size_t i = 0; i < grid.dim(); ++i) half_diag += 0.25 * grid.cell_width(i) * grid.cell_width(i);
  half_diag = std::sqrt(half_diag);
  std::vector<std::uint8_t> out(grid.cell_count(), 0);
  for (std::size_t idx = 0; idx < grid.cell_count(); ++idx) {
    const Vector c = grid.center(idx);
    const double bound = spectral_norm(f.hessian(c)) * half_diag + 1e-14;
    out[idx] = norm2(f.gradient(c)) <= bound ? 1 : 0;
  }
  return out;
}

/// For each critical point p, checks that no other critical point lies in
/// Θ(p) unless it belongs to the same connected critical set Φ(p). Φ is
/// approximated by grid connectivity of near-critical cells.
inline std::vector<SeparationResult> check_assumption_separation(const Objective& f,
                                                                 const std::vector<CriticalPointReport>& points,
                                                                 double theta, const Box& box,
                                                                 std::size_t resolution) {
  std::vector<SeparationResult> out;
  if (points.empty()) return out;
  const CellGrid grid(box, resolution);
  const std::vector<std::uint8_t> critical = near_critical_cells(f, grid);

  for (const auto& p : points) {
    SeparationResult res{p.location, true, {}};
    const RegionGrid region = theta_region(f, p.location, theta, box, resolution);
    const auto pc = grid.cell_of(p.location);
    std::vector<std::uint8_t> phi;
    if (pc) phi = grid.flood(*pc, [&](std::size_t i) { return critical[i] == 1 || i == *pc; });
    for (const auto& q : points) {
      if (&q == &p) continue;
      if (!region.contains_within_halo(q.location)) continue;
      const auto qc = grid.cell_of(q.location);
      const bool same_phi = qc && !phi.empty() && phi[*qc];
      if (!same_phi) {
        res.passed = false;
        res.violating.push_back(q.location);
      }
    }
    out.push_back(std::move(res));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Random regularizers
// ---------------------------------------------------------------------------

/// Uniform draw from the shell r_min ≤ ‖l‖ ≤ r_max in ℝⁿ.
inline Vector sample_shell(std::mt19937_64& rng, std::size_t n, double r_min, double r_max) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Vector dir(n);
  double nrm = 0.0;
  do {
    for (double& d : dir) d = gauss(rng);
    nrm = norm2(dir);
  } while (nrm == 0.0);
  const double dn = static_cast<double>(n);
  const double lo = std::pow(r_min, dn), hi = std::pow(r_max, dn);
  const double r = std::pow(lo + unif(rng) * (hi - lo), 1.0 / dn);
  return scale(dir, r / nrm);
}

// ---------------------------------------------------------------------------
// Milnor sampling
// ---------------------------------------------------------------------------

struct MilnorOptions {
  double l_min_norm = 0.0;
  std::size_t grid_density = 11;
  double tau = kDefaultZeroTau;
  std::size_t workers = 0;
};

struct MilnorResult {
  double fraction_degenerate = 0.0;
  std::size_t draws = 0;
  std::size_t degenerate_draws = 0;
  std::size_t critical_points_total = 0;
  double min_abs_eigenvalue = INFINITY;  ///< smallest relative min|λ| seen over all draws
};

/// Fraction of random regularizers l (uniform in the l_scale ball, or shell
/// when l_min_norm > 0) for which f_l has a critical point in `box` with
/// min|λ| ≤ τ·max(1, max|λ|).
inline MilnorResult milnor_sample(const Objective& f, const Box& box, std::size_t n_l, double l_scale,
                                  std::uint64_t seed, const MilnorOptions& opts = {}) {
  if (n_l == 0) throw ConfigError("milnor_sample: need at least one draw");
  if (!(l_scale > 0.0) || opts.l_min_norm < 0.0 || opts.l_min_norm > l_scale)
    throw ConfigError("milnor_sample: invalid regularizer scale");
  std::mt19937_64 rng(seed);
  std::vector<Vector> ls;
  ls.reserve(n_l);
  for (std::size_t i = 0; i < n_l; ++i) ls.push_back(sample_shell(rng, f.dim(), opts.l_min_norm, l_scale));

  std::vector<std::uint8_t> degenerate(n_l, 0);
  std::vector<std::size_t> counts(n_l, 0);
  std::vector<double> min_rel(n_l, INFINITY);
  parallel_for(
      n_l,
      [&](std::size_t i) {
        const Objective fl = make_regularized(f, ls[i]);
        const CriticalPointSet set = find_critical_points(fl, box, opts.grid_density, kCriticalGradTol, opts.tau);
        counts[i] = set.points.size();
        for (const auto& p : set.points) {
          double max_abs = 0.0, min_abs = INFINITY;
          for (double lam : p.eigenvalues) {
            max_abs = std::max(max_abs, std::abs(lam));
            min_abs = std::min(min_abs, std::abs(lam));
          }
          const double rel = min_abs / std::max(1.0, max_abs);
          min_rel[i] = std::min(min_rel[i], rel);
          if (min_abs <= opts.tau * std::max(1.0, max_abs)) degenerate[i] = 1;
        }
      },
      opts.workers);

  MilnorResult res;
  res.draws = n_l;
  for (std::size_t i = 0; i < n_l; ++i) {
    res.degenerate_draws += degenerate[i];
    res.critical_points_total += counts[i];
    res.min_abs_eigenvalue = std::min(res.min_abs_eigenvalue, min_rel[i]);
  }
  res.fraction_degenerate = static_cast<double>(res.degenerate_draws) / static_cast<double>(n_l);
  return res;
}

// ---------------------------------------------------------------------------
// Stable-set measurement
// ---------------------------------------------------------------------------

/// A critical point, or an axis-aligned critical hyperplane {x_axis = value}.
struct StableTarget {
  enum class Kind { Point, Hyperplane } kind = Kind::Point;
  Vector point;
  std::size_t axis = 0;
  double value = 0.0;

  static StableTarget at_point(Vector p) { return {Kind::Point, std::move(p), 0, 0.0}; }
  static StableTarget hyperplane(std::size_t axis, double value) { return {Kind::Hyperplane, {}, axis, value}; }

  double distance_to(const Vector& x) const {
    if (kind == Kind::Point) return llrgd::distance(x, point);
    return std::abs(x.at(axis) - value);
  }
};

struct StableSetOptions {
  bool use_algorithm1 = false;                   ///< run_algorithm1 instead of run_plain_gd
  double capture_radius = 1e-2;
  std::function<bool(const Vector&)> exclude;    ///< rejection region for samples
  std::size_t workers = 0;
};

struct StableSetResult {
  double fraction = 0.0;
  std::size_t samples = 0;
  std::size_t captured = 0;
  std::size_t diverged = 0;
};

/// Fraction of uniform samples in `box` whose descent trajectory terminates
/// within capture_radius of the target.
inline StableSetResult stable_set_fraction(const Objective& f, const StableTarget& target, const Box& box,
                                           std::size_t n_samples, const OptimizerConfig& cfg, std::uint64_t seed,
                                           const StableSetOptions& opts = {}) {
  require_dim(box.size(), f.dim(), "stable_set_fraction box");
  if (n_samples == 0) throw ConfigError("stable_set_fraction: need at least one sample");
  std::mt19937_64 rng(seed);
  std::vector<std::uniform_real_distribution<double>> axes;
  for (const auto& iv : box) axes.emplace_back(iv.lo, iv.hi);
  std::vector<Vector> starts;
  starts.reserve(n_samples);
  std::size_t attempts = 0;
  while (starts.size() < n_samples) {
    if (++attempts > 1000 * n_samples) throw ConfigError("stable_set_fraction: exclusion rejects the whole box");
    Vector x(f.dim());
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = axes[i](rng);
    if (opts.exclude && opts.exclude(x)) continue;
    starts.push_back(std::move(x));
  }

  OptimizerConfig run_cfg = cfg;
  run_cfg.record_stride = std::numeric_limits<std::size_t>::max();
  std::vector<std::uint8_t> captured(n_samples, 0), diverged(n_samples, 0);
  parallel_for(
      n_samples,
      [&](std::size_t i) {
        const TrajectoryRecord rec =
            opts.use_algorithm1 ? run_algorithm1(f, starts[i], run_cfg) : run_plain_gd(f, starts[i], run_cfg);
        diverged[i] = rec.status == RunStatus::Diverged;
        captured[i] = rec.status != RunStatus::NumericalFailure && target.distance_to(rec.final_x) <= opts.capture_radius;
      },
      opts.workers);

  StableSetResult res;
  res.samples = n_samples;
  for (std::size_t i = 0; i < n_samples; ++i) {
    res.captured += captured[i];
    res.diverged += diverged[i];
  }
  res.fraction = static_cast<double>(res.captured) / static_cast<double>(n_samples);
  return res;
}

// ---------------------------------------------------------------------------
// PL regularization-error bound
// ---------------------------------------------------------------------------

/// Locates the regularized minimum x*_l near xstar and returns f(x*_l) − f(xstar).
/// Throws NumericalError if Newton fails or x*_l is not in Λ⁺.
inline double regularization_excess(const Objective& f, const Vector& xstar, const Vector& l) {
  const NewtonResult r = newton_solve(f, xstar, l, kCriticalGradTol);
  if (r.outcome != NewtonOutcome::Converged) throw NumericalError("pl_error_check: Newton failed to locate x*_l");
  if (stratum_at(f, r.x) != Stratum::LambdaPlus) throw NumericalError("pl_error_check: x*_l is not in Lambda+");
  return f.value(r.x) - f.value(xstar);
}

struct PlCheckResult {
  double max_excess = 0.0;
  double bound = 0.0;           ///< θ²/(2c)
  double max_l_norm = 0.0;
  std::size_t draws = 0;
};

/// Draws n_l regularizers uniformly from the θ-ball (the last one rescaled to
/// ‖l‖ = θ when include_sphere is set) and reports the largest excess
/// f(x*_l) − f(x*). The bound f(x*_l) − f(x*) ≤ θ²/(2c) holds for PL f.
inline PlCheckResult pl_error_check(const Objective& f, const Vector& xstar, double theta, double c, std::size_t n_l,
                                    std::uint64_t seed, bool include_sphere = true) {
  require_dim(xstar.size(), f.dim(), "pl_error_check");
  if (!(theta > 0.0) || !(c > 0.0)) throw ConfigError("pl_error_check: theta and c must be positive");
  if (n_l == 0) throw ConfigError("pl_error_check: need at least one draw");
  if (classify_point(f, xstar).classification != PointClass::LocalMin)
    throw ConfigError("pl_error_check: xstar must be a local minimum");
  std::mt19937_64 rng(seed);
  PlCheckResult res;
  res.bound = theta * theta / (2.0 * c);
  res.draws = n_l;
  for (std::size_t i = 0; i < n_l; ++i) {
    Vector l = sample_shell(rng, f.dim(), 0.0, theta);
    if (include_sphere && i + 1 == n_l) l = scale(l, theta / norm2(l));
    res.max_l_norm = std::max(res.max_l_norm, norm2(l));
    res.max_excess = std::max(res.max_excess, regularization_excess(f, xstar, l));
  }
  return res;
}

// ---------------------------------------------------------------------------
// False-minimum witnesses (Ψ set) for a probe point
// ---------------------------------------------------------------------------

struct PsiResult {
  std::optional<CriticalPointReport> witness;  ///< solution of ∇f(y) = −∇f(x0) in the region, not in Λ⁻
  std::vector<CriticalPointReport> solutions;  ///< all solutions found in the region
};

/// Multistart Newton on ∇f(y) + ∇f(x0) = 0 seeded from (a subsample of) the
/// region's inside cells; solutions outside the region are discarded.
inline PsiResult psi_witness_check(const Objective& f, const RegionGrid& region, const Vector& x0,
                                   std::size_t max_seeds = 400) {
  if (!region.contains_within_halo(x0)) throw ConfigError("psi_witness_check: x0 must lie in the region");
  const Vector l = f.gradient(x0);
  const auto cells = region.inside_cells();
  const std::size_t stride = std::max<std::size_t>(1, cells.size() / std::max<std::size_t>(1, max_seeds));
  std::vector<NewtonResult> found;
  for (std::size_t i = 0; i < cells.size(); i += stride) {
    NewtonResult r = newton_solve(f, region.grid.center(cells[i]), l, kCriticalGradTol);
    if (r.outcome == NewtonOutcome::Converged && region.contains_within_halo(r.x)) found.push_back(std::move(r));
  }
  PsiResult out;
  const Objective fl = make_regularized(f, l);
  for (const auto& r : deduplicate(std::move(found), kDedupRadius)) out.solutions.push_back(classify_point(fl, r.x));
  std::sort(out.solutions.begin(), out.solutions.end(),
            [](const CriticalPointReport& a, const CriticalPointReport& b) { return a.location < b.location; });
  for (const auto& s : out.solutions) {
    if (s.stratum != Stratum::LambdaMinus) {
      out.witness = s;
      break;
    }
  }
  return out;
}

}  // namespace llrgd
