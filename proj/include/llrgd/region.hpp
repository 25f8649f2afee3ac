#pragma once

// Grid discretization of Θ(x), the connected component of
// L_θ = {x : ‖∇f(x)‖₂ ≤ θ} containing a seed point, for n ≤ 3.

#include <cmath>
#include <cstdint>
#include <deque>
#include <optional>
#include <vector>

#include "llrgd/objective.hpp"

namespace llrgd {

inline constexpr std::size_t kMaxRegionDim = 3;

/// Uniform cell grid over a box; cells are addressed by a flat index with
/// axis 0 varying fastest.
class CellGrid {
 public:
  CellGrid() = default;
  CellGrid(Box box, std::size_t resolution) : box_(std::move(box)), res_(resolution) {
    if (box_.empty() || box_.size() > kMaxRegionDim)
      throw ConfigError("region grids support dimensions 1..3 only (unsupported dimension)");
    if (res_ == 0) throw ConfigError("region grid resolution must be positive");
    for (const auto& iv : box_)
      if (!(iv.hi > iv.lo)) throw ConfigError("region grid box must have positive width");
    count_ = 1;
    for (std::size_t i = 0; i < box_.size(); ++i) count_ *= res_;
  }

  std::size_t dim() const noexcept { return box_.size(); }
  std::size_t resolution() const noexcept { return res_; }
  std::size_t cell_count() const noexcept { return count_; }
  const Box& box() const noexcept { return box_; }
  double cell_width(std::size_t axis) const { return box_[axis].width() / static_cast<double>(res_); }

  std::vector<std::size_t> coords(std::size_t idx) const {
    std::vector<std::size_t> c(dim());
    for (std::size_t i = 0; i < dim(); ++i) {
      c[i] = idx % res_;
      idx /= res_;
    }
    return c;
  }

  std::size_t index(const std::vector<std::size_t>& c) const {
    std::size_t idx = 0;
    for (std::size_t i = dim(); i-- > 0;) idx = idx * res_ + c[i];
    return idx;
  }

  Vector center(std::size_t idx) const {
    const auto c = coords(idx);
    Vector x(dim());
    for (std::size_t i = 0; i < dim(); ++i) x[i] = box_[i].lo + (static_cast<double>(c[i]) + 0.5) * cell_width(i);
    return x;
  }

  std::optional<std::size_t> cell_of(const Vector& x) const {
    require_dim(x.size(), dim(), "CellGrid::cell_of");
    std::vector<std::size_t> c(dim());
    for (std::size_t i = 0; i < dim(); ++i) {
      if (!(x[i] >= box_[i].lo && x[i] <= box_[i].hi)) return std::nullopt;
      const double t = std::floor((x[i] - box_[i].lo) / cell_width(i));
      c[i] = std::min(res_ - 1, static_cast<std::size_t>(std::max(0.0, t)));
    }
    return index(c);
  }

  /// Face neighbours (2n-connectivity) that lie on the grid.
  std::vector<std::size_t> neighbors(std::size_t idx) const {
    std::vector<std::size_t> out;
    auto c = coords(idx);
    for (std::size_t i = 0; i < dim(); ++i) {
      if (c[i] > 0) {
        --c[i];
        out.push_back(index(c));
        ++c[i];
      }
      if (c[i] + 1 < res_) {
        ++c[i];
        out.push_back(index(c));
        --c[i];
      }
    }
    return out;
  }

  /// All cells whose coordinates differ by at most one on every axis.
  std::vector<std::size_t> halo(std::size_t idx) const {
    std::vector<std::size_t> out;
    const auto c = coords(idx);
    std::size_t total = 1;
    for (std::size_t i = 0; i < dim(); ++i) total *= 3;
    for (std::size_t k = 0; k < total; ++k) {
      std::size_t r = k;
      std::vector<std::size_t> d(dim());
      bool ok = true;
      for (std::size_t i = 0; i < dim(); ++i) {
        const long off = static_cast<long>(r % 3) - 1;
        r /= 3;
        const long v = static_cast<long>(c[i]) + off;
        if (v < 0 || v >= static_cast<long>(res_)) ok = false;
        d[i] = static_cast<std::size_t>(std::max(0L, v));
      }
      if (ok) out.push_back(index(d));
    }
    return out;
  }

  /// Flood fill over cells accepted by `pred`, starting from `start`.
  template <class Pred>
  std::vector<std::uint8_t> flood(std::size_t start, Pred&& pred) const {
    std::vector<std::uint8_t> mark(count_, 0);
    if (!pred(start)) return mark;
    std::deque<std::size_t> queue{start};
    mark[start] = 1;
    while (!queue.empty()) {
      const std::size_t cur = queue.front();
      queue.pop_front();
      for (std::size_t nb : neighbors(cur)) {
        if (!mark[nb] && pred(nb)) {
          mark[nb] = 1;
          queue.push_back(nb);
        }
      }
    }
    return mark;
  }

 private:
  Box box_;
  std::size_t res_ = 0;
  std::size_t count_ = 0;
};

/// Θ(seed) on a grid: `inside` marks cells whose centre has ‖∇f‖ ≤ θ and that
/// are face-connected to the seed cell; `boundary` marks inside cells with a
/// face neighbour on the grid that is not inside.
struct RegionGrid {
  CellGrid grid;
  double theta = 0.0;
  std::size_t seed_cell = 0;
  std::vector<std::uint8_t> inside;
  std::vector<std::uint8_t> boundary;

  std::size_t inside_count() const {
    return static_cast<std::size_t>(std::count(inside.begin(), inside.end(), std::uint8_t{1}));
  }

  std::vector<std::size_t> inside_cells() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < inside.size(); ++i)
      if (inside[i]) out.push_back(i);
    return out;
  }

  std::vector<std::size_t> boundary_cells() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < boundary.size(); ++i)
      if (boundary[i]) out.push_back(i);
    return out;
  }

  /// Cellwise membership of an arbitrary point.
  bool contains(const Vector& x) const {
    const auto c = grid.cell_of(x);
    return c && inside[*c];
  }

  /// Membership with a one-cell halo, for points that sit on ∂Θ where the
  /// containing cell's centre may fall just outside L_θ.
  bool contains_within_halo(const Vector& x) const {
    const auto c = grid.cell_of(x);
    if (!c) return false;
    for (std::size_t h : grid.halo(*c))
      if (inside[h]) return true;
    return false;
  }
};

/// Flood fill of the small-gradient component containing `seed`. If the
/// seed's own cell centre is just outside L_θ, the nearest halo cell inside
/// L_θ becomes the seed cell.
inline RegionGrid theta_region(const Objective& f, const Vector& seed, double theta, const Box& box,
                               std::size_t resolution) {
  require_dim(seed.size(), f.dim(), "theta_region seed");
  require_dim(box.size(), f.dim(), "theta_region box");
  if (!(theta > 0.0)) throw ConfigError("theta_region: theta must be positive");
  if (!(norm2(f.gradient(seed)) <= theta)) throw ConfigError("theta_region: seed lies outside L_theta");

  RegionGrid r;
  r.grid = CellGrid(box, resolution);
  r.theta = theta;
  const auto seed_cell = r.grid.cell_of(seed);
  if (!seed_cell) throw ConfigError("theta_region: seed lies outside the box");

  std::vector<std::int8_t> small(r.grid.cell_count(), -1);  // lazily evaluated membership in L_θ
  auto in_l_theta = [&](std::size_t idx) {
    if (small[idx] < 0) small[idx] = norm2(f.gradient(r.grid.center(idx))) <= theta ? 1 : 0;
    return small[idx] == 1;
  };

  std::optional<std::size_t> start;
  if (in_l_theta(*seed_cell)) {
    start = *seed_cell;
  } else {
    double best = INFINITY;
    for (std::size_t h : r.grid.halo(*seed_cell)) {
      const double d = distance(r.grid.center(h), seed);
      if (in_l_theta(h) && d < best) {
        best = d;
        start = h;
      }
    }
  }
  if (!start) throw ConfigError("theta_region: no grid cell near the seed lies in L_theta; refine the grid");
  r.seed_cell = *start;
  r.inside = r.grid.flood(*start, in_l_theta);
  r.boundary.assign(r.grid.cell_count(), 0);
  for (std::size_t i = 0; i < r.inside.size(); ++i) {
    if (!r.inside[i]) continue;
    for (std::size_t nb : r.grid.neighbors(i)) {
      if (!r.inside[nb]) {
        r.boundary[i] = 1;
        break;
      }
    }
  }
  return r;
}

// ---------------------------------------------------------------------------
// Boundary flow classification
// ---------------------------------------------------------------------------

enum class BoundaryFlow { Exit, Enter, Tangent };

inline std::string_view to_string(BoundaryFlow b) {
  switch (b) {
    case BoundaryFlow::Exit: return "Exit";
    case BoundaryFlow::Enter: return "Enter";
    case BoundaryFlow::Tangent: return "Tangent";
  }
  return "?";
}

/// s = (∇f(x) + l)ᵀ ∇²f(x) ∇f(x); the regularized negative gradient leaves
/// the level set ‖∇f‖ = const when s < 0.
inline double boundary_product(const Objective& f, const Vector& x, const Vector& l) {
  require_dim(l.size(), f.dim(), "boundary_product");
  const Vector g = f.gradient(x);
  return f.hessian(x).bilinear(add(g, l), g);
}

inline BoundaryFlow boundary_classify(const Objective& f, const Vector& x, const Vector& l, double tol = 1e-12) {
  const double s = boundary_product(f, x, l);
  if (s < -tol) return BoundaryFlow::Exit;
  if (s > tol) return BoundaryFlow::Enter;
  return BoundaryFlow::Tangent;
}

struct BoundaryAudit {
  bool holds = true;
  std::size_t boundary_cells = 0;
  std::size_t exit_cells_l = 0;  ///< cells in ∂ₗ⁻Θ
  std::size_t exit_cells_0 = 0;  ///< cells in ∂₀⁻Θ
  std::vector<Vector> counterexamples;  ///< centres in ∂ₗ⁻Θ but not in ∂₀⁻Θ
};

/// Checks ∂ₗ⁻Θ ⊆ ∂₀⁻Θ over the boundary cells of the region.
inline BoundaryAudit check_boundary_assumption(const Objective& f, const RegionGrid& region, const Vector& l,
                                               double tol = 1e-12) {
  require_dim(l.size(), f.dim(), "check_boundary_assumption");
  BoundaryAudit audit;
  const Vector zero(f.dim(), 0.0);
  for (std::size_t idx : region.boundary_cells()) {
    ++audit.boundary_cells;
    const Vector c = region.grid.center(idx);
    const bool exit_l = boundary_classify(f, c, l, tol) == BoundaryFlow::Exit;
    const bool exit_0 = boundary_classify(f, c, zero, tol) == BoundaryFlow::Exit;
    audit.exit_cells_l += exit_l;
    audit.exit_cells_0 += exit_0;
    if (exit_l && !exit_0) audit.counterexamples.push_back(c);
  }
  audit.holds = audit.counterexamples.empty();
  return audit;
}

/// True iff vᵀ∇f > 0 at every inside cell centre where ‖∇f‖ > zero_tol, i.e.
/// the gradient image of the region lies in the open half-space {vᵀg > 0}
/// apart from critical points.
inline bool halfspace_check(const Objective& f, const RegionGrid& region, const Vector& v, double zero_tol = 1e-12) {
  require_dim(v.size(), f.dim(), "halfspace_check");
  if (std::abs(norm2(v) - 1.0) > 1e-12) throw ConfigError("halfspace_check: direction must be a unit vector");
  for (std::size_t idx : region.inside_cells()) {
    const Vector g = f.gradient(region.grid.center(idx));
    if (norm2(g) <= zero_tol) continue;
    if (!(dot(v, g) > 0.0)) return false;
  }
  return true;
}

}  // namespace llrgd
