#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "llrgd/linalg.hpp"

namespace llrgd {

/// Closed interval per coordinate.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double width() const noexcept { return hi - lo; }
  double center() const noexcept { return 0.5 * (lo + hi); }
  friend bool operator==(const Interval&, const Interval&) = default;
};

using Box = std::vector<Interval>;

inline Box cube(std::size_t n, double lo, double hi) { return Box(n, Interval{lo, hi}); }

inline Vector box_center(const Box& box) {
  Vector c(box.size());
  for (std::size_t i = 0; i < box.size(); ++i) c[i] = box[i].center();
  return c;
}

inline bool box_contains(const Box& box, const Vector& x, double margin = 0.0) {
  require_dim(x.size(), box.size(), "box_contains");
  for (std::size_t i = 0; i < box.size(); ++i)
    if (x[i] < box[i].lo - margin || x[i] > box[i].hi + margin) return false;
  return true;
}

using ValueFn = std::function<double(const Vector&)>;
using GradientFn = std::function<Vector(const Vector&)>;
using HessianFn = std::function<SymMatrix(const Vector&)>;

/// A C² objective with value, gradient and Hessian evaluators.
///
/// Missing gradient/Hessian evaluators fall back to central finite differences
/// of the value. Objectives are immutable after construction; all evaluators
/// must be pure so an Objective can be shared between threads.
class Objective {
 public:
  Objective(std::string name, std::size_t dim, ValueFn value, GradientFn gradient = {}, HessianFn hessian = {},
            Box domain_box = {}, std::optional<double> lipschitz_hint = std::nullopt)
      : name_(std::move(name)),
        dim_(dim),
        value_(std::move(value)),
        gradient_(std::move(gradient)),
        hessian_(std::move(hessian)),
        box_(domain_box.empty() ? cube(dim, -3.0, 3.0) : std::move(domain_box)),
        lipschitz_(lipschitz_hint) {
    if (dim_ == 0) throw DimensionError("Objective: dimension must be positive");
    if (!value_) throw ConfigError("Objective: value evaluator is required");
    require_dim(box_.size(), dim_, "Objective domain box");
  }

  const std::string& name() const noexcept { return name_; }
  std::size_t dim() const noexcept { return dim_; }
  const Box& domain_box() const noexcept { return box_; }
  std::optional<double> lipschitz_hint() const noexcept { return lipschitz_; }
  bool has_analytic_gradient() const noexcept { return static_cast<bool>(gradient_); }
  bool has_analytic_hessian() const noexcept { return static_cast<bool>(hessian_); }

  double value(const Vector& x) const {
    require_dim(x.size(), dim_, name_.c_str());
    return value_(x);
  }

  Vector gradient(const Vector& x) const {
    require_dim(x.size(), dim_, name_.c_str());
    if (gradient_) return gradient_(x);
    return fd_gradient(value_, x);
  }

  SymMatrix hessian(const Vector& x) const {
    require_dim(x.size(), dim_, name_.c_str());
    if (hessian_) return hessian_(x);
    return fd_hessian(value_, x);
  }

  Objective with_lipschitz_hint(double L) const {
    Objective o = *this;
    o.lipschitz_ = L;
    return o;
  }

  Objective with_domain_box(Box box) const {
    require_dim(box.size(), dim_, "with_domain_box");
    Objective o = *this;
    o.box_ = std::move(box);
    return o;
  }

  const ValueFn& value_fn() const noexcept { return value_; }
  const GradientFn& gradient_fn() const noexcept { return gradient_; }
  const HessianFn& hessian_fn() const noexcept { return hessian_; }

 private:
  std::string name_;
  std::size_t dim_;
  ValueFn value_;
  GradientFn gradient_;
  HessianFn hessian_;
  Box box_;
  std::optional<double> lipschitz_;
};

/// f_l(x) = f(x) + lᵀx. The Hessian evaluator is f's own evaluator, so
/// regularized and unregularized Hessians are bit-identical.
inline Objective make_regularized(const Objective& f, const Vector& l) {
  require_dim(l.size(), f.dim(), "make_regularized");
  if (!all_finite(l)) throw NumericalError("make_regularized: non-finite regularizer");
  auto base = std::make_shared<const Objective>(f);
  ValueFn value = [base, l](const Vector& x) { return base->value(x) + dot(l, x); };
  GradientFn gradient = [base, l](const Vector& x) { return add(base->gradient(x), l); };
  HessianFn hessian = [base](const Vector& x) { return base->hessian(x); };
  return Objective(f.name() + "+linear", f.dim(), std::move(value), std::move(gradient), std::move(hessian),
                   f.domain_box(), f.lipschitz_hint());
}

/// Spectral norm of the Hessian maximized over a uniform grid on the box.
inline double estimate_lipschitz(const Objective& f, const Box& box, std::size_t nodes_per_axis = 21) {
  const std::size_t n = box.size();
  std::size_t total = 1;
  for (std::size_t i = 0; i < n; ++i) total *= nodes_per_axis;
  double L = 0.0;
  Vector x(n);
  for (std::size_t idx = 0; idx < total; ++idx) {
    std::size_t r = idx;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t k = r % nodes_per_axis;
      r /= nodes_per_axis;
      const double t = nodes_per_axis == 1 ? 0.5 : static_cast<double>(k) / static_cast<double>(nodes_per_axis - 1);
      x[i] = box[i].lo + t * box[i].width();
    }
    L = std::max(L, spectral_norm(f.hessian(x)));
  }
  return L;
}

/// Third directional derivative from the objective's Hessian evaluator:
/// central difference of vᵀ∇²f(x + t v)v at t = 0.
inline double third_directional(const Objective& f, const Vector& x, const Vector& v, double h) {
  require_dim(v.size(), x.size(), "third_directional");
  if (std::abs(norm2(v) - 1.0) > 1e-12) throw ConfigError("third_directional: direction must be a unit vector");
  const double qp = f.hessian(axpy(x, h, v)).bilinear(v, v);
  const double qm = f.hessian(axpy(x, -h, v)).bilinear(v, v);
  return (qp - qm) / (2.0 * h);
}

inline double third_directional(const Objective& f, const Vector& x, const Vector& v) {
  return third_directional(f, x, v, default_fd_step2(x));
}

}  // namespace llrgd
