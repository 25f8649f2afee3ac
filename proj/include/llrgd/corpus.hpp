#pragma once

// Annotated test functions with analytic derivatives. All of them are
// unbounded below except the quadratic bowl; experiments stay in each
// entry's domain box and treat leaving the escape ball as divergence.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "llrgd/classification.hpp"
#include "llrgd/objective.hpp"

namespace llrgd {

struct KnownCriticalPoint {
  Vector location;
  PointClass classification;
  Vector eigenvalues;  ///< expected Hessian spectrum, ascending
};

struct CorpusEntry {
  Objective objective;
  std::vector<KnownCriticalPoint> known_critical_points;
  std::string notes;
  Vector default_x0;
  std::optional<double> pl_constant;   ///< set when f is PL on the whole space
  bool nonisolated_critical_set = false;
};

namespace corpus_detail {
inline Objective with_box_lipschitz(Objective f) {
  const double L = estimate_lipschitz(f, f.domain_box());
  return f.with_lipschitz_hint(L);
}
}  // namespace corpus_detail

/// f(x, y) = x³/3 + y²/2; non-strict saddle at the origin, W^s = {x > 0}.
inline CorpusEntry cubic_valley() {
  Objective f(
      "cubic_valley", 2, [](const Vector& v) { return v[0] * v[0] * v[0] / 3.0 + 0.5 * v[1] * v[1]; },
      [](const Vector& v) { return Vector{v[0] * v[0], v[1]}; },
      [](const Vector& v) { return SymMatrix::diagonal({2.0 * v[0], 1.0}); });
  return CorpusEntry{corpus_detail::with_box_lipschitz(std::move(f)),
                     {{{0.0, 0.0}, PointClass::NonStrictOrDegenerate, {0.0, 1.0}}},
                     "non-strict saddle at (0,0) with Hessian eigenvalues 0 and 1",
                     {1.5, 0.5},
                     std::nullopt,
                     false};
}

/// f(x, y) = x³/3 + x y²; ∂f/∂x = x² + y² ≥ 0 everywhere.
inline CorpusEntry cubic_cone() {
  Objective f(
      "cubic_cone", 2, [](const Vector& v) { return v[0] * v[0] * v[0] / 3.0 + v[0] * v[1] * v[1]; },
      [](const Vector& v) { return Vector{v[0] * v[0] + v[1] * v[1], 2.0 * v[0] * v[1]}; },
      [](const Vector& v) {
        return SymMatrix{{2.0 * v[0], 2.0 * v[1]}, {2.0 * v[1], 2.0 * v[0]}};
      });
  return CorpusEntry{corpus_detail::with_box_lipschitz(std::move(f)),
                     {{{0.0, 0.0}, PointClass::NonStrictOrDegenerate, {0.0, 0.0}}},
                     "non-strict saddle at (0,0); gradient image lies in the half-space x >= 0",
                     {1.5, 0.5},
                     std::nullopt,
                     false};
}

/// f(x, y) = x y³/3; every point of the x-axis is critical with zero Hessian.
inline CorpusEntry monkey_line() {
  Objective f(
      "monkey_line", 2, [](const Vector& v) { return v[0] * v[1] * v[1] * v[1] / 3.0; },
      [](const Vector& v) { return Vector{v[1] * v[1] * v[1] / 3.0, v[0] * v[1] * v[1]}; },
      [](const Vector& v) {
        return SymMatrix{{0.0, v[1] * v[1]}, {v[1] * v[1], 2.0 * v[0] * v[1]}};
      });
  std::vector<KnownCriticalPoint> axis;
  for (double x : {-2.0, -1.0, 0.0, 1.0, 2.0})
    axis.push_back({{x, 0.0}, PointClass::NonStrictOrDegenerate, {0.0, 0.0}});
  return CorpusEntry{
      corpus_detail::with_box_lipschitz(std::move(f)), std::move(axis),
      "critical subspace {y = 0}; Hessian has a negative eigenvalue wherever y != 0. "
      "One figure caption for this example prints x^3/3 + x y^2; the example text's x y^3/3 is used here.",
      {1.5, 1.0}, std::nullopt, true};
}

/// f(x) = (x² − 1)³ = (x − 1)³(x + 1)³; minimum at 0, non-strict saddles at ±1.
inline CorpusEntry double_degenerate() {
  Objective f(
      "double_degenerate", 1,
      [](const Vector& v) {
        const double u = v[0] * v[0] - 1.0;
        return u * u * u;
      },
      [](const Vector& v) {
        const double u = v[0] * v[0] - 1.0;
        return Vector{6.0 * v[0] * u * u};
      },
      [](const Vector& v) {
        const double x2 = v[0] * v[0];
        return SymMatrix::diagonal({6.0 * (x2 - 1.0) * (5.0 * x2 - 1.0)});
      },
      cube(1, -2.0, 2.0));
  return CorpusEntry{corpus_detail::with_box_lipschitz(std::move(f)),
                     {{{-1.0}, PointClass::NonStrictOrDegenerate, {0.0}},
                      {{0.0}, PointClass::LocalMin, {6.0}},
                      {{1.0}, PointClass::NonStrictOrDegenerate, {0.0}}},
                     "f''(+-1) = 0 and f'''(+-1) = +-48: any l != 0 folds one saddle into a false minimum",
                     {0.9},
                     std::nullopt,
                     false};
}

/// f(x) = (c/2)‖x‖²; strongly convex, PL with constant c.
inline CorpusEntry quadratic_bowl(double c = 1.0, std::size_t dim = 2) {
  if (!(c > 0.0)) throw ConfigError("quadratic_bowl: curvature must be positive");
  Objective f(
      "quadratic_bowl", dim, [c](const Vector& v) { return 0.5 * c * dot(v, v); },
      [c](const Vector& v) { return scale(v, c); },
      [c, dim](const Vector&) { return SymMatrix::diagonal(Vector(dim, c)); }, cube(dim, -3.0, 3.0), c);
  Vector x0(dim, 0.0);
  x0[0] = 2.0;
  return CorpusEntry{std::move(f),
                     {{Vector(dim, 0.0), PointClass::LocalMin, Vector(dim, c)}},
                     "global minimum at 0; PL constant c",
                     std::move(x0),
                     c,
                     false};
}

inline std::vector<CorpusEntry> corpus() {
  return {cubic_valley(), cubic_cone(), monkey_line(), double_degenerate(), quadratic_bowl()};
}

inline std::vector<std::string> corpus_names() {
  return {"cubic_valley", "cubic_cone", "monkey_line", "double_degenerate", "quadratic_bowl"};
}

/// Looks an entry up by name; throws ConfigError for unknown names.
inline CorpusEntry corpus_entry(std::string_view name) {
  if (name == "cubic_valley") return cubic_valley();
  if (name == "cubic_cone") return cubic_cone();
  if (name == "monkey_line") return monkey_line();
  if (name == "double_degenerate") return double_degenerate();
  if (name == "quadratic_bowl") return quadratic_bowl();
  throw ConfigError("unknown objective '" + std::string(name) + "'");
}

}  // namespace llrgd
