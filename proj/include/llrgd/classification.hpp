#pragma once

#include <string_view>

#include "llrgd/linalg.hpp"
#include "llrgd/objective.hpp"

namespace llrgd {

/// Sign stratum of λ_min(∇²f(x)).
enum class Stratum { LambdaPlus, LambdaZero, LambdaMinus };

enum class PointClass { LocalMin, StrictSaddle, NonStrictOrDegenerate, LocalMax };

inline std::string_view to_string(Stratum s) {
  switch (s) {
    case Stratum::LambdaPlus: return "LambdaPlus";
    case Stratum::LambdaZero: return "LambdaZero";
    case Stratum::LambdaMinus: return "LambdaMinus";
  }
  return "?";
}

inline std::string_view to_string(PointClass c) {
  switch (c) {
    case PointClass::LocalMin: return "LocalMin";
    case PointClass::StrictSaddle: return "StrictSaddle";
    case PointClass::NonStrictOrDegenerate: return "NonStrictOrDegenerate";
    case PointClass::LocalMax: return "LocalMax";
  }
  return "?";
}

struct CriticalPointReport {
  Vector location;
  double grad_norm = 0.0;
  Vector eigenvalues;  ///< ascending
  Stratum stratum = Stratum::LambdaZero;
  PointClass classification = PointClass::NonStrictOrDegenerate;
};

inline Stratum stratum_of(const EigenDecomposition& e, double tau = kDefaultZeroTau) {
  const double z = zero_threshold(e, tau);
  if (e.min() > z) return Stratum::LambdaPlus;
  if (e.min() < -z) return Stratum::LambdaMinus;
  return Stratum::LambdaZero;
}

inline PointClass class_of(const EigenDecomposition& e, double tau = kDefaultZeroTau) {
  const double z = zero_threshold(e, tau);
  if (e.min() > z) return PointClass::LocalMin;
  if (e.max() < -z) return PointClass::LocalMax;
  if (e.min() < -z && e.max() > z) return PointClass::StrictSaddle;
  return PointClass::NonStrictOrDegenerate;
}

inline Stratum stratum_at(const Objective& f, const Vector& x, double tau = kDefaultZeroTau) {
  return stratum_of(sym_eigen(f.hessian(x)), tau);
}

/// Second-order classification of x. The gradient norm is reported as-is;
/// the caller decides whether x counts as critical.
inline CriticalPointReport classify_point(const Objective& f, const Vector& x, double tau = kDefaultZeroTau) {
  const EigenDecomposition e = sym_eigen(f.hessian(x));
  return CriticalPointReport{x, norm2(f.gradient(x)), e.eigenvalues, stratum_of(e, tau), class_of(e, tau)};
}

}  // namespace llrgd
