#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "llrgd/corpus.hpp"
#include "llrgd/optimizer.hpp"

using namespace llrgd;

TEST(Step, GradientStepExamples) {
  const auto valley = cubic_valley().objective;
  const Vector x = gd_step(valley, {1.0, 1.0}, 0.1);
  EXPECT_DOUBLE_EQ(x[0], 0.9);
  EXPECT_DOUBLE_EQ(x[1], 0.9);
  EXPECT_EQ(gd_step(valley, {0.0, 0.0}, 0.3), (Vector{0.0, 0.0}));
  const auto bowl = quadratic_bowl().objective;
  EXPECT_EQ(gd_step(bowl, {1.4, -0.6}, 0.5), (Vector{0.7, -0.3}));
  EXPECT_THROW(gd_step(valley, {NAN, 0.0}, 0.1), NumericalError);
}

TEST(Step, RegularizedStepExamples) {
  const auto valley = cubic_valley().objective;
  EXPECT_EQ(reg_step(valley, {1.0, 0.0}, {-1.0, 0.0}, 0.1), (Vector{1.0, 0.0}));
  EXPECT_EQ(reg_step(valley, {0.3, -0.8}, {0.0, 0.0}, 0.1), gd_step(valley, {0.3, -0.8}, 0.1));
  const auto bowl = quadratic_bowl().objective;
  EXPECT_EQ(reg_step(bowl, {0.0, 0.0}, {0.4, -0.2}, 0.25), (Vector{-0.1, 0.05}));
  EXPECT_THROW(reg_step(valley, {1.0, 0.0}, {1.0}, 0.1), DimensionError);
}

TEST(Run, CubicValleyConvergesWithoutRegularization) {
  OptimizerConfig cfg;
  cfg.max_iters = 2000000;
  const auto r = run_algorithm1(cubic_valley().objective, {1.5, 0.5}, cfg);
  EXPECT_EQ(r.status, RunStatus::Converged);
  EXPECT_LT(r.final_grad_norm, 1e-6);
  EXPECT_TRUE(r.events.empty());
  EXPECT_GT(r.final_x[0], 0.0);
}

TEST(Run, CubicConeEscapesAfterOneEvent) {
  OptimizerConfig cfg;
  cfg.theta = 3.0;
  cfg.gamma = 0.05;
  cfg.max_iters = 200;
  const auto r = run_algorithm1(cubic_cone().objective, {1.5, 0.5}, cfg);
  ASSERT_GE(r.events.size(), 1u);
  const auto& e = r.events.front();
  EXPECT_EQ(e.k_entry, 0u);
  EXPECT_NEAR(e.l[0], 2.5, 1e-15);
  EXPECT_NEAR(e.l[1], 1.5, 1e-15);
  ASSERT_TRUE(e.k_exit.has_value());
  EXPECT_LE(*e.k_exit, 50u);
  bool negative = false;
  for (std::size_t i = 0; i < r.iterates.size(); ++i)
    if (r.ks[i] >= *e.k_exit && r.iterates[i][0] < 0.0) negative = true;
  EXPECT_TRUE(negative);
}

TEST(Run, QuadraticBowlConvergesToShiftedMinimum) {
  OptimizerConfig cfg;
  cfg.theta = 0.5;
  const auto r = run_algorithm1(quadratic_bowl().objective, {2.0, 0.0}, cfg);
  ASSERT_EQ(r.status, RunStatus::Converged);
  ASSERT_EQ(r.events.size(), 1u);
  const Vector& l = r.events.front().l;
  EXPECT_LE(distance(r.final_x, scale(l, -1.0)), 1e-6);
  EXPECT_LE(r.final_value, 0.5 * 0.5 * 0.5 + 1e-12);
  EXPECT_LT(r.final_active_grad_norm, 1e-6);
}

TEST(Run, MonkeyLinePlainGdApproachesAxis) {
  OptimizerConfig cfg;
  cfg.gamma = 0.05;
  cfg.max_iters = 200000;
  const auto r = run_plain_gd(monkey_line().objective, {1.5, 1.0}, cfg);
  EXPECT_NE(r.status, RunStatus::Diverged);
  EXPECT_LT(std::abs(r.final_x[1]), 1e-3);
}

TEST(Run, CubicValleyDivergesFromNegativeSide) {
  OptimizerConfig cfg;
  cfg.gamma = 0.1;
  const auto r = run_plain_gd(cubic_valley().objective, {-0.5, 0.0}, cfg);
  EXPECT_EQ(r.status, RunStatus::Diverged);
  EXPECT_LT(r.final_x[0], -10.0);
}

TEST(Run, StartAtCriticalPointConvergesImmediately) {
  for (const auto& e : corpus()) {
    for (const auto& kp : e.known_critical_points) {
      const auto r = run_plain_gd(e.objective, kp.location, OptimizerConfig{});
      EXPECT_EQ(r.status, RunStatus::Converged) << e.objective.name();
      EXPECT_EQ(r.iterations, 0u) << e.objective.name();
    }
  }
}

TEST(Run, StartInsideRegionOpensEventAtZero) {
  OptimizerConfig cfg;
  cfg.theta = 5.0;
  cfg.gamma = 0.05;
  cfg.max_iters = 100;
  const auto r = run_algorithm1(cubic_valley().objective, {0.5, 0.2}, cfg);
  ASSERT_FALSE(r.events.empty());
  EXPECT_EQ(r.events.front().k_entry, 0u);
  EXPECT_EQ(r.events.front().l, cubic_valley().objective.gradient({0.5, 0.2}));
}

TEST(Run, ReentryResamplesRegularizer) {
  // Gradient 1 + 0.9·cos x stays in [0.1, 1.9]: descent runs left forever and
  // crosses a flat stretch once per period.
  Objective f(
      "wavy_ramp", 1, [](const Vector& v) { return v[0] + 0.9 * std::sin(v[0]); },
      [](const Vector& v) { return Vector{1.0 + 0.9 * std::cos(v[0])}; }, {}, cube(1, -100.0, 100.0));
  OptimizerConfig cfg;
  cfg.theta = 0.5;
  cfg.gamma = 0.1;
  cfg.max_iters = 5000;
  cfg.escape_radius = 30.0;
  const auto r = run_algorithm1(f, {0.0}, cfg);
  EXPECT_GE(r.events.size(), 2u);
  for (std::size_t i = 0; i < r.events.size(); ++i) {
    EXPECT_EQ(r.events[i].l, f.gradient(r.events[i].x_entry));
    if (r.events[i].k_exit) EXPECT_GT(*r.events[i].k_exit, r.events[i].k_entry);
    if (i > 0) {
      ASSERT_TRUE(r.events[i - 1].k_exit.has_value());
      EXPECT_GE(r.events[i].k_entry, *r.events[i - 1].k_exit);
    }
  }
}

TEST(Run, NumericalFailureIsDistinctFromDivergence) {
  Objective f("log", 1, [](const Vector& v) { return -std::log(v[0]); },
              [](const Vector& v) { return Vector{-1.0 / v[0]}; });
  OptimizerConfig cfg;
  cfg.gamma = 1.0;
  cfg.max_iters = 100;
  cfg.escape_radius = 1e300;
  const auto r = run_plain_gd(f, {0.0}, cfg);
  EXPECT_EQ(r.status, RunStatus::NumericalFailure);
}

TEST(Run, ConfigValidation) {
  const auto f = cubic_valley().objective;
  OptimizerConfig cfg;
  cfg.theta = 1e-7;
  EXPECT_THROW(run_algorithm1(f, {1.0, 0.0}, cfg), ConfigError);
  cfg = {};
  cfg.max_iters = 0;
  EXPECT_THROW(run_algorithm1(f, {1.0, 0.0}, cfg), ConfigError);
  EXPECT_THROW(run_algorithm1(f, {1.0}, OptimizerConfig{}), DimensionError);
  cfg = {};
  cfg.gamma = 10.0;
  cfg.max_iters = 1;
  EXPECT_FALSE(run_plain_gd(f, {1.0, 0.0}, cfg).warnings.empty());
}

TEST(Run, DefaultGammaUsesHessianNormAtStart) {
  const auto r = run_plain_gd(cubic_cone().objective, {1.5, 0.5}, OptimizerConfig{.max_iters = 1});
  EXPECT_DOUBLE_EQ(r.gamma, 1.0 / (2.0 * 4.0));
  const auto z = run_plain_gd(cubic_cone().objective, {0.0, 0.0}, OptimizerConfig{.max_iters = 1});
  EXPECT_DOUBLE_EQ(z.gamma, 1.0 / (2.0 * 1e-3));
}

TEST(Run, StrideDecimatesButKeepsLastIterate) {
  OptimizerConfig cfg;
  cfg.gamma = 0.1;
  cfg.record_stride = 7;
  cfg.max_iters = 50;
  const auto r = run_plain_gd(cubic_valley().objective, {1.5, 0.5}, cfg);
  EXPECT_EQ(r.ks.back(), 50u);
  for (std::size_t i = 0; i + 1 < r.ks.size(); ++i) EXPECT_EQ(r.ks[i] % 7, 0u);
}

namespace {

void expect_prefix_equal(const Objective& f, const Vector& x0, const OptimizerConfig& cfg) {
  OptimizerConfig c = cfg;
  const auto reg = run_algorithm1(f, x0, c);
  const auto gd = run_plain_gd(f, x0, c);
  const std::size_t k_first = reg.events.empty() ? reg.iterations : reg.events.front().k_entry;
  for (std::size_t i = 0; i < reg.ks.size() && i < gd.ks.size() && reg.ks[i] <= k_first; ++i) {
    ASSERT_EQ(reg.ks[i], gd.ks[i]);
    ASSERT_EQ(reg.iterates[i], gd.iterates[i]) << f.name() << " k=" << reg.ks[i];
  }
}

}  // namespace

TEST(Invariant, PrefixEquality) {
  std::mt19937_64 rng(4);
  for (const auto& e : corpus()) {
    for (int t = 0; t < 20; ++t) {
      Vector x0(e.objective.dim());
      for (double& v : x0) v = std::uniform_real_distribution<double>(-2.0, 2.0)(rng);
      OptimizerConfig cfg;
      cfg.theta = 1.0;
      cfg.gamma = 0.02;
      cfg.max_iters = 400;
      expect_prefix_equal(e.objective, x0, cfg);
    }
  }
}

TEST(Invariant, EventNormBoundAndMonotoneDescent) {
  std::mt19937_64 rng(6);
  for (const auto& e : corpus()) {
    const Objective& f = e.objective;
    for (int t = 0; t < 20; ++t) {
      Vector x0(f.dim());
      for (double& v : x0) v = std::uniform_real_distribution<double>(-2.0, 2.0)(rng);
      OptimizerConfig cfg;
      cfg.theta = 1.5;
      cfg.gamma = 0.02;
      cfg.max_iters = 300;
      const auto r = run_algorithm1(f, x0, cfg);
      for (const auto& ev : r.events) ASSERT_LE(norm2(ev.l), cfg.theta);
      for (std::size_t i = 0; i + 1 < r.iterates.size(); ++i) {
        if (r.event_ids[i] != r.event_ids[i + 1] || r.modes[i] != r.modes[i + 1]) continue;
        const Vector l = r.event_ids[i] >= 0 ? r.events[r.event_ids[i]].l : Vector(f.dim(), 0.0);
        const Vector& a = r.iterates[i];
        const Vector& b = r.iterates[i + 1];
        double L = 0.0;
        for (double s : {0.0, 0.25, 0.5, 0.75, 1.0}) L = std::max(L, spectral_norm(f.hessian(axpy(a, s, sub(b, a)))));
        if (cfg.gamma > 1.0 / (L + 1e-12)) continue;
        const double fa = f.value(a) + dot(l, a);
        const double fb = f.value(b) + dot(l, b);
        ASSERT_LE(fb, fa + 1e-13 * std::max(1.0, std::abs(fa))) << f.name();
      }
    }
  }
}

TEST(Invariant, HessianSpectrumAlongRegularizedSegmentMatches) {
  OptimizerConfig cfg;
  cfg.theta = 3.0;
  cfg.gamma = 0.05;
  cfg.max_iters = 60;
  const auto f = cubic_cone().objective;
  const auto r = run_algorithm1(f, {1.5, 0.5}, cfg);
  ASSERT_FALSE(r.events.empty());
  const Objective fl = make_regularized(f, r.events.front().l);
  std::size_t checked = 0;
  for (std::size_t i = 0; i < r.iterates.size(); ++i) {
    if (r.event_ids[i] != 0) continue;
    EXPECT_EQ(sym_eigen(f.hessian(r.iterates[i])).eigenvalues, sym_eigen(fl.hessian(r.iterates[i])).eigenvalues);
    ++checked;
  }
  EXPECT_GT(checked, 0u);
}

TEST(Invariant, ZeroThetaMatchesPlainGd) {
  OptimizerConfig cfg;
  cfg.gamma = 0.05;
  cfg.max_iters = 500;
  const auto a = run_algorithm1(monkey_line().objective, {1.5, 1.0}, cfg);
  const auto b = run_plain_gd(monkey_line().objective, {1.5, 1.0}, cfg);
  EXPECT_EQ(a.iterates, b.iterates);
  EXPECT_EQ(a.final_value, b.final_value);
}
