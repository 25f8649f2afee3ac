#pragma once

// Side-by-side training of a small MLP with plain gradient descent and with
// the locally regularized variant, from identical seeded initializations.

#include <cstdint>
#include <limits>
#include <vector>

#include "llrgd/mlp.hpp"
#include "llrgd/optimizer.hpp"
#include "llrgd/parallel.hpp"

namespace llrgd {

struct MlpCompareConfig {
  MlpSpec spec{{2, 8, 8, 2}};
  std::size_t samples_per_class = 50;
  double separation = 3.0;
  std::size_t trials = 20;
  std::uint64_t seed = 0;
  double gamma = 0.1;
  double theta = 0.0;
  std::size_t epochs = 2000;
  std::size_t workers = 0;
};

struct MlpTrialResult {
  std::uint64_t init_seed = 0;
  TrajectoryRecord gd;
  TrajectoryRecord reg;
  bool triggered = false;     ///< the regularized run opened at least one event
  bool prefix_equal = false;  ///< iterates bit-identical up to the first event
  std::size_t compared = 0;   ///< iterates compared for prefix equality
};

struct MlpCompareResult {
  Dataset data;
  std::vector<MlpTrialResult> trials;
  std::size_t triggered = 0;
  bool prefix_equal_all = true;
  double mean_final_gd = 0.0;            ///< over all trials
  double mean_final_reg = 0.0;
  double mean_final_gd_triggered = 0.0;  ///< over trials with an event (NaN if none)
  double mean_final_reg_triggered = 0.0;
};

/// Bit-equality of stored iterates up to and including the first event's
/// entry iteration (or the whole shorter run when no event opened).
inline bool prefix_equal(const TrajectoryRecord& gd, const TrajectoryRecord& reg, std::size_t* compared = nullptr) {
  const std::size_t last = reg.events.empty() ? std::numeric_limits<std::size_t>::max() : reg.events.front().k_entry;
  std::size_t n = 0;
  for (std::size_t i = 0; i < gd.ks.size() && i < reg.ks.size() && reg.ks[i] <= last; ++i, ++n) {
    if (gd.ks[i] != reg.ks[i] || gd.iterates[i] != reg.iterates[i]) {
      if (compared) *compared = n;
      return false;
    }
  }
  if (compared) *compared = n;
  return n > 0;
}

inline MlpCompareResult run_mlp_compare(const MlpCompareConfig& cfg) {
  cfg.spec.validate();
  if (cfg.trials == 0) throw ConfigError("mlp-compare: need at least one trial");
  if (cfg.epochs == 0) throw ConfigError("mlp-compare: epochs must be positive");
  if (!(cfg.gamma > 0.0)) throw ConfigError("mlp-compare: gamma must be positive");

  MlpCompareResult out;
  out.data = make_blobs(cfg.samples_per_class, cfg.spec.output_width(), cfg.spec.input_width(), cfg.separation,
                        derive_seed(cfg.seed, 0));
  const Objective f = mlp_objective(cfg.spec, out.data);

  OptimizerConfig oc;
  oc.gamma = cfg.gamma;
  oc.theta = cfg.theta;
  oc.max_iters = cfg.epochs;
  oc.eps_converge = cfg.theta > 0.0 ? std::min(1e-8, 0.5 * cfg.theta) : 1e-8;
  oc.escape_radius = std::numeric_limits<double>::max();

  out.trials.resize(cfg.trials);
  parallel_for(
      cfg.trials,
      [&](std::size_t t) {
        MlpTrialResult& r = out.trials[t];
        r.init_seed = derive_seed(cfg.seed, t + 1);
        const Vector p0 = init_params(cfg.spec, r.init_seed);
        r.gd = run_plain_gd(f, p0, oc);
        r.reg = run_algorithm1(f, p0, oc);
        r.triggered = !r.reg.events.empty();
        r.prefix_equal = prefix_equal(r.gd, r.reg, &r.compared);
      },
      cfg.workers);

  double sum_gd = 0.0, sum_reg = 0.0, sum_gd_t = 0.0, sum_reg_t = 0.0;
  for (const auto& r : out.trials) {
    sum_gd += r.gd.final_value;
    sum_reg += r.reg.final_value;
    out.prefix_equal_all = out.prefix_equal_all && r.prefix_equal;
    if (r.triggered) {
      ++out.triggered;
      sum_gd_t += r.gd.final_value;
      sum_reg_t += r.reg.final_value;
    }
  }
  const double n = static_cast<double>(cfg.trials);
  out.mean_final_gd = sum_gd / n;
  out.mean_final_reg = sum_reg / n;
  const double nt = static_cast<double>(out.triggered);
  out.mean_final_gd_triggered = out.triggered ? sum_gd_t / nt : std::numeric_limits<double>::quiet_NaN();
  out.mean_final_reg_triggered = out.triggered ? sum_reg_t / nt : std::numeric_limits<double>::quiet_NaN();
  return out;
}

}  // namespace llrgd
