// llrgd: experiment runner for locally linearly regularized gradient descent.
//
// Subcommands: run, analyze, bifurcate, mlp-compare, stable-set, region.
// Options can also come from a TOML/INI file given with --config (one section
// per subcommand); flags on the command line override file values.
//
// Exit codes: 0 success, 1 configuration error, 2 numerical failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "llrgd/llrgd.hpp"

namespace fs = std::filesystem;
using namespace llrgd;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitNumerical = 2;

struct NumericalFailureExit : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Vector parse_vector(const std::string& text, const char* what) {
  Vector out;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(cell, &used));
      if (used != cell.size()) throw std::invalid_argument(cell);
    } catch (const std::exception&) {
      throw ConfigError(std::string(what) + ": cannot parse '" + text + "' as a comma-separated list of numbers");
    }
  }
  if (out.empty()) throw ConfigError(std::string(what) + ": empty list");
  return out;
}

/// "lo,hi" applies to every axis; "lo0,hi0,lo1,hi1,..." gives one pair per axis.
Box parse_box(const std::string& text, std::size_t dim) {
  const Vector v = parse_vector(text, "--box");
  Box box;
  if (v.size() == 2) {
    box = cube(dim, v[0], v[1]);
  } else if (v.size() == 2 * dim) {
    for (std::size_t i = 0; i < dim; ++i) box.push_back({v[2 * i], v[2 * i + 1]});
  } else {
    throw ConfigError("--box: expected 2 or " + std::to_string(2 * dim) + " numbers");
  }
  for (const auto& iv : box)
    if (!(iv.hi > iv.lo)) throw ConfigError("--box: every interval needs lo < hi");
  return box;
}

std::vector<std::size_t> parse_widths(const std::string& text) {
  std::vector<std::size_t> out;
  for (double w : parse_vector(text, "--widths")) {
    if (!(w >= 1.0) || w != static_cast<double>(static_cast<std::size_t>(w)))
      throw ConfigError("--widths: layer widths must be positive integers");
    out.push_back(static_cast<std::size_t>(w));
  }
  return out;
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream os(p, std::ios::binary);
  if (!os) throw ConfigError("cannot open '" + p.string() + "' for writing");
  os << text;
}

void write_json(const fs::path& p, const json& j) { write_text(p, j.dump(2) + "\n"); }

void prepare_out(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory '" + dir.string() + "': " + ec.message());
}

json box_json(const Box& box) {
  json a = json::array();
  for (const auto& iv : box) a.push_back(json::array({iv.lo, iv.hi}));
  return a;
}

json config_json(const OptimizerConfig& c) {
  json j;
  j["gamma"] = c.gamma;
  j["theta"] = c.theta;
  j["eps_converge"] = c.eps_converge;
  j["max_iters"] = c.max_iters;
  j["escape_radius"] = c.escape_radius;
  j["record_stride"] = c.record_stride;
  return j;
}

json summary_json(const TrajectoryRecord& r) {
  json j = to_json(r);
  j.erase("iterates");
  return j;
}

std::string trajectory_csv(const TrajectoryRecord& r) {
  std::ostringstream os;
  write_trajectory_csv(os, r);
  return os.str();
}

// ---------------------------------------------------------------------------
// Shared option blocks
// ---------------------------------------------------------------------------

struct Common {
  std::string objective;
  std::string x0;
  std::string box;
  std::string regularizer;
  std::string out = "out";
  std::uint64_t seed = 0;
  std::size_t workers = 0;
};

struct Optim {
  double theta = 0.0;
  double gamma = 0.0;
  double eps = 1e-6;
  std::size_t max_iters = 10000;
  double escape_radius = 10.0;
  std::size_t stride = 1;

  OptimizerConfig config() const {
    if (gamma < 0.0) throw ConfigError("--gamma must be positive (0 selects the default rule)");
    OptimizerConfig c;
    c.theta = theta;
    c.gamma = gamma;
    c.eps_converge = eps;
    c.max_iters = max_iters;
    c.escape_radius = escape_radius;
    c.record_stride = stride;
    return c;
  }
};

void add_common(CLI::App* app, Common& c, const std::string& default_objective) {
  c.objective = default_objective;
  app->add_option("--objective", c.objective, "Corpus objective name")->capture_default_str();
  app->add_option("--x0", c.x0, "Start or seed point, comma separated");
  app->add_option("--box", c.box, "Box as lo,hi or lo0,hi0,lo1,hi1,...");
  app->add_option("--regularizer", c.regularizer, "Linear regularizer l, comma separated");
  app->add_option("--out", c.out, "Output directory")->capture_default_str();
  app->add_option("--seed", c.seed, "Base random seed")->capture_default_str();
  app->add_option("--workers", c.workers, "Worker threads (0 = hardware concurrency)");
}

void add_optim(CLI::App* app, Optim& o) {
  app->add_option("--theta", o.theta, "Small-gradient threshold (0 disables regularization)")->capture_default_str();
  app->add_option("--gamma", o.gamma, "Step size (0 = 1/(2|Hess f(x0)|))")->capture_default_str();
  app->add_option("--eps", o.eps, "Convergence tolerance on the active gradient")->capture_default_str();
  app->add_option("--max-iters", o.max_iters, "Iteration cap")->capture_default_str();
  app->add_option("--escape-radius", o.escape_radius, "Divergence radius around the box centre")
      ->capture_default_str();
  app->add_option("--stride", o.stride, "Store every k-th iterate")->capture_default_str();
}

struct Resolved {
  CorpusEntry entry;
  Box box;
  Vector x0;
  std::optional<Vector> l;
};

Resolved resolve(const Common& c) {
  Resolved r{corpus_entry(c.objective), {}, {}, std::nullopt};
  const std::size_t n = r.entry.objective.dim();
  r.box = c.box.empty() ? r.entry.objective.domain_box() : parse_box(c.box, n);
  r.x0 = c.x0.empty() ? r.entry.default_x0 : parse_vector(c.x0, "--x0");
  require_dim(r.x0.size(), n, "--x0");
  if (!c.regularizer.empty()) {
    r.l = parse_vector(c.regularizer, "--regularizer");
    require_dim(r.l->size(), n, "--regularizer");
  }
  return r;
}

// ---------------------------------------------------------------------------
// run
// ---------------------------------------------------------------------------

struct RunOpts {
  Common common;
  Optim optim;
  std::size_t trials = 1;
  bool plain = false;
};

int cmd_run(const RunOpts& o) {
  const Resolved r = resolve(o.common);
  const Objective f = r.l ? make_regularized(r.entry.objective, *r.l) : r.entry.objective;
  const OptimizerConfig cfg = o.optim.config();
  if (o.trials == 0) throw ConfigError("--trials must be positive");

  std::vector<Vector> starts;
  if (o.trials == 1) {
    starts.push_back(r.x0);
  } else {
    for (std::size_t t = 0; t < o.trials; ++t) {
      std::mt19937_64 rng(derive_seed(o.common.seed, t));
      Vector x(f.dim());
      for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::uniform_real_distribution<double>(r.box[i].lo, r.box[i].hi)(rng);
      starts.push_back(std::move(x));
    }
  }
  // Validate the configuration before anything touches the disk.
  detail::validate(cfg, f, starts.front());

  std::vector<TrajectoryRecord> recs(starts.size());
  parallel_for(
      starts.size(),
      [&](std::size_t t) { recs[t] = o.plain ? run_plain_gd(f, starts[t], cfg) : run_algorithm1(f, starts[t], cfg); },
      o.common.workers);

  const fs::path out(o.common.out);
  prepare_out(out);
  json summary;
  summary["command"] = "run";
  summary["objective"] = f.name();
  summary["algorithm"] = o.plain ? "gd" : "algorithm1";
  summary["config"] = config_json(cfg);
  summary["seed"] = o.common.seed;
  json runs = json::array();
  bool failed = false;
  for (std::size_t t = 0; t < recs.size(); ++t) {
    const std::string stem = recs.size() == 1 ? "trajectory" : "trajectory_" + std::to_string(t);
    write_text(out / (stem + ".csv"), trajectory_csv(recs[t]));
    write_json(out / (stem + ".json"), to_json(recs[t]));
    json s = summary_json(recs[t]);
    s["x0"] = to_json(starts[t]);
    s["trajectory_csv"] = stem + ".csv";
    if (auto pl = r.entry.pl_constant; pl && cfg.theta > 0.0 && !r.l) {
      s["error_bound"] = cfg.theta * cfg.theta / (2.0 * *pl);
    }
    runs.push_back(std::move(s));
    failed = failed || recs[t].status == RunStatus::NumericalFailure;
  }
  json events = json::array();
  for (const auto& rec : recs) events.push_back(events_json(rec));
  write_json(out / "events.json", recs.size() == 1 ? events[0] : events);
  summary["runs"] = std::move(runs);
  write_json(out / "summary.json", summary);

  for (std::size_t t = 0; t < recs.size(); ++t) {
    const auto& rec = recs[t];
    std::cout << "trial " << t << ": " << to_string(rec.status) << " after " << rec.iterations
              << " iterations, f = " << format_double(rec.final_value) << ", events = " << rec.events.size() << "\n";
  }
  if (failed) throw NumericalFailureExit("a run ended with a non-finite iterate");
  return kExitOk;
}

// ---------------------------------------------------------------------------
// analyze
// ---------------------------------------------------------------------------

struct AnalyzeOpts {
  Common common;
  std::size_t grid_density = 21;
  double theta = 0.0;
  std::size_t resolution = 200;
  std::size_t milnor = 0;
  double milnor_scale = 1.0;
  double milnor_min = 0.0;
  std::size_t pl_check = 0;
};

int cmd_analyze(const AnalyzeOpts& o) {
  const Resolved r = resolve(o.common);
  const Objective& base = r.entry.objective;
  const Objective f = r.l ? make_regularized(base, *r.l) : base;
  if (o.grid_density == 0) throw ConfigError("--grid-density must be positive");
  if (o.theta < 0.0) throw ConfigError("--theta must be non-negative");
  if (o.theta > 0.0 && (o.resolution == 0 || f.dim() > kMaxRegionDim))
    throw ConfigError("region analysis needs --resolution > 0 and dimension <= 3");
  if (o.milnor > 0 && !(o.milnor_scale > 0.0 && o.milnor_min >= 0.0 && o.milnor_min <= o.milnor_scale))
    throw ConfigError("--milnor-scale must be positive and >= --milnor-min");
  if (o.pl_check > 0 && !(o.theta > 0.0 && r.entry.pl_constant))
    throw ConfigError("--pl-check needs --theta and an objective with a known PL constant");

  json report;
  report["command"] = "analyze";
  report["objective"] = f.name();
  report["box"] = box_json(r.box);
  if (r.l) report["regularizer"] = to_json(*r.l);
  const CriticalPointSet pts = find_critical_points(f, r.box, o.grid_density);
  report["critical_points"] = to_json(pts);

  std::optional<RegionGrid> region;
  if (o.theta > 0.0) {
    // The region and assumption checks concern the unregularized objective.
    const auto base_pts = r.l ? find_critical_points(base, r.box, o.grid_density).points : pts.points;
    json sep = json::array();
    for (const auto& s : check_assumption_separation(base, base_pts, o.theta, r.box, o.resolution))
      sep.push_back(to_json(s));
    report["separation"] = std::move(sep);
    if (norm2(base.gradient(r.x0)) <= o.theta) {
      region = theta_region(base, r.x0, o.theta, r.box, o.resolution);
      json reg = region_summary_json(*region);
      const Vector l = r.l ? *r.l : base.gradient(r.x0);
      reg["boundary_audit"] = to_json(check_boundary_assumption(base, *region, l));
      const PsiResult psi = psi_witness_check(base, *region, r.x0);
      json pj;
      pj["witness"] = psi.witness ? to_json(*psi.witness) : json(nullptr);
      json sols = json::array();
      for (const auto& s : psi.solutions) sols.push_back(to_json(s));
      pj["solutions"] = std::move(sols);
      reg["psi"] = std::move(pj);
      report["region"] = std::move(reg);
    } else {
      report["region"] = nullptr;
    }
  }
  if (o.milnor > 0) {
    MilnorOptions mo;
    mo.l_min_norm = o.milnor_min;
    mo.grid_density = o.grid_density;
    mo.workers = o.common.workers;
    json m = to_json(milnor_sample(base, r.box, o.milnor, o.milnor_scale, o.common.seed, mo));
    m["l_scale"] = o.milnor_scale;
    m["l_min_norm"] = o.milnor_min;
    report["milnor"] = std::move(m);
  }
  if (o.pl_check > 0) {
    const double c = *r.entry.pl_constant;
    std::optional<Vector> xstar;
    for (const auto& p : find_critical_points(base, r.box, o.grid_density).points)
      if (p.classification == PointClass::LocalMin) xstar = p.location;
    if (!xstar) throw ConfigError("--pl-check: no local minimum found in the box");
    const PlCheckResult pl = pl_error_check(base, *xstar, o.theta, c, o.pl_check, o.common.seed);
    json pj;
    pj["c"] = c;
    pj["theta"] = o.theta;
    pj["bound"] = pl.bound;
    pj["max_excess"] = pl.max_excess;
    pj["max_l_norm"] = pl.max_l_norm;
    pj["draws"] = pl.draws;
    pj["holds"] = pl.max_excess <= pl.bound + 1e-9;
    report["pl_check"] = std::move(pj);
  }

  const fs::path out(o.common.out);
  prepare_out(out);
  write_json(out / "analysis.json", report);
  if (region) {
    std::ostringstream os;
    write_region_csv(os, *region);
    write_text(out / "region.csv", os.str());
  }
  for (const auto& p : pts.points) {
    std::cout << to_string(p.classification) << " at (";
    for (std::size_t i = 0; i < p.location.size(); ++i) std::cout << (i ? ", " : "") << format_double(p.location[i]);
    std::cout << ")\n";
  }
  if (pts.points.empty()) std::cout << "no critical points in the box\n";
  if (report.contains("milnor"))
    std::cout << "milnor fraction_degenerate = " << format_double(report["milnor"]["fraction_degenerate"]) << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// bifurcate
// ---------------------------------------------------------------------------

struct BifurcateOpts {
  Common common;
  std::string scales = "1,-1,0";
  std::size_t grid_density = 41;
  std::size_t steps = 200;
};

int cmd_bifurcate(const BifurcateOpts& o) {
  Common c = o.common;
  const Resolved r = resolve(c);
  const Objective& f = r.entry.objective;
  const Vector dir = r.l ? *r.l : Vector(f.dim(), 0.01);
  const Vector scales = parse_vector(o.scales, "--scales");
  if (o.steps == 0 || o.grid_density == 0) throw ConfigError("--steps and --grid-density must be positive");

  json report;
  report["command"] = "bifurcate";
  report["objective"] = f.name();
  report["box"] = box_json(r.box);
  json sweeps = json::array();
  for (double s : scales) {
    const Vector l = scale(dir, s);
    const Objective fl = make_regularized(f, l);
    const CriticalPointSet pts = find_critical_points(fl, r.box, o.grid_density);
    json sw;
    sw["l"] = to_json(l);
    sw["critical_points"] = to_json(pts);
    json paths = json::array();
    if (norm2(l) > 0.0) {
      for (const auto& p : pts.points) {
        json pj;
        pj["start"] = to_json(p.location);
        pj["classification"] = std::string(to_string(p.classification));
        try {
          const ContinuationPath path = continuation_trace(f, p.location, l, o.steps);
          pj["path"] = to_json(path);
          pj["end"] = to_json(path.samples.back().x);
        } catch (const ConfigError& e) {
          pj["path"] = nullptr;
          pj["skipped"] = e.what();
        }
        paths.push_back(std::move(pj));
      }
    }
    sw["continuation"] = std::move(paths);
    std::cout << "l = (";
    for (std::size_t i = 0; i < l.size(); ++i) std::cout << (i ? ", " : "") << format_double(l[i]);
    std::cout << "):";
    for (const auto& p : pts.points) {
      std::cout << " " << to_string(p.classification) << "@";
      for (std::size_t i = 0; i < p.location.size(); ++i) std::cout << (i ? "," : "") << format_double(p.location[i]);
    }
    std::cout << "\n";
    sweeps.push_back(std::move(sw));
  }
  report["sweeps"] = std::move(sweeps);

  const fs::path out(o.common.out);
  prepare_out(out);
  write_json(out / "bifurcation.json", report);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// mlp-compare
// ---------------------------------------------------------------------------

struct MlpOpts {
  std::string widths = "2,8,8,2";
  std::size_t samples_per_class = 50;
  double separation = 3.0;
  std::size_t trials = 20;
  std::uint64_t seed = 0;
  double gamma = 0.1;
  double theta = 0.02;
  std::size_t epochs = 1000;
  std::string out = "out";
  std::size_t workers = 0;
};

int cmd_mlp_compare(const MlpOpts& o) {
  MlpCompareConfig cfg;
  cfg.spec.layer_widths = parse_widths(o.widths);
  cfg.spec.validate();
  cfg.samples_per_class = o.samples_per_class;
  cfg.separation = o.separation;
  cfg.trials = o.trials;
  cfg.seed = o.seed;
  cfg.gamma = o.gamma;
  cfg.theta = o.theta;
  cfg.epochs = o.epochs;
  cfg.workers = o.workers;
  if (cfg.samples_per_class == 0) throw ConfigError("--samples-per-class must be positive");
  if (cfg.separation < 0.0) throw ConfigError("--separation must be non-negative");
  if (cfg.trials == 0 || cfg.epochs == 0) throw ConfigError("--trials and --epochs must be positive");
  if (!(cfg.gamma > 0.0)) throw ConfigError("--gamma must be positive");
  if (cfg.theta < 0.0) throw ConfigError("--theta must be non-negative");

  const MlpCompareResult res = run_mlp_compare(cfg);

  const fs::path out(o.out);
  prepare_out(out);
  {
    std::ostringstream os;
    write_dataset_csv(os, res.data);
    write_text(out / "dataset.csv", os.str());
  }
  json summary;
  summary["command"] = "mlp-compare";
  summary["widths"] = cfg.spec.layer_widths;
  summary["samples"] = res.data.size();
  summary["gamma"] = cfg.gamma;
  summary["theta"] = cfg.theta;
  summary["epochs"] = cfg.epochs;
  summary["seed"] = cfg.seed;
  summary["trials_with_event"] = res.triggered;
  summary["fraction_with_event"] = static_cast<double>(res.triggered) / static_cast<double>(cfg.trials);
  summary["prefix_equal_all"] = res.prefix_equal_all;
  summary["mean_final_loss_gd"] = to_json_number(res.mean_final_gd);
  summary["mean_final_loss_regularized"] = to_json_number(res.mean_final_reg);
  summary["mean_final_loss_gd_triggered"] = to_json_number(res.mean_final_gd_triggered);
  summary["mean_final_loss_regularized_triggered"] = to_json_number(res.mean_final_reg_triggered);
  json trials = json::array();
  bool failed = false;
  for (std::size_t t = 0; t < res.trials.size(); ++t) {
    const auto& tr = res.trials[t];
    const std::string name = "loss_curve_" + std::to_string(t) + ".csv";
    std::ostringstream os;
    write_csv_row(os, {"epoch", "loss_gd", "loss_regularized", "grad_norm_gd", "grad_norm_regularized", "mode"});
    const std::size_t rows = std::max(tr.gd.ks.size(), tr.reg.ks.size());
    for (std::size_t i = 0; i < rows; ++i) {
      // Runs may stop at different epochs; the shorter one leaves its cells empty.
      const bool g = i < tr.gd.ks.size(), q = i < tr.reg.ks.size();
      write_csv_row(os, {std::to_string(g ? tr.gd.ks[i] : tr.reg.ks[i]), g ? format_double(tr.gd.values[i]) : "",
                         q ? format_double(tr.reg.values[i]) : "", g ? format_double(tr.gd.grad_norms[i]) : "",
                         q ? format_double(tr.reg.grad_norms[i]) : "", q ? std::string(to_string(tr.reg.modes[i])) : ""});
    }
    write_text(out / name, os.str());
    json tj;
    tj["init_seed"] = tr.init_seed;
    tj["final_loss_gd"] = to_json_number(tr.gd.final_value);
    tj["final_loss_regularized"] = to_json_number(tr.reg.final_value);
    tj["status_gd"] = std::string(to_string(tr.gd.status));
    tj["status_regularized"] = std::string(to_string(tr.reg.status));
    tj["events"] = events_json(tr.reg);
    tj["prefix_equal"] = tr.prefix_equal;
    tj["prefix_iterates_compared"] = tr.compared;
    tj["loss_curve_csv"] = name;
    trials.push_back(std::move(tj));
    failed = failed || tr.gd.status == RunStatus::NumericalFailure || tr.reg.status == RunStatus::NumericalFailure;
  }
  summary["trials"] = std::move(trials);
  write_json(out / "summary.json", summary);

  std::cout << "events in " << res.triggered << "/" << cfg.trials << " trials; prefix equality "
            << (res.prefix_equal_all ? "holds" : "FAILS") << "; mean final loss gd "
            << format_double(res.mean_final_gd) << ", regularized " << format_double(res.mean_final_reg) << "\n";
  if (failed) throw NumericalFailureExit("a training run ended with a non-finite iterate");
  return kExitOk;
}

// ---------------------------------------------------------------------------
// stable-set
// ---------------------------------------------------------------------------

struct StableOpts {
  Common common;
  Optim optim;
  std::size_t trials = 2000;
  std::string target;
  int target_axis = -1;
  double target_value = 0.0;
  double capture_radius = 1e-2;
  std::string exclude;
};

int cmd_stable_set(const StableOpts& o) {
  const Resolved r = resolve(o.common);
  const Objective& f = r.entry.objective;
  OptimizerConfig cfg = o.optim.config();
  if (o.trials == 0) throw ConfigError("--trials must be positive");
  if (!(o.capture_radius > 0.0)) throw ConfigError("--capture-radius must be positive");
  if (!(cfg.gamma > 0.0)) throw ConfigError("stable-set needs an explicit --gamma (one step size for every sample)");
  detail::validate(cfg, f, box_center(r.box));

  StableTarget target;
  if (o.target_axis >= 0) {
    if (static_cast<std::size_t>(o.target_axis) >= f.dim()) throw ConfigError("--target-axis out of range");
    target = StableTarget::hyperplane(static_cast<std::size_t>(o.target_axis), o.target_value);
  } else {
    Vector p = o.target.empty() ? r.entry.known_critical_points.front().location : parse_vector(o.target, "--target");
    require_dim(p.size(), f.dim(), "--target");
    target = StableTarget::at_point(std::move(p));
  }
  StableSetOptions so;
  so.use_algorithm1 = cfg.theta > 0.0;
  so.capture_radius = o.capture_radius;
  so.workers = o.common.workers;
  json exclude = nullptr;
  if (!o.exclude.empty()) {
    const Vector e = parse_vector(o.exclude, "--exclude");
    if (e.size() != 2 || e[0] < 0 || static_cast<std::size_t>(e[0]) >= f.dim() || !(e[1] > 0.0))
      throw ConfigError("--exclude expects axis,half_width");
    const std::size_t axis = static_cast<std::size_t>(e[0]);
    const double w = e[1];
    so.exclude = [axis, w](const Vector& x) { return std::abs(x[axis]) < w; };
    exclude = json{{"axis", axis}, {"half_width", w}};
  }

  const StableSetResult res = stable_set_fraction(f, target, r.box, o.trials, cfg, o.common.seed, so);

  json j;
  j["command"] = "stable-set";
  j["objective"] = f.name();
  j["algorithm"] = so.use_algorithm1 ? "algorithm1" : "gd";
  j["config"] = config_json(cfg);
  j["box"] = box_json(r.box);
  j["exclude"] = exclude;
  if (target.kind == StableTarget::Kind::Point) {
    j["target"] = to_json(target.point);
  } else {
    j["target"] = json{{"axis", target.axis}, {"value", target.value}};
  }
  j["capture_radius"] = o.capture_radius;
  j["seed"] = o.common.seed;
  j["samples"] = res.samples;
  j["captured"] = res.captured;
  j["diverged"] = res.diverged;
  j["fraction"] = res.fraction;
  const fs::path out(o.common.out);
  prepare_out(out);
  write_json(out / "stable_set.json", j);
  std::cout << "captured " << res.captured << "/" << res.samples << " (fraction " << format_double(res.fraction)
            << ")\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// region
// ---------------------------------------------------------------------------

struct RegionOpts {
  Common common;
  double theta = 1.0;
  std::size_t resolution = 200;
};

int cmd_region(const RegionOpts& o) {
  Common c = o.common;
  const Resolved r = resolve(c);
  const Objective& f = r.entry.objective;
  if (!(o.theta > 0.0)) throw ConfigError("--theta must be positive");
  if (o.resolution == 0) throw ConfigError("--resolution must be positive");
  const Vector seed = o.common.x0.empty() ? r.entry.known_critical_points.front().location : r.x0;
  const RegionGrid region = theta_region(f, seed, o.theta, r.box, o.resolution);

  json j = region_summary_json(region);
  j["command"] = "region";
  j["objective"] = f.name();
  j["seed"] = to_json(seed);
  const Vector l = r.l ? *r.l : f.gradient(seed);
  j["regularizer"] = to_json(l);
  j["boundary_audit"] = to_json(check_boundary_assumption(f, region, l));
  if (f.dim() >= 1) {
    json hs = json::array();
    for (std::size_t axis = 0; axis < f.dim(); ++axis) {
      Vector v(f.dim(), 0.0);
      v[axis] = 1.0;
      hs.push_back(json{{"direction", to_json(v)}, {"holds", halfspace_check(f, region, v)}});
    }
    j["halfspace_axes"] = std::move(hs);
  }

  const fs::path out(o.common.out);
  prepare_out(out);
  {
    std::ostringstream os;
    write_region_csv(os, region);
    write_text(out / "region.csv", os.str());
  }
  {
    std::ostringstream os;
    std::vector<std::string> header;
    for (std::size_t i = 0; i < f.dim(); ++i) header.push_back("x" + std::to_string(i));
    for (std::size_t i = 0; i < f.dim(); ++i) header.push_back("g" + std::to_string(i));
    header.push_back("grad_norm");
    write_csv_row(os, header);
    for (std::size_t idx = 0; idx < region.grid.cell_count(); ++idx) {
      const Vector x = region.grid.center(idx);
      const Vector g = f.gradient(x);
      std::vector<std::string> row;
      for (double v : x) row.push_back(format_double(v));
      for (double v : g) row.push_back(format_double(v));
      row.push_back(format_double(norm2(g)));
      write_csv_row(os, row);
    }
    write_text(out / "gradient_field.csv", os.str());
  }
  write_json(out / "region.json", j);
  std::cout << "inside cells " << region.inside_count() << ", boundary cells " << region.boundary_cells().size()
            << ", boundary assumption " << (j["boundary_audit"]["holds"].get<bool>() ? "holds" : "violated") << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Locally linearly regularized gradient descent experiments"};
  app.set_config("--config", "", "Read options from a TOML/INI file (flags override)");
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for all subcommands");

  RunOpts run;
  auto* run_cmd = app.add_subcommand("run", "Run regularized descent (or plain GD) on a corpus objective");
  add_common(run_cmd, run.common, "cubic_valley");
  add_optim(run_cmd, run.optim);
  run_cmd->add_option("--trials", run.trials, "Number of runs; more than one samples x0 in --box")->capture_default_str();
  run_cmd->add_flag("--plain", run.plain, "Plain gradient descent instead of the regularized algorithm");

  AnalyzeOpts an;
  auto* an_cmd = app.add_subcommand("analyze", "Critical points, region and assumption checks");
  add_common(an_cmd, an.common, "cubic_valley");
  an_cmd->add_option("--grid-density", an.grid_density, "Newton seeds per axis")->capture_default_str();
  an_cmd->add_option("--theta", an.theta, "Threshold for region checks (0 skips them)")->capture_default_str();
  an_cmd->add_option("--resolution", an.resolution, "Region grid cells per axis")->capture_default_str();
  an_cmd->add_option("--milnor", an.milnor, "Number of random regularizers to sample (0 skips)");
  an_cmd->add_option("--milnor-scale", an.milnor_scale, "Largest sampled |l|")->capture_default_str();
  an_cmd->add_option("--milnor-min", an.milnor_min, "Smallest sampled |l|")->capture_default_str();
  an_cmd->add_option("--pl-check", an.pl_check, "Draws for the PL error-bound check (0 skips)");

  BifurcateOpts bi;
  auto* bi_cmd = app.add_subcommand("bifurcate", "Sweep signed regularizers and trace continuation paths");
  add_common(bi_cmd, bi.common, "double_degenerate");
  bi_cmd->add_option("--scales", bi.scales, "Multipliers applied to --regularizer")->capture_default_str();
  bi_cmd->add_option("--grid-density", bi.grid_density, "Newton seeds per axis")->capture_default_str();
  bi_cmd->add_option("--steps", bi.steps, "Continuation steps from mu=1 to 0")->capture_default_str();

  MlpOpts ml;
  auto* ml_cmd = app.add_subcommand("mlp-compare", "Train an MLP with GD and regularized GD from shared inits");
  ml_cmd->add_option("--widths", ml.widths, "Layer widths: input, hidden..., output")->capture_default_str();
  ml_cmd->add_option("--samples-per-class", ml.samples_per_class, "Blob samples per class")->capture_default_str();
  ml_cmd->add_option("--separation", ml.separation, "Distance between neighbouring class means")
      ->capture_default_str();
  ml_cmd->add_option("--trials", ml.trials, "Seeded initializations")->capture_default_str();
  ml_cmd->add_option("--seed", ml.seed, "Base random seed")->capture_default_str();
  ml_cmd->add_option("--gamma", ml.gamma, "Learning rate")->capture_default_str();
  ml_cmd->add_option("--theta", ml.theta, "Gradient threshold (0 disables regularization)")->capture_default_str();
  ml_cmd->add_option("--epochs,--max-iters", ml.epochs, "Full-batch epochs")->capture_default_str();
  ml_cmd->add_option("--out", ml.out, "Output directory")->capture_default_str();
  ml_cmd->add_option("--workers", ml.workers, "Worker threads (0 = hardware concurrency)");

  StableOpts st;
  auto* st_cmd = app.add_subcommand("stable-set", "Monte Carlo estimate of a stable set's measure");
  add_common(st_cmd, st.common, "cubic_valley");
  add_optim(st_cmd, st.optim);
  st_cmd->add_option("--trials", st.trials, "Number of uniform samples")->capture_default_str();
  st_cmd->add_option("--target", st.target, "Target point (default: first annotated critical point)");
  st_cmd->add_option("--target-axis", st.target_axis, "Target the hyperplane x[axis] = --target-value instead");
  st_cmd->add_option("--target-value", st.target_value, "Hyperplane offset")->capture_default_str();
  st_cmd->add_option("--capture-radius", st.capture_radius, "Capture distance")->capture_default_str();
  st_cmd->add_option("--exclude", st.exclude, "Reject samples with |x[axis]| < w, given as axis,w");

  RegionOpts rg;
  auto* rg_cmd = app.add_subcommand("region", "Export the small-gradient region around a seed point");
  add_common(rg_cmd, rg.common, "cubic_valley");
  rg_cmd->add_option("--theta", rg.theta, "Gradient threshold")->capture_default_str();
  rg_cmd->add_option("--resolution", rg.resolution, "Grid cells per axis")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*run_cmd) return cmd_run(run);
    if (*an_cmd) return cmd_analyze(an);
    if (*bi_cmd) return cmd_bifurcate(bi);
    if (*ml_cmd) return cmd_mlp_compare(ml);
    if (*st_cmd) return cmd_stable_set(st);
    if (*rg_cmd) return cmd_region(rg);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DimensionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const NumericalFailureExit& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitConfig;
}
