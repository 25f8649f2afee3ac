#pragma once

// JSON and CSV encodings of trajectories, critical-point reports and region
// grids. CSV output follows RFC 4180 (CRLF line endings, header row).

#include <cmath>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "llrgd/classification.hpp"
#include "llrgd/critical_points.hpp"
#include "llrgd/format.hpp"
#include "llrgd/optimizer.hpp"
#include "llrgd/region.hpp"
#include "llrgd/saddle_analysis.hpp"

namespace llrgd {

using json = nlohmann::ordered_json;

inline json to_json_number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline json to_json(const Vector& v) {
  json a = json::array();
  for (double x : v) a.push_back(to_json_number(x));
  return a;
}

inline json to_json(const RegularizationEvent& e) {
  json j;
  j["k_entry"] = e.k_entry;
  j["x_entry"] = to_json(e.x_entry);
  j["l"] = to_json(e.l);
  j["l_norm"] = to_json_number(norm2(e.l));
  j["k_exit"] = e.k_exit ? json(*e.k_exit) : json(nullptr);
  return j;
}

inline json events_json(const TrajectoryRecord& r) {
  json a = json::array();
  for (const auto& e : r.events) a.push_back(to_json(e));
  return a;
}

/// Full record: run metadata, events, and every stored iterate.
inline json to_json(const TrajectoryRecord& r) {
  json j;
  j["status"] = std::string(to_string(r.status));
  j["iterations"] = r.iterations;
  j["gamma"] = to_json_number(r.gamma);
  j["stride"] = r.stride;
  j["final_x"] = to_json(r.final_x);
  j["final_value"] = to_json_number(r.final_value);
  j["final_grad_norm"] = to_json_number(r.final_grad_norm);
  j["final_active_grad_norm"] = to_json_number(r.final_active_grad_norm);
  j["events"] = events_json(r);
  j["warnings"] = r.warnings;
  json its = json::array();
  for (std::size_t i = 0; i < r.iterates.size(); ++i) {
    json it;
    it["k"] = r.ks[i];
    it["x"] = to_json(r.iterates[i]);
    it["value"] = to_json_number(r.values[i]);
    it["grad_norm"] = to_json_number(r.grad_norms[i]);
    it["mode"] = std::string(to_string(r.modes[i]));
    it["event_id"] = r.event_ids[i];
    its.push_back(std::move(it));
  }
  j["iterates"] = std::move(its);
  return j;
}

inline json to_json(const CriticalPointReport& p) {
  json j;
  j["location"] = to_json(p.location);
  j["grad_norm"] = to_json_number(p.grad_norm);
  j["eigenvalues"] = to_json(p.eigenvalues);
  j["stratum"] = std::string(to_string(p.stratum));
  j["classification"] = std::string(to_string(p.classification));
  return j;
}

inline json to_json(const CriticalPointSet& s) {
  json j;
  j["seeds"] = s.seeds;
  j["seeds_skipped"] = s.seeds_skipped;
  json pts = json::array();
  for (const auto& p : s.points) pts.push_back(to_json(p));
  j["points"] = std::move(pts);
  return j;
}

inline json to_json(const ContinuationPath& p) {
  json j;
  j["reached_zero"] = p.reached_zero;
  j["fold"] = p.fold;
  j["fold_mu"] = p.fold_mu ? to_json_number(*p.fold_mu) : json(nullptr);
  json s = json::array();
  for (const auto& smp : p.samples) {
    json e;
    e["mu"] = to_json_number(smp.mu);
    e["x"] = to_json(smp.x);
    e["grad_norm"] = to_json_number(smp.grad_norm);
    e["residual"] = to_json_number(smp.residual);
    s.push_back(std::move(e));
  }
  j["samples"] = std::move(s);
  return j;
}

inline json to_json(const BoundaryAudit& a) {
  json j;
  j["holds"] = a.holds;
  j["boundary_cells"] = a.boundary_cells;
  j["exit_cells_l"] = a.exit_cells_l;
  j["exit_cells_0"] = a.exit_cells_0;
  json c = json::array();
  for (const auto& v : a.counterexamples) c.push_back(to_json(v));
  j["counterexamples"] = std::move(c);
  return j;
}

inline json to_json(const SeparationResult& s) {
  json j;
  j["location"] = to_json(s.location);
  j["passed"] = s.passed;
  json v = json::array();
  for (const auto& x : s.violating) v.push_back(to_json(x));
  j["violating"] = std::move(v);
  return j;
}

inline json to_json(const MilnorResult& m) {
  json j;
  j["draws"] = m.draws;
  j["degenerate_draws"] = m.degenerate_draws;
  j["fraction_degenerate"] = to_json_number(m.fraction_degenerate);
  j["critical_points_total"] = m.critical_points_total;
  j["min_relative_abs_eigenvalue"] = to_json_number(m.min_abs_eigenvalue);
  return j;
}

inline json region_summary_json(const RegionGrid& r) {
  json j;
  json box = json::array();
  for (const auto& iv : r.grid.box()) box.push_back(json::array({iv.lo, iv.hi}));
  j["box"] = std::move(box);
  j["resolution"] = r.grid.resolution();
  j["theta"] = r.theta;
  j["seed_cell_center"] = to_json(r.grid.center(r.seed_cell));
  j["inside_cells"] = r.inside_count();
  j["boundary_cells"] = r.boundary_cells().size();
  return j;
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

inline std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

inline void write_csv_row(std::ostream& os, const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) os << ',';
    os << csv_quote(cells[i]);
  }
  os << "\r\n";
}

/// Columns: k, x_0..x_{n-1}, grad_norm, mode, event_id, value.
inline void write_trajectory_csv(std::ostream& os, const TrajectoryRecord& r) {
  const std::size_t n = r.iterates.empty() ? 0 : r.iterates.front().size();
  std::vector<std::string> header{"k"};
  for (std::size_t i = 0; i < n; ++i) header.push_back("x" + std::to_string(i));
  header.insert(header.end(), {"grad_norm", "mode", "event_id", "value"});
  write_csv_row(os, header);
  for (std::size_t i = 0; i < r.iterates.size(); ++i) {
    std::vector<std::string> row{std::to_string(r.ks[i])};
    for (double v : r.iterates[i]) row.push_back(format_double(v));
    row.push_back(format_double(r.grad_norms[i]));
    row.emplace_back(to_string(r.modes[i]));
    row.push_back(std::to_string(r.event_ids[i]));
    row.push_back(format_double(r.values[i]));
    write_csv_row(os, row);
  }
}

/// One row per cell: centre coordinates, inside flag, boundary flag.
inline void write_region_csv(std::ostream& os, const RegionGrid& r) {
  std::vector<std::string> header;
  for (std::size_t i = 0; i < r.grid.dim(); ++i) header.push_back("x" + std::to_string(i));
  header.insert(header.end(), {"inside", "boundary"});
  write_csv_row(os, header);
  for (std::size_t idx = 0; idx < r.grid.cell_count(); ++idx) {
    std::vector<std::string> row;
    for (double v : r.grid.center(idx)) row.push_back(format_double(v));
    row.push_back(r.inside[idx] ? "1" : "0");
    row.push_back(r.boundary[idx] ? "1" : "0");
    write_csv_row(os, row);
  }
}

}  // namespace llrgd
