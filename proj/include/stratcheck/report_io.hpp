#pragma once

#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "stratcheck/claims.hpp"
#include "stratcheck/format.hpp"
#include "stratcheck/pipeline.hpp"
#include "stratcheck/subspace.hpp"

namespace stratcheck::io {

using nlohmann::json;

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Non-finite doubles become JSON null (nlohmann's convention), documented in
/// the README; all finite numbers round-trip exactly.
inline json vec_json(const Eigen::VectorXd& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

inline json to_json(const regularity::Thresholds& t) {
  return json{{"gap_pass", t.gap_pass},   {"cauchy_tol", t.cauchy_tol}, {"cd_floor", t.cd_floor},
              {"half_floor", t.half_floor}, {"C_floor", t.C_floor},     {"slope_tol", t.slope_tol},
              {"feas_rel", t.feas_rel},    {"angle_tol", t.angle_tol},  {"rank_tol", t.rank_tol}};
}

inline json to_json(const horn::HornSpec& s) {
  return json{{"degree_r", s.degree_r}, {"width", s.width}, {"radius_cap", s.radius_cap}};
}

inline json to_json(const regularity::ScanConfig& s) {
  return json{{"rho0", s.schedule.rho0}, {"gamma", s.schedule.gamma}, {"shells", s.schedule.count},
              {"samples", s.samples},    {"restarts", s.restarts},    {"seed", s.seed},
              {"t_grid", s.t_grid}};
}

inline json to_json(const horn::ShellRow& r) {
  json j{{"radius", r.radius}, {"empty", r.empty}, {"accepted", r.accepted}};
  j["min_value"] = r.min_value;
  j["raw_min"] = r.raw_min;
  j["argmin"] = r.empty ? json() : vec_json(r.argmin);
  return j;
}

inline json to_json(const regularity::KuoReport& r) {
  json rows = json::array();
  for (const auto& row : r.scan.rows) rows.push_back(to_json(row));
  json j{{"condition", r.condition},
         {"r", r.r},
         {"exponent", r.exponent},
         {"spec", to_json(r.spec)},
         {"scan_config", to_json(r.scan_config)},
         {"C_est", r.C_est},
         {"slope", r.slope},
         {"verdict", regularity::to_string(r.verdict)},
         {"note", r.note},
         {"shells", std::move(rows)}};
  if (std::isfinite(r.delta)) j["delta"] = r.delta;
  return j;
}

inline json to_json(const regularity::ConditionPoint& p) {
  json j{{"radius", p.radius}, {"anomaly", p.anomaly}};
  j["xt"] = p.xt.size() > 0 ? vec_json(p.xt) : json();
  j["value"] = p.value;
  if (std::isfinite(p.sigma_min)) j["sigma_min"] = p.sigma_min;
  if (std::isfinite(p.sigma_max)) j["sigma_max"] = p.sigma_max;
  if (std::isfinite(p.cauchy_defect)) j["cauchy_defect"] = p.cauchy_defect;
  if (p.intersection_dim >= 0) j["intersection_dim"] = p.intersection_dim;
  if (!p.note.empty()) j["note"] = p.note;
  return j;
}

inline json to_json(const regularity::ConditionReport& r) {
  json pts = json::array();
  for (const auto& p : r.points) pts.push_back(to_json(p));
  json tau = json::array();
  for (const auto& b : r.tau_basis) tau.push_back(vec_json(b));
  return json{{"condition", r.condition},
              {"t0", r.t0},
              {"points", std::move(pts)},
              {"missed_radii", r.missed_radii},
              {"searched_radius", r.searched_radius},
              {"slope", r.slope},
              {"verdict", regularity::to_string(r.verdict)},
              {"vacuous", r.vacuous},
              {"note", r.note},
              {"witnesses", r.witnesses},
              {"tau_basis", std::move(tau)}};
}

inline json to_json(const regularity::JetDistanceReport& r) {
  json rows = json::array();
  for (const auto& row : r.rows) {
    json jr{{"radius", row.radius}, {"samples", row.samples}, {"empty", row.empty}};
    jr["min_ratio"] = row.min_ratio;
    jr["argmin"] = row.empty ? json() : vec_json(row.argmin);
    rows.push_back(std::move(jr));
  }
  return json{{"condition", "jet_distance"},
              {"r", r.r},
              {"spec", to_json(r.spec)},
              {"eps", r.eps},
              {"scan_config", to_json(r.scan_config)},
              {"rows", std::move(rows)},
              {"searched_radius", r.searched_radius},
              {"verdict", regularity::to_string(r.verdict)},
              {"witnesses", r.witnesses},
              {"note", r.note}};
}

inline json to_json(const regularity::DeformedDistanceReport& r) {
  json rows = json::array();
  for (const auto& row : r.rows) {
    json jr{{"radius", row.radius}, {"samples", row.samples}, {"empty", row.empty}};
    jr["min_dt_ratio"] = row.min_dt_ratio;
    jr["max_v_ratio"] = row.max_v_ratio;
    jr["max_vt_ratio"] = row.max_vt_ratio;
    jr["max_ddiff_ratio"] = row.max_ddiff_ratio;
    jr["max_vdiff_ratio"] = row.max_vdiff_ratio;
    jr["max_chain_defect"] = row.max_chain_defect;
    jr["max_proj_dev"] = row.max_proj_dev;
    jr["argmin"] = row.empty ? json() : vec_json(row.argmin);
    jr["argmin_t"] = row.argmin_t;
    rows.push_back(std::move(jr));
  }
  return json{{"condition", "deformed_distance"},
              {"r", r.r},
              {"spec", to_json(r.spec)},
              {"eps", r.eps},
              {"floor", r.floor},
              {"scan_config", to_json(r.scan_config)},
              {"t_grid", r.t_grid},
              {"rows", std::move(rows)},
              {"searched_radius", r.searched_radius},
              {"verdict", regularity::to_string(r.verdict)},
              {"vacuous", r.vacuous},
              {"witnesses", r.witnesses},
              {"note", r.note}};
}

inline json to_json(const regularity::BasisStabilityReport& r) {
  json rows = json::array();
  for (const auto& row : r.rows) {
    json jr{{"radius", row.radius}, {"samples", row.samples}, {"empty", row.empty}};
    jr["min_ratio"] = row.min_ratio;
    jr["max_ratio"] = row.max_ratio;
    jr["arg_extreme"] = row.empty ? json() : vec_json(row.arg_extreme);
    jr["t_extreme"] = row.t_extreme;
    rows.push_back(std::move(jr));
  }
  return json{{"condition", "basis_stability"},
              {"r", r.r},
              {"spec", to_json(r.spec)},
              {"eps", r.eps},
              {"scan_config", to_json(r.scan_config)},
              {"t_grid", r.t_grid},
              {"rows", std::move(rows)},
              {"searched_radius", r.searched_radius},
              {"verdict", regularity::to_string(r.verdict)},
              {"witnesses", r.witnesses},
              {"note", r.note}};
}

inline json to_json(const regularity::RadialBoundReport& r) {
  json rows = json::array();
  for (const auto& row : r.rows) {
    json jr{{"radius", row.radius}, {"samples", row.samples}, {"empty", row.empty}};
    jr["min_w_ratio"] = row.min_w_ratio;
    jr["min_gap"] = row.min_gap;
    jr["min_u_ratio"] = row.min_u_ratio;
    jr["max_u_norm_ratio"] = row.max_u_norm_ratio;
    jr["max_w_norm_ratio"] = row.max_w_norm_ratio;
    jr["min_est_ratio"] = row.min_est_ratio;
    jr["max_est_ratio"] = row.max_est_ratio;
    jr["max_proj_dev"] = row.max_proj_dev;
    jr["argmin"] = row.empty ? json() : vec_json(row.argmin);
    jr["argmin_t"] = row.argmin_t;
    rows.push_back(std::move(jr));
  }
  return json{{"condition", "radial_gap"},
              {"r", r.r},
              {"spec", to_json(r.spec)},
              {"floor", r.floor},
              {"scan_config", to_json(r.scan_config)},
              {"t_grid", r.t_grid},
              {"rows", std::move(rows)},
              {"searched_radius", r.searched_radius},
              {"verdict", regularity::to_string(r.verdict)},
              {"vacuous", r.vacuous},
              {"witnesses", r.witnesses},
              {"note", r.note}};
}

inline json to_json(const regularity::SequenceSpec& s) {
  json pts = json::array();
  for (const auto& p : s.points) pts.push_back(json{{"radius", p.radius}, {"xt", vec_json(p.xt)}});
  return json{{"t0", s.t0}, {"points", std::move(pts)}, {"missed_radii", s.missed_radii}};
}

inline json to_json(const regularity::PipelineReport& r) {
  json conds;
  json a = json::array(), m = json::array(), c = json::array(), cd = json::array();
  for (const auto& x : r.a) a.push_back(to_json(x));
  for (const auto& x : r.m) m.push_back(to_json(x));
  for (const auto& x : r.c) c.push_back(to_json(x));
  for (const auto& x : r.cd) cd.push_back(to_json(x));
  conds["a"] = std::move(a);
  conds["m"] = std::move(m);
  conds["c"] = std::move(c);
  conds["c_d"] = std::move(cd);
  json seqs = json::array();
  for (const auto& s : r.sequences) seqs.push_back(to_json(s));
  return json{{"kuo", to_json(r.kuo)},
              {"strata",
               json{{"nvars", r.strata.nvars},
                    {"ncomps", r.strata.ncomps},
                    {"empty_Y", r.strata.empty_Y},
                    {"note", r.strata.note}}},
              {"sequences", std::move(seqs)},
              {"conditions", std::move(conds)},
              {"verdicts",
               json{{"kuo", regularity::to_string(r.kuo.verdict)},
                    {"a", regularity::to_string(r.a_verdict)},
                    {"m", regularity::to_string(r.m_verdict)},
                    {"c", regularity::to_string(r.c_verdict)},
                    {"c_d", regularity::to_string(r.cd_verdict)},
                    {"overall", regularity::to_string(r.overall)}}},
              {"implication", json{{"applicable", r.implication_applicable}, {"ok", r.implication_ok}}},
              {"kuo_implies_c", json{{"applicable", r.kuo_c_applicable}, {"ok", r.kuo_c_ok}}},
              {"note", r.note}};
}

namespace csv_detail {

inline void append_vec(std::string& line, const Eigen::VectorXd& v, int expect) {
  for (int i = 0; i < expect; ++i) {
    line += ',';
    line += (v.size() == expect) ? format_double(v[i]) : "nan";
  }
}

}  // namespace csv_detail

/// Fixed columns: radius,min_value,x1..xn (nan placeholders on empty shells).
inline std::string kuo_shells_csv(const regularity::KuoReport& r, int nvars) {
  std::string out = "radius,min_value";
  for (int i = 1; i <= nvars; ++i) out += ",x" + std::to_string(i);
  out += '\n';
  for (const auto& row : r.scan.rows) {
    std::string line = format_double(row.radius);
    line += ',';
    line += row.empty ? "nan" : format_double(row.min_value);
    csv_detail::append_vec(line, row.empty ? Eigen::VectorXd() : row.argmin, nvars);
    out += line + '\n';
  }
  return out;
}

/// Fixed columns: radius,value,cauchy_defect,intersection_dim,anomaly,x1..xn,t.
inline std::string condition_csv(const regularity::ConditionReport& r, int nvars) {
  std::string out = "radius,value,cauchy_defect,intersection_dim,anomaly";
  for (int i = 1; i <= nvars; ++i) out += ",x" + std::to_string(i);
  out += ",t\n";
  for (const auto& p : r.points) {
    std::string line = format_double(p.radius);
    line += ',' + format_double(p.value);
    line += ',' + format_double(p.cauchy_defect);
    line += ',' + std::to_string(p.intersection_dim);
    line += p.anomaly ? ",1" : ",0";
    if (p.xt.size() == nvars + 1) {
      for (int i = 0; i < nvars + 1; ++i) line += ',' + format_double(p.xt[i]);
    } else {
      for (int i = 0; i < nvars + 1; ++i) line += ",nan";
    }
    out += line + '\n';
  }
  return out;
}

inline void write_text_atomic(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open for writing: " + tmp.string());
    f.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!f.good()) throw IoError("write failed: " + tmp.string());
  }
  fs::rename(tmp, path);
}

inline void write_json_atomic(const std::filesystem::path& path, const json& j) {
  write_text_atomic(path, j.dump(2) + "\n");
}

/// Basis-vector file: a JSON array of arrays, or {"vectors": [...]}.
inline subspace::Frame frame_from_json(const json& j) {
  const json& arr = j.is_object() && j.contains("vectors") ? j.at("vectors") : j;
  if (!arr.is_array() || arr.empty()) throw IoError("expected a non-empty JSON array of basis vectors");
  std::vector<Eigen::VectorXd> vecs;
  for (const auto& row : arr) {
    if (!row.is_array() || row.empty()) throw IoError("each basis vector must be a non-empty array of numbers");
    Eigen::VectorXd v(row.size());
    for (std::size_t i = 0; i < row.size(); ++i) v[static_cast<Eigen::Index>(i)] = row[i].get<double>();
    vecs.push_back(std::move(v));
  }
  for (const auto& v : vecs)
    if (v.size() != vecs.front().size()) throw IoError("basis vectors must share one dimension");
  return subspace::Frame(vecs);
}

}  // namespace stratcheck::io
