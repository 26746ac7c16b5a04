#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "stratcheck/horn.hpp"

namespace stratcheck::regularity {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

enum class Verdict { holds, fails, inconclusive };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::holds: return "holds";
    case Verdict::fails: return "fails";
    default: return "inconclusive";
  }
}

/// Pass/fail knobs. Every report echoes the values it was judged with, so a
/// verdict can be recomputed from the stored measurements.
struct Thresholds {
  double gap_pass = 0.05;      // (a)/(c): gap to e_t must fall below this at small radii
  double cauchy_tol = 0.02;    // (c): consecutive plane distance certifying pre-regularity
  double cd_floor = 0.2;       // quarter bound 1/4 with 20% slack
  double half_floor = 0.4;     // half bound 1/2 with 20% slack
  double C_floor = 1e-3;       // Kuo constant estimate below this means failure
  double slope_tol = 0.1;      // slack for log-log slope comparisons
  double feas_rel = 1e-10;     // |F| <= feas_rel * rho^r accepts a point as on Y
  double angle_tol = 1e-7;     // principal angle cut for intersections
  double rank_tol = 1e-10;     // relative rank floor (tangent planes, submersion margins)
};

/// Shared sampling configuration for shell scans.
struct ScanConfig {
  horn::ShellSchedule schedule{};
  int samples = 400;
  int restarts = 4;
  std::uint64_t seed = 0x5eedULL;
  int t_grid = 11;  // points of the [0,1] parameter grid
};

/// t-grid: equispaced values of [0,1]; optionally bracketed by the parameter
/// interval endpoints.
inline std::vector<double> parameter_grid(int m, bool with_interval_ends = false, double t_lo = -0.1,
                                          double t_hi = 1.1) {
  std::vector<double> g;
  if (with_interval_ends) g.push_back(t_lo);
  if (m == 1)
    g.push_back(0.0);
  else
    for (int i = 0; i < m; ++i) g.push_back(static_cast<double>(i) / (m - 1));
  if (with_interval_ends) g.push_back(t_hi);
  return g;
}

namespace trend {

/// Entries ordered by strictly decreasing radius. Returns the largest radius R
/// such that every usable entry with radius <= R passes, provided at least
/// `min_count` entries support it; entries with usable=false neither break nor
/// support the run.
inline std::optional<double> trailing_pass_radius(const std::vector<double>& radii, const std::vector<bool>& pass,
                                                  const std::vector<bool>& usable, int min_count = 3) {
  std::optional<double> best;
  int count = 0;
  for (std::size_t i = radii.size(); i-- > 0;) {
    if (!usable[i]) continue;
    if (!pass[i]) break;
    ++count;
    best = radii[i];
  }
  if (count >= min_count) return best;
  return std::nullopt;
}

/// True when one of the `window` smallest usable entries violates.
inline bool tail_violates(const std::vector<bool>& pass, const std::vector<bool>& usable, int window = 3) {
  int seen = 0;
  for (std::size_t i = pass.size(); i-- > 0 && seen < window;) {
    if (!usable[i]) continue;
    ++seen;
    if (!pass[i]) return true;
  }
  return false;
}

/// Least-squares slope of log(value) against log(radius) over entries with
/// value > floor. Needs two usable entries.
inline std::optional<double> loglog_slope(const std::vector<double>& radii, const std::vector<double>& values,
                                          double floor_value = 1e-14) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (!(std::isfinite(values[i]) && values[i] > floor_value)) continue;
    const double lx = std::log(radii[i]);
    const double ly = std::log(values[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++m;
  }
  if (m < 2) return std::nullopt;
  const double det = m * sxx - sx * sx;
  if (det == 0.0) return std::nullopt;
  return (m * sxy - sx * sy) / det;
}

}  // namespace trend

/// Shell-scan estimate of the Kuo constant: per-shell kappa minima, C_est and
/// the fitted decay exponent. "holds" needs C_est >= C_floor and a slope no
/// steeper than the target exponent (within slope_tol); C_est < C_floor means
/// failure; anything else is inconclusive.
struct KuoReport {
  std::string condition = "kuo";  // "kuo" or "kuo2"
  int r = 0;
  double exponent = 0.0;  // r-1, or r-delta for the second condition
  double delta = kNaN;    // second condition only
  horn::HornSpec spec{};  // horn the scan ran in (degree r, or r+1 for kuo2)
  ScanConfig scan_config{};
  horn::ShellScan scan{};
  double C_est = kNaN;
  double slope = kNaN;
  Verdict verdict = Verdict::inconclusive;
  std::string note;
};

/// One measured point of a sequence-based condition test.
struct ConditionPoint {
  double radius = 0.0;
  Eigen::VectorXd xt;
  double value = kNaN;          // headline measurement (gap or rank margin)
  double sigma_min = kNaN;      // (m) only
  double sigma_max = kNaN;      // (m) only
  double cauchy_defect = kNaN;  // (c) only: plane distance to the previous clean point
  int intersection_dim = -1;    // (c)/(c_d) cross-check; -1 = not computed
  bool anomaly = false;
  std::string note;
};

/// Verdict + evidence for one condition along one sampled sequence.
struct ConditionReport {
  std::string condition;  // "a", "m", "c", "c_d"
  double t0 = kNaN;
  std::vector<ConditionPoint> points;  // decreasing radius
  std::vector<double> missed_radii;
  double searched_radius = kNaN;  // largest radius from which everything passed
  double slope = kNaN;            // log-log trend of the headline value where used
  Verdict verdict = Verdict::inconclusive;
  bool vacuous = false;
  std::string note;
  std::vector<std::string> witnesses;
  std::vector<Eigen::VectorXd> tau_basis;  // (c): plane at the smallest clean radius
};

/// Quantitative certificate reports (sampled inequality verification).

struct JetDistanceRow {
  double radius = 0.0;
  int samples = 0;
  bool empty = true;
  double min_ratio = kNaN;  // min over samples of d(x, span{grad z_j(x)}) / |x|
  Eigen::VectorXd argmin;
};

struct JetDistanceReport {
  int r = 0;
  horn::HornSpec spec{};
  double eps = 0.0;  // bound checked: min_ratio >= 1 - eps
  ScanConfig scan_config{};
  std::vector<JetDistanceRow> rows;
  double searched_radius = kNaN;
  Verdict verdict = Verdict::inconclusive;
  std::vector<std::string> witnesses;
  std::string note;
};

struct DeformedDistanceRow {
  double radius = 0.0;
  int samples = 0;  // accepted (x, t) evaluations
  bool empty = true;
  double min_dt_ratio = kNaN;      // min d(x, V_{t,x}) / |x|; the 1/2 bound
  double max_v_ratio = kNaN;       // max |v(x)| / |x|
  double max_vt_ratio = kNaN;      // max |v_t(x)| / |x|
  double max_ddiff_ratio = kNaN;   // max |d(x,V_{t,x}) - d(x,V_x)| / |x|
  double max_vdiff_ratio = kNaN;   // max |v_t(x) - v(x)| / |x|
  double max_chain_defect = kNaN;  // worst violation of |d-d_t| <= |v_t-v| <= |v_t|+|v| (fp noise)
  double max_proj_dev = kNaN;      // elimination-formula vs orthonormal projection, relative
  Eigen::VectorXd argmin;
  double argmin_t = kNaN;
};

struct DeformedDistanceReport {
  int r = 0;
  horn::HornSpec spec{};
  double eps = 0.0;  // recording bound for |v|, |v_t|, |v_t - v| (<= eps|x|)
  double floor = 0.5;
  ScanConfig scan_config{};
  std::vector<double> t_grid;
  std::vector<DeformedDistanceRow> rows;
  double searched_radius = kNaN;
  Verdict verdict = Verdict::inconclusive;
  bool vacuous = false;  // set when the Kuo verdict did not hold
  std::vector<std::string> witnesses;
  std::string note;
};

struct BasisStabilityRow {
  double radius = 0.0;
  int samples = 0;
  bool empty = true;
  double min_ratio = kNaN;  // extremes of |N_{t,j}| / |N_j| over samples, t, j
  double max_ratio = kNaN;
  Eigen::VectorXd arg_extreme;  // sample with the ratio farthest from 1
  double t_extreme = kNaN;
};

struct BasisStabilityReport {
  int r = 0;
  horn::HornSpec spec{};
  double eps = 0.0;  // bound checked: ratios within [1-eps, 1+eps]
  ScanConfig scan_config{};
  std::vector<double> t_grid;
  std::vector<BasisStabilityRow> rows;
  double searched_radius = kNaN;
  Verdict verdict = Verdict::inconclusive;
  std::vector<std::string> witnesses;
  std::string note;
};

struct RadialBoundRow {
  double radius = 0.0;
  int samples = 0;
  bool empty = true;
  double min_w_ratio = kNaN;        // min d((x,0), W_{(x,t)}) / |x|; the 1/4 bound
  double min_gap = kNaN;            // min gap(l_{(x,t)}, W_{(x,t)}); same bound, SVD route
  double min_u_ratio = kNaN;        // min d((x,0), U_{(x,t)}) / |x|
  double max_u_norm_ratio = kNaN;   // max |u(x,t)| / |x|
  double max_w_norm_ratio = kNaN;   // max |omega(x,t)| / |x|
  double min_est_ratio = kNaN;      // extremes of |L_j| / |M_j|
  double max_est_ratio = kNaN;
  double max_proj_dev = kNaN;       // elimination-formula vs orthonormal projection, relative
  Eigen::VectorXd argmin;
  double argmin_t = kNaN;
};

struct RadialBoundReport {
  int r = 0;
  horn::HornSpec spec{};
  double floor = 0.25;
  ScanConfig scan_config{};
  std::vector<double> t_grid;  // includes the parameter-interval endpoints
  std::vector<RadialBoundRow> rows;
  double searched_radius = kNaN;
  Verdict verdict = Verdict::inconclusive;
  bool vacuous = false;
  std::vector<std::string> witnesses;
  std::string note;
};

}  // namespace stratcheck::regularity
