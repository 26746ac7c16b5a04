#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "stratcheck/family.hpp"
#include "stratcheck/report.hpp"
#include "stratcheck/subspace.hpp"

namespace stratcheck::regularity {

namespace detail {

inline Vec axis_direction(int n) {
  Vec e = Vec::Zero(n + 1);
  e[n] = 1.0;
  return e;
}

struct TangentResult {
  subspace::Subspace plane = subspace::Subspace::zero(1);
  bool ok = false;
  std::string note;
};

inline TangentResult tangent_at(const DeformationFamily& fam, const Vec& xt, double radius, const Thresholds& thr) {
  TangentResult out;
  const double feas_tol = thr.feas_rel * std::pow(radius, fam.r());
  try {
    out.plane = tangent_plane_Y(fam, xt, feas_tol, thr.rank_tol);
    out.ok = true;
  } catch (const std::exception& e) {
    out.note = e.what();
  }
  return out;
}

/// Shared verdict logic: headline values per point, pass = predicate already
/// evaluated; fills searched_radius and verdict (without trend handling).
inline void finish_verdict(ConditionReport& rep) {
  std::vector<double> radii;
  std::vector<bool> pass, usable;
  for (const auto& pt : rep.points) {
    radii.push_back(pt.radius);
    const bool use = !pt.anomaly && std::isfinite(pt.value);
    usable.push_back(use);
    // A note on a usable point marks a threshold violation recorded upstream.
    pass.push_back(use && pt.note.empty());
  }
  if (auto rad = trend::trailing_pass_radius(radii, pass, usable)) {
    rep.searched_radius = *rad;
    rep.verdict = Verdict::holds;
  } else if (trend::tail_violates(pass, usable)) {
    rep.verdict = Verdict::fails;
  } else {
    rep.verdict = Verdict::inconclusive;
  }
}

}  // namespace detail

/// Submersion test for (t, rho) restricted to the tangent planes of Y: the
/// two restricted differentials must stay jointly full-rank (rank 2) along
/// the sequence. Violations are verdict data, not errors.
inline ConditionReport condition_m_check(const DeformationFamily& fam, const SequenceSpec& seq,
                                         const Thresholds& thr = {}) {
  ConditionReport rep;
  rep.condition = "m";
  rep.t0 = seq.t0;
  rep.missed_radii = seq.missed_radii;
  const int n = fam.nvars();
  const Vec e_t = detail::axis_direction(n);
  for (const auto& sp : seq.points) {
    ConditionPoint pt;
    pt.radius = sp.radius;
    pt.xt = sp.xt;
    const auto tan = detail::tangent_at(fam, sp.xt, sp.radius, thr);
    if (!tan.ok) {
      pt.anomaly = true;
      pt.note = tan.note;
      rep.witnesses.push_back("tangent undefined at radius " + std::to_string(sp.radius) + ": " + tan.note);
      rep.points.push_back(std::move(pt));
      continue;
    }
    const auto [rho_val, rho_grad] = control_function(sp.xt);
    (void)rho_val;
    Eigen::MatrixXd m(2, tan.plane.dim());
    m.row(0) = (e_t.transpose() * tan.plane.basis());
    m.row(1) = (rho_grad.transpose() * tan.plane.basis());
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    const auto& sv = svd.singularValues();
    pt.sigma_max = sv.size() > 0 ? sv[0] : 0.0;
    pt.sigma_min = sv.size() > 1 ? sv[sv.size() - 1] : 0.0;
    pt.value = pt.sigma_max > 0.0 ? pt.sigma_min / pt.sigma_max : 0.0;
    if (!(pt.sigma_min >= thr.rank_tol * pt.sigma_max) || pt.sigma_max == 0.0) {
      pt.note = "restricted differentials of (t, rho) drop below rank 2";
      rep.witnesses.push_back("rank margin " + std::to_string(pt.value) + " at radius " + std::to_string(sp.radius));
    }
    rep.points.push_back(std::move(pt));
  }
  if (rep.points.empty()) {
    rep.note = "no points of Y sampled";
    return rep;
  }
  detail::finish_verdict(rep);
  return rep;
}

namespace detail {

/// Gap-style verdict with a decay-trend requirement: the measured gaps must
/// fall below gap_pass at the smallest radii and shrink (not grow) as the
/// radius decreases. With radii ordered large-to-small that means a
/// non-negative log-log slope, up to slope_tol; values at numerical zero are
/// treated as converged and excluded from the fit.
inline void finish_gap_verdict(ConditionReport& rep, const Thresholds& thr) {
  std::vector<double> radii, values;
  std::vector<bool> pass, usable;
  for (const auto& pt : rep.points) {
    radii.push_back(pt.radius);
    const bool use = !pt.anomaly && std::isfinite(pt.value);
    usable.push_back(use);
    pass.push_back(use && pt.value <= thr.gap_pass);
    values.push_back(use ? pt.value : kNaN);
  }
  bool decay_ok = true;
  if (auto s = trend::loglog_slope(radii, values, 1e-12)) {
    rep.slope = *s;
    decay_ok = *s >= -thr.slope_tol;
  }
  if (auto rad = trend::trailing_pass_radius(radii, pass, usable)) {
    if (decay_ok) {
      rep.searched_radius = *rad;
      rep.verdict = Verdict::holds;
    } else {
      rep.verdict = Verdict::inconclusive;
      rep.note = "gaps small but the trend grows toward the axis";
    }
  } else if (trend::tail_violates(pass, usable)) {
    rep.verdict = Verdict::fails;
  } else {
    rep.verdict = Verdict::inconclusive;
  }
}

}  // namespace detail

/// (a)-regularity for the pair (Y, Z): the axis direction e_t must be caught
/// by the tangent planes of Y in the limit, measured as gap(span{e_t}, T Y).
inline ConditionReport a_regularity_test(const DeformationFamily& fam, const SequenceSpec& seq,
                                         const Thresholds& thr = {}) {
  ConditionReport rep;
  rep.condition = "a";
  rep.t0 = seq.t0;
  rep.missed_radii = seq.missed_radii;
  const Vec e_t = detail::axis_direction(fam.nvars());
  const subspace::Subspace axis = subspace::line_through(e_t);
  for (const auto& sp : seq.points) {
    ConditionPoint pt;
    pt.radius = sp.radius;
    pt.xt = sp.xt;
    const auto tan = detail::tangent_at(fam, sp.xt, sp.radius, thr);
    if (!tan.ok) {
      pt.anomaly = true;
      pt.note = tan.note;
      rep.witnesses.push_back("tangent undefined at radius " + std::to_string(sp.radius) + ": " + tan.note);
    } else {
      pt.value = subspace::gap(axis, tan.plane).gap;
    }
    rep.points.push_back(std::move(pt));
  }
  if (rep.points.empty()) {
    rep.note = "no points of Y sampled";
    return rep;
  }
  detail::finish_gap_verdict(rep, thr);
  return rep;
}

/// (c)-regularity: plane_i = ker d(rho) ∩ T Y along the sequence; pre-regularity
/// is certified by small consecutive plane distances (Cauchy defects), then the
/// axis direction must be caught by the planes in the limit.
inline ConditionReport c_regularity_test(const DeformationFamily& fam, const SequenceSpec& seq,
                                         const Thresholds& thr = {}) {
  ConditionReport rep;
  rep.condition = "c";
  rep.t0 = seq.t0;
  rep.missed_radii = seq.missed_radii;
  const int n = fam.nvars();
  const int p = fam.ncomps();
  const int expected_dim = n - p;  // dim Y - 1
  const Vec e_t = detail::axis_direction(n);
  const subspace::Subspace axis = subspace::line_through(e_t);
  const subspace::Subspace* prev_plane = nullptr;
  std::vector<subspace::Subspace> planes;  // parallel to clean points, for defects and tau
  planes.reserve(seq.points.size());
  for (const auto& sp : seq.points) {
    ConditionPoint pt;
    pt.radius = sp.radius;
    pt.xt = sp.xt;
    const auto tan = detail::tangent_at(fam, sp.xt, sp.radius, thr);
    if (!tan.ok) {
      pt.anomaly = true;
      pt.note = tan.note;
      rep.witnesses.push_back("tangent undefined at radius " + std::to_string(sp.radius) + ": " + tan.note);
      rep.points.push_back(std::move(pt));
      continue;
    }
    const auto [rho_val, rho_grad] = control_function(sp.xt);
    (void)rho_val;
    const subspace::Subspace mu = subspace::orthogonal_complement(subspace::line_through(rho_grad));
    const subspace::Subspace plane = subspace::intersection(mu, tan.plane, thr.angle_tol);
    pt.intersection_dim = plane.dim();
    if (plane.dim() != expected_dim) {
      pt.anomaly = true;
      pt.note = "intersection dimension " + std::to_string(plane.dim()) + " != dim Y - 1 = " +
                std::to_string(expected_dim);
      rep.witnesses.push_back("(m)/(c_d) anomaly at radius " + std::to_string(sp.radius) + ": " + pt.note);
      rep.points.push_back(std::move(pt));
      continue;
    }
    if (plane.dim() == 0) {
      // dim Y = 1: the planes collapse to {0}, which can never catch the axis.
      pt.value = 1.0;
      pt.note = "limit planes are 0-dimensional; the axis direction cannot be caught";
    } else {
      pt.value = subspace::gap(axis, plane).gap;
      if (prev_plane && prev_plane->dim() == plane.dim())
        pt.cauchy_defect = subspace::gap(*prev_plane, plane).gap;
      planes.push_back(plane);
      prev_plane = &planes.back();
    }
    rep.points.push_back(std::move(pt));
  }
  if (rep.points.empty()) {
    rep.note = "no points of Y sampled";
    return rep;
  }
  if (!planes.empty()) {
    const auto& tau = planes.back();
    for (int j = 0; j < tau.dim(); ++j) rep.tau_basis.push_back(tau.basis().col(j));
  }
  // Pre-regularity: trailing Cauchy defects must sit below cauchy_tol.
  {
    std::vector<double> radii;
    std::vector<bool> pass, usable;
    for (const auto& pt : rep.points) {
      radii.push_back(pt.radius);
      const bool has_defect = std::isfinite(pt.cauchy_defect);
      usable.push_back(has_defect);
      pass.push_back(has_defect && pt.cauchy_defect <= thr.cauchy_tol);
    }
    if (!trend::trailing_pass_radius(radii, pass, usable, 2)) {
      rep.verdict = Verdict::inconclusive;
      rep.note = "sequence not certified pre-regular: consecutive plane distances exceed cauchy_tol";
      return rep;
    }
  }
  detail::finish_gap_verdict(rep, thr);
  return rep;
}

/// Quantitative transversality of limits: gap(l, W) with l = span{grad rho}
/// and W = span{grad F_j} must stay above cd_floor; cross-checked against the
/// intersection dimension of mu = ker d(rho) and sigma = T Y.
inline ConditionReport cd_condition_test(const DeformationFamily& fam, const SequenceSpec& seq,
                                         const Thresholds& thr = {}) {
  ConditionReport rep;
  rep.condition = "c_d";
  rep.t0 = seq.t0;
  rep.missed_radii = seq.missed_radii;
  const int n = fam.nvars();
  const int p = fam.ncomps();
  const int expected_dim = n - p;  // dim Y - 1
  for (const auto& sp : seq.points) {
    ConditionPoint pt;
    pt.radius = sp.radius;
    pt.xt = sp.xt;
    const auto [rho_val, rho_grad] = control_function(sp.xt);
    (void)rho_val;
    const subspace::Subspace ell = subspace::line_through(rho_grad);
    const subspace::Frame wf(fam.grad_F(sp.xt));
    const subspace::Subspace w = subspace::orthonormalize(wf);
    if (w.dim() < p) {
      pt.anomaly = true;
      pt.note = "gradient span rank-deficient (dim " + std::to_string(w.dim()) + " < " + std::to_string(p) + ")";
      rep.witnesses.push_back("rank anomaly at radius " + std::to_string(sp.radius));
      rep.points.push_back(std::move(pt));
      continue;
    }
    pt.value = subspace::gap(ell, w).gap;
    const auto tan = detail::tangent_at(fam, sp.xt, sp.radius, thr);
    if (tan.ok) {
      const subspace::Subspace mu = subspace::orthogonal_complement(ell);
      pt.intersection_dim = subspace::intersection_dim(mu, tan.plane, thr.angle_tol);
      if (pt.intersection_dim != expected_dim) {
        pt.anomaly = true;
        pt.note = "intersection dimension " + std::to_string(pt.intersection_dim) + " != dim Y - 1 = " +
                  std::to_string(expected_dim);
        rep.witnesses.push_back("(m)/(c_d) anomaly at radius " + std::to_string(sp.radius) + ": " + pt.note);
        rep.points.push_back(std::move(pt));
        continue;
      }
    }
    if (pt.value < thr.cd_floor) {
      pt.note = "gap " + std::to_string(pt.value) + " below cd_floor";
      rep.witnesses.push_back("gap below cd_floor at radius " + std::to_string(sp.radius));
    }
    rep.points.push_back(std::move(pt));
  }
  if (rep.points.empty()) {
    rep.note = "no points of Y sampled";
    return rep;
  }
  detail::finish_verdict(rep);
  return rep;
}

}  // namespace stratcheck::regularity
