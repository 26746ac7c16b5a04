#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "stratcheck/horn.hpp"
#include "stratcheck/poly.hpp"
#include "stratcheck/rng.hpp"
#include "stratcheck/subspace.hpp"

namespace stratcheck::regularity {

using poly::MapGerm;
using poly::Polynomial;
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

struct FamilyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// F(x,t) = f(x) + t(g(x) - f(x)) over the parameter interval J = (-0.1, 1.1).
/// Requires matching r-jets, so the t-part of F carries only degree > r terms.
class DeformationFamily {
 public:
  DeformationFamily(MapGerm f, MapGerm g, int r)
      : f_(std::move(f)), g_(std::move(g)), r_(r), z_(poly::jet(f_, r)), diff_(make_diff(f_, g_, r)) {}

  int nvars() const { return f_.nvars(); }
  int ncomps() const { return f_.ncomps(); }
  int r() const { return r_; }
  double t_lo() const { return -0.1; }
  double t_hi() const { return 1.1; }

  const MapGerm& f() const { return f_; }
  const MapGerm& g() const { return g_; }
  const MapGerm& z() const { return z_; }
  /// g - f (the t-direction of the deformation).
  const MapGerm& diff() const { return diff_; }

  Eigen::VectorXd eval_F(const Vec& x, double t) const { return f_.eval(x) + t * diff_.eval(x); }

  Eigen::VectorXd eval_F(const Vec& xt) const { return eval_F(xt.head(nvars()), xt[nvars()]); }

  /// Columns grad F_j(x,t) in R^{n+1}; x-rows are grad f_{t,j}(x), the t-row
  /// is (g_j - f_j)(x).
  Mat grad_F(const Vec& x, double t) const {
    Mat m(nvars() + 1, ncomps());
    m.topRows(nvars()) = f_.gradients_at(x) + t * diff_.gradients_at(x);
    m.bottomRows(1) = diff_.eval(x).transpose();
    return m;
  }

  Mat grad_F(const Vec& xt) const { return grad_F(xt.head(nvars()), xt[nvars()]); }

  /// Columns grad f_{t,j}(x) in R^n (x-part of grad F).
  Mat grad_x_ft(const Vec& x, double t) const { return f_.gradients_at(x) + t * diff_.gradients_at(x); }

  /// Components of F as polynomials in (x1..xn, t); formatting and I/O only.
  std::vector<Polynomial> F_polynomials() const {
    std::vector<Polynomial> out;
    const int m = nvars() + 1;
    const Polynomial t = Polynomial::variable(m, nvars());
    for (int j = 0; j < ncomps(); ++j)
      out.push_back(f_.component(j).extend_vars(m) + t * diff_.component(j).extend_vars(m));
    return out;
  }

 private:
  static MapGerm make_diff(const MapGerm& f, const MapGerm& g, int r) {
    if (r < 1) throw FamilyError("jet order must be >= 1");
    poly::residuals(f, g, r);  // throws JetMismatchError when the r-jets differ
    std::vector<Polynomial> comps;
    for (int j = 0; j < f.ncomps(); ++j) comps.push_back(g.component(j) - f.component(j));
    return MapGerm(std::move(comps));
  }

  MapGerm f_;
  MapGerm g_;
  int r_;
  MapGerm z_;
  MapGerm diff_;
};

inline DeformationFamily build_family(const MapGerm& f, const MapGerm& g, int r) {
  return DeformationFamily(f, g, r);
}

/// Control function rho(x,t) = sum x_i^2 with gradient (2x, 0): the squared
/// distance to the parameter axis.
inline std::pair<double, Vec> control_function(const Vec& xt) {
  const Eigen::Index n = xt.size() - 1;
  if (n < 1) throw FamilyError("control function needs a point of R^n x R with n >= 1");
  Vec grad = 2.0 * xt;
  grad[n] = 0.0;
  return {xt.head(n).squaredNorm(), std::move(grad)};
}

/// Tangent plane of Y = F^{-1}(0) \ ({0} x J) at a feasible point: the
/// orthogonal complement of span{grad F_j}. Rank deficiency of dF means the
/// point is not on the smooth stratum.
inline subspace::Subspace tangent_plane_Y(const DeformationFamily& fam, const Vec& xt, double feas_tol,
                                          double rank_tol = 1e-10) {
  if (xt.size() != fam.nvars() + 1) throw FamilyError("point dimension must be n+1");
  if (fam.eval_F(xt).norm() > feas_tol) throw FamilyError("point is not on F^{-1}(0) within feas_tol");
  const Mat grads = fam.grad_F(xt);
  const subspace::Frame fr(grads);
  const double scale = fr.max_norm();
  if (scale == 0.0 || subspace::kuo_distance(fr) <= rank_tol * scale)
    throw subspace::RankError("dF is rank-deficient: the point is not on the smooth stratum");
  return subspace::orthogonal_complement(subspace::orthonormalize(fr));
}

/// One sampled point of Y per shell radius, drifting toward (0, t0).
struct SequencePoint {
  double radius = 0.0;
  Vec xt;
};

struct SequenceSpec {
  double t0 = 0.0;
  std::vector<SequencePoint> points;   // strictly decreasing radius
  std::vector<double> missed_radii;    // shells where no Y point was found
  bool empty() const { return points.empty(); }
};

namespace detail {

/// Damped underdetermined Newton for [F(x,t); |x|^2 - rho^2] = 0 from one
/// start; least-norm steps via complete orthogonal decomposition.
inline std::optional<Vec> newton_to_y(const DeformationFamily& fam, Vec xt, double rho, double feas_tol) {
  const int n = fam.nvars();
  const int p = fam.ncomps();
  for (int it = 0; it < 50; ++it) {
    const Eigen::VectorXd fv = fam.eval_F(xt);
    const double sphere_res = xt.head(n).squaredNorm() - rho * rho;
    if (!fv.allFinite() || !std::isfinite(sphere_res)) return std::nullopt;
    if (fv.norm() <= feas_tol && std::abs(sphere_res) <= 1e-12 * rho * rho) {
      xt.head(n) *= rho / xt.head(n).norm();
      if (fam.eval_F(xt).norm() <= 2.0 * feas_tol) return xt;
      return std::nullopt;
    }
    Eigen::VectorXd res(p + 1);
    res.head(p) = fv;
    res[p] = sphere_res;
    Mat jac(p + 1, n + 1);
    jac.topRows(p) = fam.grad_F(xt).transpose();
    jac.bottomRows(1).setZero();
    jac.block(p, 0, 1, n) = 2.0 * xt.head(n).transpose();
    Eigen::CompleteOrthogonalDecomposition<Mat> cod(jac);
    Vec step = cod.solve(-res);
    const double sn = step.norm();
    if (!step.allFinite()) return std::nullopt;
    if (sn > rho) step *= rho / sn;
    xt += step;
  }
  return std::nullopt;
}

}  // namespace detail

/// Shell-indexed sampling of Y near (0, t0): multistart Newton on the sphere
/// |x| = rho_k with a t-window shrinking like the radius. Deterministic in
/// (family, t0, schedule, seed).
inline SequenceSpec sample_y_sequence(const DeformationFamily& fam, double t0, const horn::ShellSchedule& schedule,
                                      std::uint64_t seed, double feas_rel = 1e-10, int trials = 16) {
  if (!(t0 > fam.t_lo() && t0 < fam.t_hi())) throw FamilyError("t0 must lie inside the parameter interval");
  SequenceSpec seq;
  seq.t0 = t0;
  const int n = fam.nvars();
  const std::vector<double> radii = schedule.radii();
  for (std::size_t k = 0; k < radii.size(); ++k) {
    const double rho = radii[k];
    const double feas_tol = feas_rel * std::pow(rho, fam.r());
    const double window = rho;
    const CounterRng rng = CounterRng(derive_seed(seed, k)).stream(0x59u);
    std::optional<Vec> found;
    for (int trial = 0; trial < trials && !found; ++trial) {
      Vec xt(n + 1);
      xt.head(n) = rho * rng.sphere_point(n, static_cast<std::uint64_t>(trial));
      const double off = window * (2.0 * rng.uniform(0x10000u + static_cast<std::uint64_t>(trial)) - 1.0);
      xt[n] = std::clamp(t0 + off, fam.t_lo() + 1e-9, fam.t_hi() - 1e-9);
      auto sol = detail::newton_to_y(fam, std::move(xt), rho, feas_tol);
      if (!sol) continue;
      const double t = (*sol)[n];
      if (t <= fam.t_lo() || t >= fam.t_hi()) continue;
      if (std::abs(t - t0) > 2.0 * window) continue;
      found = std::move(sol);
    }
    if (found)
      seq.points.push_back({rho, std::move(*found)});
    else
      seq.missed_radii.push_back(rho);
  }
  return seq;
}

}  // namespace stratcheck::regularity
