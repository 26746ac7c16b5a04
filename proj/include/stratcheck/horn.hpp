#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "stratcheck/parallel.hpp"
#include "stratcheck/poly.hpp"
#include "stratcheck/rng.hpp"
#include "stratcheck/subspace.hpp"

namespace stratcheck::horn {

using poly::MapGerm;
using Vec = Eigen::VectorXd;

struct HornError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Non-finite functional value during a shell scan; carries the point.
struct NonFiniteError : HornError {
  Vec point;
  NonFiniteError(const std::string& msg, Vec p) : HornError(msg), point(std::move(p)) {}
};

/// H_r(f; width) = { x : |f(x)| <= width * |x|^r }, intersected with |x| < radius_cap.
struct HornSpec {
  int degree_r = 2;
  double width = 0.5;
  double radius_cap = 1.0;

  void validate() const {
    if (degree_r < 1) throw HornError("horn degree must be >= 1");
    if (!(width > 0.0)) throw HornError("horn width must be > 0");
    if (!(radius_cap > 0.0)) throw HornError("radius cap must be > 0");
  }
};

namespace detail {

inline double ipow(double b, int e) {
  double r = 1.0;
  for (int k = 0; k < e; ++k) r *= b;
  return r;
}

}  // namespace detail

/// |f(x)| <= width * |x|^r, decided on squared quantities: boundary cases
/// like |f| = |x|^r then hinge on no rounding beyond the evaluations
/// themselves.
inline bool horn_contains(const MapGerm& f, const HornSpec& spec, const Vec& x) {
  spec.validate();
  const double n2 = x.squaredNorm();
  if (n2 == 0.0) throw HornError("the origin is excluded from horn membership queries");
  if (!(n2 < spec.radius_cap * spec.radius_cap)) throw HornError("point lies outside the radius cap");
  return f.eval(x).squaredNorm() <= spec.width * spec.width * detail::ipow(n2, spec.degree_r);
}

struct Shell {
  double radius = 0.0;
  std::vector<Vec> points;
  std::uint64_t seed = 0;
};

/// Geometric radius schedule rho_k = rho0 * gamma^k; defaults resolve log-log
/// slopes at four shells per decade down to 1e-5.
struct ShellSchedule {
  double rho0 = 0.1;
  double gamma = 0.56234132519034907;  // 10^(-1/4)
  int count = 17;

  std::vector<double> radii() const {
    if (!(rho0 > 0.0) || !(gamma > 0.0 && gamma < 1.0) || count < 1)
      throw HornError("shell schedule needs rho0 > 0, gamma in (0,1), count >= 1");
    std::vector<double> r(static_cast<std::size_t>(count));
    double v = rho0;
    for (int k = 0; k < count; ++k, v *= gamma) r[static_cast<std::size_t>(k)] = v;
    return r;
  }
};

namespace detail {

/// Projected-gradient descent of |f(x)|^2 along the sphere |x| = rho, until
/// horn membership or the iteration cap; pure in its inputs.
inline std::optional<Vec> descend_into_horn(const MapGerm& f, const HornSpec& spec, Vec x, double rho) {
  const int max_iters = 200;
  const double step_tol = 1e-12;
  for (int it = 0; it < max_iters; ++it) {
    if (horn_contains(f, spec, x)) return x;
    const Eigen::VectorXd fx = f.eval(x);
    const Vec grad = 2.0 * (f.jacobian(x).transpose() * fx);
    const Vec xhat = x / rho;
    Vec tangent = grad - grad.dot(xhat) * xhat;
    const double tn = tangent.norm();
    if (tn * rho <= step_tol) break;
    tangent /= tn;
    double eta = 0.25 * rho;
    const double g0 = fx.squaredNorm();
    bool moved = false;
    while (eta > step_tol * rho) {
      Vec cand = x - eta * tangent;
      cand *= rho / cand.norm();
      if (f.eval(cand).squaredNorm() < g0) {
        x = std::move(cand);
        moved = true;
        break;
      }
      eta *= 0.5;
    }
    if (!moved) break;
  }
  return horn_contains(f, spec, x) ? std::optional<Vec>(x) : std::nullopt;
}

}  // namespace detail

/// Up to `count` horn points on the sphere |x| = rho: uniform seeds filtered
/// by membership, rejected seeds pulled toward the horn by constrained
/// descent. Deterministic in (f, spec, rho, count, seed).
inline Shell sample_shell(const MapGerm& f, const HornSpec& spec, double rho, int count, std::uint64_t seed) {
  spec.validate();
  if (!(rho > 0.0 && rho < spec.radius_cap)) throw HornError("shell radius must lie in (0, radius_cap)");
  if (count < 1) throw HornError("shell sample count must be >= 1");
  const int n = f.nvars();
  Shell shell;
  shell.radius = rho;
  shell.seed = seed;
  const CounterRng rng(seed);
  for (int i = 0; i < count; ++i) {
    Vec x = rho * rng.sphere_point(n, static_cast<std::uint64_t>(i));
    if (horn_contains(f, spec, x)) {
      shell.points.push_back(std::move(x));
      continue;
    }
    if (auto pulled = detail::descend_into_horn(f, spec, std::move(x), rho)) shell.points.push_back(std::move(*pulled));
  }
  return shell;
}

namespace detail {

/// Derivative-free pattern search along the sphere from (x0, f0): probe the
/// +-tangent-basis directions, halve the arc step on failure. The optional
/// constraint (horn membership) rejects candidates before evaluation.
inline std::pair<double, Vec> refine_on_sphere(const std::function<double(const Vec&)>& fn, Vec x, double fx,
                                               double rho, const std::function<bool(const Vec&)>& constraint) {
  const int max_sweeps = 400;
  const double arc_tol = 1e-13;
  double eta = 0.05 * rho;
  int basis_age = -1;
  Eigen::MatrixXd tangent;
  for (int sweep = 0; sweep < max_sweeps && eta > arc_tol * rho; ++sweep) {
    if (basis_age != 0) {
      tangent = subspace::orthogonal_complement(subspace::line_through(x)).basis();
      basis_age = 0;
    }
    double best = fx;
    Vec best_x;
    for (Eigen::Index c = 0; c < tangent.cols(); ++c)
      for (int s = -1; s <= 1; s += 2) {
        Vec cand = x + (s * eta) * tangent.col(c);
        cand *= rho / cand.norm();
        if (constraint && !constraint(cand)) continue;
        const double v = fn(cand);
        if (!std::isfinite(v)) throw NonFiniteError("non-finite functional value during refinement", cand);
        if (v < best) {
          best = v;
          best_x = std::move(cand);
        }
      }
    if (best < fx) {
      fx = best;
      x = std::move(best_x);
      basis_age = -1;
    } else {
      eta *= 0.5;
    }
  }
  return {fx, std::move(x)};
}

}  // namespace detail

/// Minimum of fn over the shell, then local refinement from the best
/// `restarts` points, constrained to the sphere (and to `constraint` when
/// given, normally horn membership). Never exceeds the raw sample minimum.
inline std::pair<double, Vec> shell_min(const std::function<double(const Vec&)>& fn, const Shell& shell, int restarts,
                                        const std::function<bool(const Vec&)>& constraint = nullptr) {
  if (shell.points.empty()) throw HornError("shell_min needs a non-empty shell");
  std::vector<std::pair<double, std::size_t>> ranked;
  ranked.reserve(shell.points.size());
  for (std::size_t i = 0; i < shell.points.size(); ++i) {
    const double v = fn(shell.points[i]);
    if (!std::isfinite(v))
      throw NonFiniteError("non-finite functional value at a shell point", shell.points[i]);
    ranked.emplace_back(v, i);
  }
  std::sort(ranked.begin(), ranked.end());
  double best = ranked[0].first;
  Vec best_x = shell.points[ranked[0].second];
  const int runs = std::min<std::size_t>(static_cast<std::size_t>(std::max(restarts, 0)), ranked.size());
  for (int r = 0; r < runs; ++r) {
    auto [v, x] = detail::refine_on_sphere(fn, shell.points[ranked[static_cast<std::size_t>(r)].second],
                                           ranked[static_cast<std::size_t>(r)].first, shell.radius, constraint);
    if (v < best) {
      best = v;
      best_x = std::move(x);
    }
  }
  return {best, std::move(best_x)};
}

struct ShellRow {
  double radius = 0.0;
  double min_value = std::numeric_limits<double>::quiet_NaN();
  Vec argmin;
  bool empty = true;  // horn missed the sampled sphere
  int accepted = 0;
  double raw_min = std::numeric_limits<double>::quiet_NaN();  // pre-refinement sample minimum
};

struct ShellScan {
  std::vector<ShellRow> rows;

  bool all_empty() const {
    for (const auto& r : rows)
      if (!r.empty) return false;
    return true;
  }
};

/// Shell-by-shell minimization of fn over horn samples; shells run as
/// independent work units and merge by index, so the scan is deterministic
/// in (f, spec, schedule, samples, seed) regardless of thread count.
inline ShellScan scan_min(const MapGerm& f, const HornSpec& spec, const ShellSchedule& schedule, int samples,
                          std::uint64_t seed, const std::function<double(const Vec&)>& fn, int restarts = 4) {
  const std::vector<double> radii = schedule.radii();
  for (double r : radii)
    if (!(r < spec.radius_cap)) throw HornError("shell schedule exceeds the radius cap");
  ShellScan scan;
  scan.rows.resize(radii.size());
  parallel_for(radii.size(), [&](std::size_t k) {
    ShellRow& row = scan.rows[k];
    row.radius = radii[k];
    const Shell shell = sample_shell(f, spec, radii[k], samples, derive_seed(seed, k));
    row.accepted = static_cast<int>(shell.points.size());
    if (shell.points.empty()) return;
    row.empty = false;
    double raw = std::numeric_limits<double>::infinity();
    for (const auto& x : shell.points) raw = std::min(raw, fn(x));
    row.raw_min = raw;
    auto membership = [&f, &spec](const Vec& x) { return horn_contains(f, spec, x); };
    auto [v, arg] = shell_min(fn, shell, restarts, membership);
    row.min_value = v;
    row.argmin = std::move(arg);
  });
  return scan;
}

struct InclusionResult {
  bool included = true;
  std::optional<Vec> witness;  // a point of the first horn outside the second
  int tested_points = 0;
};

/// Empirical check of H_r(f;b) ∩ {|x|<beta} ⊂ H_r(ft;a) ∩ {|x|<beta} by
/// shell sampling of the first horn; `samples` counts points per shell.
inline InclusionResult horn_inclusion_check(const MapGerm& f, const MapGerm& ft, int r, double b, double a,
                                            double beta, int samples, std::uint64_t seed) {
  if (!(b > 0.0 && b <= a)) throw HornError("horn_inclusion_check needs 0 < b <= a");
  if (!(beta > 0.0)) throw HornError("horn_inclusion_check needs beta > 0");
  const HornSpec inner{r, b, beta};
  ShellSchedule sched;
  sched.rho0 = 0.5 * beta;
  InclusionResult res;
  for (std::size_t k = 0; k < static_cast<std::size_t>(sched.count); ++k) {
    const double rho = sched.rho0 * std::pow(sched.gamma, static_cast<double>(k));
    const Shell shell = sample_shell(f, inner, rho, samples, derive_seed(seed, k));
    for (const auto& x : shell.points) {
      ++res.tested_points;
      if (ft.eval(x).squaredNorm() > a * a * detail::ipow(x.squaredNorm(), r)) {
        res.included = false;
        res.witness = x;
        return res;
      }
    }
  }
  return res;
}

}  // namespace stratcheck::horn
