#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "stratcheck/horn.hpp"
#include "stratcheck/poly.hpp"
#include "stratcheck/report.hpp"
#include "stratcheck/subspace.hpp"

namespace stratcheck::regularity {

struct EmptyHornError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

/// kappa(grad f_1(x), ..., grad f_p(x)); for p = 1 this is |grad f(x)|.
inline double kappa_of_gradients(const poly::MapGerm& f, const Eigen::VectorXd& x) {
  return subspace::kuo_distance(subspace::Frame(f.gradients_at(x)));
}

inline KuoReport kuo_scan(const poly::MapGerm& horn_germ, const poly::MapGerm& grad_germ, int r, double exponent,
                          const horn::HornSpec& spec, const ScanConfig& scan, const Thresholds& thr,
                          const std::string& condition) {
  KuoReport rep;
  rep.condition = condition;
  rep.r = r;
  rep.exponent = exponent;
  rep.spec = spec;
  rep.scan_config = scan;
  rep.scan = horn::scan_min(
      horn_germ, spec, scan.schedule, scan.samples, scan.seed,
      [&grad_germ](const Eigen::VectorXd& x) { return kappa_of_gradients(grad_germ, x); }, scan.restarts);
  if (rep.scan.all_empty())
    throw EmptyHornError("all shells empty: the horn misses every sampled sphere (width too small?)");

  std::vector<double> radii, minima;
  int empty_shells = 0;
  double c_est = std::numeric_limits<double>::infinity();
  for (const auto& row : rep.scan.rows) {
    if (row.empty) {
      ++empty_shells;
      continue;
    }
    radii.push_back(row.radius);
    minima.push_back(row.min_value);
    c_est = std::min(c_est, row.min_value / std::pow(row.radius, exponent));
  }
  rep.C_est = c_est;
  if (auto s = trend::loglog_slope(radii, minima, 0.0)) rep.slope = *s;
  if (empty_shells > 0) rep.note = std::to_string(empty_shells) + " empty shell(s) skipped";

  if (rep.C_est < thr.C_floor)
    rep.verdict = Verdict::fails;
  else if (std::isfinite(rep.slope) && rep.slope <= exponent + thr.slope_tol)
    rep.verdict = Verdict::holds;
  else
    rep.verdict = Verdict::inconclusive;
  return rep;
}

}  // namespace detail

/// Estimate the Kuo constant: scan min kappa(grad f_j) over horn shells of
/// H_r(f; width) and fit the decay exponent against the target r-1.
inline KuoReport kuo_check(const poly::MapGerm& f, int r, const horn::HornSpec& spec, const ScanConfig& scan,
                           const Thresholds& thr = {}) {
  if (spec.degree_r != r) throw horn::HornError("horn degree must equal the jet order r");
  return detail::kuo_scan(f, f, r, static_cast<double>(r - 1), spec, scan, thr, "kuo");
}

/// Second variant: kappa(grad f_j) against |x|^{r-delta} on the deeper horn
/// H_{r+1}(g; width), one report per perturbation g with matching (r+1)-jet.
/// Only the supplied finite list of perturbations is certified.
inline std::vector<KuoReport> second_kuo_check(const poly::MapGerm& f, const std::vector<poly::MapGerm>& perturbations,
                                               int r, double delta, const horn::HornSpec& spec, const ScanConfig& scan,
                                               const Thresholds& thr = {}) {
  if (spec.degree_r != r + 1) throw horn::HornError("second-condition horn degree must be r+1");
  if (!(delta > 0.0 && delta < static_cast<double>(r)))
    throw std::invalid_argument("delta must lie in (0, r)");
  std::vector<KuoReport> out;
  out.reserve(perturbations.size());
  for (const auto& g : perturbations) {
    poly::residuals(f, g, r + 1);  // throws JetMismatchError when the (r+1)-jets differ
    KuoReport rep = detail::kuo_scan(g, f, r, static_cast<double>(r) - delta, spec, scan, thr, "kuo2");
    rep.delta = delta;
    out.push_back(std::move(rep));
  }
  return out;
}

}  // namespace stratcheck::regularity
