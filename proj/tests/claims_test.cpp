#include "stratcheck/claims.hpp"

#include <cmath>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "stratcheck/family.hpp"
#include "stratcheck/horn.hpp"
#include "stratcheck/poly.hpp"
#include "stratcheck/rng.hpp"
#include "stratcheck/subspace.hpp"

namespace sr = stratcheck::regularity;
namespace sp = stratcheck::poly;
namespace sh = stratcheck::horn;
namespace ss = stratcheck::subspace;
using sp::MapGerm;
using Vec = Eigen::VectorXd;

namespace {

MapGerm germ(const std::vector<std::string>& comps, int n) {
  std::vector<sp::Polynomial> ps;
  for (const auto& c : comps) ps.push_back(sp::parse_polynomial(c, n));
  return MapGerm(std::move(ps));
}

sr::ScanConfig small_scan(int shells, int samples, int t_grid, std::uint64_t seed) {
  sr::ScanConfig scan;
  scan.schedule = sh::ShellSchedule{0.1, 0.56234132519034907, shells};
  scan.samples = samples;
  scan.seed = seed;
  scan.t_grid = t_grid;
  return scan;
}

sr::DeformationFamily hyperbola_cubic_family() {
  return sr::build_family(germ({"x1^2 - x2^2"}, 2), germ({"x1^2 - x2^2 + x1^3"}, 2), 2);
}

sr::DeformationFamily trivial_hyperbola_family() {
  const MapGerm f = germ({"x1^2 - x2^2"}, 2);
  return sr::build_family(f, f, 2);
}

}  // namespace

TEST(JetDistance, GradientParallelToRadiusFails) {
  // grad(x1^2 + x2^2) = 2x: the sampled distance ratio collapses to zero and
  // the report carries a witness.
  const MapGerm f = germ({"x1^2 + x2^2"}, 2);
  const sr::JetDistanceReport rep = sr::jet_distance_check(f, 2, sh::HornSpec{2, 1.0, 1.0}, 0.2, small_scan(7, 200, 1, 2));
  EXPECT_EQ(rep.verdict, sr::Verdict::fails);
  EXPECT_FALSE(rep.witnesses.empty());
  for (const auto& row : rep.rows) {
    ASSERT_FALSE(row.empty);
    EXPECT_LE(row.min_ratio, 1e-12);
    EXPECT_EQ(row.argmin.size(), 2);
  }
}

TEST(JetDistance, HyperbolaOnItsHornStaysNearOrthogonal) {
  // On |x1^2 - x2^2| <= 0.5 |x|^2 the angle between x and grad z satisfies
  // |cos| = |z| / |x|^2 <= 1/2, so the ratio is at least sqrt(3)/2.
  const MapGerm f = germ({"x1^2 - x2^2"}, 2);
  const sr::JetDistanceReport rep = sr::jet_distance_check(f, 2, sh::HornSpec{2, 0.5, 1.0}, 0.2, small_scan(9, 300, 1, 3));
  EXPECT_EQ(rep.verdict, sr::Verdict::holds);
  EXPECT_TRUE(rep.witnesses.empty());
  const double bound = std::sqrt(3.0) / 2.0;
  for (const auto& row : rep.rows) {
    ASSERT_FALSE(row.empty);
    EXPECT_GE(row.min_ratio, bound - 1e-9);
    EXPECT_LE(row.min_ratio, 0.88);  // the horn boundary is actually reached
  }
  EXPECT_DOUBLE_EQ(rep.searched_radius, rep.rows.front().radius);
}

TEST(JetDistance, RatioNeverExceedsOne) {
  // d(x, V) <= |x| because 0 lies in every subspace.
  for (const auto& text : {"x1^2 - x2^2", "x1*x2", "x1^2 + x2^2"}) {
    const MapGerm f = germ({text}, 2);
    const sr::JetDistanceReport rep =
        sr::jet_distance_check(f, 2, sh::HornSpec{2, 1.0, 1.0}, 0.5, small_scan(5, 150, 1, 4));
    for (const auto& row : rep.rows) {
      if (row.empty) continue;
      EXPECT_LE(row.min_ratio, 1.0 + 1e-12);
    }
  }
}

TEST(JetDistance, EnforcesMatchingHornDegree) {
  const MapGerm f = germ({"x1^2 - x2^2"}, 2);
  EXPECT_THROW(sr::jet_distance_check(f, 2, sh::HornSpec{3, 1.0, 1.0}, 0.2, small_scan(5, 100, 1, 5)), sh::HornError);
}

TEST(BasisStability, TrivialDeformationOfItsOwnJetIsExactlyOne) {
  // g = f and f = z: grad f_t == grad z bitwise for every t, so every
  // elimination norm ratio is exactly 1.
  const sr::DeformationFamily fam = trivial_hyperbola_family();
  const sr::BasisStabilityReport rep = sr::basis_stability_check(fam, sh::HornSpec{2, 0.5, 1.0}, 0.2, small_scan(7, 150, 5, 6));
  EXPECT_EQ(rep.verdict, sr::Verdict::holds);
  EXPECT_TRUE(rep.witnesses.empty());
  for (const auto& row : rep.rows) {
    ASSERT_FALSE(row.empty);
    EXPECT_EQ(row.min_ratio, 1.0);
    EXPECT_EQ(row.max_ratio, 1.0);
    EXPECT_GT(row.samples, 0);
  }
}

TEST(BasisStability, CubicTailDriftVanishesWithTheRadius) {
  // f carries a cubic tail above its 2-jet z: the norm ratio |N_t| / |N_z|
  // deviates from 1 by O(rho) and tightens toward 1 on small shells.
  const MapGerm f = germ({"x1^2 - x2^2 + x1^3"}, 2);
  const sr::DeformationFamily fam = sr::build_family(f, f, 2);
  const sr::BasisStabilityReport rep = sr::basis_stability_check(fam, sh::HornSpec{2, 0.5, 1.0}, 0.2, small_scan(13, 150, 3, 7));
  EXPECT_EQ(rep.verdict, sr::Verdict::holds);
  for (const auto& row : rep.rows) {
    ASSERT_FALSE(row.empty);
    EXPECT_GE(row.min_ratio, 1.0 - 3.0 * row.radius);
    EXPECT_LE(row.max_ratio, 1.0 + 3.0 * row.radius);
  }
  const auto& last = rep.rows.back();
  EXPECT_NEAR(last.min_ratio, 1.0, 3.0 * last.radius);
  EXPECT_LE(std::abs(last.max_ratio - 1.0), 3.0 * last.radius);
}

TEST(BasisStability, DeformedHyperbolaHolds) {
  const sr::DeformationFamily fam = hyperbola_cubic_family();
  const sr::BasisStabilityReport rep = sr::basis_stability_check(fam, sh::HornSpec{2, 0.5, 1.0}, 0.2, small_scan(9, 150, 5, 8));
  EXPECT_EQ(rep.verdict, sr::Verdict::holds);
  ASSERT_FALSE(rep.t_grid.empty());
  EXPECT_DOUBLE_EQ(rep.t_grid.front(), 0.0);
  EXPECT_DOUBLE_EQ(rep.t_grid.back(), 1.0);
}

TEST(DeformedDistance, HalfBoundOnTheDeformedHyperbola) {
  const sr::DeformationFamily fam = hyperbola_cubic_family();
  const sr::DeformedDistanceReport rep =
      sr::deformed_distance_check(fam, sh::HornSpec{2, 0.5, 1.0}, 0.2, small_scan(13, 200, 7, 9), true);
  EXPECT_EQ(rep.verdict, sr::Verdict::holds);
  EXPECT_FALSE(rep.vacuous);
  EXPECT_TRUE(rep.note.empty());
  EXPECT_DOUBLE_EQ(rep.floor, 0.4);  // half bound with pinned slack
  for (const auto& row : rep.rows) {
    ASSERT_FALSE(row.empty);
    EXPECT_GE(row.min_dt_ratio, 0.7);
    if (row.radius <= 0.01) {
      EXPECT_GE(row.min_dt_ratio, 0.8);
    }
    EXPECT_LE(row.max_v_ratio, 0.6);
    EXPECT_LE(row.max_vt_ratio, 0.6);
    // |d - d_t| <= |v_t - v| <= |v_t| + |v| holds sample-wise up to fp noise.
    EXPECT_LE(row.max_chain_defect, 1e-12);
    // The elimination-basis projection agrees with the orthogonal projection.
    EXPECT_LE(row.max_proj_dev, 1e-9);
    EXPECT_GE(row.max_ddiff_ratio, 0.0);
    EXPECT_LE(row.max_ddiff_ratio, row.max_vdiff_ratio + 1e-12);
  }
}

TEST(DeformedDistance, TrivialDeformationHasIdenticalSpans) {
  // g = f and f = z: V_{t,x} == V_x bitwise, so v_t = v and d_t = d exactly.
  const sr::DeformationFamily fam = trivial_hyperbola_family();
  const sr::DeformedDistanceReport rep =
      sr::deformed_distance_check(fam, sh::HornSpec{2, 0.5, 1.0}, 0.2, small_scan(7, 150, 5, 10), true);
  EXPECT_EQ(rep.verdict, sr::Verdict::holds);
  for (const auto& row : rep.rows) {
    ASSERT_FALSE(row.empty);
    EXPECT_EQ(row.max_ddiff_ratio, 0.0);
    EXPECT_EQ(row.max_vdiff_ratio, 0.0);
    EXPECT_EQ(row.max_chain_defect, 0.0);
  }
}

TEST(DeformedDistance, VacuousWithoutAPassingKuoVerdict) {
  // grad(x1^2) dies on the x2-axis: measurements still get emitted, but the
  // claim is flagged vacuous when the Kuo premise failed.
  const MapGerm f = germ({"x1^2"}, 2);
  const sr::DeformationFamily fam = sr::build_family(f, f, 2);
  const sr::DeformedDistanceReport rep =
      sr::deformed_distance_check(fam, sh::HornSpec{2, 1.0, 1.0}, 0.2, small_scan(5, 100, 3, 11), false);
  EXPECT_TRUE(rep.vacuous);
  EXPECT_FALSE(rep.note.empty());
  EXPECT_FALSE(rep.rows.empty());
  // The axis germ genuinely violates the half bound: d(x, span{e1}) = |x2|
  // reaches 0 near the axis.
  EXPECT_EQ(rep.verdict, sr::Verdict::fails);
}

TEST(RadialBound, QuarterBoundOnTheDeformedHyperbola) {
  const sr::DeformationFamily fam = hyperbola_cubic_family();
  const sr::RadialBoundReport rep = sr::radial_bound_check(fam, sh::HornSpec{2, 0.5, 1.0}, small_scan(13, 200, 7, 12), true);
  EXPECT_EQ(rep.verdict, sr::Verdict::holds);
  EXPECT_FALSE(rep.vacuous);
  EXPECT_DOUBLE_EQ(rep.floor, 0.2);  // quarter bound with pinned slack
  // The t-grid is bracketed by the parameter-interval endpoints.
  EXPECT_DOUBLE_EQ(rep.t_grid.front(), -0.1);
  EXPECT_DOUBLE_EQ(rep.t_grid.back(), 1.1);
  for (const auto& row : rep.rows) {
    ASSERT_FALSE(row.empty);
    EXPECT_GE(row.min_w_ratio, 0.25);
    EXPECT_GE(row.min_gap, 0.25);
    // Two routes to the same distance: projection residual vs gap SVD.
    EXPECT_LE(std::abs(row.min_w_ratio - row.min_gap), 1e-9);
    // |L_j| / |M_j| = sqrt(1 + diff^2 / |grad|^2) >= 1, tending to 1.
    EXPECT_GE(row.min_est_ratio, 1.0 - 1e-12);
    EXPECT_LE(row.max_est_ratio, 1.0 + 1e-3);
    EXPECT_LE(row.max_proj_dev, 1e-9);
    EXPECT_LE(row.max_u_norm_ratio, 0.75);
    EXPECT_LE(row.max_w_norm_ratio, 0.75);
  }
}

TEST(RadialBound, TrivialDeformationCollapsesTheLift) {
  // diff = 0 makes U = W exactly: both elimination bases coincide and the
  // lifted distance equals the unlifted one.
  const sr::DeformationFamily fam = trivial_hyperbola_family();
  const sr::RadialBoundReport rep = sr::radial_bound_check(fam, sh::HornSpec{2, 0.5, 1.0}, small_scan(7, 150, 5, 13), true);
  EXPECT_EQ(rep.verdict, sr::Verdict::holds);
  for (const auto& row : rep.rows) {
    ASSERT_FALSE(row.empty);
    EXPECT_EQ(row.min_w_ratio, row.min_u_ratio);
    EXPECT_EQ(row.min_est_ratio, 1.0);
    EXPECT_EQ(row.max_est_ratio, 1.0);
    EXPECT_LE(std::abs(row.min_gap - row.min_w_ratio), 1e-9);
  }
}

TEST(RadialBound, LiftedEliminationNormsMatchTheUnliftedOnes) {
  // The x-block columns carry a zero t-coordinate, so elimination in the
  // lifted space runs the same arithmetic as in R^n: |M_j| == |N_{t,j}|.
  const MapGerm f = germ({"x1 + x2^2", "x2 + x1^2"}, 2);
  const MapGerm g = germ({"x1 + x2^2 + x1^3", "x2 + x1^2 - x2^3"}, 2);
  const sr::DeformationFamily fam = sr::build_family(f, g, 1);
  stratcheck::CounterRng rng(17);
  for (int i = 0; i < 50; ++i) {
    const Vec x = 0.05 * rng.sphere_point(2, static_cast<std::uint64_t>(i));
    const double t = rng.uniform(1000 + static_cast<std::uint64_t>(i));
    const Eigen::MatrixXd gx = fam.grad_x_ft(x, t);
    Eigen::MatrixXd u_cols = Eigen::MatrixXd::Zero(3, 2);
    u_cols.topRows(2) = gx;
    const ss::Frame m_basis = ss::elimination_basis(ss::Frame(u_cols));
    const ss::Frame nt_basis = ss::elimination_basis(ss::Frame(gx));
    ASSERT_EQ(m_basis.count(), nt_basis.count());
    for (int j = 0; j < m_basis.count(); ++j)
      EXPECT_DOUBLE_EQ(m_basis.vector(j).norm(), nt_basis.vector(j).norm());
  }
}

TEST(Claims, ReportsAreDeterministic) {
  const sr::DeformationFamily fam = hyperbola_cubic_family();
  const sr::ScanConfig scan = small_scan(7, 150, 5, 14);
  const auto a = sr::radial_bound_check(fam, sh::HornSpec{2, 0.5, 1.0}, scan, true);
  const auto b = sr::radial_bound_check(fam, sh::HornSpec{2, 0.5, 1.0}, scan, true);
  ASSERT_EQ(a.rows.size(), b.rows.size());
  for (std::size_t k = 0; k < a.rows.size(); ++k) {
    EXPECT_EQ(a.rows[k].min_w_ratio, b.rows[k].min_w_ratio);
    EXPECT_EQ(a.rows[k].min_gap, b.rows[k].min_gap);
    EXPECT_EQ(a.rows[k].argmin, b.rows[k].argmin);
  }
}
