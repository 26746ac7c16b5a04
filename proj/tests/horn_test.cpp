#include "stratcheck/horn.hpp"

#include <cmath>

#include <gtest/gtest.h>

#include "stratcheck/subspace.hpp"

namespace sh = stratcheck::horn;
namespace sp = stratcheck::poly;
using sp::MapGerm;
using Vec = Eigen::VectorXd;

namespace {

MapGerm germ(const std::string& text, int n) { return MapGerm({sp::parse_polynomial(text, n)}); }

}  // namespace

TEST(HornContains, FullSphereWhenNormEqualsRadiusSquared) {
  const MapGerm f = germ("x1^2 + x2^2", 2);
  const sh::HornSpec spec{2, 1.0, 1.0};
  EXPECT_TRUE(sh::horn_contains(f, spec, Vec{{0.3, 0.4}}));
  EXPECT_TRUE(sh::horn_contains(f, spec, Vec{{-0.7, 0.1}}));
  EXPECT_TRUE(sh::horn_contains(f, spec, Vec{{0.001, 0.0}}));
}

TEST(HornContains, AxisEvaluation) {
  const MapGerm f = germ("x1", 2);
  const sh::HornSpec spec{2, 0.1, 5.0};
  EXPECT_FALSE(sh::horn_contains(f, spec, Vec{{0.01, 0.0}}));
  EXPECT_FALSE(sh::horn_contains(f, spec, Vec{{0.5, 0.0}}));
  EXPECT_TRUE(sh::horn_contains(f, spec, Vec{{0.0, 0.01}}));
  EXPECT_TRUE(sh::horn_contains(f, spec, Vec{{0.0, 0.5}}));
}

TEST(HornContains, RejectsOriginAndCap) {
  const MapGerm f = germ("x1", 2);
  const sh::HornSpec spec{2, 0.1, 1.0};
  EXPECT_THROW(sh::horn_contains(f, spec, Vec::Zero(2)), sh::HornError);
  EXPECT_THROW(sh::horn_contains(f, spec, Vec{{2.0, 0.0}}), sh::HornError);
}

TEST(HornContains, ScaleCoherentForHomogeneousGerms) {
  // Homogeneous degree-r germs decide membership by direction alone.
  const MapGerm f = germ("x1*x2", 2);
  const sh::HornSpec spec{2, 0.3, 10.0};
  stratcheck::CounterRng rng(5);
  for (int i = 0; i < 200; ++i) {
    const Vec u = rng.sphere_point(2, static_cast<std::uint64_t>(i));
    const bool base = sh::horn_contains(f, spec, Vec(0.5 * u));
    for (double rho : {1e-4, 1e-2, 1.0, 5.0})
      EXPECT_EQ(sh::horn_contains(f, spec, Vec(rho * u)), base);
  }
}

TEST(SampleShell, FullSphereRetainsEveryPoint) {
  const MapGerm f = germ("x1^2 + x2^2", 2);
  const sh::HornSpec spec{2, 1.0, 1.0};
  const sh::Shell shell = sh::sample_shell(f, spec, 0.01, 300, 42);
  EXPECT_EQ(shell.points.size(), 300u);
  for (const auto& x : shell.points) {
    EXPECT_LE(std::abs(x.norm() - 0.01), 1e-12 * 0.01);
    EXPECT_TRUE(sh::horn_contains(f, spec, x));
  }
}

TEST(SampleShell, DescentPullsPointsIntoANarrowHorn) {
  const MapGerm f = germ("x1", 2);
  const sh::HornSpec spec{2, 0.1, 1.0};
  const double rho = 0.01;
  const sh::Shell shell = sh::sample_shell(f, spec, rho, 400, 7);
  EXPECT_GE(shell.points.size(), 350u);
  for (const auto& x : shell.points) {
    EXPECT_TRUE(sh::horn_contains(f, spec, x));
    EXPECT_LE(std::abs(x[0]), 0.1 * rho * rho * (1.0 + 1e-9));
  }
}

TEST(SampleShell, DeterministicInSeed) {
  const MapGerm f = germ("x1", 2);
  const sh::HornSpec spec{2, 0.1, 1.0};
  const sh::Shell a = sh::sample_shell(f, spec, 0.01, 100, 99);
  const sh::Shell b = sh::sample_shell(f, spec, 0.01, 100, 99);
  ASSERT_EQ(a.points.size(), b.points.size());
  for (std::size_t i = 0; i < a.points.size(); ++i)
    EXPECT_EQ((a.points[i] - b.points[i]).cwiseAbs().maxCoeff(), 0.0);
  const sh::Shell c = sh::sample_shell(f, spec, 0.01, 100, 100);
  bool all_same = a.points.size() == c.points.size();
  if (all_same)
    for (std::size_t i = 0; i < a.points.size() && all_same; ++i)
      all_same = (a.points[i] - c.points[i]).cwiseAbs().maxCoeff() == 0.0;
  EXPECT_FALSE(all_same);
}

TEST(SampleShell, EmptyWhenHornMissesTheSphere) {
  const MapGerm f = germ("x1^2 + x2^2", 2);
  const sh::HornSpec spec{2, 0.5, 1.0};  // |f| = |x|^2 > 0.5 |x|^2 everywhere
  const sh::Shell shell = sh::sample_shell(f, spec, 0.05, 50, 1);
  EXPECT_TRUE(shell.points.empty());
}

TEST(ShellMin, ConstantFunctional) {
  const MapGerm f = germ("x1^2 + x2^2", 2);
  const sh::Shell shell = sh::sample_shell(f, {2, 1.0, 1.0}, 0.5, 50, 3);
  const auto [v, arg] = sh::shell_min([](const Vec&) { return 4.25; }, shell, 3);
  EXPECT_DOUBLE_EQ(v, 4.25);
  EXPECT_EQ(arg.size(), 2);
}

TEST(ShellMin, FirstCoordinateOnFullCircle) {
  const MapGerm f = germ("x1^2 + x2^2", 2);
  const sh::HornSpec spec{2, 1.0, 2.0};
  const sh::Shell shell = sh::sample_shell(f, spec, 1.0, 500, 11);
  ASSERT_EQ(shell.points.size(), 500u);
  const auto [v, arg] = sh::shell_min([](const Vec& x) { return x[0]; }, shell, 4);
  EXPECT_NEAR(v, -1.0, 1e-6);
  EXPECT_NEAR(arg[0], -1.0, 1e-5);
}

TEST(ShellMin, GradientNormFunctionalIsExactOnSpheres) {
  const MapGerm f = germ("x1^2 + x2^2", 2);
  const double rho = 0.02;
  const sh::Shell shell = sh::sample_shell(f, {2, 1.0, 1.0}, rho, 200, 13);
  auto kappa = [&f](const Vec& x) { return stratcheck::subspace::kuo_distance(stratcheck::subspace::Frame(f.gradients_at(x))); };
  const auto [v, arg] = sh::shell_min(kappa, shell, 3);
  EXPECT_NEAR(v, 2.0 * rho, 1e-6 * rho);
}

TEST(ShellMin, NeverExceedsRawSampleMinimum) {
  const MapGerm f = germ("x1^2 - x2^2", 2);
  const sh::HornSpec spec{2, 0.5, 1.0};
  const sh::Shell shell = sh::sample_shell(f, spec, 0.1, 300, 17);
  ASSERT_FALSE(shell.points.empty());
  auto fn = [](const Vec& x) { return x[0] * x[0] * x[0] - x[1] + 0.3 * x[0]; };
  double raw = std::numeric_limits<double>::infinity();
  for (const auto& x : shell.points) raw = std::min(raw, fn(x));
  const auto [v, arg] = sh::shell_min(fn, shell, 5);
  EXPECT_LE(v, raw);
}

TEST(ShellMin, ReportsNonFiniteValues) {
  const MapGerm f = germ("x1^2 + x2^2", 2);
  const sh::Shell shell = sh::sample_shell(f, {2, 1.0, 1.0}, 0.5, 20, 19);
  auto bad = [](const Vec& x) { return x[0] > -2.0 ? std::numeric_limits<double>::quiet_NaN() : 0.0; };
  EXPECT_THROW(sh::shell_min(bad, shell, 2), sh::NonFiniteError);
  EXPECT_THROW(sh::shell_min([](const Vec&) { return 0.0; }, sh::Shell{}, 1), sh::HornError);
}

TEST(ShellSchedule, GeometricDecay) {
  const sh::ShellSchedule sched;
  const auto radii = sched.radii();
  ASSERT_EQ(radii.size(), 17u);
  EXPECT_DOUBLE_EQ(radii[0], 0.1);
  EXPECT_NEAR(radii[16], 1e-5, 1e-9);
  for (std::size_t k = 1; k < radii.size(); ++k) {
    EXPECT_LT(radii[k], radii[k - 1]);
    EXPECT_NEAR(radii[k] / radii[k - 1], sched.gamma, 1e-12);
  }
  sh::ShellSchedule bad;
  bad.gamma = 1.5;
  EXPECT_THROW(bad.radii(), sh::HornError);
}

TEST(ScanMin, DeterministicAndConsistent) {
  const MapGerm f = germ("x1^2 - x2^2", 2);
  const sh::HornSpec spec{2, 0.5, 1.0};
  sh::ShellSchedule sched;
  sched.count = 6;
  auto kappa = [&f](const Vec& x) { return stratcheck::subspace::kuo_distance(stratcheck::subspace::Frame(f.gradients_at(x))); };
  const sh::ShellScan a = sh::scan_min(f, spec, sched, 120, 23, kappa, 3);
  const sh::ShellScan b = sh::scan_min(f, spec, sched, 120, 23, kappa, 3);
  ASSERT_EQ(a.rows.size(), 6u);
  for (std::size_t k = 0; k < a.rows.size(); ++k) {
    EXPECT_FALSE(a.rows[k].empty);
    EXPECT_EQ(a.rows[k].min_value, b.rows[k].min_value);
    EXPECT_EQ((a.rows[k].argmin - b.rows[k].argmin).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_LE(a.rows[k].min_value, a.rows[k].raw_min);
    EXPECT_TRUE(sh::horn_contains(f, spec, a.rows[k].argmin));
  }
}

TEST(ScanMin, FlagsEmptyShells) {
  const MapGerm f = germ("x1^2 + x2^2", 2);
  const sh::HornSpec spec{2, 0.5, 1.0};
  sh::ShellSchedule sched;
  sched.count = 4;
  const sh::ShellScan scan = sh::scan_min(f, spec, sched, 40, 29, [](const Vec&) { return 1.0; }, 2);
  EXPECT_TRUE(scan.all_empty());
  for (const auto& row : scan.rows) {
    EXPECT_TRUE(row.empty);
    EXPECT_TRUE(std::isnan(row.min_value));
    EXPECT_EQ(row.accepted, 0);
  }
}

TEST(InclusionCheck, IdentityInclusion) {
  const MapGerm f = germ("x1*x2", 2);
  const auto res = sh::horn_inclusion_check(f, f, 2, 0.3, 0.3, 0.5, 40, 31);
  EXPECT_TRUE(res.included);
  EXPECT_FALSE(res.witness.has_value());
  EXPECT_GT(res.tested_points, 0);
}

TEST(InclusionCheck, JetTailAbsorbedByWiderHorn) {
  const MapGerm f = germ("x1^2", 2);
  const MapGerm ft = germ("x1^2 + x1^3", 2);
  const auto res = sh::horn_inclusion_check(f, ft, 2, 0.2, 0.4, 0.1, 60, 37);
  EXPECT_TRUE(res.included);
}

TEST(InclusionCheck, ReportsWitnessOnViolation) {
  const MapGerm f = germ("x1", 2);
  const MapGerm ft = germ("x2", 2);
  const auto res = sh::horn_inclusion_check(f, ft, 2, 0.1, 0.1, 0.5, 60, 41);
  EXPECT_FALSE(res.included);
  ASSERT_TRUE(res.witness.has_value());
  const Vec& w = *res.witness;
  EXPECT_GT(ft.eval(w).squaredNorm(), 0.01 * std::pow(w.squaredNorm(), 2));
}

TEST(InclusionCheck, ValidatesWidths) {
  const MapGerm f = germ("x1", 2);
  EXPECT_THROW(sh::horn_inclusion_check(f, f, 2, 0.4, 0.2, 0.5, 10, 1), sh::HornError);
  EXPECT_THROW(sh::horn_inclusion_check(f, f, 2, 0.0, 0.2, 0.5, 10, 1), sh::HornError);
}
