#include "stratcheck/kuo.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "stratcheck/horn.hpp"
#include "stratcheck/poly.hpp"
#include "stratcheck/rng.hpp"

namespace sr = stratcheck::regularity;
namespace sp = stratcheck::poly;
namespace sh = stratcheck::horn;
using sp::MapGerm;
using Vec = Eigen::VectorXd;

namespace {

MapGerm germ(const std::string& text, int n) { return MapGerm({sp::parse_polynomial(text, n)}); }

sr::ScanConfig small_scan(int shells, int samples, std::uint64_t seed) {
  sr::ScanConfig scan;
  scan.schedule = sh::ShellSchedule{0.1, 0.56234132519034907, shells};
  scan.samples = samples;
  scan.seed = seed;
  return scan;
}

}  // namespace

TEST(KappaFunctional, SingleComponentReducesToGradientNorm) {
  const MapGerm f = germ("x1*x2 + x2^3", 2);
  stratcheck::CounterRng rng(3);
  for (int i = 0; i < 100; ++i) {
    const Vec x = 0.5 * rng.sphere_point(2, static_cast<std::uint64_t>(i));
    const double kappa = sr::detail::kappa_of_gradients(f, x);
    const double gn = f.gradients_at(x).col(0).norm();
    EXPECT_LE(std::abs(kappa - gn), 1e-12 * std::max(1.0, gn));
  }
}

TEST(KuoCheck, SumOfSquaresHoldsWithConstantNearTwo) {
  // |grad(x1^2 + x2^2)| = 2|x|, so the per-shell minimum is 2 rho and the
  // constant against rho^{r-1} is exactly 2.
  const MapGerm f = germ("x1^2 + x2^2", 2);
  const sh::HornSpec spec{2, 1.0, 1.0};
  const sr::KuoReport rep = sr::kuo_check(f, 2, spec, small_scan(13, 400, 1));
  EXPECT_EQ(rep.verdict, sr::Verdict::holds);
  EXPECT_NEAR(rep.C_est, 2.0, 0.05 * 2.0);
  EXPECT_NEAR(rep.slope, 1.0, 0.05);
  EXPECT_EQ(rep.exponent, 1.0);
  for (const auto& row : rep.scan.rows) {
    ASSERT_FALSE(row.empty);
    EXPECT_LE(std::abs(row.min_value - 2.0 * row.radius), 1e-9 * row.radius);
  }
}

TEST(KuoCheck, DegenerateAxisGermFails) {
  // grad(x1^2) = (2 x1, 0) vanishes on the x2-axis, which lies inside the
  // horn: shell minima collapse far below any positive constant.
  const MapGerm f = germ("x1^2", 2);
  const sh::HornSpec spec{2, 1.0, 1.0};
  const sr::KuoReport rep = sr::kuo_check(f, 2, spec, small_scan(13, 400, 1));
  EXPECT_EQ(rep.verdict, sr::Verdict::fails);
  EXPECT_LT(rep.C_est, 1e-3);
  for (const auto& row : rep.scan.rows) {
    ASSERT_FALSE(row.empty);
    EXPECT_LE(row.min_value, 1e-6 * row.radius);
    EXPECT_LE(row.min_value, row.raw_min);  // refinement never loses to raw sampling
  }
}

TEST(KuoCheck, LinearGermIsExact) {
  // |grad x1| = 1 everywhere: C_est = 1 against rho^0 with zero slope.
  const MapGerm f = germ("x1", 2);
  const sh::HornSpec spec{1, 1.0, 1.0};
  const sr::KuoReport rep = sr::kuo_check(f, 1, spec, small_scan(9, 200, 5));
  EXPECT_EQ(rep.verdict, sr::Verdict::holds);
  EXPECT_DOUBLE_EQ(rep.C_est, 1.0);
  EXPECT_DOUBLE_EQ(rep.slope, 0.0);
}

TEST(KuoCheck, ThrowsWhenHornMissesEveryShell) {
  // |f| = |x|^2 > 0.5 |x|^2: membership fails at every point of every shell.
  const MapGerm f = germ("x1^2 + x2^2", 2);
  const sh::HornSpec spec{2, 0.5, 1.0};
  EXPECT_THROW(sr::kuo_check(f, 2, spec, small_scan(5, 100, 1)), sr::EmptyHornError);
}

TEST(KuoCheck, EnforcesMatchingHornDegree) {
  const MapGerm f = germ("x1^2 + x2^2", 2);
  const sh::HornSpec spec{3, 1.0, 1.0};
  EXPECT_THROW(sr::kuo_check(f, 2, spec, small_scan(5, 100, 1)), sh::HornError);
}

TEST(KuoCheck, DeterministicForFixedSeed) {
  const MapGerm f = germ("x1^2 - x2^2", 2);
  const sh::HornSpec spec{2, 0.5, 1.0};
  const sr::KuoReport a = sr::kuo_check(f, 2, spec, small_scan(7, 150, 77));
  const sr::KuoReport b = sr::kuo_check(f, 2, spec, small_scan(7, 150, 77));
  EXPECT_EQ(a.C_est, b.C_est);
  EXPECT_EQ(a.slope, b.slope);
  ASSERT_EQ(a.scan.rows.size(), b.scan.rows.size());
  for (std::size_t k = 0; k < a.scan.rows.size(); ++k) {
    EXPECT_EQ(a.scan.rows[k].min_value, b.scan.rows[k].min_value);
    EXPECT_EQ(a.scan.rows[k].argmin, b.scan.rows[k].argmin);
  }
}

TEST(SecondKuoCheck, HyperbolaAgainstItself) {
  // Perturbation g = f: the deeper horn is a thin wedge around the cone
  // x1^2 = x2^2, where |grad f| = 2|x| still, so minima sit at 2 rho and
  // C_est against rho^{r - delta} = rho^{1.5} is 2 rho0^{-0.5} at the
  // largest shell.
  const MapGerm f = germ("x1^2 - x2^2", 2);
  const sh::HornSpec spec{3, 0.5, 1.0};
  const auto reports = sr::second_kuo_check(f, {f}, 2, 0.5, spec, small_scan(9, 800, 3));
  ASSERT_EQ(reports.size(), 1u);
  const sr::KuoReport& rep = reports[0];
  EXPECT_EQ(rep.verdict, sr::Verdict::holds);
  EXPECT_EQ(rep.delta, 0.5);
  EXPECT_EQ(rep.exponent, 1.5);
  double expected = std::numeric_limits<double>::infinity();
  for (const auto& row : rep.scan.rows)
    if (!row.empty) expected = std::min(expected, 2.0 * row.radius / std::pow(row.radius, 1.5));
  EXPECT_NEAR(rep.C_est, expected, 1e-6 * expected);
}

TEST(SecondKuoCheck, QuarticPerturbationOfSumOfSquares) {
  // g = f + x1^4 matches the 3-jet of f = x1^2 + x2^2; the order-3 horn
  // around g only reaches the outermost shells, where |grad f| = 2|x|
  // comfortably beats rho^{1.5}.
  const MapGerm f = germ("x1^2 + x2^2", 2);
  const MapGerm g = germ("x1^2 + x2^2 + x1^4", 2);
  const sh::HornSpec spec{3, 20.0, 1.0};
  const auto reports = sr::second_kuo_check(f, {g}, 2, 0.5, spec, small_scan(9, 400, 3));
  ASSERT_EQ(reports.size(), 1u);
  EXPECT_EQ(reports[0].verdict, sr::Verdict::holds);
  EXPECT_FALSE(reports[0].note.empty());  // deeper shells are empty and noted
  EXPECT_GE(reports[0].C_est, 1.0);
}

TEST(SecondKuoCheck, ValidatesArguments) {
  const MapGerm f = germ("x1^2 + x2^2", 2);
  const MapGerm mismatched = germ("x1^2 + x2^2 + x1^3", 2);
  const sh::HornSpec deep{3, 20.0, 1.0};
  const sr::ScanConfig scan = small_scan(5, 100, 1);
  // Horn degree must be r+1.
  EXPECT_THROW(sr::second_kuo_check(f, {f}, 2, 0.5, sh::HornSpec{2, 1.0, 1.0}, scan), sh::HornError);
  // delta must lie in (0, r).
  EXPECT_THROW(sr::second_kuo_check(f, {f}, 2, 0.0, deep, scan), std::invalid_argument);
  EXPECT_THROW(sr::second_kuo_check(f, {f}, 2, 2.0, deep, scan), std::invalid_argument);
  // Perturbations must match the (r+1)-jet.
  EXPECT_THROW(sr::second_kuo_check(f, {mismatched}, 2, 0.5, deep, scan), sp::JetMismatchError);
}
