#include "subriem/measure_change.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace subriem;

namespace {

GPoint random_point(int n, RandomStream& rng, double scale = 1.0) {
  GPoint g(n);
  for (auto& v : g.x) v = scale * rng.normal();
  for (auto& v : g.z.entries()) v = scale * rng.normal();
  return g;
}

double max_gap(const GPoint& a, const GPoint& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.x.size(); ++i) m = std::max(m, std::abs(a.x[i] - b.x[i]));
  const auto za = a.z.entries(), zb = b.z.entries();
  for (std::size_t i = 0; i < za.size(); ++i) m = std::max(m, std::abs(za[i] - zb[i]));
  return m;
}

GPoint h3(double x1, double x2, double z) { return to_carnot(HPoint{x1, x2, z}); }

}  // namespace

TEST(Shift, MovesEndpointOntoTarget) {
  RandomStream rng(1);
  for (int n = 2; n <= 4; ++n)
    for (int t = 0; t < 50; ++t) {
      const GPoint g = random_point(n, rng), gt = random_point(n, rng);
      const double T = 0.5 + t % 3;
      const int K = default_shift_K(n);
      const auto xi = CoefficientStream::sample(n, T, 3 * K + 5, rng);
      const auto u = build_shift(g, gt, T, K, xi);
      EXPECT_LE(max_gap(carnot_endpoint(g, xi), carnot_endpoint(gt, shifted_stream(xi, u))), 1e-10) << n << "/" << t;
      EXPECT_EQ(u.support.size(), static_cast<std::size_t>(K + 1));
      EXPECT_NEAR(u.norm2, u.u.squaredNorm(), 1e-12);
    }
}

TEST(Shift, IgnoresTheCoordinatesItShifts) {
  RandomStream rng(2);
  const int n = 3, K = default_shift_K(n);
  const GPoint g = random_point(n, rng), gt = random_point(n, rng);
  auto xi = CoefficientStream::sample(n, 2.0, 3 * K + 1, rng);
  const auto u = build_shift(g, gt, 2.0, K, xi);
  Eigen::VectorXd f1(n);
  for (int i = 0; i < n; ++i) f1(i) = g.x[static_cast<std::size_t>(i)] - gt.x[static_cast<std::size_t>(i)];
  f1.normalize();
  xi.xi.col(0) += 0.7 * f1;
  for (int k = 1; k <= K; ++k)
    for (int i = 0; i < n; ++i) xi.xi(i, 3 * k) = rng.normal();
  const auto v = build_shift(g, gt, 2.0, K, xi);
  EXPECT_LE((u.u - v.u).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Shift, ZeroForIdenticalPoints) {
  RandomStream rng(3);
  const GPoint g = random_point(3, rng);
  const auto xi = CoefficientStream::sample(3, 1.0, 30, rng);
  const auto u = build_shift(g, g, 1.0, 7, xi);
  EXPECT_EQ(u.norm2, 0.0);
  EXPECT_EQ(log_density_R(u, xi), 0.0);
}

TEST(Shift, RejectsBadArguments) {
  RandomStream rng(4);
  const GPoint g(3);
  const auto xi = CoefficientStream::sample(3, 1.0, 22, rng);
  EXPECT_THROW(build_shift(g, g, 1.0, 4, xi), std::domain_error);
  EXPECT_THROW(build_shift(g, g, 1.0, 8, xi), std::invalid_argument);
  EXPECT_THROW(build_shift(g, g, 0.0, 7, xi), std::domain_error);
  EXPECT_THROW(build_shift(g, GPoint(2), 1.0, 7, xi), std::invalid_argument);
  const auto xi2 = CoefficientStream::sample(2, 1.0, 22, rng);
  EXPECT_THROW(build_shift(g, g, 1.0, 7, xi2), std::invalid_argument);
}

TEST(Shift, LinearAlongStraightLines) {
  RandomStream rng(5);
  const int n = 3, K = default_shift_K(n);
  const GPoint g = random_point(n, rng);
  const auto xi = CoefficientStream::sample(n, 1.5, 3 * K + 1, rng);
  Tangent h = Tangent::zero(n);
  h.hx = Eigen::Vector3d(0.3, -0.2, 0.5);
  h.hz.upper(0, 2) = 0.4;
  const auto u1 = build_shift(g, translate(g, h, 1.0), 1.5, K, xi);
  for (double a : {-2.0, 0.25, 3.0}) {
    const auto ua = build_shift(g, translate(g, h, a), 1.5, K, xi);
    EXPECT_LE((ua.u - a * u1.u).cwiseAbs().maxCoeff(), 1e-11 * std::max(1.0, std::abs(a)));
  }
}

TEST(Fields, HorizontalFieldIsLeftTranslation) {
  RandomStream rng(6);
  const GPoint g = random_point(3, rng);
  for (int i = 0; i < 3; ++i) {
    GPoint step(3);
    step.x[static_cast<std::size_t>(i)] = 0.37;
    EXPECT_LE(max_gap(translate(g, horizontal_field(g, i), 0.37), carnot_mul(g, step)), 1e-15);
  }
  const auto v = vertical_field(3, 0, 2);
  EXPECT_EQ(v.hz.upper(0, 2), 1.0);
  EXPECT_EQ(v.hx.norm(), 0.0);
  EXPECT_TRUE(Tangent::zero(4).is_zero());
  EXPECT_FALSE(v.is_zero());
}

TEST(Bismut, WeightIsLinearInDirection) {
  RandomStream rng(7);
  const int n = 3, K = default_shift_K(n);
  const GPoint g = random_point(n, rng);
  const auto xi = CoefficientStream::sample(n, 1.0, 3 * K + 1, rng);
  const Tangent a = horizontal_field(g, 1), b = vertical_field(n, 0, 1);
  Tangent c = Tangent::zero(n);
  c.hx = a.hx + 2.0 * b.hx;
  c.hz = a.hz;
  for (std::size_t i = 0; i < c.hz.entries().size(); ++i) c.hz.entries()[i] += 2.0 * b.hz.entries()[i];
  const double wa = bismut_weight(g, a, 1.0, K, xi).weight, wb = bismut_weight(g, b, 1.0, K, xi).weight;
  EXPECT_NEAR(bismut_weight(g, c, 1.0, K, xi).weight, wa + 2.0 * wb, 1e-10 * (1.0 + std::abs(wa) + std::abs(wb)));
}

TEST(Bismut, ZeroDirectionGivesZero) {
  const auto e = bismut_gradient(sin_perturbation(), GPoint(2), Tangent::zero(2), 1.0, 1000, McOptions{1, 1});
  EXPECT_EQ(e.mean, 0.0);
  EXPECT_EQ(e.std_error, 0.0);
}

TEST(Bismut, MatchesClosedFormHorizontalDerivative) {
  // d/da E[2 + sin(x1 + a + sqrt(T) Z)] = cos(x1) exp(-T/2).
  const double T = 1.0;
  for (int n : {2, 3}) {
    GPoint g(n);
    g.x[0] = 0.4;
    const auto e = bismut_gradient(sin_perturbation(), g, horizontal_field(g, 0), T, 100000,
                                   McOptions{static_cast<std::uint64_t>(10 + n), 1});
    const double exact = std::cos(0.4) * std::exp(-T / 2.0);
    EXPECT_TRUE(compare(e, exact, Relation::Equal).pass) << n << ": " << e.mean << " +- " << e.std_error;
  }
}

TEST(Bismut, AgreesWithFiniteDifferenceVertical) {
  const GPoint g = h3(0.2, -0.1, 0.3);
  const Tangent h = vertical_field(2, 0, 1);
  const auto f = gaussian_bump();
  const auto b = bismut_gradient(f, g, h, 1.0, 100000, McOptions{21, 1});
  const auto d = finite_diff_gradient(f, g, h, 1.0, 1e-3, 100000, McOptions{22, 1});
  EXPECT_TRUE(compare(b, d, Relation::Equal, 3.0, 1e-3).pass) << b.mean << " vs " << d.mean;
}

TEST(FiniteDiff, RejectsNonPositiveStep) {
  EXPECT_THROW(finite_diff_gradient(sin_perturbation(), GPoint(2), horizontal_field(GPoint(2), 0), 1.0, 0.0, 10,
                                    McOptions{}),
               std::domain_error);
}

TEST(Girsanov, NormalisationAndEntropy) {
  const auto r = girsanov_check(h3(0, 0, 0), h3(0.03, 0, 0.01), 1.0, 100000, McOptions{31, 1});
  EXPECT_TRUE(r.normalization.pass) << r.mean_R.mean << " +- " << r.mean_R.std_error;
  EXPECT_TRUE(r.entropy_identity.pass) << r.entropy_gap.mean << " +- " << r.entropy_gap.std_error;
  EXPECT_TRUE(r.entropy_bound_check.pass) << r.half_norm2.mean << " vs " << r.entropy_bound;
  EXPECT_TRUE(r.pass);
}

TEST(Girsanov, HarnackConstant) {
  const GPoint g = h3(0.5, 1.0, -2.0);
  EXPECT_EQ(log_harnack_constant(g, g, 3.0), 0.0);
  const GPoint gt = h3(1.5, 1.0, -2.0);
  // Pure horizontal offset of length 1 with zeta = 1/2 (x (.) x~).
  const double z = hs_norm(zeta(g, gt));
  const double want = 1.0 / 2.0 + entropy_constant(2) * (z * z + 2.0 / 3.0);
  EXPECT_NEAR(log_harnack_constant(g, gt, 1.0), want, 1e-12);
}

TEST(Transfer, ConstantAndSmoothFunctions) {
  const GPoint g = h3(0, 0, 0), gt = h3(0.025, -0.02, 0);
  for (const auto& name : {"constant", "sin-perturbation", "gaussian-bump"}) {
    const auto r = semigroup_transfer_check(catalog_function(name), g, gt, 1.0, 50000, McOptions{41, 1});
    EXPECT_TRUE(r.pass) << name << ": " << r.weighted.mean << " vs " << r.direct.mean;
  }
}

TEST(Inequalities, SuitePassesAndReportsEveryCheck) {
  const GPoint g = h3(0, 0, 0), gt = h3(0.5, 0, 0.2);
  InequalityOptions io;
  io.extra_p = {1.5, 4.0};
  const auto r = inequality_suite(sin_perturbation(), g, gt, horizontal_field(g, 0), 1.0, 50000, McOptions{51, 1}, {}, io);
  ASSERT_EQ(r.checks.size(), 7u);
  for (const auto& c : r.checks) EXPECT_TRUE(c.pass) << c.name << ": " << c.margin.mean << " +- " << c.margin.std_error;
  EXPECT_THROW(inequality_suite(constant_function(0.0), g, gt, horizontal_field(g, 0), 1.0, 10, McOptions{}),
               std::domain_error);
}

TEST(Inequalities, ReversePoincareFactorScaling) {
  const GPoint g = h3(0.3, 0.2, 0.0);
  const auto h = horizontal_field(g, 0);
  const double a = reverse_poincare_factor(g, h, 1.0), b = reverse_poincare_factor(g, h, 4.0);
  EXPECT_GT(a, 0.0);
  EXPECT_GT(a, b);
  EXPECT_EQ(reverse_poincare_factor(g, Tangent::zero(2), 1.0), 0.0);
}

TEST(GradientSpotcheck, WithinSupBounds) {
  std::vector<GPoint> pts{h3(0, 0, 0), h3(0.5, -0.3, 0.25)};
  const auto r = gradient_sup_spotcheck(coordinate_bump(), pts, 1.0, 20000, McOptions{61, 1}, true);
  ASSERT_EQ(r.points.size(), 2u);
  EXPECT_TRUE(r.pass);
  for (const auto& p : r.points) {
    EXPECT_LE(p.horizontal.mean, p.horizontal_bound);
    EXPECT_LE(p.vertical.mean, p.vertical_bound);
  }
}
