#include "subriem/group.hpp"
#include "subriem/mc.hpp"

#include <boost/multiprecision/cpp_int.hpp>
#include <gtest/gtest.h>

#include <cmath>
#include <vector>

using namespace subriem;
using Q = boost::multiprecision::cpp_rational;

namespace {

CarnotElement<Q> random_rational(int n, RandomStream& rng) {
  CarnotElement<Q> g(n);
  auto r = [&] { return Q(static_cast<int>(rng.uniform() * 41) - 20, 1 + static_cast<int>(rng.uniform() * 7)); };
  for (auto& v : g.x) v = r();
  for (auto& v : g.z.entries()) v = r();
  return g;
}

GPoint random_point(int n, RandomStream& rng) {
  GPoint g(n);
  for (auto& v : g.x) v = rng.normal();
  for (auto& v : g.z.entries()) v = rng.normal();
  return g;
}

double rel_diff(const GPoint& a, const GPoint& b) {
  double d = 0.0, s = 1.0;
  for (std::size_t i = 0; i < a.x.size(); ++i) {
    d = std::max(d, std::abs(a.x[i] - b.x[i]));
    s = std::max(s, std::abs(a.x[i]));
  }
  for (std::size_t i = 0; i < a.z.size(); ++i) {
    d = std::max(d, std::abs(a.z.entries()[i] - b.z.entries()[i]));
    s = std::max(s, std::abs(a.z.entries()[i]));
  }
  return d / s;
}

}  // namespace

TEST(Heisenberg, IdentityLeavesPointUnchanged) {
  const HPoint r = heis_mul(HPoint{0, 0, 0}, HPoint{1, 2, 3});
  EXPECT_EQ(r.x1, 1.0);
  EXPECT_EQ(r.x2, 2.0);
  EXPECT_EQ(r.z, 3.0);
}

TEST(Heisenberg, ProductOfBasisVectors) {
  const HPoint r = heis_mul(HPoint{1, 0, 0}, HPoint{0, 1, 0});
  EXPECT_EQ(r.x1, 1.0);
  EXPECT_EQ(r.x2, 1.0);
  EXPECT_EQ(r.z, 0.5);
}

TEST(Heisenberg, InverseCancels) {
  const HPoint r = heis_mul(HPoint{1, 2, 3}, HPoint{-1, -2, -3});
  EXPECT_EQ(r.x1, 0.0);
  EXPECT_EQ(r.x2, 0.0);
  EXPECT_EQ(r.z, 0.0);
  const HPoint a{0.3, -1.5, 2.0};
  const HPoint b = heis_mul(a, heis_inverse(a));
  EXPECT_EQ(b.z, 0.0);
}

TEST(Heisenberg, ExactAssociativityOnRationals) {
  RandomStream rng(3);
  for (int t = 0; t < 200; ++t) {
    auto r = [&] { return Q(static_cast<int>(rng.uniform() * 21) - 10, 1 + static_cast<int>(rng.uniform() * 5)); };
    HeisenbergPoint<Q> a{r(), r(), r()}, b{r(), r(), r()}, c{r(), r(), r()};
    const auto l = heis_mul(heis_mul(a, b), c);
    const auto rr = heis_mul(a, heis_mul(b, c));
    EXPECT_EQ(l.x1, rr.x1);
    EXPECT_EQ(l.x2, rr.x2);
    EXPECT_EQ(l.z, rr.z);
  }
}

TEST(Heisenberg, Quasinorm) {
  EXPECT_EQ(quasinorm_H(HPoint{0, 0, 0}), 0.0);
  EXPECT_DOUBLE_EQ(quasinorm_H(HPoint{3, 4, 0}), 5.0);
  EXPECT_DOUBLE_EQ(quasinorm_H(HPoint{0, 0, 4}), 2.0);
  const HPoint d = dilate(3.0, HPoint{0, 0, 4});
  EXPECT_DOUBLE_EQ(d.z, 36.0);
  EXPECT_DOUBLE_EQ(quasinorm_H(d), 6.0);
  RandomStream rng(5);
  for (int t = 0; t < 100; ++t) {
    const HPoint a{rng.normal(), rng.normal(), rng.normal()};
    const double lam = 0.1 + 3.0 * rng.uniform();
    EXPECT_NEAR(quasinorm_H(dilate(lam, a)), lam * quasinorm_H(a), 1e-12 * (1.0 + lam * quasinorm_H(a)));
  }
}

TEST(Heisenberg, Zeta) {
  EXPECT_DOUBLE_EQ(zeta(HPoint{0, 0, 0}, HPoint{1, 1, 1}), 1.0);
  EXPECT_EQ(zeta(HPoint{0.4, 0.2, 1}, HPoint{0.4, 0.2, 1}), 0.0);
  // zeta is the vertical part of g^{-1} * g~.
  const HPoint g{0.3, -0.7, 1.1}, gt{-1.2, 0.5, 0.25};
  EXPECT_NEAR(zeta(g, gt), heis_mul(heis_inverse(g), gt).z, 1e-15);
}

TEST(SkewMatrix, PackedStorageIsAntisymmetric) {
  SkewMatrix<double> m(4, {1, 2, 3, 4, 5, 6});
  for (int i = 0; i < 4; ++i) {
    EXPECT_EQ(m(i, i), 0.0);
    for (int j = 0; j < 4; ++j) EXPECT_EQ(m(i, j), -m(j, i));
  }
  EXPECT_EQ(m(0, 1), 1.0);
  EXPECT_EQ(m(2, 3), 6.0);
  EXPECT_EQ(m(3, 0), -3.0);
}

TEST(SkewMatrix, HilbertSchmidtNorm) {
  SkewMatrix<double> m(3, {1, 2, 2});
  double fro = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) fro += m(i, j) * m(i, j);
  EXPECT_DOUBLE_EQ(hs_norm(m), std::sqrt(fro));
  EXPECT_DOUBLE_EQ(hs_norm(m), std::sqrt(18.0));
}

TEST(Odot, CanonicalBasis) {
  const auto m = odot(std::vector<double>{1, 0, 0}, std::vector<double>{0, 1, 0});
  EXPECT_EQ(m(0, 1), 1.0);
  EXPECT_EQ(m(1, 0), -1.0);
  EXPECT_EQ(m.upper(0, 2), 0.0);
  EXPECT_EQ(m.upper(1, 2), 0.0);
}

TEST(Odot, SelfProductVanishes) {
  const auto m = odot(std::vector<double>{3, -1, 2}, std::vector<double>{3, -1, 2});
  for (double e : m.entries()) EXPECT_EQ(e, 0.0);
}

TEST(Odot, HandComputedEntries) {
  const auto m = odot(std::vector<Q>{1, 2, 0}, std::vector<Q>{0, 1, 1});
  EXPECT_EQ(m.upper(0, 1), Q(1));
  EXPECT_EQ(m.upper(0, 2), Q(1));
  EXPECT_EQ(m.upper(1, 2), Q(2));
}

TEST(Odot, BilinearAndAntisymmetricExactly) {
  RandomStream rng(9);
  for (int t = 0; t < 50; ++t) {
    const int n = 2 + t % 4;
    const auto u = random_rational(n, rng).x, v = random_rational(n, rng).x, w = random_rational(n, rng).x;
    const Q a(3, 7);
    std::vector<Q> s(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) s[i] = a * u[i] + w[i];
    EXPECT_TRUE(odot(s, v) == a * odot(u, v) + odot(w, v));
    EXPECT_TRUE(odot(u, v) == -odot(v, u));
  }
}

TEST(Odot, NormOfOrthogonalPair) {
  RandomStream rng(10);
  for (int t = 0; t < 100; ++t) {
    const int n = 2 + t % 5;
    std::vector<double> u(n), v(n);
    for (auto& x : u) x = rng.normal();
    for (auto& x : v) x = rng.normal();
    double uu = 0, uv = 0;
    for (int i = 0; i < n; ++i) {
      uu += u[i] * u[i];
      uv += u[i] * v[i];
    }
    for (int i = 0; i < n; ++i) v[i] -= uv / uu * u[i];
    double vv = 0;
    for (double x : v) vv += x * x;
    EXPECT_NEAR(hs_norm(odot(u, v)), std::sqrt(2.0 * uu * vv), 1e-12 * std::sqrt(uu * vv));
  }
}

TEST(Odot, DimensionMismatchThrows) {
  EXPECT_THROW(odot(std::vector<double>{1, 2}, std::vector<double>{1, 2, 3}), std::invalid_argument);
}

TEST(So3, IsomorphismIdentity) {
  const std::vector<double> e1{1, 0, 0}, e2{0, 1, 0};
  EXPECT_TRUE(so3_iso_check(e1, e2));
  EXPECT_TRUE(so3_iso_check(e1, e1));
  // psi(e3) against -e1 (.) e2 entrywise
  const auto p = so3_hat<double>(cross<double>(e1, e2));
  const auto o = odot(e1, e2);
  for (std::size_t k = 0; k < 3; ++k) EXPECT_EQ(p.entries()[k], -o.entries()[k]);
  RandomStream rng(12);
  for (int t = 0; t < 100; ++t) {
    std::vector<double> u{std::round(10 * rng.normal()) / 4, std::round(10 * rng.normal()) / 4,
                          std::round(10 * rng.normal()) / 4};
    std::vector<double> v{std::round(10 * rng.normal()) / 4, std::round(10 * rng.normal()) / 4,
                          std::round(10 * rng.normal()) / 4};
    EXPECT_TRUE(so3_iso_check(u, v));
  }
}

TEST(Carnot, IdentityAndInverse) {
  RandomStream rng(13);
  const GPoint g = random_point(4, rng);
  EXPECT_TRUE(carnot_mul(GPoint::identity(4), g).x == g.x);
  EXPECT_TRUE(carnot_mul(GPoint::identity(4), g).z == g.z);
  const auto e = carnot_mul(g, carnot_inverse(g));
  for (double v : e.x) EXPECT_EQ(v, 0.0);
  for (double v : e.z.entries()) EXPECT_EQ(v, 0.0);
  GPoint u(3), mu(3);
  u.x = {1, 2, 3};
  mu.x = {-1, -2, -3};
  const auto um = carnot_mul(u, mu);
  for (double v : um.z.entries()) EXPECT_EQ(v, 0.0);
}

TEST(Carnot, ProductExampleInG2) {
  GPoint a(2), b(2);
  a.x = {1, 0};
  b.x = {0, 1};
  const auto r = carnot_mul(a, b);
  EXPECT_EQ(r.x[0], 1.0);
  EXPECT_EQ(r.x[1], 1.0);
  EXPECT_EQ(r.z.upper(0, 1), 0.5);
}

TEST(Carnot, ExactAssociativityAndInverse) {
  RandomStream rng(14);
  for (int n = 2; n <= 5; ++n)
    for (int t = 0; t < 40; ++t) {
      const auto a = random_rational(n, rng), b = random_rational(n, rng), c = random_rational(n, rng);
      const auto l = carnot_mul(carnot_mul(a, b), c), r = carnot_mul(a, carnot_mul(b, c));
      EXPECT_TRUE(l.x == r.x);
      EXPECT_TRUE(l.z == r.z);
      const auto e = carnot_mul(a, carnot_inverse(a));
      for (const auto& v : e.x) EXPECT_EQ(v, Q(0));
      for (const auto& v : e.z.entries()) EXPECT_EQ(v, Q(0));
    }
}

TEST(Carnot, FloatingAssociativity) {
  RandomStream rng(15);
  for (int n = 2; n <= 5; ++n)
    for (int t = 0; t < 1000; ++t) {
      const auto a = random_point(n, rng), b = random_point(n, rng), c = random_point(n, rng);
      EXPECT_LE(rel_diff(carnot_mul(carnot_mul(a, b), c), carnot_mul(a, carnot_mul(b, c))), 1e-12);
    }
}

TEST(Carnot, EmbeddingCommutesWithProduct) {
  RandomStream rng(16);
  for (int t = 0; t < 200; ++t) {
    const HPoint a{rng.normal(), rng.normal(), rng.normal()}, b{rng.normal(), rng.normal(), rng.normal()};
    const HPoint h = heis_mul(a, b);
    const HPoint c = to_heisenberg(carnot_mul(to_carnot(a), to_carnot(b)));
    EXPECT_DOUBLE_EQ(h.x1, c.x1);
    EXPECT_DOUBLE_EQ(h.x2, c.x2);
    EXPECT_NEAR(h.z, c.z, 1e-14 * (1 + std::abs(h.z)));
    const HPoint back = to_heisenberg(to_carnot(a));
    EXPECT_EQ(back.x1, a.x1);
    EXPECT_EQ(back.x2, a.x2);
    EXPECT_EQ(back.z, a.z);
    EXPECT_DOUBLE_EQ(hs_norm(to_carnot(a).z), std::sqrt(2.0) * std::abs(a.z));
  }
}

TEST(Carnot, DimensionMismatchThrows) {
  EXPECT_THROW(carnot_mul(GPoint(2), GPoint(3)), std::invalid_argument);
  EXPECT_THROW(zeta(GPoint(2), GPoint(3)), std::invalid_argument);
}

TEST(Carnot, Dilation) {
  GPoint g(3);
  g.x = {1, -2, 0.5};
  g.z.upper(0, 2) = 3.0;
  const auto d = dilate(2.0, g);
  EXPECT_EQ(d.x[1], -4.0);
  EXPECT_EQ(d.z.upper(0, 2), 12.0);
  EXPECT_THROW(dilate(0.0, g), std::domain_error);
  EXPECT_THROW(dilate(-1.0, g), std::domain_error);
  // dilation is a group automorphism
  RandomStream rng(17);
  const auto a = random_point(3, rng), b = random_point(3, rng);
  EXPECT_LE(rel_diff(dilate(1.7, carnot_mul(a, b)), carnot_mul(dilate(1.7, a), dilate(1.7, b))), 1e-14);
}

TEST(Carnot, Zeta) {
  RandomStream rng(18);
  const auto g = random_point(4, rng);
  const auto zg = zeta(g, g);
  for (double v : zg.entries()) EXPECT_EQ(v, 0.0);
  GPoint a(3), b(3);
  a.x = {1, 2, 3};
  b.x = {1, 2, 3};
  b.z = SkewMatrix<double>(3, {0.5, -1, 2});
  EXPECT_TRUE(zeta(a, b) == b.z);
  const auto gt = random_point(4, rng);
  const auto v = carnot_mul(carnot_inverse(g), gt).z;
  const auto z = zeta(g, gt);
  for (std::size_t k = 0; k < z.size(); ++k) EXPECT_NEAR(z.entries()[k], v.entries()[k], 1e-14);
}
