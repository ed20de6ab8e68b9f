#include "subriem/mc.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>

using namespace subriem;

namespace {

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

}  // namespace

TEST(Rng, SubstreamsAreDeterministicAndDistinct) {
  auto a = substream(7, 3), b = substream(7, 3), c = substream(7, 4), d = substream(8, 3);
  const double va = a.normal();
  EXPECT_TRUE(same_bits(va, b.normal()));
  EXPECT_NE(va, c.normal());
  EXPECT_NE(va, d.normal());
  EXPECT_NE(derive_seed(1, 1), derive_seed(1, 2));
  EXPECT_EQ(derive_seed(5, 9), derive_seed(5, 9));
}

TEST(Estimator, ConstantSampler) {
  const auto e = run_estimator([](RandomStream&, std::uint64_t) { return 2.5; }, 1000, McOptions{1, 1});
  EXPECT_EQ(e.mean, 2.5);
  EXPECT_EQ(e.std_error, 0.0);
  EXPECT_EQ(e.n, 1000u);
  EXPECT_EQ(e.seed, 1u);
}

TEST(Estimator, RejectsTooFewRuns) {
  EXPECT_THROW(run_estimator([](RandomStream&, std::uint64_t) { return 0.0; }, 1, McOptions{}), std::invalid_argument);
  EXPECT_THROW(run_vector_estimator(0, [](RandomStream&, std::uint64_t, double*) {}, 10, McOptions{}),
               std::invalid_argument);
}

TEST(Estimator, BitIdenticalAcrossWorkerCounts) {
  auto sampler = [](RandomStream& rng, std::uint64_t) { return std::exp(rng.normal()); };
  const std::uint64_t N = 3 * kChunkSize + 17;
  const auto a = run_estimator(sampler, N, McOptions{42, 1});
  for (int w : {1, 2, 3, 8}) {
    const auto b = run_estimator(sampler, N, McOptions{42, w});
    EXPECT_TRUE(same_bits(a.mean, b.mean)) << w;
    EXPECT_TRUE(same_bits(a.std_error, b.std_error)) << w;
  }
  const auto c = run_estimator(sampler, N, McOptions{43, 1});
  EXPECT_NE(a.mean, c.mean);
}

TEST(Estimator, StandardNormalMean) {
  const std::uint64_t N = 1000000;
  const auto e = run_estimator([](RandomStream& rng, std::uint64_t) { return rng.normal(); }, N, McOptions{5, 0});
  EXPECT_LT(std::abs(e.mean), 3.0 / std::sqrt(static_cast<double>(N)));
  EXPECT_NEAR(e.std_error, 1.0 / std::sqrt(static_cast<double>(N)), 0.01 / std::sqrt(static_cast<double>(N)));
}

TEST(Estimator, StandardErrorScaling) {
  auto s = [](RandomStream& rng, std::uint64_t) { return rng.uniform(); };
  const auto a = run_estimator(s, 20000, McOptions{6, 1});
  const auto b = run_estimator(s, 80000, McOptions{7, 1});
  EXPECT_NEAR(a.std_error / b.std_error, 2.0, 0.4);
}

TEST(Estimator, IntervalCoverage) {
  // Exponential(1) has mean 1; the 3 sigma interval should miss in about 0.27% of seeds.
  int covered = 0;
  for (std::uint64_t s = 0; s < 1000; ++s) {
    const auto e = run_estimator([](RandomStream& rng, std::uint64_t) { return -std::log1p(-rng.uniform()); }, 400,
                                 McOptions{1000 + s, 1});
    covered += compare(e, 1.0, Relation::Equal).pass;
  }
  EXPECT_GE(covered, 990);
}

TEST(Estimator, DisjointSeedsUncorrelated) {
  const int M = 400;
  Eigen::VectorXd a(M), b(M);
  for (int i = 0; i < M; ++i) {
    a(i) = run_estimator([](RandomStream& rng, std::uint64_t) { return rng.normal(); }, 50, McOptions{derive_seed(9, i), 1}).mean;
    b(i) = run_estimator([](RandomStream& rng, std::uint64_t) { return rng.normal(); }, 50,
                         McOptions{derive_seed(10, i), 1}).mean;
  }
  const double corr = ((a.array() - a.mean()) * (b.array() - b.mean())).mean() /
                      std::sqrt((a.array() - a.mean()).square().mean() * (b.array() - b.mean()).square().mean());
  EXPECT_LT(std::abs(corr), 4.0 / std::sqrt(static_cast<double>(M)));
}

TEST(Estimator, RunIndexIsPassed) {
  const auto e = run_estimator([](RandomStream&, std::uint64_t i) { return static_cast<double>(i); }, 101, McOptions{1, 2});
  EXPECT_DOUBLE_EQ(e.mean, 50.0);
}

TEST(Estimator, ExceptionsPropagate) {
  EXPECT_THROW(run_estimator(
                   [](RandomStream&, std::uint64_t i) -> double {
                     if (i == 5000) throw std::runtime_error("boom");
                     return 0.0;
                   },
                   10000, McOptions{1, 2}),
               std::runtime_error);
}

TEST(VectorEstimate, LinearAndComponents) {
  const auto v = run_vector_estimator(
      2,
      [](RandomStream& rng, std::uint64_t, double* out) {
        const double z = rng.normal();
        out[0] = z;
        out[1] = z + 1.0;
      },
      10000, McOptions{11, 1});
  const auto d = v.linear(Eigen::Vector2d(1.0, -1.0));
  EXPECT_NEAR(d.mean, -1.0, 1e-12);
  EXPECT_LT(d.std_error, 1e-9);
  EXPECT_NEAR(v.component(1).mean - v.component(0).mean, 1.0, 1e-12);
  EXPECT_NEAR(v.cov(0, 1), v.cov(0, 0), 1e-9);
}

TEST(Moments, MergeMatchesSinglePass) {
  RandomStream rng(12);
  MomentAccumulator all(2), a(2), b(2);
  for (int i = 0; i < 1000; ++i) {
    const double x[2] = {rng.normal() + 1e6, rng.uniform()};
    all.add(x);
    (i < 300 ? a : b).add(x);
  }
  a.merge(b);
  EXPECT_EQ(a.count(), all.count());
  EXPECT_NEAR((a.mean() - all.mean()).norm(), 0.0, 1e-8);
  EXPECT_NEAR((a.covariance() - all.covariance()).norm(), 0.0, 1e-8);
  EXPECT_NEAR(all.covariance()(0, 0), 1.0, 0.15);
}

TEST(DeltaMethod, RatioOfMeans) {
  // phi(a, b) = a / b with a, b independent: se^2 = se_a^2 / b^2 + a^2 se_b^2 / b^4.
  const auto A = run_vector_estimator(
      1, [](RandomStream& rng, std::uint64_t, double* o) { o[0] = 2.0 + rng.normal(); }, 5000, McOptions{13, 1});
  const auto B = run_vector_estimator(
      1, [](RandomStream& rng, std::uint64_t, double* o) { o[0] = 4.0 + 0.5 * rng.normal(); }, 5000, McOptions{14, 1});
  const auto r = delta_method({&A, &B}, [](const auto& m) { return m[0](0) / m[1](0); });
  const double a = A.mean(0), b = B.mean(0);
  const double sa2 = A.cov(0, 0) / 5000.0, sb2 = B.cov(0, 0) / 5000.0;
  EXPECT_DOUBLE_EQ(r.mean, a / b);
  EXPECT_NEAR(r.std_error, std::sqrt(sa2 / (b * b) + a * a * sb2 / (b * b * b * b)), 1e-6 * r.std_error);
}

TEST(Ks, KolmogorovTailTable) {
  EXPECT_NEAR(kolmogorov_sf(1.0), 0.26999967, 1e-7);
  EXPECT_NEAR(kolmogorov_sf(1.2238), 0.10, 2e-4);
  EXPECT_NEAR(kolmogorov_sf(1.3581), 0.05, 1e-4);
  EXPECT_NEAR(kolmogorov_sf(1.6276), 0.01, 1e-4);
  EXPECT_EQ(kolmogorov_sf(0.0), 1.0);
  // Both series agree where they hand over.
  EXPECT_NEAR(kolmogorov_sf(1.18 - 1e-12), kolmogorov_sf(1.18), 1e-10);
}

TEST(Ks, CalibratedUnderNull) {
  int ok = 0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    RandomStream rng(500 + s);
    std::vector<double> x(2000);
    for (auto& v : x) v = rng.normal();
    ok += ks_test(x, normal_cdf).p_value > 0.01;
  }
  EXPECT_GE(ok, 98);
}

TEST(Ks, DetectsShift) {
  RandomStream rng(15);
  std::vector<double> x(10000);
  for (auto& v : x) v = 0.5 + rng.normal();
  EXPECT_LT(ks_test(x, normal_cdf).p_value, 1e-3);
}

TEST(Ks, TwoSample) {
  RandomStream rng(16);
  std::vector<double> a(3000), b(3000), c(3000);
  for (auto& v : a) v = rng.normal();
  for (auto& v : b) v = rng.normal();
  for (auto& v : c) v = 0.3 + rng.normal();
  EXPECT_EQ(ks_two_sample(a, a).statistic, 0.0);
  EXPECT_GT(ks_two_sample(a, b).p_value, 1e-3);
  EXPECT_LT(ks_two_sample(a, c).p_value, 1e-3);
}

TEST(Ks, NeedsFiftySamples) {
  EXPECT_THROW(ks_test(std::vector<double>(49, 0.0), normal_cdf), std::invalid_argument);
  EXPECT_THROW(ks_two_sample(std::vector<double>(49, 0.0), std::vector<double>(60, 0.0)), std::invalid_argument);
}

TEST(Compare, Semantics) {
  EXPECT_TRUE(compare(1.0, 0.1, 1.25, 0.0, Relation::Equal).pass);
  EXPECT_FALSE(compare(1.0, 0.1, 1.35, 0.0, Relation::Equal).pass);
  EXPECT_TRUE(compare(1.0, 0.1, 1.35, 0.0, Relation::Equal, 3.0, 0.1).pass);
  EXPECT_TRUE(compare(5.0, 0.0, 10.0, 0.0, Relation::AtMost).pass);
  EXPECT_FALSE(compare(10.5, 0.1, 10.0, 0.0, Relation::AtMost).pass);
  EXPECT_FALSE(compare(NAN, 0.1, 1.0, 0.0, Relation::AtMost).pass);
  const auto r = compare(1.0, 0.3, 0.0, 0.4, Relation::Equal);
  EXPECT_DOUBLE_EQ(r.sigma, 0.5);
  EXPECT_DOUBLE_EQ(r.margin, 1.0);
  EXPECT_STREQ(relation_name(Relation::AtMost), "<=");
}

TEST(NormalCdf, Values) {
  EXPECT_DOUBLE_EQ(normal_cdf(0.0), 0.5);
  EXPECT_NEAR(normal_cdf(1.96), 0.9750021048517795, 1e-15);
  EXPECT_NEAR(normal_cdf(-3.0), 0.0013498980316301, 1e-16);
}
