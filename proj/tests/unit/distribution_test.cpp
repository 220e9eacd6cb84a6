#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "densel/distribution.hpp"
#include "densel/rng.hpp"

using namespace densel;

TEST(Distribution, RejectsUnnormalized) {
  EXPECT_THROW(Distribution({0.5, 0.4}), std::invalid_argument);
  EXPECT_THROW(Distribution({1.2, -0.2}), std::invalid_argument);
  EXPECT_THROW(Distribution(std::vector<double>{}), std::invalid_argument);
  EXPECT_NO_THROW(Distribution({0.5, 0.5 + 1e-12}));
}

TEST(Distribution, SetNeedsSharedDomain) {
  EXPECT_THROW(DistributionSet({Distribution({1.0}), Distribution({0.5, 0.5})}),
               std::invalid_argument);
  DistributionSet vs({Distribution({1.0, 0.0}), Distribution({0.5, 0.5})});
  EXPECT_EQ(vs.k(), 2u);
  EXPECT_EQ(vs.n(), 2u);
}

TEST(Distances, L1Example) {
  Distribution a({0.5, 0.3, 0.2});
  Distribution b({0.2, 0.3, 0.5});
  EXPECT_NEAR(l1_distance(a, b), 0.6, 1e-12);
  EXPECT_NEAR(tv_distance(a, b), 0.3, 1e-12);
}

TEST(Distances, PointMasses) {
  Distribution a({1.0, 0.0});
  Distribution b({0.0, 1.0});
  EXPECT_NEAR(l2_distance(a, b), std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(l2_distance_squared(a.probs(), b.probs()), 2.0, 1e-12);
  EXPECT_DOUBLE_EQ(linf_distance(a, b), 1.0);
  EXPECT_DOUBLE_EQ(l1_distance(a, b), 2.0);
}

TEST(Distances, NormOrdering) {
  Rng rng(3);
  for (int t = 0; t < 50; ++t) {
    std::vector<double> x(12), y(12);
    double sx = 0, sy = 0;
    for (auto& v : x) sx += v = rng.uniform();
    for (auto& v : y) sy += v = rng.uniform();
    for (auto& v : x) v /= sx;
    for (auto& v : y) v /= sy;
    const double l1 = l1_distance(x, y);
    const double l2 = l2_distance(x, y);
    const double li = linf_distance(x, y);
    EXPECT_LE(li, l2 + 1e-15);
    EXPECT_LE(l2, l1 + 1e-15);
    EXPECT_LE(l1, std::sqrt(12.0) * l2 + 1e-12);
  }
}

TEST(Distances, DimensionMismatchThrows) {
  std::vector<double> a{1.0};
  std::vector<double> b{0.5, 0.5};
  EXPECT_THROW(l1_distance(a, b), std::invalid_argument);
}

TEST(Restrict, ZeroesOutsideSubset) {
  Distribution x({0.1, 0.2, 0.3, 0.4});
  std::vector<std::size_t> subset{3, 1};
  auto r = restrict(x, subset);
  ASSERT_EQ(r.size(), 4u);
  EXPECT_EQ(r[0], 0.0);
  EXPECT_EQ(r[1], 0.2);
  EXPECT_EQ(r[2], 0.0);
  EXPECT_EQ(r[3], 0.4);
  EXPECT_EQ(r.support(), (std::vector<std::size_t>{1, 3}));
}

TEST(Restrict, RejectsMassOutsideSupport) {
  EXPECT_THROW(RestrictedVector({0.5, 0.5}, {0}), std::invalid_argument);
  EXPECT_THROW(RestrictedVector({0.5, 0.5}, {0, 2}), std::out_of_range);
}

TEST(PoissonTail, ClosedForm) {
  // 2 exp(-100 / 40)
  EXPECT_NEAR(poisson_tail_bound(10, 10), 2 * std::exp(-2.5), 1e-12);
  EXPECT_NEAR(poisson_tail_bound(10, 10), 0.16417, 1e-5);
  EXPECT_DOUBLE_EQ(poisson_tail_bound(10, 0.1), 1.0);
}

TEST(PoissonDraw, MeanAndVariance) {
  for (double mean : {0.5, 7.0, 50.0, 400.0}) {
    Rng rng(11);
    const int draws = 40000;
    double sum = 0, sum2 = 0;
    for (int i = 0; i < draws; ++i) {
      const double x = static_cast<double>(poisson(mean, rng));
      sum += x;
      sum2 += x * x;
    }
    const double m = sum / draws;
    const double var = sum2 / draws - m * m;
    EXPECT_NEAR(m, mean, 4 * std::sqrt(mean / draws)) << "mean " << mean;
    EXPECT_NEAR(var / mean, 1.0, 0.05) << "mean " << mean;
  }
}

TEST(Alias, FrequenciesMatch) {
  std::vector<double> p{0.5, 0.0, 0.25, 0.125, 0.125};
  AliasSampler a(p);
  Rng rng(5);
  std::vector<int> hits(p.size());
  const int draws = 80000;
  for (int i = 0; i < draws; ++i) ++hits[a.draw(rng)];
  EXPECT_EQ(hits[1], 0);
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double se = std::sqrt(p[i] * (1 - p[i]) / draws);
    EXPECT_NEAR(hits[i] / double(draws), p[i], 4 * se + 1e-12);
  }
}

TEST(Sampling, FixedHasExactLength) {
  Distribution p({0.25, 0.25, 0.5});
  auto s = sample_fixed(p, 137, 1);
  EXPECT_EQ(s.size(), 137u);
  for (auto e : s) EXPECT_LT(e, 3u);
  EXPECT_EQ(s, sample_fixed(p, 137, 1));
  EXPECT_NE(s, sample_fixed(p, 137, 2));
}

TEST(Sampling, PoissonizedCountsHaveMeanSp) {
  // 2000 draws of Pois(50 p(i)); counts per coordinate average s p(i)
  Distribution p({0.6, 0.3, 0.1});
  const int reps = 2000;
  std::vector<double> mean(3, 0.0);
  double cov01 = 0;
  std::vector<std::vector<double>> xs(3, std::vector<double>(reps));
  for (int r = 0; r < reps; ++r) {
    auto c = sample_poissonized(p, 50, derive_seed(9, {std::uint64_t(r)}));
    EXPECT_EQ(c.nominal_s, 50u);
    EXPECT_EQ(c.total, std::accumulate(c.counts.begin(), c.counts.end(), std::uint64_t{0}));
    for (int i = 0; i < 3; ++i) xs[i][r] = static_cast<double>(c.counts[i]);
  }
  for (int i = 0; i < 3; ++i) {
    mean[i] = std::accumulate(xs[i].begin(), xs[i].end(), 0.0) / reps;
    const double lambda = 50 * p[i];
    EXPECT_NEAR(mean[i], lambda, 3.5 * std::sqrt(lambda / reps));
  }
  for (int r = 0; r < reps; ++r) cov01 += (xs[0][r] - mean[0]) * (xs[1][r] - mean[1]);
  cov01 /= reps - 1;
  // independent coordinates; multinomial counts would give -s p0 p1 = -9
  EXPECT_NEAR(cov01, 0.0, 1.5);
}

TEST(Sampling, CountSamples) {
  std::vector<Element> stream{0, 2, 2, 1, 2};
  auto c = count_samples(stream, 4);
  EXPECT_EQ(c.counts, (std::vector<std::uint64_t>{1, 1, 3, 0}));
  EXPECT_EQ(c.total, 5u);
  EXPECT_EQ(c.nominal_s, 5u);
  EXPECT_DOUBLE_EQ(c.empirical(2), 0.6);
  auto d = count_samples(stream, 4, 10);
  EXPECT_DOUBLE_EQ(d.empirical(2), 0.3);
}

TEST(Sampling, SplitHalvesNominals) {
  Distribution p({0.5, 0.5});
  auto [a, b] = split_halves(p, 101, 4);
  EXPECT_EQ(a.nominal_s, 51u);
  EXPECT_EQ(b.nominal_s, 50u);
  auto [c, d] = split_halves(p, 100, 4);
  EXPECT_EQ(c.nominal_s, 50u);
  EXPECT_EQ(d.nominal_s, 50u);
}

TEST(Sampling, SplitHalvesIndependent) {
  Distribution p({0.7, 0.3});
  const int reps = 3000;
  std::vector<double> x(reps), y(reps);
  for (int r = 0; r < reps; ++r) {
    auto [a, b] = split_halves(p, 60, derive_seed(21, {std::uint64_t(r)}));
    x[r] = static_cast<double>(a.counts[0]);
    y[r] = static_cast<double>(b.counts[0]);
  }
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / reps;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / reps;
  EXPECT_NEAR(mx, 21.0, 3.5 * std::sqrt(21.0 / reps));
  EXPECT_NEAR(my, 21.0, 3.5 * std::sqrt(21.0 / reps));
  double cov = 0;
  for (int r = 0; r < reps; ++r) cov += (x[r] - mx) * (y[r] - my);
  cov /= reps - 1;
  // sd of the estimator is about sqrt(21 * 21 / reps) = 0.38
  EXPECT_NEAR(cov, 0.0, 1.5);
}

TEST(Rng, DeriveSeedSeparatesTags) {
  EXPECT_NE(derive_seed(1, {0}), derive_seed(1, {1}));
  EXPECT_NE(derive_seed(1, {0, 1}), derive_seed(1, {1, 0}));
  EXPECT_EQ(derive_seed(7, {3, 4}), derive_seed(7, {3, 4}));
}

TEST(Rng, BelowIsInRangeAndUniform) {
  Rng rng(8);
  std::vector<int> hits(7);
  for (int i = 0; i < 70000; ++i) {
    auto v = rng.below(7);
    ASSERT_LT(v, 7u);
    ++hits[v];
  }
  for (int h : hits) EXPECT_NEAR(h, 10000, 400);
}

TEST(Distances, TriangleInequalityAndAdditivity) {
  Rng rng(30);
  auto draw = [&] {
    std::vector<double> v(15);
    double s = 0;
    for (auto& x : v) s += x = rng.uniform();
    for (auto& x : v) x /= s;
    return v;
  };
  for (int t = 0; t < 100; ++t) {
    auto a = draw(), b = draw(), c = draw();
    EXPECT_LE(l1_distance(a, c), l1_distance(a, b) + l1_distance(b, c) + 1e-15);
    EXPECT_LE(l2_distance(a, c), l2_distance(a, b) + l2_distance(b, c) + 1e-15);
    EXPECT_LE(linf_distance(a, c), linf_distance(a, b) + linf_distance(b, c) + 1e-15);
    std::vector<std::size_t> A, B;
    for (std::size_t i = 0; i < 15; ++i) (rng.below(2) ? A : B).push_back(i);
    const double split = l1_distance(restrict(a, A), restrict(b, A)) +
                         l1_distance(restrict(a, B), restrict(b, B));
    EXPECT_NEAR(split, l1_distance(a, b), 1e-14);
  }
}

TEST(Restrict, WholeAndEmptySets) {
  Distribution x({0.1, 0.2, 0.3, 0.4});
  std::vector<std::size_t> all{0, 1, 2, 3};
  auto whole = restrict(x, all);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(whole[i], x[i]);
  auto none = restrict(x, std::vector<std::size_t>{});
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(none[i], 0.0);
  EXPECT_THROW(restrict(x, std::vector<std::size_t>{4}), std::out_of_range);
}

TEST(PoissonTail, BoundsEmpiricalTail) {
  Rng rng(31);
  const int draws = 1000000;
  int beyond = 0;
  for (int i = 0; i < draws; ++i) {
    const double x = static_cast<double>(poisson(10.0, rng));
    beyond += std::fabs(x - 10.0) >= 10.0;
  }
  EXPECT_LE(beyond / double(draws), poisson_tail_bound(10, 10));
  EXPECT_LT(poisson_tail_bound(10, 40), poisson_tail_bound(10, 20));
  EXPECT_THROW(poisson_tail_bound(10, 0), std::invalid_argument);
}

TEST(Sampling, ZeroMassNeverDrawn) {
  Distribution p({0.5, 0.0, 0.5});
  for (std::uint64_t t = 0; t < 200; ++t) EXPECT_EQ(sample_poissonized(p, 50, t).counts[1], 0u);
}

TEST(Sampling, PoissonizedMarginalChiSquare) {
  // counts(0) ~ Pois(6); bins 0..13 and a pooled tail, 14 degrees of freedom
  Distribution p({0.3, 0.7});
  const int reps = 20000;
  std::vector<int> hist(15, 0);
  for (int r = 0; r < reps; ++r) {
    const auto c = sample_poissonized(p, 20, derive_seed(32, {std::uint64_t(r)})).counts[0];
    ++hist[std::min<std::uint64_t>(c, 14)];
  }
  double pmf = std::exp(-6.0), cdf = 0, chi2 = 0;
  for (int x = 0; x < 15; ++x) {
    const double prob = x < 14 ? pmf : 1.0 - cdf;
    const double expect = prob * reps;
    chi2 += (hist[x] - expect) * (hist[x] - expect) / expect;
    cdf += pmf;
    pmf *= 6.0 / (x + 1);
  }
  // chi-square(14) upper 0.001 quantile
  EXPECT_LT(chi2, 36.12);
}

TEST(Sampling, EmpiricalLinfCloseness) {
  // uniform on n = 1000, s = n: max_i |p-hat(i) - p(i)| <= 4 max(sqrt(p ln n / s), ln n / s)
  const std::size_t n = 1000;
  Distribution p(std::vector<double>(n, 1.0 / n));
  const double ln = std::log(double(n));
  const double bound = 4 * std::max(std::sqrt(ln / (double(n) * n)), ln / double(n));
  int ok = 0;
  for (std::uint64_t t = 0; t < 1000; ++t) {
    const auto c = sample_poissonized(p, n, derive_seed(33, {t}));
    double worst = 0;
    for (std::size_t i = 0; i < n; ++i) worst = std::max(worst, std::fabs(c.empirical(i) - p[i]));
    ok += worst <= bound;
  }
  EXPECT_GE(ok, 990);
}
