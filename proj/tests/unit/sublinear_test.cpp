#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <memory>
#include <vector>

#include "densel/stats.hpp"
#include "densel/sublinear.hpp"
#include "densel/synthbench.hpp"

using namespace densel;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / "densel_sublinear_test";
  fs::create_directories(dir);
  return dir / name;
}

std::shared_ptr<const DistributionSet> shared(DistributionSet vs) {
  return std::make_shared<const DistributionSet>(std::move(vs));
}

}  // namespace

TEST(HeavyLight, ThresholdExample) {
  const std::size_t n = 4096;
  const double gamma = std::pow(double(n), -5.0 / 12.0);
  EXPECT_NEAR(gamma, 1.0 / 32, 1e-15);
  std::vector<double> p(n, 0.0);
  p[0] = 0.05;
  p[1] = 0.01;
  p[2] = 1.0 - 0.06;
  auto part = heavy_light(Distribution(p), gamma, 7);
  EXPECT_EQ(part.heavy, (std::vector<std::size_t>{0, 2}));
  EXPECT_EQ(part.light.size(), n - 2);
  EXPECT_EQ(part.light.front(), 1u);
  EXPECT_EQ(part.leader, 7u);
}

TEST(HeavyLight, Boundaries) {
  Distribution p({0.4, 0.3, 0.2, 0.1, 0.0});
  EXPECT_TRUE(heavy_light(p, 0.5).heavy.empty());
  auto tiny = heavy_light(p, 1e-300);
  EXPECT_EQ(tiny.heavy, (std::vector<std::size_t>{0, 1, 2, 3}));
  EXPECT_EQ(tiny.light, (std::vector<std::size_t>{4}));
  EXPECT_THROW(heavy_light(p, 0.0), std::invalid_argument);
}

TEST(HeavyLight, HeavyCountBoundedByInverseGamma) {
  Rng rng(1);
  for (int t = 0; t < 50; ++t) {
    auto p = random_distribution(200, rng);
    const double gamma = 0.001 + 0.2 * rng.uniform();
    auto part = heavy_light(p, gamma);
    EXPECT_LE(double(part.heavy.size()), 1.0 / gamma);
    EXPECT_EQ(part.heavy.size() + part.light.size(), 200u);
  }
}

TEST(Config, DefaultsFollowFormulas) {
  auto cfg = SublinearConfig::defaults(512, 1024, 0.5);
  EXPECT_NEAR(cfg.gamma, std::pow(512.0, -5.0 / 12.0), 1e-15);
  EXPECT_EQ(cfg.s, static_cast<std::uint64_t>(std::ceil(512 / (0.25 * std::pow(std::log(1024.0), 0.25)))));
  EXPECT_NEAR(cfg.c_inf, 4 * std::log(512.0) * std::log(std::log(512.0)), 1e-12);
  const double ln = std::log(512.0);
  EXPECT_NEAR(cfg.group_radius(512), 4 * ln * ln * std::log(ln) / std::sqrt(512.0), 1e-12);
  EXPECT_NEAR(cfg.l2_approx_c(512), 1 + double(cfg.s) * 0.25 / (32 * 512), 1e-15);
  // lnln floored at 1 and c_inf at 2 for small n
  auto small = SublinearConfig::defaults(4, 2, 1.0);
  EXPECT_NEAR(small.group_radius(4), 4 * std::log(4.0) * std::log(4.0) / 2, 1e-12);
  EXPECT_GE(small.c_inf, 2.0);
}

TEST(Config, FileOverrides) {
  auto path = scratch("cfg.ini");
  std::ofstream(path) << "# test\n\ngamma = 0.2\ns=40\nlinf_backend = \"coordinate_sample\"\n"
                         "linf_coords = 9\n";
  auto cfg = SublinearConfig::defaults(64, 8, 0.5);
  apply_config_file(cfg, path);
  EXPECT_DOUBLE_EQ(cfg.gamma, 0.2);
  EXPECT_EQ(cfg.s, 40u);
  EXPECT_EQ(cfg.linf_backend.kind, LinfBackend::Kind::CoordinateSample);
  EXPECT_EQ(cfg.linf_backend.coords, 9u);
  EXPECT_THROW(apply_config_value(cfg, "bogus", "1"), DataError);
  EXPECT_THROW(apply_config_value(cfg, "gamma", "x"), DataError);
  std::ofstream(path) << "gamma 0.2\n";
  EXPECT_THROW(apply_config_file(cfg, path), DataError);
}

TEST(Preprocess, GroupsMatchBruteForce) {
  auto vs = shared(gen_zipfian(40, 64, 2));
  auto cfg = SublinearConfig::defaults(40, 64, 0.5);
  cfg.radius_const = 0.05;
  auto idx = preprocess(vs, cfg);
  ASSERT_EQ(idx.groups.size(), 64u);
  std::size_t nontrivial = 0;
  for (std::size_t j = 0; j < 64; ++j) {
    std::vector<std::uint32_t> expect;
    for (std::size_t i = 0; i < 64; ++i) {
      if (linf_distance((*vs)[i], (*vs)[j]) <= idx.radius) expect.push_back(std::uint32_t(i));
    }
    EXPECT_EQ(idx.groups[j].members, expect) << "leader " << j;
    nontrivial += expect.size() > 1 && expect.size() < 64;
  }
  // the radius splits this set into groups of intermediate size
  EXPECT_GT(nontrivial, 0u);
}

TEST(Preprocess, IdenticalDistributionsShareOneGroup) {
  std::vector<Distribution> same(10, Distribution({0.25, 0.25, 0.25, 0.25}));
  auto idx = preprocess(shared(DistributionSet(same)), SublinearConfig::defaults(4, 10, 0.5));
  for (const auto& g : idx.groups) EXPECT_EQ(g.members.size(), 10u);
}

TEST(Preprocess, SeparatedDistributionsAreSingletons) {
  std::vector<Distribution> d{Distribution({1.0, 0.0, 0.0, 0.0}), Distribution({0.0, 0.0, 0.0, 1.0})};
  auto cfg = SublinearConfig::defaults(4, 2, 0.5);
  cfg.radius_const = 0.1;
  auto idx = preprocess(shared(DistributionSet(d)), cfg);
  ASSERT_LT(idx.radius, 1.0);
  for (const auto& g : idx.groups) {
    EXPECT_EQ(g.members.size(), 1u);
    EXPECT_EQ(g.l2_index, kNoIndex);
  }
  OpCounter ops;
  auto r = select_hypothesis(idx, d[1], 3, ops);
  EXPECT_EQ(r.selected, 1u);
  EXPECT_FALSE(r.used_l2);
}

TEST(Preprocess, HeavySideCloseness) {
  auto vs = shared(gen_zipfian(64, 40, 4));
  auto cfg = SublinearConfig::defaults(64, 40, 0.5);
  cfg.radius_const = 0.5;
  auto idx = preprocess(vs, cfg);
  for (const auto& g : idx.groups) {
    const auto& H = g.partition.heavy;
    for (auto a : g.members) {
      for (auto b : g.members) {
        const double d = l1_distance(restrict((*vs)[a], H), restrict((*vs)[b], H));
        // members are within radius of the leader, so of each other within twice it
        EXPECT_LE(d, double(H.size()) * 2 * idx.radius + 1e-12);
      }
    }
  }
}

TEST(Select, SingleHypothesis) {
  auto vs = shared(DistributionSet({Distribution({0.3, 0.7})}));
  auto idx = preprocess(vs, SublinearConfig::defaults(2, 1, 0.5));
  OpCounter ops;
  EXPECT_EQ(select_hypothesis(idx, (*vs)[0], 1, ops).selected, 0u);
}

TEST(Select, FindsSourceOnHalfUniform) {
  const std::size_t n = 128, k = 64;
  auto vs = shared(gen_half_uniform(n, k, 5));
  auto cfg = SublinearConfig::defaults(n, k, 0.5);
  auto idx = preprocess(vs, cfg);
  int ok = 0;
  for (std::uint64_t t = 0; t < 40; ++t) {
    const std::size_t truth = t % k;
    OpCounter ops;
    auto r = select_hypothesis(idx, (*vs)[truth], derive_seed(6, {t}), ops);
    ok += l1_distance((*vs)[truth], (*vs)[r.selected]) <= 0.5;
  }
  EXPECT_GE(ok, 36);
}

TEST(Select, DeterministicGivenSeed) {
  auto vs = shared(gen_half_uniform(64, 32, 7));
  auto idx = preprocess(vs, SublinearConfig::defaults(64, 32, 0.5));
  OpCounter a, b;
  auto r1 = select_hypothesis(idx, (*vs)[3], 11, a);
  auto r2 = select_hypothesis(idx, (*vs)[3], 11, b);
  EXPECT_EQ(r1.selected, r2.selected);
  EXPECT_EQ(a, b);
}

TEST(LightStatistic, ZeroWhenEmpiricalMatches) {
  SampleCounts c;
  c.counts = {2, 3, 5};
  c.total = c.nominal_s = 10;
  auto vL = restrict(std::vector<double>{0.2, 0.3, 0.5}, std::vector<std::size_t>{1, 2});
  EXPECT_DOUBLE_EQ(light_statistic(c, vL, 10), 0.0);
  auto off = restrict(std::vector<double>{0.2, 0.1, 0.5}, std::vector<std::size_t>{1, 2});
  // (3 - 1)^2
  EXPECT_DOUBLE_EQ(light_statistic(c, off, 10), 4.0);
}

TEST(LightStatistic, ExpectationExample) {
  // L = both coordinates: 100 * 1 + 1e4 * (0.0625 + 0.0625) = 1350
  Distribution p({0.5, 0.5});
  auto vL = restrict(std::vector<double>{0.25, 0.75}, std::vector<std::size_t>{0, 1});
  EXPECT_DOUBLE_EQ(z1_expectation(p, vL, 100), 1350.0);
  auto st = z1_monte_carlo(p, vL, 100, 100000, 12);
  EXPECT_LE(std::fabs(st.mean - 1350.0), 3 * st.std_error);
  EXPECT_LE(st.variance, st.variance_bound);
  // L = second coordinate only: 100 * 0.5 + 1e4 * 0.0625 = 675
  auto v2 = restrict(std::vector<double>{0.0, 0.75}, std::vector<std::size_t>{1});
  EXPECT_DOUBLE_EQ(z1_expectation(p, v2, 100), 675.0);
  auto st2 = z1_monte_carlo(p, v2, 100, 100000, 13);
  EXPECT_LE(std::fabs(st2.mean - 675.0), 3 * st2.std_error);
  EXPECT_LE(st2.variance, st2.variance_bound);
}

TEST(IndexFile, SaveLoadRoundTrip) {
  auto vs = shared(gen_half_uniform(64, 48, 8));
  auto cfg = SublinearConfig::defaults(64, 48, 0.5);
  cfg.seed = 5;
  auto idx = preprocess(vs, cfg);
  auto path = scratch("index.bin");
  save_index(path, idx);
  auto back = load_index(path);
  EXPECT_EQ(back.vs->k(), 48u);
  EXPECT_EQ(back.groups.size(), idx.groups.size());
  EXPECT_EQ(back.l2_indexes.size(), idx.l2_indexes.size());
  EXPECT_DOUBLE_EQ(back.radius, idx.radius);
  for (std::uint64_t t = 0; t < 10; ++t) {
    OpCounter a, b;
    auto r1 = select_hypothesis(idx, (*vs)[t], t, a);
    auto r2 = select_hypothesis(back, (*vs)[t], t, b);
    EXPECT_EQ(r1.selected, r2.selected);
    EXPECT_EQ(a, b);
  }
}

TEST(IndexFile, RejectsGarbage) {
  auto path = scratch("garbage.bin");
  std::ofstream(path) << "not an index";
  EXPECT_THROW(load_index(path), DataError);
}
