#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "densel/stats.hpp"
#include "densel/tournament.hpp"

using namespace densel;

namespace {

DistributionSet random_set(std::size_t k, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Distribution> d;
  for (std::size_t i = 0; i < k; ++i) d.push_back(random_distribution(n, rng));
  return DistributionSet(std::move(d));
}

// k - 1 tests at s samples each for a plain knockout.
std::uint64_t plain_knockout_ops(std::size_t k, std::uint64_t s) { return (k - 1) * s; }

}  // namespace

TEST(Schedule, TheoreticalLevelSizes) {
  TournamentConfig cfg;
  cfg.delta = 0.25;
  cfg.epsilon = 0.5;
  // 40 ln(16) = 110.9, 40 ln(64) = 166.4, 40 ln(256) = 221.8
  EXPECT_EQ(level_samples(cfg, 1, 0), 111u);
  EXPECT_EQ(level_samples(cfg, 2, 0), 167u);
  EXPECT_EQ(level_samples(cfg, 3, 0), 222u);
  for (std::size_t i = 1; i < 10; ++i) {
    EXPECT_NEAR(double(level_samples(cfg, i + 1, 0) - level_samples(cfg, i, 0)),
                40 * std::log(4.0), 1.0);
  }
}

TEST(Schedule, FastConstCapsAtSample) {
  TournamentConfig cfg;
  cfg.schedule = Schedule::fast_const(10);
  EXPECT_EQ(level_samples(cfg, 3, 100), 30u);
  EXPECT_EQ(level_samples(cfg, 12, 100), 100u);
}

TEST(Schedule, ParseAndPrint) {
  for (auto s : {Schedule::theoretical(), Schedule::fast_const(7), Schedule::full_sample(40)}) {
    auto back = parse_schedule(to_string(s));
    EXPECT_EQ(back.kind, s.kind);
    EXPECT_EQ(back.value, s.value);
  }
  EXPECT_THROW(parse_schedule("fastconst=0"), std::invalid_argument);
  EXPECT_THROW(parse_schedule("fast"), std::invalid_argument);
}

TEST(Knockout, BaseOpsExample) {
  auto vs = random_set(8, 6, 1);
  const OnDemandPairs pairs(vs);
  auto sample = sample_fixed(vs[3], 20, 2);
  TournamentConfig cfg;
  auto res = base_knockout(pairs, sample, cfg);
  EXPECT_EQ(res.ops.scheffe_ops, 140u);
  EXPECT_EQ(res.ops.scheffe_ops, plain_knockout_ops(8, 20));
  EXPECT_EQ(res.levels.size(), 3u);
  EXPECT_FALSE(res.final_round.has_value());
}

TEST(Knockout, FastOpsExample) {
  // 4 * 5 + 2 * 10 + 1 * 15
  auto vs = random_set(8, 6, 1);
  const OnDemandPairs pairs(vs);
  auto sample = sample_fixed(vs[3], 20, 2);
  TournamentConfig cfg;
  cfg.schedule = Schedule::fast_const(5);
  auto res = fast_knockout(pairs, sample, cfg);
  EXPECT_EQ(res.ops.scheffe_ops, 55u);
  EXPECT_EQ(predicted_ops(cfg, 8, 20), 55u);
}

TEST(Knockout, PoolAndFinalRound) {
  // k=8, one to the pool per level:
  // level 1: 7 left, 3 tests x 5; level 2: 4 -> 3 left, 1 test x 10;
  // level 3: 2 -> 1 left, no test. Pool 3 + survivor = 4, 6 pairs x 50.
  auto vs = random_set(8, 6, 3);
  const OnDemandPairs pairs(vs);
  auto sample = sample_fixed(vs[0], 50, 4);
  TournamentConfig cfg;
  cfg.schedule = Schedule::fast_const(5);
  cfg.n_all_pairs = 1;
  auto res = fast_knockout(pairs, sample, cfg);
  EXPECT_EQ(res.ops.scheffe_ops, 325u);
  EXPECT_EQ(predicted_ops(cfg, 8, 50), 325u);
  ASSERT_TRUE(res.final_round.has_value());
  EXPECT_EQ(res.final_round->pool_size, 4u);
  EXPECT_EQ(res.final_round->pairs, 6u);
  EXPECT_EQ(res.pool.size(), 4u);
  EXPECT_NE(std::find(res.pool.begin(), res.pool.end(), res.winner), res.pool.end());
}

TEST(Knockout, SingleHypothesisIsFree) {
  auto vs = random_set(1, 5, 1);
  const OnDemandPairs pairs(vs);
  auto sample = sample_fixed(vs[0], 10, 1);
  TournamentConfig cfg;
  cfg.schedule = Schedule::fast_const(3);
  auto res = fast_knockout(pairs, sample, cfg);
  EXPECT_EQ(res.winner, 0u);
  EXPECT_EQ(res.ops.scheffe_ops, 0u);
  EXPECT_EQ(predicted_ops(cfg, 1, 10), 0u);
}

TEST(Knockout, MeasuredEqualsPredicted) {
  Rng rng(77);
  for (int c = 0; c < 60; ++c) {
    const std::size_t k = 1 + rng.below(120);
    auto vs = random_set(k, 8, rng());
    const OnDemandPairs pairs(vs);
    TournamentConfig cfg;
    cfg.seed = rng();
    cfg.n_all_pairs = rng.below(6);
    cfg.pool_rate = rng.below(3) == 0 ? PoolRate::TheoreticalK13 : PoolRate::Fixed;
    std::uint64_t s = 5 + rng.below(80);
    if (c % 3 == 0) {
      cfg.schedule = Schedule::theoretical();
      cfg.epsilon = 1.0;
      cfg.delta = 0.2;
      s = required_samples(cfg, k, 0);
    } else {
      cfg.schedule = Schedule::fast_const(1 + rng.below(15));
    }
    auto sample = sample_fixed(vs[rng.below(k)], s, rng());
    auto res = fast_knockout(pairs, sample, cfg);
    EXPECT_EQ(res.ops.scheffe_ops, predicted_ops(cfg, k, s)) << "config " << c;
    auto base = base_knockout(pairs, sample, cfg);
    TournamentConfig bcfg = cfg;
    bcfg.schedule = Schedule::full_sample(s);
    EXPECT_EQ(base.ops.scheffe_ops, predicted_ops(bcfg, k, s)) << "config " << c;
  }
}

TEST(Knockout, DeterministicForSeed) {
  auto vs = random_set(50, 10, 5);
  const OnDemandPairs pairs(vs);
  auto sample = sample_fixed(vs[7], 40, 6);
  TournamentConfig cfg;
  cfg.schedule = Schedule::fast_const(4);
  cfg.n_all_pairs = 3;
  cfg.seed = 99;
  auto a = fast_knockout(pairs, sample, cfg);
  auto b = fast_knockout(pairs, sample, cfg);
  EXPECT_EQ(a.winner, b.winner);
  EXPECT_EQ(a.pool, b.pool);
  EXPECT_EQ(a.ops, b.ops);
}

TEST(Knockout, EveryCandidateIsAccountedFor) {
  // Every index is eliminated in exactly one test or reaches the pool.
  Rng rng(4);
  for (int c = 0; c < 20; ++c) {
    const std::size_t k = 2 + rng.below(200);
    auto vs = random_set(k, 4, rng());
    const OnDemandPairs pairs(vs);
    TournamentConfig cfg;
    cfg.schedule = Schedule::fast_const(2);
    cfg.n_all_pairs = rng.below(4);
    cfg.seed = rng();
    auto sample = sample_fixed(vs[0], 30, rng());
    auto res = fast_knockout(pairs, sample, cfg);
    std::size_t tests = 0;
    for (const auto& lvl : res.levels) tests += lvl.pairs;
    const std::set<std::size_t> pool(res.pool.begin(), res.pool.end());
    EXPECT_EQ(pool.size(), res.pool.size());
    // k = tests (one loser each) + pool (+0: the survivor is inside the pool when it is non-empty)
    EXPECT_EQ(tests + (res.pool.empty() ? 1 : res.pool.size()), k) << "k " << k;
    EXPECT_LT(res.winner, k);
  }
}

TEST(Knockout, TheoreticalFinalUsesFreshSamples) {
  auto vs = random_set(27, 6, 8);
  const OnDemandPairs pairs(vs);
  TournamentConfig cfg;
  cfg.epsilon = 1.0;
  cfg.delta = 0.2;
  cfg.pool_rate = PoolRate::TheoreticalK13;
  const auto need = required_samples(cfg, 27, 0);
  auto sample = sample_fixed(vs[0], need, 1);
  auto res = fast_knockout(pairs, sample, cfg);
  ASSERT_TRUE(res.final_round.has_value());
  std::uint64_t max_level = 0;
  for (const auto& l : res.levels) {
    if (l.pairs > 0) max_level = std::max(max_level, l.samples_per_test);
  }
  EXPECT_EQ(res.final_round->sample_offset, max_level);
  EXPECT_EQ(res.final_round->sample_offset + res.final_round->samples, need);
  EXPECT_THROW(fast_knockout(pairs, std::span(sample).first(need - 1), cfg),
               SampleStreamExhausted);
}

TEST(Knockout, FlagsSmallDelta) {
  auto vs = random_set(16, 4, 1);
  const OnDemandPairs pairs(vs);
  TournamentConfig cfg;
  cfg.epsilon = 1.0;
  cfg.delta = 0.1;  // 16^{-1/4} = 0.5
  auto sample = sample_fixed(vs[0], required_samples(cfg, 16, 0), 1);
  EXPECT_TRUE(fast_knockout(pairs, sample, cfg).delta_below_theory_bound);
  cfg.delta = 0.6;
  sample = sample_fixed(vs[0], required_samples(cfg, 16, 0), 1);
  EXPECT_FALSE(fast_knockout(pairs, sample, cfg).delta_below_theory_bound);
}

TEST(AllPairs, MostWinsLowestIndexOnTies) {
  // three identical hypotheses: every test goes to its first argument
  DistributionSet vs({Distribution({0.5, 0.5}), Distribution({0.5, 0.5}), Distribution({0.5, 0.5})});
  const OnDemandPairs pairs(vs);
  std::vector<std::size_t> cands{2, 1, 0};
  std::vector<Element> sample{0, 1};
  OpCounter ops;
  // 2 beats 1 and 0; 1 beats 0
  EXPECT_EQ(all_pairs_tournament(pairs, cands, sample, ops), 2u);
  EXPECT_EQ(ops.scheffe_ops, 6u);
}

TEST(Config, Validation) {
  TournamentConfig cfg;
  cfg.delta = 0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg.delta = 0.1;
  cfg.epsilon = -1;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
}

TEST(Knockout, TwoHypothesesIsOneTest) {
  auto vs = random_set(2, 7, 50);
  const OnDemandPairs pairs(vs);
  auto sample = sample_fixed(vs[1], 33, 51);
  TournamentConfig cfg;
  auto res = base_knockout(pairs, sample, cfg);
  OpCounter ops;
  EXPECT_EQ(res.winner, scheffe_test(vs, 0, 1, sample, ops));
  EXPECT_EQ(res.ops.scheffe_ops, 33u);
}

TEST(Knockout, FastCheaperThanBase) {
  // c lg k <= s
  for (std::size_t k : {8u, 64u, 1000u}) {
    const std::uint64_t s = 60;
    const std::uint64_t c = s / static_cast<std::uint64_t>(std::ceil(std::log2(double(k))));
    TournamentConfig fast;
    fast.schedule = Schedule::fast_const(c);
    TournamentConfig base;
    base.schedule = Schedule::full_sample(s);
    EXPECT_LT(predicted_ops(fast, k, s), predicted_ops(base, k, s)) << "k " << k;
  }
}
