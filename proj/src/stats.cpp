#include "densel/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "densel/adversarial.hpp"
#include "densel/parallel.hpp"
#include "densel/scheffe.hpp"
#include "densel/tournament.hpp"

namespace densel {

Distribution random_distribution(std::size_t n, Rng& rng) {
  if (n == 0) throw std::invalid_argument("random distribution needs n >= 1");
  std::vector<double> w(n);
  double total = 0;
  for (auto& x : w) {
    x = -std::log(1.0 - rng.uniform());
    total += x;
  }
  for (auto& x : w) x /= total;
  // absorb rounding so the sum passes the normalization check exactly
  const double sum = std::accumulate(w.begin(), w.end(), 0.0);
  w[std::max_element(w.begin(), w.end()) - w.begin()] += 1.0 - sum;
  return Distribution(std::move(w));
}

double z1_expectation(const Distribution& p, const RestrictedVector& vL, double s) {
  double t = 0;
  double diff2 = 0;
  for (auto i : vL.support()) {
    t += p[i];
    diff2 += (p[i] - vL[i]) * (p[i] - vL[i]);
  }
  return s * t + s * s * diff2;
}

double z1_variance_bound(const Distribution& p, const RestrictedVector& vL, double s) {
  double t = 0;
  double p2 = 0;
  double diff2 = 0;
  for (auto i : vL.support()) {
    t += p[i];
    p2 += p[i] * p[i];
    diff2 += (p[i] - vL[i]) * (p[i] - vL[i]);
  }
  return 4 * s * s * s * std::sqrt(p2) * diff2 + 6 * s * s * p2 + s * t;
}

Z1Stats z1_monte_carlo(const Distribution& p, const RestrictedVector& vL, double s,
                       std::size_t draws, std::uint64_t seed) {
  if (draws < 2) throw std::invalid_argument("need at least two draws");
  if (p.size() != vL.size()) throw std::invalid_argument("length mismatch");
  Rng rng(seed);
  const auto& support = vL.support();
  // Welford
  double mean = 0;
  double m2 = 0;
  for (std::size_t d = 0; d < draws; ++d) {
    double z = 0;
    for (auto i : support) {
      const double x = static_cast<double>(poisson(s * p[i], rng));
      z += (x - s * vL[i]) * (x - s * vL[i]);
    }
    const double delta = z - mean;
    mean += delta / static_cast<double>(d + 1);
    m2 += delta * (z - mean);
  }
  Z1Stats st;
  st.draws = draws;
  st.mean = mean;
  st.variance = m2 / static_cast<double>(draws - 1);
  st.std_error = std::sqrt(st.variance / static_cast<double>(draws));
  st.expected = z1_expectation(p, vL, s);
  st.variance_bound = z1_variance_bound(p, vL, s);
  return st;
}

std::vector<Z1Instance> random_z1_instances(std::size_t count, std::uint64_t seed) {
  std::vector<Z1Instance> out;
  for (std::size_t c = 0; c < count; ++c) {
    Rng rng(derive_seed(seed, {0x7a31ULL, c}));
    const std::size_t n = 4 + static_cast<std::size_t>(rng.below(61));
    auto p = random_distribution(n, rng);
    auto v = random_distribution(n, rng);
    std::vector<std::size_t> light;
    for (std::size_t i = 0; i < n; ++i) {
      if (rng.below(2) == 1) light.push_back(i);
    }
    if (light.empty()) light.push_back(static_cast<std::size_t>(rng.below(n)));
    const double s = 20.0 + static_cast<double>(rng.below(381));
    out.push_back({std::move(p), restrict(v, light), s});
  }
  return out;
}

namespace {

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

std::vector<CheckLine> suite_light_stat(std::size_t draws, std::uint64_t seed) {
  std::vector<CheckLine> out;
  const auto instances = random_z1_instances(10, seed);
  for (std::size_t c = 0; c < instances.size(); ++c) {
    const auto& inst = instances[c];
    const auto st = z1_monte_carlo(inst.p, inst.vL, inst.s, draws, derive_seed(seed, {1, c}));
    const double z = std::fabs(st.mean - st.expected) / st.std_error;
    out.push_back({"z1 mean, instance " + std::to_string(c), z <= 3.0,
                   "mean " + fmt(st.mean) + " expected " + fmt(st.expected) + " (" + fmt(z) +
                       " standard errors)"});
    out.push_back({"z1 variance, instance " + std::to_string(c),
                   st.variance <= st.variance_bound,
                   "variance " + fmt(st.variance) + " bound " + fmt(st.variance_bound)});
  }
  return out;
}

std::vector<CheckLine> suite_scheffe(std::size_t trials, std::uint64_t seed) {
  const double delta = 0.05;
  const double eps = 0.3;
  const std::size_t n = 20;
  const auto s = scheffe_sample_size(delta, eps);
  const double slack = std::sqrt(10.0 * std::log(1.0 / delta) / static_cast<double>(s));
  std::size_t holds = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    Rng rng(derive_seed(seed, {0x73636800ULL, t}));
    auto a = random_distribution(n, rng);
    auto b = random_distribution(n, rng);
    const double lambda = rng.uniform();
    std::vector<double> mix(n);
    for (std::size_t i = 0; i < n; ++i) mix[i] = lambda * a[i] + (1 - lambda) * b[i];
    const Distribution p(std::move(mix));
    const DistributionSet vs({a, b});
    const auto sample = sample_fixed(p, s, derive_seed(seed, {1, t}));
    OpCounter ops;
    const auto w = scheffe_test(build_scheffe_pair(vs, 0, 1), sample, ops);
    const double best = std::min(l1_distance(p, a), l1_distance(p, b));
    if (l1_distance(p, vs[w]) <= 3 * best + slack) ++holds;
  }
  const double rate = static_cast<double>(holds) / static_cast<double>(trials);
  return {{"scheffe guarantee", rate >= 0.95,
           "bound held in " + std::to_string(holds) + "/" + std::to_string(trials) +
               " trials at s = " + std::to_string(s)}};
}

std::vector<CheckLine> suite_ops(std::size_t configs, std::uint64_t seed) {
  std::size_t exact = 0;
  std::string first_mismatch;
  for (std::size_t c = 0; c < configs; ++c) {
    Rng rng(derive_seed(seed, {0x6f7073ULL, c}));
    const std::size_t k = 2 + static_cast<std::size_t>(rng.below(300));
    std::vector<Distribution> dists;
    for (std::size_t j = 0; j < k; ++j) dists.push_back(random_distribution(16, rng));
    const DistributionSet vs(std::move(dists));
    TournamentConfig cfg;
    cfg.seed = rng();
    cfg.n_all_pairs = static_cast<std::size_t>(rng.below(8));
    cfg.pool_rate = rng.below(2) ? PoolRate::Fixed : PoolRate::TheoreticalK13;
    std::uint64_t s = 10 + rng.below(200);
    switch (rng.below(3)) {
      case 0:
        cfg.epsilon = 0.5 + 0.5 * rng.uniform();
        cfg.delta = 0.05 + 0.2 * rng.uniform();
        cfg.schedule = Schedule::theoretical();
        s = required_samples(cfg, k, 0);
        break;
      case 1:
        cfg.schedule = Schedule::fast_const(1 + rng.below(20));
        break;
      default:
        cfg.schedule = Schedule::full_sample(s);
        break;
    }
    const auto& p = vs[static_cast<std::size_t>(rng.below(k))];
    const auto sample = sample_fixed(p, s, derive_seed(seed, {1, c}));
    const OnDemandPairs pairs(vs);
    const auto res = fast_knockout(pairs, sample, cfg);
    const auto predicted = predicted_ops(cfg, k, s);
    if (res.ops.scheffe_ops == predicted) {
      ++exact;
    } else if (first_mismatch.empty()) {
      first_mismatch = " (config " + std::to_string(c) + ": measured " +
                       std::to_string(res.ops.scheffe_ops) + ", predicted " +
                       std::to_string(predicted) + ")";
    }
  }
  return {{"op accounting", exact == configs,
           std::to_string(exact) + "/" + std::to_string(configs) + " configs exact" +
               first_mismatch}};
}

std::vector<CheckLine> suite_adversarial(std::size_t trials, std::uint64_t seed,
                                         std::size_t threads) {
  const auto light = light_adversarial(100, 64, seed);
  const auto lo = naive_failure_rate(light, NaiveMetric::L1, 50, trials ? trials : 500,
                                     derive_seed(seed, {1}), SamplingMode::FixedSize, threads);
  const auto heavy = heavy_adversarial(201, 100);
  const auto ho = naive_failure_rate(heavy, NaiveMetric::L2, 100, trials ? trials : 10000,
                                     derive_seed(seed, {2}), SamplingMode::Poissonized, threads);
  return {{"light instance, l1 empirical nearest neighbor", lo.success_rate() <= 0.05,
           "success rate " + fmt(lo.success_rate()) + " over " + std::to_string(lo.trials) +
               " trials"},
          {"heavy instance, l2 empirical nearest neighbor", ho.failure_rate() >= 0.10,
           "failure rate " + fmt(ho.failure_rate()) + " over " + std::to_string(ho.trials) +
               " trials"}};
}

}  // namespace

std::vector<std::string> verify_suites() { return {"light-stat", "scheffe", "ops", "adversarial"}; }

std::vector<CheckLine> run_verify_suite(const std::string& suite, std::size_t trials,
                                        std::uint64_t seed, std::size_t threads) {
  if (suite == "light-stat" || suite == "appendix-c") return suite_light_stat(trials ? trials : 100000, seed);
  if (suite == "scheffe") return suite_scheffe(trials ? trials : 1000, seed);
  if (suite == "ops") return suite_ops(trials ? trials : 50, seed);
  if (suite == "adversarial") return suite_adversarial(trials, seed, threads);
  throw std::invalid_argument("unknown suite '" + suite + "'");
}

}  // namespace densel
