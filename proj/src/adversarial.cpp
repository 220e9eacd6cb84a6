#include "densel/adversarial.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <stdexcept>

#include "densel/parallel.hpp"

namespace densel {

namespace {

// C(n, n/2) >= k, without overflow.
bool half_binomial_at_least(std::size_t n, std::size_t k) {
  const std::size_t m = n / 2;
  std::uint64_t c = 1;
  for (std::size_t i = 0; i < m; ++i) {
    // C(n, i+1) = C(n, i) (n - i) / (i + 1), exact at every step
    if (c > std::numeric_limits<std::uint64_t>::max() / (n - i)) return true;
    c = c * (n - i) / (i + 1);
  }
  return c >= k;
}

double metric_distance(NaiveMetric metric, std::span<const double> a, std::span<const double> b) {
  switch (metric) {
    case NaiveMetric::L1:
      return l1_distance(a, b);
    case NaiveMetric::L2:
      return l2_distance_squared(a, b);
    case NaiveMetric::Linf:
      return linf_distance(a, b);
  }
  return 0;
}

}  // namespace

AdversarialInstance light_adversarial(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (n < 2 || n % 2 != 0) throw std::invalid_argument("light instance needs even n >= 2");
  if (k < 1) throw std::invalid_argument("light instance needs k >= 1");
  if (!half_binomial_at_least(n, k)) {
    throw std::invalid_argument("k exceeds the number of n/2-subsets");
  }
  Rng rng(derive_seed(seed, {0x6c69676874ULL}));
  std::vector<std::size_t> perm(n);
  std::set<std::vector<bool>> seen;
  std::vector<Distribution> qs;
  qs.reserve(k);
  while (qs.size() < k) {
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    for (std::size_t c = 0; c < n / 2; ++c) {
      std::swap(perm[c], perm[c + static_cast<std::size_t>(rng.below(n - c))]);
    }
    std::vector<bool> mask(n, false);
    for (std::size_t c = 0; c < n / 2; ++c) mask[perm[c]] = true;
    if (!seen.insert(mask).second) continue;
    std::vector<double> q(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      if (mask[i]) q[i] = 2.0 / static_cast<double>(n);
    }
    qs.emplace_back(std::move(q));
  }
  return {Distribution(std::vector<double>(n, 1.0 / static_cast<double>(n))),
          DistributionSet(std::move(qs))};
}

AdversarialInstance heavy_adversarial(std::size_t n, std::uint64_t s) {
  if (n < 3 || n % 2 == 0) throw std::invalid_argument("heavy instance needs odd n >= 3");
  if (s < 4) throw std::invalid_argument("heavy instance needs s >= 4");
  const std::size_t n0 = (n - 1) / 2;
  const double root = 1.0 / std::sqrt(static_cast<double>(s));
  std::vector<double> p(n, 0.0);
  std::vector<double> q(n, 0.0);
  p[0] = 0.5;
  q[0] = 0.5 + root;
  for (std::size_t i = 1; i <= n0; ++i) {
    p[i] = 1.0 / (2.0 * static_cast<double>(n0));
    q[n0 + i] = (0.5 - root) / static_cast<double>(n0);
  }
  std::vector<Distribution> qs;
  qs.emplace_back(std::move(q));
  return {Distribution(std::move(p)), DistributionSet(std::move(qs))};
}

NaiveMetric parse_naive_metric(const std::string& text) {
  if (text == "l1") return NaiveMetric::L1;
  if (text == "l2") return NaiveMetric::L2;
  if (text == "linf") return NaiveMetric::Linf;
  throw std::invalid_argument("metric must be l1, l2 or linf, got '" + text + "'");
}

SamplingMode parse_sampling_mode(const std::string& text) {
  if (text == "poisson") return SamplingMode::Poissonized;
  if (text == "fixed") return SamplingMode::FixedSize;
  throw std::invalid_argument("sampling must be poisson or fixed, got '" + text + "'");
}

NaiveOutcome naive_failure_rate(const AdversarialInstance& inst, NaiveMetric metric,
                                std::uint64_t s, std::size_t trials, std::uint64_t seed,
                                SamplingMode mode, std::size_t threads) {
  if (s < 1) throw std::invalid_argument("s must be positive");
  const std::size_t n = inst.p.size();
  std::vector<char> success(trials, 0);
  parallel_for(trials, threads, [&](std::size_t t) {
    const auto trial_seed = derive_seed(seed, {t});
    SampleCounts counts = mode == SamplingMode::Poissonized
                              ? sample_poissonized(inst.p, s, trial_seed)
                              : count_samples(sample_fixed(inst.p, s, trial_seed), n);
    counts.nominal_s = s;
    const auto phat = counts.empirical();
    const double dp = metric_distance(metric, inst.p.probs(), phat);
    bool ok = true;
    for (const auto& q : inst.qs) {
      if (metric_distance(metric, q.probs(), phat) < dp) {
        ok = false;
        break;
      }
    }
    success[t] = ok ? 1 : 0;
  });
  NaiveOutcome out;
  out.trials = trials;
  out.successes = static_cast<std::size_t>(std::count(success.begin(), success.end(), 1));
  return out;
}

}  // namespace densel
