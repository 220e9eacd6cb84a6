#include "densel/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace densel {

namespace {

void require_same_size(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("dimension mismatch: " + std::to_string(a.size()) + " vs " +
                                std::to_string(b.size()));
  }
}

}  // namespace

Distribution::Distribution(std::vector<double> probs) : probs_(std::move(probs)) {
  if (probs_.empty()) {
    throw std::invalid_argument("distribution over an empty domain");
  }
  double sum = 0;
  for (std::size_t i = 0; i < probs_.size(); ++i) {
    const double v = probs_[i];
    if (!std::isfinite(v) || v < 0) {
      throw std::invalid_argument("negative or non-finite probability at index " +
                                  std::to_string(i));
    }
    sum += v;
  }
  if (std::fabs(sum - 1.0) > kNormalizationTolerance) {
    throw std::invalid_argument("probabilities sum to " + std::to_string(sum) +
                                ", expected 1 within 1e-9");
  }
}

RestrictedVector::RestrictedVector(std::vector<double> values, std::vector<std::size_t> support)
    : values_(std::move(values)), support_(std::move(support)) {
  std::sort(support_.begin(), support_.end());
  support_.erase(std::unique(support_.begin(), support_.end()), support_.end());
  std::vector<bool> in_support(values_.size(), false);
  for (std::size_t i : support_) {
    if (i >= values_.size()) throw std::out_of_range("support index out of range");
    in_support[i] = true;
  }
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!in_support[i] && values_[i] != 0.0) {
      throw std::invalid_argument("restricted vector is nonzero outside its support");
    }
  }
}

std::vector<double> SampleCounts::empirical() const {
  std::vector<double> out(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) out[i] = empirical(i);
  return out;
}

DistributionSet::DistributionSet(std::vector<Distribution> dists, std::vector<std::string> ids)
    : dists_(std::move(dists)), ids_(std::move(ids)) {
  if (dists_.empty()) throw std::invalid_argument("distribution set must be non-empty");
  const std::size_t n = dists_.front().size();
  for (const auto& d : dists_) {
    if (d.size() != n) throw std::invalid_argument("distributions do not share a domain size");
  }
  if (!ids_.empty() && ids_.size() != dists_.size()) {
    throw std::invalid_argument("ids must be empty or one per distribution");
  }
}

double l1_distance(std::span<const double> a, std::span<const double> b) {
  require_same_size(a, b);
  double acc = 0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += std::fabs(a[i] - b[i]);
  return acc;
}

double l2_distance_squared(std::span<const double> a, std::span<const double> b) {
  require_same_size(a, b);
  double acc = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

double l2_distance(std::span<const double> a, std::span<const double> b) {
  return std::sqrt(l2_distance_squared(a, b));
}

double linf_distance(std::span<const double> a, std::span<const double> b) {
  require_same_size(a, b);
  double acc = 0;
  for (std::size_t i = 0; i < a.size(); ++i) acc = std::max(acc, std::fabs(a[i] - b[i]));
  return acc;
}

RestrictedVector restrict(std::span<const double> x, std::span<const std::size_t> subset) {
  std::vector<double> values(x.size(), 0.0);
  std::vector<std::size_t> support(subset.begin(), subset.end());
  for (std::size_t i : support) {
    if (i >= x.size()) throw std::out_of_range("restriction index out of range");
    values[i] = x[i];
  }
  return RestrictedVector(std::move(values), std::move(support));
}

AliasSampler::AliasSampler(std::span<const double> probs)
    : prob_(probs.size(), 0.0), alias_(probs.size(), 0) {
  const std::size_t n = probs.size();
  if (n == 0) throw std::invalid_argument("alias table over an empty domain");
  const double total = std::accumulate(probs.begin(), probs.end(), 0.0);
  std::vector<double> scaled(n);
  std::vector<Element> small;
  std::vector<Element> large;
  for (std::size_t i = 0; i < n; ++i) {
    scaled[i] = probs[i] * static_cast<double>(n) / total;
    (scaled[i] < 1.0 ? small : large).push_back(static_cast<Element>(i));
  }
  while (!small.empty() && !large.empty()) {
    const Element s = small.back();
    small.pop_back();
    const Element l = large.back();
    prob_[s] = scaled[s];
    alias_[s] = l;
    scaled[l] = (scaled[l] + scaled[s]) - 1.0;
    if (scaled[l] < 1.0) {
      large.pop_back();
      small.push_back(l);
    }
  }
  for (Element i : large) {
    prob_[i] = 1.0;
    alias_[i] = i;
  }
  // Leftovers from rounding: only reachable when their true mass is ~1.
  for (Element i : small) {
    prob_[i] = scaled[i] > 0 ? 1.0 : 0.0;
    alias_[i] = i;
  }
  // Zero-mass columns must never be emitted, even through rounding slack.
  for (std::size_t i = 0; i < n; ++i) {
    if (probs[i] == 0.0 && alias_[i] == i) {
      const auto best = static_cast<Element>(
          std::max_element(probs.begin(), probs.end()) - probs.begin());
      prob_[i] = 0.0;
      alias_[i] = best;
    }
  }
}

Element AliasSampler::draw(Rng& rng) const {
  const auto column = static_cast<Element>(rng.below(prob_.size()));
  return rng.uniform() < prob_[column] ? column : alias_[column];
}

std::vector<Element> sample_fixed(const Distribution& p, std::size_t s, std::uint64_t seed) {
  AliasSampler sampler(p.probs());
  Rng rng(seed);
  std::vector<Element> out(s);
  for (auto& x : out) x = sampler.draw(rng);
  return out;
}

std::vector<Element> sample_poissonized_stream(const Distribution& p, std::uint64_t s,
                                               std::uint64_t seed) {
  Rng rng(seed);
  const auto total = static_cast<std::size_t>(poisson(static_cast<double>(s), rng));
  AliasSampler sampler(p.probs());
  std::vector<Element> out(total);
  for (auto& x : out) x = sampler.draw(rng);
  return out;
}

SampleCounts count_samples(std::span<const Element> stream, std::size_t n,
                           std::optional<std::uint64_t> nominal_s) {
  SampleCounts sc;
  sc.counts.assign(n, 0);
  for (Element x : stream) {
    if (x >= n) throw std::out_of_range("sample outside the domain");
    ++sc.counts[x];
  }
  sc.total = stream.size();
  sc.nominal_s = nominal_s.value_or(stream.size());
  return sc;
}

SampleCounts sample_poissonized(const Distribution& p, std::uint64_t s, std::uint64_t seed) {
  if (s < 1) throw std::invalid_argument("sample size must be at least 1");
  const auto stream = sample_poissonized_stream(p, s, seed);
  return count_samples(stream, p.size(), s);
}

std::pair<SampleCounts, SampleCounts> split_halves(const Distribution& p, std::uint64_t s,
                                                   std::uint64_t seed) {
  if (s < 2) throw std::invalid_argument("splitting needs s >= 2");
  const std::uint64_t first_s = (s + 1) / 2;
  const std::uint64_t second_s = s / 2;
  const double first_share = static_cast<double>(first_s) / static_cast<double>(s);

  Rng rng(seed);
  const auto total = poisson(static_cast<double>(s), rng);
  AliasSampler sampler(p.probs());

  std::pair<SampleCounts, SampleCounts> halves;
  auto& [first, second] = halves;
  first.counts.assign(p.size(), 0);
  second.counts.assign(p.size(), 0);
  first.nominal_s = first_s;
  second.nominal_s = second_s;
  for (std::uint64_t t = 0; t < total; ++t) {
    const Element x = sampler.draw(rng);
    auto& half = rng.uniform() < first_share ? first : second;
    ++half.counts[x];
    ++half.total;
  }
  return halves;
}

double poisson_tail_bound(double lambda, double t) {
  if (!(t > 0)) throw std::invalid_argument("tail bound needs t > 0");
  if (lambda < 0) throw std::invalid_argument("tail bound needs lambda >= 0");
  return std::min(1.0, 2.0 * std::exp(-t * t / (2.0 * (lambda + t))));
}

}  // namespace densel
