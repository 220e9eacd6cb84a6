#include "densel/scheffe.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace densel {

namespace {

// ceil() that does not round 10.000000000000002 up to 11.
std::uint64_t ceil_count(double x) {
  return static_cast<std::uint64_t>(std::ceil(x * (1.0 - 1e-12)));
}

}  // namespace

std::vector<std::size_t> ScheffePair::scheffe_set() const {
  std::vector<std::size_t> out;
  for (std::size_t c = 0; c < in_set.size(); ++c) {
    if (in_set[c]) out.push_back(c);
  }
  return out;
}

ScheffePair build_scheffe_pair(const DistributionSet& vs, std::size_t i, std::size_t j) {
  if (i >= vs.k() || j >= vs.k()) throw std::out_of_range("scheffe pair index out of range");
  if (i == j) throw std::invalid_argument("scheffe pair needs two distinct hypotheses");
  const auto a = vs[i].probs();
  const auto b = vs[j].probs();
  ScheffePair pair;
  pair.i = i;
  pair.j = j;
  pair.in_set.assign(a.size(), false);
  for (std::size_t c = 0; c < a.size(); ++c) {
    if (a[c] > b[c]) {
      pair.in_set[c] = true;
      pair.mass_i += a[c];
      pair.mass_j += b[c];
    }
  }
  return pair;
}

std::size_t scheffe_test(const ScheffePair& pair, std::span<const Element> samples,
                         OpCounter& counter) {
  if (samples.empty()) return pair.i;
  std::size_t hits = 0;
  for (Element x : samples) hits += pair.in_set[x] ? 1 : 0;
  counter.scheffe_ops += samples.size();
  const double mu = static_cast<double>(hits) / static_cast<double>(samples.size());
  return std::fabs(pair.mass_i - mu) <= std::fabs(pair.mass_j - mu) ? pair.i : pair.j;
}

std::size_t scheffe_test(const DistributionSet& vs, std::size_t i, std::size_t j,
                         std::span<const Element> samples, OpCounter& counter) {
  if (i >= vs.k() || j >= vs.k()) throw std::out_of_range("scheffe pair index out of range");
  if (i == j) throw std::invalid_argument("scheffe pair needs two distinct hypotheses");
  if (samples.empty()) return i;
  const double* a = vs[i].probs().data();
  const double* b = vs[j].probs().data();
  const std::size_t n = vs.n();
  double mass_i = 0;
  double mass_j = 0;
  for (std::size_t c = 0; c < n; ++c) {
    const bool in = a[c] > b[c];
    mass_i += in ? a[c] : 0.0;
    mass_j += in ? b[c] : 0.0;
  }
  std::size_t hits = 0;
  for (Element x : samples) hits += a[x] > b[x] ? 1 : 0;
  counter.scheffe_ops += samples.size();
  const double mu = static_cast<double>(hits) / static_cast<double>(samples.size());
  return std::fabs(mass_i - mu) <= std::fabs(mass_j - mu) ? i : j;
}

std::uint64_t scheffe_sample_size(double delta, double epsilon, LogBase base) {
  if (!(delta > 0 && delta < 1)) throw std::invalid_argument("delta must lie in (0, 1)");
  if (!(epsilon > 0)) throw std::invalid_argument("epsilon must be positive");
  double log_term = std::log(1.0 / delta);
  if (base == LogBase::Two) log_term /= std::numbers::ln2;
  return ceil_count(10.0 * log_term / (epsilon * epsilon));
}

PrecomputedPairs::PrecomputedPairs(const DistributionSet& vs) : vs_(&vs) {
  const std::size_t k = vs.k();
  pairs_.resize(k * k);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      if (i != j) pairs_[i * k + j] = build_scheffe_pair(vs, i, j);
    }
  }
}

const ScheffePair& PrecomputedPairs::stored(std::size_t i, std::size_t j) const {
  const std::size_t k = vs_->k();
  if (i >= k || j >= k) throw std::out_of_range("scheffe pair index out of range");
  if (i == j) throw std::invalid_argument("scheffe pair needs two distinct hypotheses");
  return pairs_[i * k + j];
}

ScheffePair PrecomputedPairs::pair(std::size_t i, std::size_t j) const { return stored(i, j); }

std::size_t PrecomputedPairs::test(std::size_t i, std::size_t j,
                                   std::span<const Element> samples, OpCounter& counter) const {
  return scheffe_test(stored(i, j), samples, counter);
}

}  // namespace densel
