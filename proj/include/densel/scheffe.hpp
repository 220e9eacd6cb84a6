#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "densel/distribution.hpp"

namespace densel {

/// Cost accounting. scheffe_ops counts one per (pair, sampled element)
/// membership comparison; nns_candidate_evals counts full distance
/// evaluations made by nearest-neighbor indexes. Both only grow.
struct OpCounter {
  std::uint64_t scheffe_ops = 0;
  std::uint64_t nns_candidate_evals = 0;

  OpCounter& operator+=(const OpCounter& o) noexcept {
    scheffe_ops += o.scheffe_ops;
    nns_candidate_evals += o.nns_candidate_evals;
    return *this;
  }
  friend bool operator==(const OpCounter&, const OpCounter&) = default;
};

/// Scheffe set S = {c : v_i(c) > v_j(c)} with the masses v_i(S), v_j(S).
/// Coordinates where the two distributions tie are not in S.
struct ScheffePair {
  std::size_t i = 0;
  std::size_t j = 0;
  std::vector<bool> in_set;
  double mass_i = 0;
  double mass_j = 0;

  bool contains(Element c) const { return in_set[c]; }
  std::vector<std::size_t> scheffe_set() const;
};

ScheffePair build_scheffe_pair(const DistributionSet& vs, std::size_t i, std::size_t j);

/// Returns pair.i when |mass_i - mu_S| <= |mass_j - mu_S|, otherwise pair.j,
/// where mu_S is the fraction of samples in S. Adds samples.size() to
/// counter.scheffe_ops. An empty sample returns pair.i at no cost.
std::size_t scheffe_test(const ScheffePair& pair, std::span<const Element> samples,
                         OpCounter& counter);

/// Same decision as scheffe_test(build_scheffe_pair(vs, i, j), ...) without
/// materializing the set: one pass for the masses, then a per-sample
/// comparison v_i(x) > v_j(x).
std::size_t scheffe_test(const DistributionSet& vs, std::size_t i, std::size_t j,
                         std::span<const Element> samples, OpCounter& counter);

enum class LogBase { Natural, Two };

/// ceil(10 log(1/delta) / epsilon^2).
std::uint64_t scheffe_sample_size(double delta, double epsilon,
                                  LogBase base = LogBase::Natural);

/// Where tournaments obtain ScheffePairs. Building a pair is preprocessing
/// and is never charged to the OpCounter.
class PairSource {
 public:
  virtual ~PairSource() = default;
  virtual const DistributionSet& distributions() const = 0;
  /// Returns the pair for (i, j) in that argument order.
  virtual ScheffePair pair(std::size_t i, std::size_t j) const = 0;
  /// Runs the Scheffe test for (i, j); the default builds the pair.
  virtual std::size_t test(std::size_t i, std::size_t j, std::span<const Element> samples,
                           OpCounter& counter) const {
    return scheffe_test(pair(i, j), samples, counter);
  }
};

/// Builds each requested pair on demand in O(n). Suitable for large k, where
/// storing all k^2 pairs is not practical.
class OnDemandPairs final : public PairSource {
 public:
  explicit OnDemandPairs(const DistributionSet& vs) : vs_(&vs) {}
  const DistributionSet& distributions() const override { return *vs_; }
  ScheffePair pair(std::size_t i, std::size_t j) const override {
    return build_scheffe_pair(*vs_, i, j);
  }
  std::size_t test(std::size_t i, std::size_t j, std::span<const Element> samples,
                   OpCounter& counter) const override {
    return scheffe_test(*vs_, i, j, samples, counter);
  }

 private:
  const DistributionSet* vs_;
};

/// All ordered pairs built up front, O(k^2 n) time and memory.
class PrecomputedPairs final : public PairSource {
 public:
  explicit PrecomputedPairs(const DistributionSet& vs);
  const DistributionSet& distributions() const override { return *vs_; }
  ScheffePair pair(std::size_t i, std::size_t j) const override;
  std::size_t test(std::size_t i, std::size_t j, std::span<const Element> samples,
                   OpCounter& counter) const override;

 private:
  const ScheffePair& stored(std::size_t i, std::size_t j) const;
  const DistributionSet* vs_;
  std::vector<ScheffePair> pairs_;  // row-major k x k, diagonal unused
};

}  // namespace densel
