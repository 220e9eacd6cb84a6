#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "densel/rng.hpp"

namespace densel {

/// Domain elements are 0-based indices into [n].
using Element = std::uint32_t;

/// Raised for malformed or inconsistent input data (files, traces, indexes).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kNormalizationTolerance = 1e-9;

/// Dense probability vector over [n]. Entries are non-negative and sum to one
/// within kNormalizationTolerance; construction rejects anything else.
class Distribution {
 public:
  Distribution() = default;
  explicit Distribution(std::vector<double> probs);

  std::size_t size() const noexcept { return probs_.size(); }
  double operator[](std::size_t i) const { return probs_[i]; }
  std::span<const double> probs() const noexcept { return probs_; }

  friend bool operator==(const Distribution&, const Distribution&) = default;

 private:
  std::vector<double> probs_;
};

/// x_A: a length-n vector that agrees with x on the index set A and is zero
/// elsewhere. Not normalized.
class RestrictedVector {
 public:
  RestrictedVector() = default;
  RestrictedVector(std::vector<double> values, std::vector<std::size_t> support);

  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  std::span<const double> values() const noexcept { return values_; }
  const std::vector<std::size_t>& support() const noexcept { return support_; }

 private:
  std::vector<double> values_;
  std::vector<std::size_t> support_;  // sorted, unique
};

/// Per-element counts of a sample drawn from the unknown distribution.
/// The empirical distribution is counts(i) / nominal_s.
struct SampleCounts {
  std::vector<std::uint64_t> counts;
  std::uint64_t total = 0;
  std::uint64_t nominal_s = 0;

  std::size_t size() const noexcept { return counts.size(); }
  double empirical(std::size_t i) const {
    return static_cast<double>(counts[i]) / static_cast<double>(nominal_s);
  }
  std::vector<double> empirical() const;
};

/// k hypotheses over a shared domain [n].
class DistributionSet {
 public:
  DistributionSet() = default;
  explicit DistributionSet(std::vector<Distribution> dists,
                           std::vector<std::string> ids = {});

  std::size_t k() const noexcept { return dists_.size(); }
  std::size_t n() const noexcept { return dists_.empty() ? 0 : dists_.front().size(); }
  const Distribution& operator[](std::size_t i) const { return dists_[i]; }
  const std::vector<Distribution>& dists() const noexcept { return dists_; }
  const std::vector<std::string>& ids() const noexcept { return ids_; }

  auto begin() const noexcept { return dists_.begin(); }
  auto end() const noexcept { return dists_.end(); }

 private:
  std::vector<Distribution> dists_;
  std::vector<std::string> ids_;
};

// --- distances -----------------------------------------------------------

double l1_distance(std::span<const double> a, std::span<const double> b);
double l2_distance(std::span<const double> a, std::span<const double> b);
double l2_distance_squared(std::span<const double> a, std::span<const double> b);
double linf_distance(std::span<const double> a, std::span<const double> b);

inline double l1_distance(const Distribution& a, const Distribution& b) {
  return l1_distance(a.probs(), b.probs());
}
inline double l1_distance(const RestrictedVector& a, const RestrictedVector& b) {
  return l1_distance(a.values(), b.values());
}
inline double l2_distance(const Distribution& a, const Distribution& b) {
  return l2_distance(a.probs(), b.probs());
}
inline double l2_distance(const RestrictedVector& a, const RestrictedVector& b) {
  return l2_distance(a.values(), b.values());
}
inline double linf_distance(const Distribution& a, const Distribution& b) {
  return linf_distance(a.probs(), b.probs());
}
inline double linf_distance(const RestrictedVector& a, const RestrictedVector& b) {
  return linf_distance(a.values(), b.values());
}

/// Total variation distance, half the l1 distance.
inline double tv_distance(const Distribution& a, const Distribution& b) {
  return 0.5 * l1_distance(a, b);
}

RestrictedVector restrict(std::span<const double> x, std::span<const std::size_t> subset);
inline RestrictedVector restrict(const Distribution& x, std::span<const std::size_t> subset) {
  return restrict(x.probs(), subset);
}

// --- sampling ------------------------------------------------------------

/// Walker alias table: O(n) build, O(1) draws.
class AliasSampler {
 public:
  explicit AliasSampler(std::span<const double> probs);

  Element draw(Rng& rng) const;
  std::size_t size() const noexcept { return prob_.size(); }

 private:
  std::vector<double> prob_;
  std::vector<Element> alias_;
};

/// Counts with counts(i) ~ Pois(s * p(i)) independently. Drawn as
/// Pois(s) total samples, each an i.i.d. draw from p.
SampleCounts sample_poissonized(const Distribution& p, std::uint64_t s, std::uint64_t seed);

/// Exactly s i.i.d. draws from p, in draw order.
std::vector<Element> sample_fixed(const Distribution& p, std::size_t s, std::uint64_t seed);

/// Pois(s) i.i.d. draws from p, in draw order.
std::vector<Element> sample_poissonized_stream(const Distribution& p, std::uint64_t s,
                                               std::uint64_t seed);

/// Histogram of a sample stream over [n]; nominal_s defaults to the stream length.
SampleCounts count_samples(std::span<const Element> stream, std::size_t n,
                           std::optional<std::uint64_t> nominal_s = std::nullopt);

/// Two independent Poissonized halves of a Pois(s) draw. Each sample lands in
/// the first half with probability ceil(s/2)/s, so the halves have
/// counts ~ Pois(ceil(s/2) p(i)) and Pois(floor(s/2) p(i)) and are independent.
std::pair<SampleCounts, SampleCounts> split_halves(const Distribution& p, std::uint64_t s,
                                                   std::uint64_t seed);

/// Tail bound P(|Y - lambda| >= t) <= 2 exp(-t^2 / (2 (lambda + t))) for
/// Y ~ Pois(lambda), clamped to 1.
double poisson_tail_bound(double lambda, double t);

}  // namespace densel
