#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

#include "densel/distribution.hpp"
#include "densel/scheffe.hpp"

namespace densel {

// ---------------------------------------------------------------------------
// l-infinity nearest neighbor
// ---------------------------------------------------------------------------

/// ExactScan evaluates every stored distribution. CoordinateSample estimates
/// the l-inf distance on `coords` sampled coordinates, `reps` independent
/// times, and re-checks the `top` best estimates of each repetition exactly.
struct LinfBackend {
  enum class Kind { ExactScan, CoordinateSample };
  Kind kind = Kind::ExactScan;
  std::size_t coords = 0;
  std::size_t reps = 0;
  std::size_t top = 0;  // 0 means ceil(sqrt(k))

  static LinfBackend exact_scan() { return {}; }
  static LinfBackend coordinate_sample(std::size_t coords, std::size_t reps,
                                       std::size_t top = 0) {
    return {Kind::CoordinateSample, coords, reps, top};
  }
};

struct NnsResult {
  std::size_t index = 0;
  double distance = 0;
  std::size_t candidates = 0;  // full distance evaluations
  bool fallback = false;       // LSH found no candidate and scanned everything
};

class LinfIndex {
 public:
  LinfIndex() = default;
  /// approx_c is the approximation factor the index advertises; ExactScan is
  /// always exact and reports 1.
  LinfIndex(std::shared_ptr<const DistributionSet> vs, LinfBackend backend, std::uint64_t seed,
            double approx_c = 1.0);

  NnsResult query(std::span<const double> q, OpCounter& counter) const;

  const LinfBackend& backend() const noexcept { return backend_; }
  double approx_c() const noexcept { return approx_c_; }
  std::size_t size() const noexcept { return vs_ ? vs_->k() : 0; }

  void write(std::ostream& out) const;
  static LinfIndex read(std::istream& in, std::shared_ptr<const DistributionSet> vs);

 private:
  std::shared_ptr<const DistributionSet> vs_;
  LinfBackend backend_;
  double approx_c_ = 1.0;
  std::vector<std::vector<std::size_t>> sampled_;  // one coordinate set per repetition
};

// ---------------------------------------------------------------------------
// l2 locality-sensitive hashing
// ---------------------------------------------------------------------------

/// Gaussian (2-stable) projections h(x) = floor((a.x + b) / w). Tables are
/// the pairs of `base_functions` independent hash functions of
/// projections/2 projections each, so there are m(m-1)/2 tables of width
/// `projections`; a stored vector is a candidate when it shares a bucket with
/// the query in at least one table.
struct L2LshParams {
  std::size_t projections = 2;     // r, even
  std::size_t base_functions = 2;  // m; tables = m(m-1)/2
  double bucket_width = 1.0;       // w
  double approx_c = 2.0;
  std::uint64_t seed = 0;

  std::size_t tables() const noexcept { return base_functions * (base_functions - 1) / 2; }
};

/// Probability that two points at distance d share one Gaussian bucket of
/// width w, as a function of ratio = w / d.
double gaussian_collision_probability(double ratio);

/// Parameters by the standard rho rule for `points` stored vectors: w is four
/// times the target distance scale R, r = log_{1/p2}(points) rounded up to an
/// even count, and m is the smallest count for which a point at distance R
/// is missed by every table with probability at most failure_prob.
L2LshParams standard_l2_params(std::size_t points, double approx_c, double distance_scale,
                               std::uint64_t seed, double failure_prob = 0.05,
                               std::size_t max_base_functions = 2048);

class L2LshIndex {
 public:
  L2LshIndex() = default;
  /// Every vector must share one support; ids label the results (defaults
  /// to positions).
  L2LshIndex(std::span<const RestrictedVector> vecs, std::vector<std::size_t> ids,
             const L2LshParams& params);

  /// q has full domain length; only the index's support coordinates are read.
  NnsResult query(std::span<const double> q, OpCounter& counter) const;
  NnsResult exact_query(std::span<const double> q, OpCounter& counter) const;

  const L2LshParams& params() const noexcept { return params_; }
  const std::vector<std::size_t>& support() const noexcept { return support_; }
  const std::vector<std::size_t>& ids() const noexcept { return ids_; }
  std::size_t size() const noexcept { return ids_.size(); }
  std::size_t memory_bytes() const noexcept;

  void write(std::ostream& out) const;
  static L2LshIndex read(std::istream& in);

 private:
  std::uint64_t bucket_key(std::size_t base, std::span<const double> compact) const;
  std::vector<double> compact(std::span<const double> q) const;
  double distance_squared(std::size_t pos, std::span<const double> compact_q) const;
  void hash_all();

  L2LshParams params_;
  std::size_t n_ = 0;
  std::vector<std::size_t> support_;
  std::vector<std::size_t> ids_;
  std::vector<double> rows_;     // size() x support_.size()
  std::vector<double> proj_;     // m x (r/2) x support_.size()
  std::vector<double> offsets_;  // m x (r/2)
  std::vector<std::vector<std::pair<std::uint64_t, std::uint32_t>>> buckets_;  // sorted
};

/// Brute-force reference: index of the minimum distance, ties to the lowest.
std::size_t exact_argmin_l2(const DistributionSet& vs, std::span<const double> q);
std::size_t exact_argmin_linf(const DistributionSet& vs, std::span<const double> q);
std::size_t exact_argmin_l1(const DistributionSet& vs, std::span<const double> q);

}  // namespace densel
