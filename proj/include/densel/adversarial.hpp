#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include "densel/distribution.hpp"

namespace densel {

struct AdversarialInstance {
  Distribution p;
  DistributionSet qs;
};

/// p uniform on [n]; each q uniform (2/n) on a distinct random n/2-subset,
/// so ||p - q||_1 = 1 for every q. Needs n even and k <= C(n, n/2).
AdversarialInstance light_adversarial(std::size_t n, std::size_t k, std::uint64_t seed);

/// n = 2 n0 + 1, s >= 4:
///   p = (1/2, 1/(2 n0) x n0, 0 x n0)
///   q = (1/2 + 1/sqrt(s), 0 x n0, (1/2 - 1/sqrt(s)) / n0 x n0)
AdversarialInstance heavy_adversarial(std::size_t n, std::uint64_t s);

enum class NaiveMetric { L1, L2, Linf };
enum class SamplingMode { Poissonized, FixedSize };

NaiveMetric parse_naive_metric(const std::string& text);
SamplingMode parse_sampling_mode(const std::string& text);

struct NaiveOutcome {
  std::size_t trials = 0;
  std::size_t successes = 0;  // p at least as close to p-hat as every q
  double success_rate() const { return trials ? double(successes) / double(trials) : 0.0; }
  double failure_rate() const { return trials ? 1.0 - success_rate() : 0.0; }
};

/// Exact nearest neighbor of the empirical distribution (s samples from p)
/// over {p} and the qs, under `metric`, repeated `trials` times.
NaiveOutcome naive_failure_rate(const AdversarialInstance& inst, NaiveMetric metric,
                                std::uint64_t s, std::size_t trials, std::uint64_t seed,
                                SamplingMode mode, std::size_t threads = 1);

}  // namespace densel
