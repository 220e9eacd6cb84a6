#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "densel/distribution.hpp"

namespace densel {

/// k distributions, each 2/n on a random n/2-subset of [n]. n must be even.
DistributionSet gen_half_uniform(std::size_t n, std::size_t k, std::uint64_t seed);

/// k random permutations of the Zipf law p(i) = (1/i) / H_n.
DistributionSet gen_zipfian(std::size_t n, std::size_t k, std::uint64_t seed);

/// "halfuniform" or "zipfian".
DistributionSet gen_family(const std::string& family, std::size_t n, std::size_t k,
                           std::uint64_t seed);

struct GridSpec {
  std::string family = "halfuniform";  // label only
  std::vector<std::uint64_t> samples{20, 30, 40, 50, 60};
  std::vector<std::uint64_t> fastconst{5, 10, 15, 20};
  std::vector<std::size_t> nallpairs{0, 10, 20, 30};
  std::size_t trials = 5;   // independent query sets
  std::size_t queries = 20; // per query set
  std::uint64_t seed = 0;
  std::size_t threads = 1;
};

/// One grid point of one query set. ops is the Scheffe operation count of a
/// single query (every query at a grid point costs the same); fastconst is 0
/// in base mode.
struct GridRow {
  std::string family;
  std::size_t n = 0;
  std::size_t k = 0;
  std::uint64_t samples = 0;
  std::uint64_t fastconst = 0;
  std::size_t nallpairs = 0;
  std::string mode;  // "base" or "fast"
  std::size_t trial = 0;
  double accuracy = 0;
  std::uint64_t ops = 0;
};

/// Every query is a fixed-size sample of `samples` draws from a uniformly
/// chosen member; accuracy is the fraction of queries returning that member.
/// Base runs for every (samples, nallpairs), fast for every
/// (samples, fastconst, nallpairs); all runs of one query share its sample.
std::vector<GridRow> run_grid(const DistributionSet& vs, const GridSpec& spec);

std::string grid_csv_header();
void write_grid_csv(std::ostream& out, const std::vector<GridRow>& rows);
void write_grid_csv(const std::filesystem::path& path, const std::vector<GridRow>& rows);

/// A grid point averaged over query sets.
struct GridPoint {
  std::string mode;
  std::uint64_t samples = 0;
  std::uint64_t fastconst = 0;
  std::size_t nallpairs = 0;
  double accuracy = 0;
  std::uint64_t ops = 0;
};

std::vector<GridPoint> average_over_trials(const std::vector<GridRow>& rows);

/// Points of one mode not dominated by another (fewer or equal ops and
/// higher or equal accuracy, one of them strict), sorted by ops.
std::vector<GridPoint> pareto_envelope(const std::vector<GridPoint>& points,
                                       const std::string& mode);

/// Fewest ops among the mode's points with accuracy >= target (0 if none).
std::uint64_t min_ops_for_accuracy(const std::vector<GridPoint>& points, const std::string& mode,
                                   double target);

}  // namespace densel
