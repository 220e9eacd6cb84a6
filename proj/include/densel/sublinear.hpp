#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "densel/distribution.hpp"
#include "densel/nns.hpp"
#include "densel/scheffe.hpp"

namespace densel {

/// Coordinates where the leader's mass is at least gamma are heavy, the rest
/// light. Both lists are sorted.
struct HeavyLightPartition {
  std::vector<std::size_t> heavy;
  std::vector<std::size_t> light;
  double gamma = 0;
  std::size_t leader = 0;
};

HeavyLightPartition heavy_light(const Distribution& leader, double gamma,
                                std::size_t leader_index = 0);

struct SublinearConfig {
  double epsilon = 0.5;
  double gamma = 0.1;
  std::uint64_t s = 2;
  double radius_const = 4.0;
  double c_inf = 2.0;
  LinfBackend linf_backend = LinfBackend::exact_scan();
  double l2_failure_prob = 0.05;
  double l2_radius_margin = 1.25;  // R = margin * sqrt(T / s2)
  std::size_t l2_max_base_functions = 2048;
  std::uint64_t seed = 0;
  std::size_t threads = 1;

  /// gamma = n^{-5/12}, s = ceil(n / (eps^2 (ln k)^{1/4})),
  /// c_inf = max(2, 4 ln n lnln n); everything else keeps its default.
  static SublinearConfig defaults(std::size_t n, std::size_t k, double epsilon);

  /// radius_const (ln n)^2 lnln n / sqrt(n), with lnln n floored at 1.
  double group_radius(std::size_t n) const;
  /// 1 + s eps^2 / (32 n).
  double l2_approx_c(std::size_t n) const;
  void validate() const;
};

/// Reads `key = value` lines (# comments, blank lines allowed) over a
/// config. Unknown keys and malformed values throw DataError.
void apply_config_file(SublinearConfig& cfg, const std::filesystem::path& path);
void apply_config_value(SublinearConfig& cfg, const std::string& key, const std::string& value);

inline constexpr std::size_t kNoIndex = std::numeric_limits<std::size_t>::max();

struct Group {
  std::size_t leader = 0;
  std::vector<std::uint32_t> members;  // sorted, leader included
  HeavyLightPartition partition;
  std::size_t l2_index = kNoIndex;     // into PreprocessedIndex::l2_indexes
};

struct PreprocessedIndex {
  std::shared_ptr<const DistributionSet> vs;
  SublinearConfig config;
  double radius = 0;
  LinfIndex linf;
  std::vector<Group> groups;
  std::vector<L2LshIndex> l2_indexes;  // shared by groups with equal members and light set

  std::size_t memory_bytes() const;
};

PreprocessedIndex preprocess(std::shared_ptr<const DistributionSet> vs,
                             const SublinearConfig& cfg);

struct SelectionResult {
  std::size_t selected = 0;
  std::size_t linf_choice = 0;
  std::size_t group_size = 0;
  bool used_l2 = false;
  bool l2_fallback = false;
  std::uint64_t linf_evals = 0;
  std::uint64_t l2_evals = 0;
};

/// first gives p-hat (l-inf stage), second gives p-hat' (l2 stage).
SelectionResult select_hypothesis(const PreprocessedIndex& idx, const SampleCounts& first,
                                  const SampleCounts& second, OpCounter& counter);

/// Draws Pois(cfg.s) samples from p, split into independent halves.
SelectionResult select_hypothesis(const PreprocessedIndex& idx, const Distribution& p,
                                  std::uint64_t seed, OpCounter& counter);

/// Z1 = sum over the support of vL of (s p-hat'(i) - s vL(i))^2.
double light_statistic(const SampleCounts& phat_prime, const RestrictedVector& vL, double s);

/// Binary index file: magic "DDEI", format version, dataset, config, indexes.
void save_index(const std::filesystem::path& path, const PreprocessedIndex& idx);
PreprocessedIndex load_index(const std::filesystem::path& path);

}  // namespace densel
