#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "densel/scheffe.hpp"

namespace densel {

/// Per-level sample budget of the knockout stage.
///  - Theoretical: s_i = ceil(10 ln(4^i / delta) / epsilon^2).
///  - FastConst(c): s_i = min(c * i, |sample|).
///  - FullSample(s): s_i = s at every level (the base tournament).
struct Schedule {
  enum class Kind { Theoretical, FastConst, FullSample };
  Kind kind = Kind::Theoretical;
  std::uint64_t value = 0;

  static Schedule theoretical() { return {Kind::Theoretical, 0}; }
  static Schedule fast_const(std::uint64_t c) { return {Kind::FastConst, c}; }
  static Schedule full_sample(std::uint64_t s) { return {Kind::FullSample, s}; }
};

/// How many survivors each level moves into the candidate pool.
enum class PoolRate {
  TheoreticalK13,  // ceil(k^{1/3})
  Fixed,           // n_all_pairs
};

struct TournamentConfig {
  double epsilon = 0.1;
  double delta = 0.1;
  Schedule schedule = Schedule::theoretical();
  std::size_t n_all_pairs = 0;
  PoolRate pool_rate = PoolRate::Fixed;
  std::uint64_t seed = 0;

  void validate() const;
};

struct LevelRecord {
  std::size_t survivors = 0;  // |V_i| on entry
  std::size_t pool_taken = 0;
  std::size_t pairs = 0;
  bool bye = false;
  std::uint64_t samples_per_test = 0;
};

struct FinalRound {
  std::size_t pool_size = 0;  // candidates that play all-pairs, survivor included
  std::uint64_t samples = 0;
  std::uint64_t sample_offset = 0;  // first sample index used
  std::size_t pairs = 0;
};

struct TournamentResult {
  std::size_t winner = 0;
  OpCounter ops;
  std::vector<LevelRecord> levels;
  std::vector<std::size_t> pool;  // final candidate set, survivor included
  std::optional<FinalRound> final_round;
  bool delta_below_theory_bound = false;
};

/// Thrown when a schedule needs more samples than the stream holds.
class SampleStreamExhausted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Samples used by each Scheffe test at level i (1-based).
std::uint64_t level_samples(const TournamentConfig& cfg, std::size_t level,
                            std::uint64_t available);

/// Candidates moved to the pool at one level with |V_i| = survivors.
std::size_t pool_take(const TournamentConfig& cfg, std::size_t k, std::size_t survivors);

/// Sample size of the final all-pairs round for a pool of m candidates:
/// fresh ceil(10 ln(C(m,2) / delta) / epsilon^2) samples under the
/// Theoretical schedule, otherwise the whole query sample (reused).
std::uint64_t final_round_samples(const TournamentConfig& cfg, std::size_t pool_size,
                                  std::uint64_t available);

/// Total Scheffe operations a run performs, from the size recursion alone.
/// Deterministic: independent of the pairing randomness and of the samples.
std::uint64_t predicted_ops(const TournamentConfig& cfg, std::size_t k, std::uint64_t s);

/// Length of sample stream a run consumes.
std::uint64_t required_samples(const TournamentConfig& cfg, std::size_t k, std::uint64_t s);

/// Knockout tournament that uses the whole sample at every level.
/// cfg.schedule is ignored and replaced by FullSample(samples.size()).
TournamentResult base_knockout(const PairSource& pairs, std::span<const Element> samples,
                               const TournamentConfig& cfg);

/// Knockout with a per-level sample schedule, a per-level random candidate
/// pool and a final all-pairs round over the pool and the last survivor.
TournamentResult fast_knockout(const PairSource& pairs, std::span<const Element> samples,
                               const TournamentConfig& cfg);

/// Scheffe tournament over every pair of candidates; most wins, ties to the
/// lowest index.
std::size_t all_pairs_tournament(const PairSource& pairs, std::span<const std::size_t> candidates,
                                 std::span<const Element> samples, OpCounter& counter);

std::string to_string(const Schedule& schedule);
/// Parses "theory", "fastconst=C" or "full=S".
Schedule parse_schedule(const std::string& text);

}  // namespace densel
