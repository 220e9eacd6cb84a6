#include "densel/tournament.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace densel {

namespace {

// ceil() that does not round 10.000000000000002 up to 11.
std::uint64_t ceil_count(double x) {
  return static_cast<std::uint64_t>(std::ceil(x * (1.0 - 1e-12)));
}

std::uint64_t theoretical_level_samples(const TournamentConfig& cfg, std::size_t level) {
  const double log_term = static_cast<double>(level) * std::log(4.0) + std::log(1.0 / cfg.delta);
  return ceil_count(10.0 * log_term / (cfg.epsilon * cfg.epsilon));
}

struct KnockoutShape {
  std::uint64_t ops = 0;
  std::uint64_t knockout_samples = 0;  // largest per-test sample actually used
  std::size_t pool = 0;
  bool survivor = false;
};

KnockoutShape knockout_shape(const TournamentConfig& cfg, std::size_t k, std::uint64_t s) {
  KnockoutShape shape;
  std::size_t size = k;
  std::size_t level = 0;
  while (size > 1) {
    ++level;
    const std::size_t take = pool_take(cfg, k, size);
    shape.pool += take;
    size -= take;
    const std::size_t pairs = size / 2;
    if (pairs > 0) {
      const std::uint64_t per_test = level_samples(cfg, level, s);
      shape.ops += pairs * per_test;
      shape.knockout_samples = std::max(shape.knockout_samples, per_test);
    }
    size = pairs + size % 2;
  }
  shape.survivor = size == 1;
  return shape;
}

TournamentResult run_knockout(const PairSource& pairs, std::span<const Element> samples,
                              const TournamentConfig& cfg) {
  cfg.validate();
  const auto& vs = pairs.distributions();
  const std::size_t k = vs.k();
  const std::uint64_t available = samples.size();

  TournamentResult result;
  if (cfg.schedule.kind == Schedule::Kind::Theoretical) {
    result.delta_below_theory_bound = cfg.delta < std::pow(static_cast<double>(k), -0.25);
  }

  Rng rng(cfg.seed);
  std::vector<std::size_t> alive(k);
  std::iota(alive.begin(), alive.end(), std::size_t{0});
  std::vector<std::size_t> next;
  std::uint64_t knockout_samples = 0;

  for (std::size_t level = 1; alive.size() > 1; ++level) {
    LevelRecord rec;
    rec.survivors = alive.size();
    shuffle(std::span<std::size_t>(alive), rng);

    const std::size_t take = pool_take(cfg, k, alive.size());
    result.pool.insert(result.pool.end(), alive.begin(), alive.begin() + take);
    alive.erase(alive.begin(), alive.begin() + take);
    rec.pool_taken = take;

    rec.pairs = alive.size() / 2;
    rec.samples_per_test = level_samples(cfg, level, available);
    if (rec.pairs > 0 && rec.samples_per_test > available) {
      throw SampleStreamExhausted("level " + std::to_string(level) + " needs " +
                                  std::to_string(rec.samples_per_test) + " samples, stream has " +
                                  std::to_string(available));
    }
    const auto level_sample = samples.first(std::min(rec.samples_per_test, available));

    next.clear();
    for (std::size_t p = 0; p < rec.pairs; ++p) {
      next.push_back(pairs.test(alive[2 * p], alive[2 * p + 1], level_sample, result.ops));
    }
    if (rec.pairs > 0) knockout_samples = std::max(knockout_samples, rec.samples_per_test);
    if (alive.size() % 2 == 1) {
      next.push_back(alive.back());
      rec.bye = true;
    }
    alive.swap(next);
    result.levels.push_back(rec);
  }

  if (result.pool.empty()) {
    result.winner = alive.front();
    return result;
  }
  if (!alive.empty()) result.pool.push_back(alive.front());
  if (result.pool.size() == 1) {
    result.winner = result.pool.front();
    return result;
  }

  FinalRound round;
  round.pool_size = result.pool.size();
  round.samples = final_round_samples(cfg, round.pool_size, available);
  round.sample_offset =
      cfg.schedule.kind == Schedule::Kind::Theoretical ? knockout_samples : 0;
  round.pairs = round.pool_size * (round.pool_size - 1) / 2;
  if (round.sample_offset + round.samples > available) {
    throw SampleStreamExhausted("final round needs samples [" +
                                std::to_string(round.sample_offset) + ", " +
                                std::to_string(round.sample_offset + round.samples) +
                                "), stream has " + std::to_string(available));
  }
  result.winner = all_pairs_tournament(pairs, result.pool,
                                       samples.subspan(round.sample_offset, round.samples),
                                       result.ops);
  result.final_round = round;
  return result;
}

}  // namespace

void TournamentConfig::validate() const {
  if (!(delta > 0 && delta < 1)) throw std::invalid_argument("delta must lie in (0, 1)");
  if (!(epsilon > 0)) throw std::invalid_argument("epsilon must be positive");
  if (schedule.kind == Schedule::Kind::FastConst && schedule.value == 0) {
    throw std::invalid_argument("fastconst must be positive");
  }
}

std::uint64_t level_samples(const TournamentConfig& cfg, std::size_t level,
                            std::uint64_t available) {
  switch (cfg.schedule.kind) {
    case Schedule::Kind::Theoretical:
      return theoretical_level_samples(cfg, level);
    case Schedule::Kind::FastConst:
      return std::min<std::uint64_t>(cfg.schedule.value * level, available);
    case Schedule::Kind::FullSample:
      return cfg.schedule.value;
  }
  return 0;
}

std::size_t pool_take(const TournamentConfig& cfg, std::size_t k, std::size_t survivors) {
  std::size_t rate = cfg.n_all_pairs;
  if (cfg.pool_rate == PoolRate::TheoreticalK13) {
    rate = static_cast<std::size_t>(ceil_count(std::cbrt(static_cast<double>(k))));
  }
  return std::min(rate, survivors);
}

std::uint64_t final_round_samples(const TournamentConfig& cfg, std::size_t pool_size,
                                  std::uint64_t available) {
  switch (cfg.schedule.kind) {
    case Schedule::Kind::Theoretical: {
      const double pairs = static_cast<double>(pool_size) * static_cast<double>(pool_size - 1) / 2;
      return ceil_count(10.0 * std::log(pairs / cfg.delta) / (cfg.epsilon * cfg.epsilon));
    }
    case Schedule::Kind::FastConst:
      return available;
    case Schedule::Kind::FullSample:
      return cfg.schedule.value;
  }
  return 0;
}

std::uint64_t predicted_ops(const TournamentConfig& cfg, std::size_t k, std::uint64_t s) {
  const auto shape = knockout_shape(cfg, k, s);
  if (shape.pool == 0) return shape.ops;
  const std::size_t m = shape.pool + (shape.survivor ? 1 : 0);
  if (m < 2) return shape.ops;
  return shape.ops + m * (m - 1) / 2 * final_round_samples(cfg, m, s);
}

std::uint64_t required_samples(const TournamentConfig& cfg, std::size_t k, std::uint64_t s) {
  const auto shape = knockout_shape(cfg, k, s);
  std::uint64_t need = shape.knockout_samples;
  const std::size_t m = shape.pool + (shape.survivor ? 1 : 0);
  if (shape.pool > 0 && m >= 2) {
    const std::uint64_t final_s = final_round_samples(cfg, m, s);
    need = cfg.schedule.kind == Schedule::Kind::Theoretical ? need + final_s
                                                            : std::max(need, final_s);
  }
  return need;
}

TournamentResult base_knockout(const PairSource& pairs, std::span<const Element> samples,
                               const TournamentConfig& cfg) {
  TournamentConfig base = cfg;
  base.schedule = Schedule::full_sample(samples.size());
  return run_knockout(pairs, samples, base);
}

TournamentResult fast_knockout(const PairSource& pairs, std::span<const Element> samples,
                               const TournamentConfig& cfg) {
  return run_knockout(pairs, samples, cfg);
}

std::size_t all_pairs_tournament(const PairSource& pairs, std::span<const std::size_t> candidates,
                                 std::span<const Element> samples, OpCounter& counter) {
  if (candidates.empty()) throw std::invalid_argument("all-pairs tournament over no candidates");
  std::vector<std::size_t> wins(candidates.size(), 0);
  for (std::size_t x = 0; x < candidates.size(); ++x) {
    for (std::size_t y = x + 1; y < candidates.size(); ++y) {
      const auto w = pairs.test(candidates[x], candidates[y], samples, counter);
      ++wins[w == candidates[x] ? x : y];
    }
  }
  std::size_t best = 0;
  for (std::size_t x = 1; x < candidates.size(); ++x) {
    if (wins[x] > wins[best] || (wins[x] == wins[best] && candidates[x] < candidates[best])) {
      best = x;
    }
  }
  return candidates[best];
}

std::string to_string(const Schedule& schedule) {
  switch (schedule.kind) {
    case Schedule::Kind::Theoretical:
      return "theory";
    case Schedule::Kind::FastConst:
      return "fastconst=" + std::to_string(schedule.value);
    case Schedule::Kind::FullSample:
      return "full=" + std::to_string(schedule.value);
  }
  return {};
}

Schedule parse_schedule(const std::string& text) {
  if (text == "theory") return Schedule::theoretical();
  const auto eq = text.find('=');
  if (eq != std::string::npos) {
    const std::string key = text.substr(0, eq);
    const std::string val = text.substr(eq + 1);
    std::size_t pos = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(val, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos == val.size() && !val.empty() && v > 0) {
      if (key == "fastconst") return Schedule::fast_const(v);
      if (key == "full") return Schedule::full_sample(v);
    }
  }
  throw std::invalid_argument("schedule must be theory, fastconst=C or full=S, got '" + text +
                              "'");
}

}  // namespace densel
