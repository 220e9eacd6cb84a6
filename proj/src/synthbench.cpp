#include "densel/synthbench.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <tuple>

#include "densel/io.hpp"
#include "densel/parallel.hpp"
#include "densel/tournament.hpp"

namespace densel {

DistributionSet gen_half_uniform(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (n < 2 || n % 2 != 0) throw std::invalid_argument("half-uniform needs even n >= 2");
  if (k < 1) throw std::invalid_argument("need k >= 1");
  std::vector<Distribution> out;
  out.reserve(k);
  std::vector<std::size_t> perm(n);
  for (std::size_t j = 0; j < k; ++j) {
    Rng rng(derive_seed(seed, {0x68616c66ULL, j}));
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    for (std::size_t c = 0; c < n / 2; ++c) {
      std::swap(perm[c], perm[c + static_cast<std::size_t>(rng.below(n - c))]);
    }
    std::vector<double> v(n, 0.0);
    for (std::size_t c = 0; c < n / 2; ++c) v[perm[c]] = 2.0 / static_cast<double>(n);
    out.emplace_back(std::move(v));
  }
  return DistributionSet(std::move(out));
}

DistributionSet gen_zipfian(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("zipfian needs n >= 1");
  if (k < 1) throw std::invalid_argument("need k >= 1");
  double harmonic = 0;
  for (std::size_t i = 1; i <= n; ++i) harmonic += 1.0 / static_cast<double>(i);
  std::vector<double> base(n);
  for (std::size_t i = 0; i < n; ++i) base[i] = 1.0 / (static_cast<double>(i + 1) * harmonic);
  std::vector<Distribution> out;
  out.reserve(k);
  for (std::size_t j = 0; j < k; ++j) {
    Rng rng(derive_seed(seed, {0x7a697066ULL, j}));
    std::vector<double> v = base;
    shuffle(std::span<double>(v), rng);
    out.emplace_back(std::move(v));
  }
  return DistributionSet(std::move(out));
}

DistributionSet gen_family(const std::string& family, std::size_t n, std::size_t k,
                           std::uint64_t seed) {
  if (family == "halfuniform") return gen_half_uniform(n, k, seed);
  if (family == "zipfian") return gen_zipfian(n, k, seed);
  throw std::invalid_argument("family must be halfuniform or zipfian, got '" + family + "'");
}

std::vector<GridRow> run_grid(const DistributionSet& vs, const GridSpec& spec) {
  if (vs.k() == 0) throw std::invalid_argument("grid over an empty dataset");
  if (spec.samples.empty() || spec.nallpairs.empty()) {
    throw std::invalid_argument("grid needs at least one sample size and one nallpairs value");
  }
  for (auto s : spec.samples) {
    if (s == 0) throw std::invalid_argument("sample sizes must be positive");
  }
  for (auto c : spec.fastconst) {
    if (c == 0) throw std::invalid_argument("fastconst values must be positive");
  }
  if (spec.trials == 0 || spec.queries == 0) {
    throw std::invalid_argument("grid needs trials >= 1 and queries >= 1");
  }

  struct Run {
    std::uint64_t samples;
    std::uint64_t fastconst;  // 0: base
    std::size_t nallpairs;
  };
  std::vector<Run> runs;
  for (auto s : spec.samples) {
    for (auto nap : spec.nallpairs) runs.push_back({s, 0, nap});
    for (auto c : spec.fastconst) {
      for (auto nap : spec.nallpairs) runs.push_back({s, c, nap});
    }
  }

  const std::size_t k = vs.k();
  std::vector<std::size_t> labels(spec.trials * spec.queries);
  for (std::size_t t = 0; t < spec.trials; ++t) {
    Rng rng(derive_seed(spec.seed, {0x71756572ULL, t}));
    for (std::size_t q = 0; q < spec.queries; ++q) {
      labels[t * spec.queries + q] = static_cast<std::size_t>(rng.below(k));
    }
  }

  struct Outcome {
    bool correct = false;
    std::uint64_t ops = 0;
  };
  std::vector<Outcome> outcomes(labels.size() * runs.size());
  const OnDemandPairs pairs(vs);
  parallel_for(labels.size(), spec.threads, [&](std::size_t job) {
    const std::size_t t = job / spec.queries;
    const std::size_t q = job % spec.queries;
    const std::size_t label = labels[job];
    std::uint64_t current_s = 0;
    std::vector<Element> sample;
    for (std::size_t r = 0; r < runs.size(); ++r) {
      const Run& run = runs[r];
      if (run.samples != current_s) {
        current_s = run.samples;
        sample = sample_fixed(vs[label], current_s, derive_seed(spec.seed, {1, t, q, current_s}));
      }
      TournamentConfig cfg;
      cfg.n_all_pairs = run.nallpairs;
      cfg.pool_rate = PoolRate::Fixed;
      cfg.seed = derive_seed(spec.seed, {2, t, q, r});
      TournamentResult res;
      if (run.fastconst == 0) {
        res = base_knockout(pairs, sample, cfg);
      } else {
        cfg.schedule = Schedule::fast_const(run.fastconst);
        res = fast_knockout(pairs, sample, cfg);
      }
      outcomes[job * runs.size() + r] = {res.winner == label, res.ops.scheffe_ops};
    }
  });

  std::vector<GridRow> rows;
  for (std::size_t t = 0; t < spec.trials; ++t) {
    for (std::size_t r = 0; r < runs.size(); ++r) {
      std::size_t correct = 0;
      std::uint64_t ops = 0;
      for (std::size_t q = 0; q < spec.queries; ++q) {
        const auto& o = outcomes[(t * spec.queries + q) * runs.size() + r];
        correct += o.correct ? 1 : 0;
        ops += o.ops;
      }
      GridRow row;
      row.family = spec.family;
      row.n = vs.n();
      row.k = k;
      row.samples = runs[r].samples;
      row.fastconst = runs[r].fastconst;
      row.nallpairs = runs[r].nallpairs;
      row.mode = runs[r].fastconst == 0 ? "base" : "fast";
      row.trial = t;
      row.accuracy = static_cast<double>(correct) / static_cast<double>(spec.queries);
      row.ops = ops / spec.queries;
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::string grid_csv_header() {
  return "family,n,k,samples,fastconst,nallpairs,mode,trial,accuracy,ops";
}

void write_grid_csv(std::ostream& out, const std::vector<GridRow>& rows) {
  out << grid_csv_header() << '\n';
  for (const auto& r : rows) {
    out << r.family << ',' << r.n << ',' << r.k << ',' << r.samples << ',' << r.fastconst << ','
        << r.nallpairs << ',' << r.mode << ',' << r.trial << ',' << r.accuracy << ',' << r.ops
        << '\n';
  }
}

void write_grid_csv(const std::filesystem::path& path, const std::vector<GridRow>& rows) {
  io::write_atomically(path, [&](std::ostream& out) { write_grid_csv(out, rows); });
}

std::vector<GridPoint> average_over_trials(const std::vector<GridRow>& rows) {
  using Key = std::tuple<std::string, std::uint64_t, std::uint64_t, std::size_t>;
  std::map<Key, std::pair<GridPoint, std::size_t>> acc;
  for (const auto& r : rows) {
    auto& [pt, count] = acc[Key{r.mode, r.samples, r.fastconst, r.nallpairs}];
    pt.mode = r.mode;
    pt.samples = r.samples;
    pt.fastconst = r.fastconst;
    pt.nallpairs = r.nallpairs;
    pt.accuracy += r.accuracy;
    pt.ops = std::max(pt.ops, r.ops);
    ++count;
  }
  std::vector<GridPoint> out;
  for (auto& [key, value] : acc) {
    value.first.accuracy /= static_cast<double>(value.second);
    out.push_back(value.first);
  }
  return out;
}

std::vector<GridPoint> pareto_envelope(const std::vector<GridPoint>& points,
                                       const std::string& mode) {
  std::vector<GridPoint> pts;
  for (const auto& p : points) {
    if (p.mode == mode) pts.push_back(p);
  }
  std::sort(pts.begin(), pts.end(), [](const GridPoint& a, const GridPoint& b) {
    return a.ops != b.ops ? a.ops < b.ops : a.accuracy > b.accuracy;
  });
  std::vector<GridPoint> env;
  double best = -1;
  for (const auto& p : pts) {
    if (p.accuracy > best) {
      env.push_back(p);
      best = p.accuracy;
    }
  }
  return env;
}

std::uint64_t min_ops_for_accuracy(const std::vector<GridPoint>& points, const std::string& mode,
                                   double target) {
  std::uint64_t best = 0;
  for (const auto& p : points) {
    if (p.mode == mode && p.accuracy >= target && (best == 0 || p.ops < best)) best = p.ops;
  }
  return best;
}

}  // namespace densel
