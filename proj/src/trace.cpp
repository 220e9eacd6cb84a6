#include "densel/trace.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "densel/io.hpp"
#include "densel/parallel.hpp"
#include "densel/scheffe.hpp"
#include "densel/tournament.hpp"

namespace densel {

namespace {

constexpr const char* kTraceHeader = "timestamp_us,src_key";
constexpr std::int64_t kChunkSpanUs = 170000;
constexpr std::int64_t kTraceEpochUs = 1700000000000000;

std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

std::string key_name(std::size_t i) {
  std::ostringstream os;
  os << "10." << ((i >> 16) & 255) << '.' << ((i >> 8) & 255) << '.' << (i & 255);
  return os.str();
}

}  // namespace

std::vector<Packet> parse_trace(std::istream& in, const std::string& source) {
  std::vector<Packet> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = strip_cr(line);
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    if (lineno == 1 && line == kTraceHeader) continue;
    const auto comma = line.find(',');
    auto fail = [&](const std::string& why) {
      return DataError(source + ":" + std::to_string(lineno) + ": " + why);
    };
    if (comma == std::string::npos) throw fail("expected timestamp_us,src_key");
    if (line.find(',', comma + 1) != std::string::npos) throw fail("too many fields");
    Packet p;
    const char* b = line.data();
    const char* e = b + comma;
    auto [ptr, ec] = std::from_chars(b, e, p.timestamp_us);
    if (ec != std::errc() || ptr != e || comma == 0) throw fail("bad timestamp");
    p.src_key = line.substr(comma + 1);
    if (p.src_key.empty()) throw fail("empty source key");
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<Packet> parse_trace(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open trace file " + path.string());
  return parse_trace(in, path.string());
}

void write_trace(std::ostream& out, const std::vector<Packet>& packets) {
  out << kTraceHeader << '\n';
  for (const auto& p : packets) out << p.timestamp_us << ',' << p.src_key << '\n';
}

void write_trace(const std::filesystem::path& path, const std::vector<Packet>& packets) {
  io::write_atomically(path, [&](std::ostream& out) { write_trace(out, packets); });
}

ChunkSpec parse_chunk_spec(const std::string& text) {
  const auto eq = text.find('=');
  if (eq != std::string::npos) {
    const std::string key = text.substr(0, eq);
    const std::string val = text.substr(eq + 1);
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(val.data(), val.data() + val.size(), v);
    if (ec == std::errc() && ptr == val.data() + val.size() && v > 0) {
      if (key == "count") return ChunkSpec::by_count(v);
      if (key == "time") return ChunkSpec::by_time_ms(v);
    }
  }
  throw std::invalid_argument("chunk must be count=M or time=MS, got '" + text + "'");
}

ChunkedTrace chunk_to_distributions(const std::vector<Packet>& packets, ChunkSpec spec,
                                    std::ostream* warn) {
  if (spec.value == 0) throw std::invalid_argument("chunk size must be positive");
  ChunkedTrace out;
  std::unordered_map<std::string, std::size_t> ids;
  std::vector<std::size_t> key_of(packets.size());
  for (std::size_t i = 0; i < packets.size(); ++i) {
    auto [it, inserted] = ids.try_emplace(packets[i].src_key, out.dictionary.size());
    if (inserted) out.dictionary.push_back(packets[i].src_key);
    key_of[i] = it->second;
  }
  const std::size_t n = out.dictionary.size();

  std::vector<std::size_t> chunk_of(packets.size());
  std::size_t slots = 0;
  if (spec.kind == ChunkSpec::Kind::ByCount) {
    for (std::size_t i = 0; i < packets.size(); ++i) chunk_of[i] = i / spec.value;
    slots = packets.empty() ? 0 : (packets.size() - 1) / spec.value + 1;
  } else if (!packets.empty()) {
    std::int64_t t0 = std::numeric_limits<std::int64_t>::max();
    for (const auto& p : packets) t0 = std::min(t0, p.timestamp_us);
    const auto width = static_cast<std::int64_t>(spec.value) * 1000;
    for (std::size_t i = 0; i < packets.size(); ++i) {
      chunk_of[i] = static_cast<std::size_t>((packets[i].timestamp_us - t0) / width);
      slots = std::max(slots, chunk_of[i] + 1);
    }
  }

  std::vector<std::vector<std::uint64_t>> counts(slots);
  for (std::size_t i = 0; i < packets.size(); ++i) {
    auto& c = counts[chunk_of[i]];
    if (c.empty()) c.assign(n, 0);
    ++c[key_of[i]];
  }
  std::vector<Distribution> dists;
  for (std::size_t c = 0; c < slots; ++c) {
    if (counts[c].empty()) {
      ++out.dropped_empty;
      if (warn) *warn << "warning: chunk " << c << " has no packets, dropped\n";
      continue;
    }
    const std::uint64_t total = std::accumulate(counts[c].begin(), counts[c].end(), std::uint64_t{0});
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) {
      v[i] = static_cast<double>(counts[c][i]) / static_cast<double>(total);
    }
    dists.emplace_back(std::move(v));
    out.packets.push_back(total);
    counts[c].clear();
    counts[c].shrink_to_fit();
  }
  if (!dists.empty()) out.dists = DistributionSet(std::move(dists));
  return out;
}

void write_dictionary(const std::filesystem::path& path, const std::vector<std::string>& dict) {
  io::write_atomically(path, [&](std::ostream& out) {
    for (const auto& key : dict) out << key << '\n';
  });
}

std::vector<std::string> read_dictionary(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open dictionary file " + path.string());
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) out.push_back(strip_cr(line));
  return out;
}

std::vector<Packet> gen_synthetic_trace(std::size_t n_keys, std::size_t chunks,
                                        std::size_t packets_per_chunk, double drift,
                                        std::uint64_t seed) {
  if (n_keys == 0) throw std::invalid_argument("n_keys must be positive");
  if (packets_per_chunk == 0) throw std::invalid_argument("packets_per_chunk must be positive");
  if (!(drift >= 0)) throw std::invalid_argument("drift must be non-negative");
  Rng walk(derive_seed(seed, {0x77616c6bULL}));
  std::vector<double> logw(n_keys);
  for (std::size_t i = 0; i < n_keys; ++i) logw[i] = -std::log(static_cast<double>(i + 1));
  shuffle(std::span<double>(logw), walk);

  std::vector<std::string> names(n_keys);
  for (std::size_t i = 0; i < n_keys; ++i) names[i] = key_name(i);

  std::vector<Packet> out;
  out.reserve(chunks * packets_per_chunk);
  std::vector<double> w(n_keys);
  for (std::size_t c = 0; c < chunks; ++c) {
    if (c > 0) {
      for (auto& x : logw) x += drift * standard_normal(walk);
    }
    const double top = *std::max_element(logw.begin(), logw.end());
    double total = 0;
    for (std::size_t i = 0; i < n_keys; ++i) total += w[i] = std::exp(logw[i] - top);
    for (auto& x : w) x /= total;
    const AliasSampler sampler(w);
    Rng draw(derive_seed(seed, {0x706b74ULL, c}));
    const std::int64_t start = kTraceEpochUs + static_cast<std::int64_t>(c) * kChunkSpanUs;
    for (std::size_t j = 0; j < packets_per_chunk; ++j) {
      const auto offset = static_cast<std::int64_t>(j) * kChunkSpanUs /
                          static_cast<std::int64_t>(packets_per_chunk);
      out.push_back({start + offset, names[sampler.draw(draw)]});
    }
  }
  return out;
}

std::vector<NetRow> nn_eval(const DistributionSet& chunks, const NetEvalSpec& spec) {
  if (spec.n_dataset < 1 || spec.n_queries < 1 || spec.trials < 1 || spec.samples < 1) {
    throw std::invalid_argument("n_dataset, n_queries, trials and samples must be positive");
  }
  if (chunks.k() < spec.n_dataset + spec.n_queries) {
    throw std::invalid_argument("need n_dataset + n_queries chunks, have " +
                                std::to_string(chunks.k()));
  }
  if (spec.fastconst == 0) throw std::invalid_argument("fastconst must be positive");

  std::vector<std::vector<NetRow>> per_query(spec.n_queries);
  parallel_for(spec.n_queries, spec.threads, [&](std::size_t j) {
    const std::size_t qid = spec.n_dataset + j;
    const Distribution& query = chunks[qid];
    std::vector<Distribution> window(chunks.dists().begin() + static_cast<std::ptrdiff_t>(j),
                                     chunks.dists().begin() + static_cast<std::ptrdiff_t>(qid));
    const DistributionSet dataset(std::move(window));
    const OnDemandPairs pairs(dataset);

    double tv_nn = std::numeric_limits<double>::infinity();
    double tv_sum = 0;
    for (const auto& d : dataset) {
      const double tv = tv_distance(query, d);
      tv_nn = std::min(tv_nn, tv);
      tv_sum += tv;
    }
    const double tv_mean = tv_sum / static_cast<double>(dataset.k());

    for (std::size_t t = 0; t < spec.trials; ++t) {
      const auto sample = sample_fixed(query, spec.samples, derive_seed(spec.seed, {1, qid, t}));
      TournamentConfig cfg;
      cfg.n_all_pairs = spec.nallpairs;
      cfg.pool_rate = PoolRate::Fixed;
      for (int fast = 0; fast < 2; ++fast) {
        cfg.seed = derive_seed(spec.seed, {2, qid, t, static_cast<std::uint64_t>(fast)});
        TournamentResult res;
        if (fast) {
          cfg.schedule = Schedule::fast_const(spec.fastconst);
          res = fast_knockout(pairs, sample, cfg);
        } else {
          res = base_knockout(pairs, sample, cfg);
        }
        NetRow row;
        row.query_id = qid;
        row.trial = t;
        row.mode = fast ? "fast" : "base";
        row.samples = spec.samples;
        row.fastconst = fast ? spec.fastconst : 0;
        row.nallpairs = spec.nallpairs;
        row.tv_answer = tv_distance(query, dataset[res.winner]);
        row.tv_nn = tv_nn;
        row.tv_mean = tv_mean;
        row.ops = res.ops.scheffe_ops;
        per_query[j].push_back(std::move(row));
      }
    }
  });
  std::vector<NetRow> rows;
  for (auto& q : per_query) {
    for (auto& r : q) rows.push_back(std::move(r));
  }
  return rows;
}

std::string net_csv_header() {
  return "query_id,trial,mode,samples,fastconst,nallpairs,tv_answer,tv_nn,tv_mean,ops";
}

void write_net_csv(std::ostream& out, const std::vector<NetRow>& rows) {
  out << net_csv_header() << '\n';
  out << std::setprecision(10);
  for (const auto& r : rows) {
    out << r.query_id << ',' << r.trial << ',' << r.mode << ',' << r.samples << ','
        << r.fastconst << ',' << r.nallpairs << ',' << r.tv_answer << ',' << r.tv_nn << ','
        << r.tv_mean << ',' << r.ops << '\n';
  }
}

void write_net_csv(const std::filesystem::path& path, const std::vector<NetRow>& rows) {
  io::write_atomically(path, [&](std::ostream& out) { write_net_csv(out, rows); });
}

}  // namespace densel
