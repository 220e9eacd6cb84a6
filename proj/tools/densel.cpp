// densel: command-line front end.
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 verification failed.

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <memory>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "densel/adversarial.hpp"
#include "densel/distribution.hpp"
#include "densel/io.hpp"
#include "densel/nns.hpp"
#include "densel/stats.hpp"
#include "densel/sublinear.hpp"
#include "densel/synthbench.hpp"
#include "densel/tournament.hpp"
#include "densel/trace.hpp"

namespace {

using namespace densel;

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitVerify = 3;

struct Globals {
  std::uint64_t seed = 0;
  std::size_t threads = 1;
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// "label", "label=ID" or "file=PATH".
struct PSource {
  enum class Kind { RandomLabel, Label, File } kind = Kind::RandomLabel;
  std::size_t label = 0;
  std::string path;
};

PSource parse_p_source(const std::string& text) {
  PSource ps;
  if (text == "label") return ps;
  if (text.rfind("label=", 0) == 0) {
    ps.kind = PSource::Kind::Label;
    try {
      std::size_t pos = 0;
      ps.label = std::stoull(text.substr(6), &pos);
      if (pos != text.size() - 6) throw std::invalid_argument("");
    } catch (const std::exception&) {
      throw UsageError("--p-source label=ID needs a non-negative integer ID");
    }
    return ps;
  }
  if (text.rfind("file=", 0) == 0 && text.size() > 5) {
    ps.kind = PSource::Kind::File;
    ps.path = text.substr(5);
    return ps;
  }
  throw UsageError("--p-source must be label, label=ID or file=PATH");
}

std::vector<Element> read_sample_stream(const std::string& path, std::size_t n) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open sample file " + path);
  std::vector<Element> out;
  std::string tok;
  std::size_t count = 0;
  while (in >> tok) {
    ++count;
    std::size_t pos = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(tok, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != tok.size() || tok.empty()) {
      throw DataError(path + ": sample " + std::to_string(count) + " is not an element index");
    }
    if (v >= n) {
      throw DataError(path + ": sample " + std::to_string(count) + " = " + tok +
                      " outside domain of size " + std::to_string(n));
    }
    out.push_back(static_cast<Element>(v));
  }
  return out;
}

// Counts carry no order; expand and shuffle with the seed.
std::vector<Element> stream_from_counts(const SampleCounts& counts, std::uint64_t seed) {
  std::vector<Element> out;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    out.insert(out.end(), counts.counts[i], static_cast<Element>(i));
  }
  Rng rng(derive_seed(seed, {0x636e74ULL}));
  shuffle(std::span<Element>(out), rng);
  return out;
}

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? sep : "") + parts[i];
  return out;
}

// --- gen ------------------------------------------------------------------------

struct GenOpts {
  std::string family;
  std::size_t n = 500;
  std::size_t k = 8192;
  std::string out;
  std::size_t n_keys = 1000;
  std::size_t chunks = 2148;
  std::size_t packets = 2000;
  double drift = 0.05;
};

void setup_gen(CLI::App& app, const Globals& g) {
  auto o = std::make_shared<GenOpts>();
  auto* cmd = app.add_subcommand("gen", "Generate a synthetic dataset or packet trace");
  cmd->add_option("--family", o->family, "halfuniform, zipfian or trace")
      ->required()
      ->check(CLI::IsMember({"halfuniform", "zipfian", "trace"}));
  cmd->add_option("--n", o->n, "Domain size")->capture_default_str();
  cmd->add_option("--k", o->k, "Number of distributions")->capture_default_str();
  cmd->add_option("--n-keys", o->n_keys, "Trace: distinct source keys")->capture_default_str();
  cmd->add_option("--chunks", o->chunks, "Trace: chunks")->capture_default_str();
  cmd->add_option("--packets", o->packets, "Trace: packets per chunk")->capture_default_str();
  cmd->add_option("--drift", o->drift, "Trace: log-weight random walk step")
      ->capture_default_str();
  cmd->add_option("--out", o->out, "Output file (.bin selects binary)")->required();
  cmd->callback([o, &g] {
    if (o->family == "trace") {
      write_trace(o->out, gen_synthetic_trace(o->n_keys, o->chunks, o->packets, o->drift, g.seed));
      std::cout << "wrote " << o->chunks * o->packets << " packets to " << o->out << "\n";
      return;
    }
    const auto vs = gen_family(o->family, o->n, o->k, g.seed);
    io::write_distributions(o->out, vs, io::encoding_for(o->out));
    std::cout << "wrote " << vs.k() << " distributions over n = " << vs.n() << " to " << o->out
              << "\n";
  });
}

// --- ingest ---------------------------------------------------------------------

struct IngestOpts {
  std::string trace;
  std::string chunk = "count=100000";
  std::string out;
  std::string dict;
};

void setup_ingest(CLI::App& app) {
  auto o = std::make_shared<IngestOpts>();
  auto* cmd = app.add_subcommand("ingest", "Chunk a packet trace into source distributions");
  cmd->add_option("--trace", o->trace, "CSV trace: timestamp_us,src_key")->required();
  cmd->add_option("--chunk", o->chunk, "count=M or time=MS")->capture_default_str();
  cmd->add_option("--out", o->out, "Distribution file (.bin selects binary)")->required();
  cmd->add_option("--dict", o->dict, "Key dictionary output, one key per line")->required();
  cmd->callback([o] {
    ChunkSpec spec;
    try {
      spec = parse_chunk_spec(o->chunk);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    const auto packets = parse_trace(o->trace);
    const auto chunked = chunk_to_distributions(packets, spec, &std::cerr);
    if (chunked.dists.k() == 0) throw DataError("trace has no packets");
    io::write_distributions(o->out, chunked.dists, io::encoding_for(o->out));
    write_dictionary(o->dict, chunked.dictionary);
    std::cout << "chunks " << chunked.dists.k() << ", keys " << chunked.dictionary.size()
              << ", dropped empty " << chunked.dropped_empty << "\n";
  });
}

// --- tournament -----------------------------------------------------------------

struct Query {
  std::vector<Element> samples;
  std::optional<std::size_t> label;
};

// One query per non-empty line: element indices separated by blanks, with an
// optional leading `label=ID` token naming the true distribution.
std::vector<Query> read_queries(const std::string& path, std::size_t n, std::size_t k) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open query file " + path);
  std::vector<Query> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string tok;
    Query q;
    bool first = true;
    while (ls >> tok) {
      const auto where = path + ":" + std::to_string(lineno) + ": ";
      std::string digits = tok;
      const bool is_label = first && tok.rfind("label=", 0) == 0;
      if (is_label) digits = tok.substr(6);
      first = false;
      std::size_t pos = 0;
      unsigned long long v = 0;
      try {
        v = std::stoull(digits, &pos);
      } catch (const std::exception&) {
        pos = 0;
      }
      if (digits.empty() || pos != digits.size()) throw DataError(where + "bad token '" + tok + "'");
      if (is_label) {
        if (v >= k) throw DataError(where + "label out of range");
        q.label = static_cast<std::size_t>(v);
      } else {
        if (v >= n) throw DataError(where + "element " + tok + " outside the domain");
        q.samples.push_back(static_cast<Element>(v));
      }
    }
    if (!q.samples.empty()) {
      out.push_back(std::move(q));
    } else if (q.label) {
      throw DataError(path + ":" + std::to_string(lineno) + ": query without samples");
    }
  }
  return out;
}

struct TournamentOpts {
  std::string dataset;
  std::string queries;
  std::string samples;
  std::string counts;
  std::string p_source;
  std::uint64_t s = 0;
  std::size_t n_queries = 1;
  std::string mode = "fast";
  std::string schedule = "fastconst=10";
  std::size_t nallpairs = 0;
  std::string pool_rate = "fixed";
  double eps = 0.1;
  double delta = 0.1;
  bool precompute = false;
  std::string out;
};

void setup_tournament(CLI::App& app, const Globals& g) {
  auto o = std::make_shared<TournamentOpts>();
  auto* cmd = app.add_subcommand("tournament", "Run Scheffe knockout tournaments on queries");
  cmd->add_option("--dataset", o->dataset, "Distribution file")->required();
  auto* queries = cmd->add_option("--queries", o->queries,
                                  "Query file: one query per line, optional label=ID first");
  auto* samples = cmd->add_option("--samples", o->samples, "One query: element indices");
  auto* counts = cmd->add_option("--counts", o->counts, "One query: sample count file");
  auto* psrc = cmd->add_option("--p-source", o->p_source, "Draw queries: label or label=ID");
  queries->excludes(samples)->excludes(counts)->excludes(psrc);
  samples->excludes(counts)->excludes(psrc);
  counts->excludes(psrc);
  cmd->add_option("--s", o->s, "Samples per drawn query");
  cmd->add_option("--n-queries", o->n_queries, "Drawn queries")->capture_default_str();
  cmd->add_option("--mode", o->mode, "base or fast")
      ->check(CLI::IsMember({"base", "fast"}))
      ->capture_default_str();
  cmd->add_option("--schedule", o->schedule, "theory, fastconst=C or full=S (fast mode)")
      ->capture_default_str();
  cmd->add_option("--nallpairs", o->nallpairs, "Pool size taken per level")->capture_default_str();
  cmd->add_option("--pool-rate", o->pool_rate, "fixed (nallpairs) or k13")
      ->check(CLI::IsMember({"fixed", "k13"}))
      ->capture_default_str();
  cmd->add_option("--eps", o->eps, "Accuracy for the theory schedule")->capture_default_str();
  cmd->add_option("--delta", o->delta, "Failure probability for the theory schedule")
      ->capture_default_str();
  cmd->add_flag("--precompute", o->precompute, "Build all Scheffe sets up front");
  cmd->add_option("--out", o->out, "Result CSV");
  cmd->callback([o, &g] {
    const auto vs = io::read_distributions(o->dataset);
    std::vector<Query> qs;
    if (!o->queries.empty()) {
      qs = read_queries(o->queries, vs.n(), vs.k());
    } else if (!o->samples.empty()) {
      qs.push_back({read_sample_stream(o->samples, vs.n()), std::nullopt});
    } else if (!o->counts.empty()) {
      const auto sc = io::read_sample_counts(o->counts);
      if (sc.size() != vs.n()) throw DataError("sample counts do not match the domain size");
      qs.push_back({stream_from_counts(sc, g.seed), std::nullopt});
    } else if (!o->p_source.empty()) {
      const auto ps = parse_p_source(o->p_source);
      if (ps.kind == PSource::Kind::File) throw UsageError("tournament takes label or label=ID");
      if (ps.kind == PSource::Kind::Label && ps.label >= vs.k()) {
        throw DataError("label out of range");
      }
      if (o->s == 0) throw UsageError("--p-source needs --s");
      Rng pick(derive_seed(g.seed, {0x7069636bULL}));
      for (std::size_t q = 0; q < o->n_queries; ++q) {
        const std::size_t label = ps.kind == PSource::Kind::Label
                                      ? ps.label
                                      : static_cast<std::size_t>(pick.below(vs.k()));
        qs.push_back({sample_fixed(vs[label], o->s, derive_seed(g.seed, {0x7073ULL, q})), label});
      }
    } else {
      throw UsageError("one of --queries, --samples, --counts or --p-source is required");
    }
    TournamentConfig cfg;
    cfg.epsilon = o->eps;
    cfg.delta = o->delta;
    cfg.n_all_pairs = o->nallpairs;
    cfg.pool_rate = o->pool_rate == "k13" ? PoolRate::TheoreticalK13 : PoolRate::Fixed;
    try {
      cfg.schedule = parse_schedule(o->schedule);
      cfg.validate();
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    std::unique_ptr<PairSource> pairs;
    if (o->precompute) {
      pairs = std::make_unique<PrecomputedPairs>(vs);
    } else {
      pairs = std::make_unique<OnDemandPairs>(vs);
    }
    const bool base = o->mode == "base";
    const std::uint64_t fastconst =
        !base && cfg.schedule.kind == Schedule::Kind::FastConst ? cfg.schedule.value : 0;
    std::ostringstream csv;
    csv << "query_id,mode,samples,fastconst,nallpairs,winner,true_label,l1_to_winner,ops\n";
    std::size_t correct = 0;
    std::size_t labelled = 0;
    std::uint64_t total_ops = 0;
    bool warned = false;
    for (std::size_t q = 0; q < qs.size(); ++q) {
      cfg.seed = derive_seed(g.seed, {0x746f7572ULL, q});
      const auto& sample = qs[q].samples;
      const auto res = base ? base_knockout(*pairs, sample, cfg) : fast_knockout(*pairs, sample, cfg);
      if (res.delta_below_theory_bound && !warned) {
        std::cerr << "warning: delta is below k^(-1/4); the theory guarantee does not apply\n";
        warned = true;
      }
      total_ops += res.ops.scheffe_ops;
      csv << q << ',' << o->mode << ',' << sample.size() << ',' << fastconst << ','
          << o->nallpairs << ',' << res.winner << ',';
      if (qs[q].label) {
        ++labelled;
        correct += res.winner == *qs[q].label ? 1 : 0;
        csv << *qs[q].label << ',' << l1_distance(vs[*qs[q].label], vs[res.winner]);
      } else {
        csv << ',';
      }
      csv << ',' << res.ops.scheffe_ops << '\n';
      if (qs.size() == 1) {
        std::cout << "winner " << res.winner << "\n";
      }
    }
    std::cout << "queries " << qs.size() << ", mean ops "
              << (qs.empty() ? 0.0 : double(total_ops) / double(qs.size()));
    if (labelled) std::cout << ", accuracy " << double(correct) / double(labelled);
    std::cout << "\n";
    if (!o->out.empty()) {
      io::write_atomically(o->out, [&](std::ostream& out) { out << csv.str(); });
    }
  });
}

// --- sublinear ------------------------------------------------------------------

struct SublinearBuildOpts {
  std::string dataset;
  std::string config;
  double eps = 0.5;
  double gamma = 0;
  double radius_const = 0;
  double c_inf = 0;
  std::uint64_t s = 0;
  std::string linf_backend;
  std::string out;
};

struct SublinearQueryOpts {
  std::string index;
  std::string p_source = "label";
  std::uint64_t s = 0;
  std::size_t trials = 1;
  std::string out;
};

void setup_sublinear(CLI::App& app, const Globals& g) {
  auto* cmd = app.add_subcommand("sublinear", "Sublinear proper-case hypothesis selection");
  cmd->require_subcommand(1);

  auto b = std::make_shared<SublinearBuildOpts>();
  auto* build = cmd->add_subcommand("build", "Preprocess a dataset into an index file");
  build->add_option("--dataset", b->dataset, "Distribution file")->required();
  build->add_option("--config", b->config, "key = value config file");
  build->add_option("--eps", b->eps, "Accuracy epsilon")->capture_default_str();
  build->add_option("--gamma", b->gamma, "Heavy threshold (default n^(-5/12))");
  build->add_option("--radius-const", b->radius_const, "Group radius constant (default 4)");
  build->add_option("--c-inf", b->c_inf, "l-inf approximation factor");
  build->add_option("--s", b->s, "Query sample size (default n / (eps^2 (ln k)^(1/4)))");
  build->add_option("--linf-backend", b->linf_backend, "exact or coordinate_sample");
  build->add_option("--out", b->out, "Index file")->required();
  build->callback([b, &g] {
    auto vs = std::make_shared<const DistributionSet>(io::read_distributions(b->dataset));
    SublinearConfig cfg;
    try {
      cfg = SublinearConfig::defaults(vs->n(), vs->k(), b->eps);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    cfg.seed = g.seed;
    cfg.threads = g.threads;
    if (!b->config.empty()) apply_config_file(cfg, b->config);
    if (b->gamma > 0) cfg.gamma = b->gamma;
    if (b->radius_const > 0) cfg.radius_const = b->radius_const;
    if (b->c_inf > 0) cfg.c_inf = b->c_inf;
    if (b->s > 0) cfg.s = b->s;
    if (!b->linf_backend.empty()) {
      try {
        apply_config_value(cfg, "linf_backend", b->linf_backend);
      } catch (const DataError& e) {
        throw UsageError(e.what());
      }
    }
    if (cfg.linf_backend.kind == LinfBackend::Kind::CoordinateSample &&
        cfg.linf_backend.coords == 0) {
      const double n = static_cast<double>(vs->n());
      cfg.linf_backend.coords = static_cast<std::size_t>(
          std::ceil(4 * std::sqrt(n) * std::log(std::max<double>(2, double(vs->k())))));
      if (cfg.linf_backend.reps == 0) cfg.linf_backend.reps = 3;
    }
    try {
      cfg.validate();
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    const auto idx = preprocess(vs, cfg);
    save_index(b->out, idx);
    std::size_t singletons = 0;
    for (const auto& grp : idx.groups) singletons += grp.members.size() == 1 ? 1 : 0;
    std::cout << "k " << vs->k() << ", n " << vs->n() << ", s " << cfg.s << ", gamma "
              << cfg.gamma << ", radius " << idx.radius << ", l2 c "
              << cfg.l2_approx_c(vs->n()) << "\n"
              << "groups " << idx.groups.size() << " (" << singletons << " singleton), l2 indexes "
              << idx.l2_indexes.size() << ", memory " << idx.memory_bytes() << " bytes\n";
  });

  auto q = std::make_shared<SublinearQueryOpts>();
  auto* query = cmd->add_subcommand("query", "Select a hypothesis for sampled queries");
  query->add_option("--index", q->index, "Index file")->required();
  query->add_option("--p-source", q->p_source, "label, label=ID or file=PATH")
      ->capture_default_str();
  query->add_option("--s", q->s, "Sample size (default from the index)");
  query->add_option("--trials", q->trials, "Queries to run")->capture_default_str();
  query->add_option("--out", q->out, "Result CSV")->required();
  query->callback([q, &g] {
    const auto ps = parse_p_source(q->p_source);
    auto idx = load_index(q->index);
    if (q->s > 0) idx.config.s = q->s;
    if (idx.config.s < 2) throw UsageError("--s must be at least 2");
    const auto& vs = *idx.vs;
    std::optional<Distribution> file_p;
    if (ps.kind == PSource::Kind::File) {
      const auto set = io::read_distributions(ps.path);
      if (set.n() != vs.n()) throw DataError("p-source domain does not match the index");
      file_p = set[0];
    } else if (ps.kind == PSource::Kind::Label && ps.label >= vs.k()) {
      throw DataError("label out of range");
    }
    Rng pick(derive_seed(g.seed, {0x7069636bULL}));
    std::ostringstream csv;
    csv << "trial,p_label,selected,linf_choice,group_size,captured,used_l2,l2_fallback,"
           "linf_evals,l2_evals,l1_error\n";
    std::size_t within = 0;
    std::uint64_t l2_total = 0;
    for (std::size_t t = 0; t < q->trials; ++t) {
      std::size_t label = ps.label;
      if (ps.kind == PSource::Kind::RandomLabel) label = static_cast<std::size_t>(pick.below(vs.k()));
      const Distribution& p = file_p ? *file_p : vs[label];
      OpCounter counter;
      const auto r = select_hypothesis(idx, p, derive_seed(g.seed, {0x71ULL, t}), counter);
      const double err = l1_distance(p, vs[r.selected]);
      within += err <= idx.config.epsilon ? 1 : 0;
      l2_total += r.l2_evals;
      std::string captured;
      if (!file_p) {
        const auto& members = idx.groups[r.linf_choice].members;
        captured = std::binary_search(members.begin(), members.end(),
                                      static_cast<std::uint32_t>(label))
                       ? "1"
                       : "0";
      }
      csv << t << ',' << (file_p ? std::string() : std::to_string(label)) << ',' << r.selected
          << ',' << r.linf_choice << ',' << r.group_size << ',' << captured << ','
          << (r.used_l2 ? 1 : 0) << ',' << (r.l2_fallback ? 1 : 0) << ',' << r.linf_evals << ','
          << r.l2_evals << ',' << err << '\n';
    }
    io::write_atomically(q->out, [&](std::ostream& out) { out << csv.str(); });
    std::cout << "within eps " << within << "/" << q->trials << ", mean l2 evaluations "
              << (q->trials ? double(l2_total) / double(q->trials) : 0.0) << "\n";
  });
}

// --- adversarial ----------------------------------------------------------------

struct AdversarialOpts {
  std::string which;
  std::size_t n = 0;
  std::size_t k = 64;
  std::uint64_t s = 0;
  std::size_t trials = 500;
  std::string metric;
  std::string sampling;
  std::string out;
};

void setup_adversarial(CLI::App& app, const Globals& g) {
  auto o = std::make_shared<AdversarialOpts>();
  auto* cmd = app.add_subcommand("adversarial", "Naive empirical nearest-neighbor failure demos");
  cmd->add_option("--which", o->which, "light or heavy")
      ->required()
      ->check(CLI::IsMember({"light", "heavy"}));
  cmd->add_option("--n", o->n, "Domain size (light: 100, heavy: 201)");
  cmd->add_option("--k", o->k, "Light: number of alternatives")->capture_default_str();
  cmd->add_option("--s", o->s, "Samples (light: n/2, heavy: 100)");
  cmd->add_option("--trials", o->trials, "Trials")->capture_default_str();
  cmd->add_option("--metric", o->metric, "l1, l2 or linf (light: l1, heavy: l2)");
  cmd->add_option("--sampling", o->sampling, "fixed or poisson (light: fixed, heavy: poisson)");
  cmd->add_option("--out", o->out, "Result CSV");
  cmd->callback([o, &g] {
    const bool light = o->which == "light";
    const std::size_t n = o->n ? o->n : (light ? 100 : 201);
    const std::uint64_t s = o->s ? o->s : (light ? n / 2 : 100);
    NaiveMetric metric;
    SamplingMode mode;
    AdversarialInstance inst;
    try {
      metric = parse_naive_metric(o->metric.empty() ? (light ? "l1" : "l2") : o->metric);
      mode = parse_sampling_mode(o->sampling.empty() ? (light ? "fixed" : "poisson")
                                                     : o->sampling);
      inst = light ? light_adversarial(n, o->k, g.seed) : heavy_adversarial(n, s);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    const auto res =
        naive_failure_rate(inst, metric, s, o->trials, derive_seed(g.seed, {1}), mode, g.threads);
    const std::string metric_name = o->metric.empty() ? (light ? "l1" : "l2") : o->metric;
    const std::string mode_name =
        mode == SamplingMode::FixedSize ? std::string("fixed") : std::string("poisson");
    std::cout << o->which << " n=" << n << " k=" << inst.qs.k() << " s=" << s << " "
              << metric_name << ": success " << res.success_rate() << ", failure "
              << res.failure_rate() << " over " << res.trials << " trials\n";
    if (!o->out.empty()) {
      io::write_atomically(o->out, [&](std::ostream& out) {
        out << "which,n,k,s,metric,sampling,trials,successes,success_rate,failure_rate\n";
        out << o->which << ',' << n << ',' << inst.qs.k() << ',' << s << ',' << metric_name << ','
            << mode_name << ',' << res.trials << ',' << res.successes << ','
            << res.success_rate() << ',' << res.failure_rate() << '\n';
      });
    }
  });
}

// --- bench ----------------------------------------------------------------------

struct SynthOpts {
  std::string family = "halfuniform";
  std::string dataset;
  std::size_t n = 500;
  std::size_t k = 8192;
  std::vector<std::uint64_t> samples{20, 30, 40, 50, 60};
  std::vector<std::uint64_t> fastconst{5, 10, 15, 20};
  std::vector<std::size_t> nallpairs{0, 10, 20, 30};
  std::size_t trials = 5;
  std::size_t queries = 20;
  std::string out;
};

struct NetOpts {
  std::string dists;
  std::size_t n_dataset = 2048;
  std::size_t n_queries = 100;
  std::uint64_t samples = 100;
  std::uint64_t fastconst = 10;
  std::size_t nallpairs = 0;
  std::size_t trials = 10;
  std::string out;
};

void setup_bench(CLI::App& app, const Globals& g) {
  auto* cmd = app.add_subcommand("bench", "Accuracy and operation-count benchmarks");
  cmd->require_subcommand(1);

  auto o = std::make_shared<SynthOpts>();
  auto* synth = cmd->add_subcommand("synth", "Grid search on synthetic data");
  synth->add_option("--family", o->family, "halfuniform or zipfian")
      ->check(CLI::IsMember({"halfuniform", "zipfian"}))
      ->capture_default_str();
  synth->add_option("--dataset", o->dataset, "Use this distribution file instead of generating");
  synth->add_option("--n", o->n, "Domain size")->capture_default_str();
  synth->add_option("--k", o->k, "Number of distributions")->capture_default_str();
  synth->add_option("--samples", o->samples, "Sample sizes")->delimiter(',')->capture_default_str();
  synth->add_option("--fastconst", o->fastconst, "fastConst values")
      ->delimiter(',')
      ->capture_default_str();
  synth->add_option("--nallpairs", o->nallpairs, "nAllPairs values")
      ->delimiter(',')
      ->capture_default_str();
  synth->add_option("--trials", o->trials, "Query sets")->capture_default_str();
  synth->add_option("--queries", o->queries, "Queries per set")->capture_default_str();
  synth->add_option("--out", o->out, "Result CSV")->required();
  synth->callback([o, &g] {
    DistributionSet vs;
    if (!o->dataset.empty()) {
      vs = io::read_distributions(o->dataset);
    } else {
      try {
        vs = gen_family(o->family, o->n, o->k, g.seed);
      } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
      }
    }
    GridSpec spec;
    spec.family = o->family;
    spec.samples = o->samples;
    spec.fastconst = o->fastconst;
    spec.nallpairs = o->nallpairs;
    spec.trials = o->trials;
    spec.queries = o->queries;
    spec.seed = g.seed;
    spec.threads = g.threads;
    std::vector<GridRow> rows;
    try {
      rows = run_grid(vs, spec);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    write_grid_csv(std::filesystem::path(o->out), rows);
    const auto points = average_over_trials(rows);
    for (const std::string mode : {"base", "fast"}) {
      std::cout << mode << " envelope:\n";
      for (const auto& p : pareto_envelope(points, mode)) {
        std::cout << "  ops " << p.ops << "  accuracy " << p.accuracy << "  (samples " << p.samples
                  << ", fastconst " << p.fastconst << ", nallpairs " << p.nallpairs << ")\n";
      }
    }
  });

  auto no = std::make_shared<NetOpts>();
  auto* net = cmd->add_subcommand("net", "Nearest traffic pattern retrieval on chunked traces");
  net->add_option("--dists", no->dists, "Chunk distribution file from ingest")->required();
  net->add_option("--n-dataset", no->n_dataset, "Prior chunks searched")->capture_default_str();
  net->add_option("--n-queries", no->n_queries, "Query chunks")->capture_default_str();
  net->add_option("--samples", no->samples, "Samples per query")->capture_default_str();
  net->add_option("--fastconst", no->fastconst, "fastConst")->capture_default_str();
  net->add_option("--nallpairs", no->nallpairs, "nAllPairs")->capture_default_str();
  net->add_option("--trials", no->trials, "Trials per query")->capture_default_str();
  net->add_option("--out", no->out, "Result CSV")->required();
  net->callback([no, &g] {
    const auto chunks = io::read_distributions(no->dists);
    NetEvalSpec spec;
    spec.n_dataset = no->n_dataset;
    spec.n_queries = no->n_queries;
    spec.samples = no->samples;
    spec.fastconst = no->fastconst;
    spec.nallpairs = no->nallpairs;
    spec.trials = no->trials;
    spec.seed = g.seed;
    spec.threads = g.threads;
    std::vector<NetRow> rows;
    try {
      rows = nn_eval(chunks, spec);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    write_net_csv(std::filesystem::path(no->out), rows);
    double tv[2] = {0, 0};
    std::uint64_t ops[2] = {0, 0};
    std::size_t count[2] = {0, 0};
    for (const auto& r : rows) {
      const int m = r.mode == "fast" ? 1 : 0;
      tv[m] += r.tv_answer;
      ops[m] += r.ops;
      ++count[m];
    }
    std::cout << "base: mean tv " << tv[0] / double(count[0]) << ", ops/query "
              << ops[0] / count[0] << "\n"
              << "fast: mean tv " << tv[1] / double(count[1]) << ", ops/query "
              << ops[1] / count[1] << "\n";
  });
}

// --- verify ---------------------------------------------------------------------

struct VerifyOpts {
  std::string suite = "all";
  std::size_t trials = 0;
};

void setup_verify(CLI::App& app, const Globals& g, int& status) {
  auto o = std::make_shared<VerifyOpts>();
  auto* cmd = app.add_subcommand("verify", "Statistical property suites");
  std::vector<std::string> names = verify_suites();
  names.push_back("all");
  auto accepted = names;
  accepted.push_back("appendix-c");
  cmd->add_option("--suite", o->suite, join(names, ", "))
      ->check(CLI::IsMember(accepted))
      ->capture_default_str();
  cmd->add_option("--trials", o->trials, "Draws or trials per suite (0: suite default)");
  cmd->callback([o, &g, &status] {
    const auto suites =
        o->suite == "all" ? verify_suites() : std::vector<std::string>{o->suite};
    bool ok = true;
    for (const auto& s : suites) {
      for (const auto& line : run_verify_suite(s, o->trials, g.seed, g.threads)) {
        std::cout << (line.pass ? "PASS " : "FAIL ") << s << ": " << line.name << ": "
                  << line.detail << "\n";
        ok = ok && line.pass;
      }
    }
    if (!ok) status = kExitVerify;
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"densel: hypothesis selection and density estimation tools"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  int status = 0;
  app.add_option("--seed", g.seed, "Random seed")->capture_default_str();
  app.add_option("--threads", g.threads, "Worker threads (0: all cores)")->capture_default_str();

  setup_gen(app, g);
  setup_ingest(app);
  setup_tournament(app, g);
  setup_sublinear(app, g);
  setup_adversarial(app, g);
  setup_bench(app, g);
  setup_verify(app, g, status);

  if (argc <= 1) {
    std::cerr << app.help();
    return kExitUsage;
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const SampleStreamExhausted& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return status;
}
