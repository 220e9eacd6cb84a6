#include "densel/sublinear.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <stdexcept>

#include "densel/io.hpp"
#include "densel/parallel.hpp"

namespace densel {

namespace {

constexpr std::array<char, 4> kIndexMagic = {'D', 'D', 'E', 'I'};
constexpr std::uint32_t kIndexVersion = 1;

double loglog_floor(std::size_t n) {
  const double ln = std::log(static_cast<double>(n));
  return ln > 1 ? std::max(1.0, std::log(ln)) : 1.0;
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

double parse_real(const std::string& key, const std::string& v) {
  double x = 0;
  const auto* end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(v.data(), end, x);
  if (ec != std::errc() || ptr != end) throw DataError("config " + key + ": not a number: " + v);
  return x;
}

std::uint64_t parse_count(const std::string& key, const std::string& v) {
  std::uint64_t x = 0;
  const auto* end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(v.data(), end, x);
  if (ec != std::errc() || ptr != end) {
    throw DataError("config " + key + ": not a non-negative integer: " + v);
  }
  return x;
}

void put_index_list(std::ostream& out, const std::vector<std::size_t>& v) {
  io::put_u64(out, v.size());
  for (auto x : v) io::put_u32(out, static_cast<std::uint32_t>(x));
}

std::vector<std::size_t> get_index_list(std::istream& in, std::size_t bound) {
  const auto len = io::get_u64(in);
  if (len > bound) throw DataError("index file: list length out of range");
  std::vector<std::size_t> v(len);
  for (auto& x : v) {
    x = io::get_u32(in);
    if (x >= bound) throw DataError("index file: list entry out of range");
  }
  return v;
}

}  // namespace

HeavyLightPartition heavy_light(const Distribution& leader, double gamma,
                                std::size_t leader_index) {
  if (!(gamma > 0 && gamma < 1)) throw std::invalid_argument("gamma must lie in (0, 1)");
  HeavyLightPartition part;
  part.gamma = gamma;
  part.leader = leader_index;
  for (std::size_t i = 0; i < leader.size(); ++i) {
    (leader[i] >= gamma ? part.heavy : part.light).push_back(i);
  }
  return part;
}

// --- config -------------------------------------------------------------------

SublinearConfig SublinearConfig::defaults(std::size_t n, std::size_t k, double epsilon) {
  if (n < 2) throw std::invalid_argument("domain size must be at least 2");
  if (k < 1) throw std::invalid_argument("need at least one distribution");
  if (!(epsilon > 0)) throw std::invalid_argument("epsilon must be positive");
  SublinearConfig cfg;
  const double dn = static_cast<double>(n);
  cfg.epsilon = epsilon;
  cfg.gamma = std::pow(dn, -5.0 / 12.0);
  const double logk = std::max(std::log(static_cast<double>(k)), 1.0);
  cfg.s = std::max<std::uint64_t>(
      2, static_cast<std::uint64_t>(std::ceil(dn / (epsilon * epsilon * std::pow(logk, 0.25)))));
  cfg.c_inf = std::max(2.0, 4.0 * std::log(dn) * loglog_floor(n));
  return cfg;
}

double SublinearConfig::group_radius(std::size_t n) const {
  const double ln = std::log(static_cast<double>(n));
  return radius_const * ln * ln * loglog_floor(n) / std::sqrt(static_cast<double>(n));
}

double SublinearConfig::l2_approx_c(std::size_t n) const {
  return 1.0 + static_cast<double>(s) * epsilon * epsilon / (32.0 * static_cast<double>(n));
}

void SublinearConfig::validate() const {
  if (!(epsilon > 0)) throw std::invalid_argument("epsilon must be positive");
  if (!(gamma > 0 && gamma < 1)) throw std::invalid_argument("gamma must lie in (0, 1)");
  if (s < 2) throw std::invalid_argument("s must be at least 2");
  if (!(radius_const > 0)) throw std::invalid_argument("radius_const must be positive");
  if (!(c_inf >= 1)) throw std::invalid_argument("c_inf must be at least 1");
  if (!(l2_failure_prob > 0 && l2_failure_prob < 1)) {
    throw std::invalid_argument("l2_failure_prob must lie in (0, 1)");
  }
  if (!(l2_radius_margin > 0)) throw std::invalid_argument("l2_radius_margin must be positive");
  if (l2_max_base_functions < 2) throw std::invalid_argument("l2_max_base_functions must be >= 2");
}

void apply_config_value(SublinearConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "epsilon" || key == "eps") {
    cfg.epsilon = parse_real(key, value);
  } else if (key == "gamma") {
    cfg.gamma = parse_real(key, value);
  } else if (key == "s") {
    cfg.s = parse_count(key, value);
  } else if (key == "radius_const") {
    cfg.radius_const = parse_real(key, value);
  } else if (key == "c_inf") {
    cfg.c_inf = parse_real(key, value);
  } else if (key == "linf_backend") {
    if (value == "exact") {
      cfg.linf_backend = LinfBackend::exact_scan();
    } else if (value == "coordinate_sample") {
      cfg.linf_backend.kind = LinfBackend::Kind::CoordinateSample;
    } else {
      throw DataError("config linf_backend must be exact or coordinate_sample");
    }
  } else if (key == "linf_coords") {
    cfg.linf_backend.coords = parse_count(key, value);
  } else if (key == "linf_reps") {
    cfg.linf_backend.reps = parse_count(key, value);
  } else if (key == "linf_top") {
    cfg.linf_backend.top = parse_count(key, value);
  } else if (key == "l2_failure_prob") {
    cfg.l2_failure_prob = parse_real(key, value);
  } else if (key == "l2_radius_margin") {
    cfg.l2_radius_margin = parse_real(key, value);
  } else if (key == "l2_max_base_functions") {
    cfg.l2_max_base_functions = parse_count(key, value);
  } else if (key == "seed") {
    cfg.seed = parse_count(key, value);
  } else if (key == "threads") {
    cfg.threads = parse_count(key, value);
  } else {
    throw DataError("unknown config key: " + key);
  }
}

void apply_config_file(SublinearConfig& cfg, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config file " + path.string());
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": expected key = value");
    }
    auto value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
      value = value.substr(1, value.size() - 2);
    }
    try {
      apply_config_value(cfg, trim(line.substr(0, eq)), value);
    } catch (const DataError& e) {
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
}

// --- preprocessing ----------------------------------------------------------------

PreprocessedIndex preprocess(std::shared_ptr<const DistributionSet> vs,
                             const SublinearConfig& cfg) {
  if (!vs || vs->k() == 0) throw std::invalid_argument("preprocess needs k >= 1");
  cfg.validate();
  const std::size_t k = vs->k();
  const std::size_t n = vs->n();

  PreprocessedIndex idx;
  idx.vs = vs;
  idx.config = cfg;
  idx.radius = cfg.group_radius(n);
  idx.linf = LinfIndex(vs, cfg.linf_backend, derive_seed(cfg.seed, {1}), cfg.c_inf);

  idx.groups.resize(k);
  parallel_for(k, cfg.threads, [&](std::size_t j) {
    Group& g = idx.groups[j];
    g.leader = j;
    for (std::size_t i = 0; i < k; ++i) {
      if (i == j || linf_distance((*vs)[i], (*vs)[j]) <= idx.radius) {
        g.members.push_back(static_cast<std::uint32_t>(i));
      }
    }
    g.partition = heavy_light((*vs)[j], cfg.gamma, j);
  });

  // Groups with identical members and light sets get one shared l2 index.
  std::map<std::pair<std::vector<std::uint32_t>, std::vector<std::size_t>>, std::size_t> unique;
  std::vector<std::size_t> owner;  // first group for each unique index
  for (auto& g : idx.groups) {
    if (g.members.size() < 2 || g.partition.light.empty()) continue;
    auto [it, inserted] =
        unique.try_emplace({g.members, g.partition.light}, owner.size());
    if (inserted) owner.push_back(g.leader);
    g.l2_index = it->second;
  }

  const double s2 = static_cast<double>(cfg.s / 2);
  const double c = cfg.l2_approx_c(n);
  idx.l2_indexes.resize(owner.size());
  parallel_for(owner.size(), cfg.threads, [&](std::size_t u) {
    const Group& g = idx.groups[owner[u]];
    const auto& light = g.partition.light;
    std::vector<RestrictedVector> rows;
    rows.reserve(g.members.size());
    std::vector<std::size_t> ids(g.members.begin(), g.members.end());
    for (auto m : g.members) rows.push_back(restrict((*vs)[m], light));
    double light_mass = 0;
    for (auto i : light) light_mass += (*vs)[g.leader][i];
    light_mass = std::max(light_mass, 1.0 / static_cast<double>(n));
    const double scale = cfg.l2_radius_margin * std::sqrt(light_mass / s2);
    const auto params = standard_l2_params(rows.size(), c, scale, derive_seed(cfg.seed, {2, u}),
                                           cfg.l2_failure_prob, cfg.l2_max_base_functions);
    idx.l2_indexes[u] = L2LshIndex(rows, std::move(ids), params);
  });
  return idx;
}

std::size_t PreprocessedIndex::memory_bytes() const {
  std::size_t bytes = sizeof(*this);
  if (vs) bytes += vs->k() * vs->n() * sizeof(double);
  for (const auto& g : groups) {
    bytes += sizeof(g) + g.members.size() * sizeof(std::uint32_t) +
             (g.partition.heavy.size() + g.partition.light.size()) * sizeof(std::size_t);
  }
  for (const auto& l2 : l2_indexes) bytes += l2.memory_bytes();
  return bytes;
}

// --- query --------------------------------------------------------------------------

SelectionResult select_hypothesis(const PreprocessedIndex& idx, const SampleCounts& first,
                                  const SampleCounts& second, OpCounter& counter) {
  const std::size_t n = idx.vs->n();
  if (first.size() != n || second.size() != n) {
    throw std::invalid_argument("sample counts do not match the domain size");
  }
  if (first.nominal_s == 0 || second.nominal_s == 0) {
    throw std::invalid_argument("sample counts with nominal size 0");
  }
  SelectionResult res;
  OpCounter linf_ops;
  const auto phat = first.empirical();
  const auto near = idx.linf.query(phat, linf_ops);
  res.linf_choice = near.index;
  res.linf_evals = linf_ops.nns_candidate_evals;
  counter += linf_ops;

  const Group& g = idx.groups[near.index];
  res.group_size = g.members.size();
  if (g.members.size() == 1 || g.l2_index == kNoIndex) {
    // singleton, or no light coordinates: every member agrees on the light part
    res.selected = g.members.size() == 1 ? g.members.front() : g.leader;
    return res;
  }
  OpCounter l2_ops;
  const auto phat2 = second.empirical();
  const auto found = idx.l2_indexes[g.l2_index].query(phat2, l2_ops);
  res.selected = found.index;
  res.used_l2 = true;
  res.l2_fallback = found.fallback;
  res.l2_evals = l2_ops.nns_candidate_evals;
  counter += l2_ops;
  return res;
}

SelectionResult select_hypothesis(const PreprocessedIndex& idx, const Distribution& p,
                                  std::uint64_t seed, OpCounter& counter) {
  const auto [first, second] = split_halves(p, idx.config.s, seed);
  return select_hypothesis(idx, first, second, counter);
}

double light_statistic(const SampleCounts& phat_prime, const RestrictedVector& vL, double s) {
  if (phat_prime.size() != vL.size()) throw std::invalid_argument("length mismatch");
  double z = 0;
  for (auto i : vL.support()) {
    const double d = s * phat_prime.empirical(i) - s * vL[i];
    z += d * d;
  }
  return z;
}

// --- persistence --------------------------------------------------------------------

void save_index(const std::filesystem::path& path, const PreprocessedIndex& idx) {
  io::write_atomically(
      path,
      [&](std::ostream& out) {
        out.write(kIndexMagic.data(), kIndexMagic.size());
        io::put_u32(out, kIndexVersion);
        io::write_distributions_binary(out, *idx.vs);
        const auto& c = idx.config;
        io::put_f64(out, c.epsilon);
        io::put_f64(out, c.gamma);
        io::put_u64(out, c.s);
        io::put_f64(out, c.radius_const);
        io::put_f64(out, c.c_inf);
        io::put_f64(out, c.l2_failure_prob);
        io::put_f64(out, c.l2_radius_margin);
        io::put_u64(out, c.l2_max_base_functions);
        io::put_u64(out, c.seed);
        io::put_f64(out, idx.radius);
        idx.linf.write(out);
        io::put_u64(out, idx.l2_indexes.size());
        for (const auto& l2 : idx.l2_indexes) l2.write(out);
        io::put_u64(out, idx.groups.size());
        for (const auto& g : idx.groups) {
          io::put_u64(out, g.leader);
          io::put_u64(out, g.members.size());
          for (auto m : g.members) io::put_u32(out, m);
          io::put_f64(out, g.partition.gamma);
          put_index_list(out, g.partition.heavy);
          put_index_list(out, g.partition.light);
          io::put_u64(out, g.l2_index == kNoIndex ? ~std::uint64_t{0} : g.l2_index);
        }
      },
      true);
}

PreprocessedIndex load_index(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open index file " + path.string());
  std::array<char, 4> magic{};
  in.read(magic.data(), magic.size());
  if (in.gcount() != 4 || magic != kIndexMagic) throw DataError("missing DDEI magic");
  const auto version = io::get_u32(in);
  if (version != kIndexVersion) {
    throw DataError("unsupported index version " + std::to_string(version));
  }
  PreprocessedIndex idx;
  auto vs = std::make_shared<const DistributionSet>(io::parse_distributions_binary(in));
  idx.vs = vs;
  const std::size_t k = vs->k();
  const std::size_t n = vs->n();
  auto& c = idx.config;
  c.epsilon = io::get_f64(in);
  c.gamma = io::get_f64(in);
  c.s = io::get_u64(in);
  c.radius_const = io::get_f64(in);
  c.c_inf = io::get_f64(in);
  c.l2_failure_prob = io::get_f64(in);
  c.l2_radius_margin = io::get_f64(in);
  c.l2_max_base_functions = io::get_u64(in);
  c.seed = io::get_u64(in);
  idx.radius = io::get_f64(in);
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("index file: ") + e.what());
  }
  idx.linf = LinfIndex::read(in, vs);
  c.linf_backend = idx.linf.backend();
  const auto l2_count = io::get_u64(in);
  if (l2_count > k) throw DataError("index file: too many l2 indexes");
  for (std::uint64_t u = 0; u < l2_count; ++u) idx.l2_indexes.push_back(L2LshIndex::read(in));
  const auto groups = io::get_u64(in);
  if (groups != k) throw DataError("index file: group count does not match k");
  idx.groups.resize(k);
  for (auto& g : idx.groups) {
    g.leader = io::get_u64(in);
    const auto members = io::get_u64(in);
    if (g.leader >= k || members > k || members == 0) {
      throw DataError("index file: malformed group");
    }
    g.members.resize(members);
    for (auto& m : g.members) {
      m = io::get_u32(in);
      if (m >= k) throw DataError("index file: group member out of range");
    }
    g.partition.leader = g.leader;
    g.partition.gamma = io::get_f64(in);
    g.partition.heavy = get_index_list(in, n);
    g.partition.light = get_index_list(in, n);
    const auto l2 = io::get_u64(in);
    if (l2 == ~std::uint64_t{0}) {
      g.l2_index = kNoIndex;
    } else if (l2 < idx.l2_indexes.size()) {
      g.l2_index = l2;
    } else {
      throw DataError("index file: l2 index reference out of range");
    }
  }
  return idx;
}

}  // namespace densel
