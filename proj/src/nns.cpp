#include "densel/nns.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numbers>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "densel/io.hpp"

namespace densel {

namespace {

constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

void put_size_vector(std::ostream& out, const std::vector<std::size_t>& v) {
  io::put_u64(out, v.size());
  for (auto x : v) io::put_u64(out, x);
}

std::vector<std::size_t> get_size_vector(std::istream& in, std::size_t limit) {
  const auto len = io::get_u64(in);
  if (len > limit) throw DataError("index file: vector length out of range");
  std::vector<std::size_t> v(len);
  for (auto& x : v) x = io::get_u64(in);
  return v;
}

}  // namespace

// --- exact references -------------------------------------------------------

namespace {

template <class Dist>
std::size_t exact_argmin(const DistributionSet& vs, std::span<const double> q, Dist dist) {
  if (vs.k() == 0) throw std::invalid_argument("nearest neighbor over an empty set");
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < vs.k(); ++j) {
    const double d = dist(vs[j].probs(), q);
    if (d < best_d) {
      best_d = d;
      best = j;
    }
  }
  return best;
}

}  // namespace

std::size_t exact_argmin_l2(const DistributionSet& vs, std::span<const double> q) {
  return exact_argmin(vs, q, [](auto a, auto b) { return l2_distance_squared(a, b); });
}
std::size_t exact_argmin_linf(const DistributionSet& vs, std::span<const double> q) {
  return exact_argmin(vs, q, [](auto a, auto b) { return linf_distance(a, b); });
}
std::size_t exact_argmin_l1(const DistributionSet& vs, std::span<const double> q) {
  return exact_argmin(vs, q, [](auto a, auto b) { return l1_distance(a, b); });
}

// --- LinfIndex ----------------------------------------------------------------

LinfIndex::LinfIndex(std::shared_ptr<const DistributionSet> vs, LinfBackend backend,
                     std::uint64_t seed, double approx_c)
    : vs_(std::move(vs)), backend_(backend), approx_c_(approx_c) {
  if (!vs_ || vs_->k() == 0) throw std::invalid_argument("linf index over an empty set");
  if (!(approx_c >= 1)) throw std::invalid_argument("approximation factor must be >= 1");
  if (backend_.kind == LinfBackend::Kind::ExactScan) {
    approx_c_ = 1.0;
    return;
  }
  if (backend_.coords == 0 || backend_.reps == 0) {
    throw std::invalid_argument("coordinate-sample backend needs coords > 0 and reps > 0");
  }
  const std::size_t n = vs_->n();
  const std::size_t m = std::min(backend_.coords, n);
  Rng rng(derive_seed(seed, {0x6c696e66ULL}));
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), std::size_t{0});
  for (std::size_t r = 0; r < backend_.reps; ++r) {
    // partial Fisher-Yates
    for (std::size_t c = 0; c < m; ++c) {
      const std::size_t pick = c + static_cast<std::size_t>(rng.below(n - c));
      std::swap(all[c], all[pick]);
    }
    std::vector<std::size_t> coords(all.begin(), all.begin() + m);
    std::sort(coords.begin(), coords.end());
    sampled_.push_back(std::move(coords));
  }
}

NnsResult LinfIndex::query(std::span<const double> q, OpCounter& counter) const {
  if (!vs_) throw std::logic_error("query on an empty linf index");
  if (q.size() != vs_->n()) throw std::invalid_argument("query length does not match domain");
  const std::size_t k = vs_->k();
  NnsResult res;
  if (backend_.kind == LinfBackend::Kind::ExactScan) {
    res.index = exact_argmin_linf(*vs_, q);
    res.distance = linf_distance((*vs_)[res.index].probs(), q);
    res.candidates = k;
    counter.nns_candidate_evals += k;
    return res;
  }

  const std::size_t top =
      std::min(k, backend_.top ? backend_.top
                               : static_cast<std::size_t>(std::ceil(std::sqrt(double(k)))));
  std::vector<char> chosen(k, 0);
  std::vector<std::size_t> candidates;
  std::vector<std::pair<double, std::size_t>> est(k);
  for (const auto& coords : sampled_) {
    for (std::size_t j = 0; j < k; ++j) {
      const auto v = (*vs_)[j].probs();
      double d = 0;
      for (auto c : coords) d = std::max(d, std::fabs(v[c] - q[c]));
      est[j] = {d, j};
    }
    std::partial_sort(est.begin(), est.begin() + static_cast<std::ptrdiff_t>(top), est.end());
    for (std::size_t t = 0; t < top; ++t) {
      const auto j = est[t].second;
      if (!chosen[j]) {
        chosen[j] = 1;
        candidates.push_back(j);
      }
    }
  }
  std::sort(candidates.begin(), candidates.end());
  res.index = candidates.front();
  res.distance = std::numeric_limits<double>::infinity();
  for (auto j : candidates) {
    const double d = linf_distance((*vs_)[j].probs(), q);
    if (d < res.distance) {
      res.distance = d;
      res.index = j;
    }
  }
  res.candidates = candidates.size();
  counter.nns_candidate_evals += candidates.size();
  return res;
}

void LinfIndex::write(std::ostream& out) const {
  io::put_u32(out, backend_.kind == LinfBackend::Kind::ExactScan ? 0 : 1);
  io::put_u64(out, backend_.coords);
  io::put_u64(out, backend_.reps);
  io::put_u64(out, backend_.top);
  io::put_f64(out, approx_c_);
  io::put_u64(out, sampled_.size());
  for (const auto& s : sampled_) put_size_vector(out, s);
}

LinfIndex LinfIndex::read(std::istream& in, std::shared_ptr<const DistributionSet> vs) {
  LinfIndex idx;
  idx.vs_ = std::move(vs);
  const auto kind = io::get_u32(in);
  if (kind > 1) throw DataError("index file: unknown linf backend");
  idx.backend_.kind = kind == 0 ? LinfBackend::Kind::ExactScan : LinfBackend::Kind::CoordinateSample;
  idx.backend_.coords = io::get_u64(in);
  idx.backend_.reps = io::get_u64(in);
  idx.backend_.top = io::get_u64(in);
  idx.approx_c_ = io::get_f64(in);
  const auto reps = io::get_u64(in);
  if (reps > (1u << 20)) throw DataError("index file: repetition count out of range");
  const std::size_t n = idx.vs_->n();
  for (std::uint64_t r = 0; r < reps; ++r) {
    auto coords = get_size_vector(in, n);
    for (auto c : coords) {
      if (c >= n) throw DataError("index file: sampled coordinate out of range");
    }
    idx.sampled_.push_back(std::move(coords));
  }
  return idx;
}

// --- L2 LSH -------------------------------------------------------------------

double gaussian_collision_probability(double u) {
  if (!(u > 0)) return 0.0;
  if (std::isinf(u)) return 1.0;
  const double term = 2.0 / (std::sqrt(2.0 * std::numbers::pi) * u) * (-std::expm1(-u * u / 2));
  return std::clamp(1.0 - 2.0 * normal_cdf(-u) - term, 0.0, 1.0);
}

L2LshParams standard_l2_params(std::size_t points, double approx_c, double distance_scale,
                               std::uint64_t seed, double failure_prob,
                               std::size_t max_base_functions) {
  if (!(approx_c > 1)) throw std::invalid_argument("lsh approximation factor must exceed 1");
  if (!(distance_scale > 0)) throw std::invalid_argument("lsh distance scale must be positive");
  if (!(failure_prob > 0 && failure_prob < 1)) {
    throw std::invalid_argument("lsh failure probability must lie in (0, 1)");
  }
  L2LshParams p;
  p.approx_c = approx_c;
  p.seed = seed;
  p.bucket_width = 4.0 * distance_scale;
  const double p1 = gaussian_collision_probability(4.0);
  const double p2 = gaussian_collision_probability(4.0 / approx_c);
  const double t = static_cast<double>(std::max<std::size_t>(points, 2));
  auto r = static_cast<std::size_t>(std::ceil(std::log(t) / std::log(1.0 / p2)));
  r = std::max<std::size_t>(2, r + r % 2);
  p.projections = r;
  const double q = std::pow(p1, static_cast<double>(r / 2));
  // P(fewer than two of m base functions collide) <= failure_prob
  std::size_t m = 2;
  for (; m < max_base_functions; ++m) {
    const double miss = std::pow(1 - q, double(m)) + double(m) * q * std::pow(1 - q, double(m - 1));
    if (miss <= failure_prob) break;
  }
  p.base_functions = m;
  return p;
}

L2LshIndex::L2LshIndex(std::span<const RestrictedVector> vecs, std::vector<std::size_t> ids,
                       const L2LshParams& params)
    : params_(params) {
  if (vecs.empty()) throw std::invalid_argument("lsh index over no vectors");
  if (params.projections < 2 || params.projections % 2 != 0) {
    throw std::invalid_argument("lsh projections must be even and >= 2");
  }
  if (params.base_functions < 2) throw std::invalid_argument("lsh needs >= 2 base functions");
  if (!(params.bucket_width > 0)) throw std::invalid_argument("lsh bucket width must be positive");
  if (ids.empty()) {
    ids.resize(vecs.size());
    std::iota(ids.begin(), ids.end(), std::size_t{0});
  }
  if (ids.size() != vecs.size()) throw std::invalid_argument("lsh ids and vectors differ in count");
  n_ = vecs.front().size();
  support_ = vecs.front().support();
  for (const auto& v : vecs) {
    if (v.size() != n_ || v.support() != support_) {
      throw std::invalid_argument("lsh vectors must share one domain and support");
    }
  }
  if (vecs.size() > std::numeric_limits<std::uint32_t>::max()) {
    throw std::invalid_argument("lsh index too large");
  }
  ids_ = std::move(ids);
  const std::size_t d = support_.size();
  rows_.reserve(vecs.size() * d);
  for (const auto& v : vecs) {
    for (auto c : support_) rows_.push_back(v[c]);
  }

  const std::size_t half = params_.projections / 2;
  const std::size_t m = params_.base_functions;
  Rng rng(derive_seed(params_.seed, {0x6c7368ULL}));
  proj_.resize(m * half * d);
  for (auto& a : proj_) a = standard_normal(rng);
  offsets_.resize(m * half);
  for (auto& b : offsets_) b = rng.uniform() * params_.bucket_width;
  hash_all();
}

std::uint64_t L2LshIndex::bucket_key(std::size_t base, std::span<const double> x) const {
  const std::size_t half = params_.projections / 2;
  const std::size_t d = support_.size();
  std::uint64_t key = 0x9e3779b97f4a7c15ULL ^ base;
  for (std::size_t h = 0; h < half; ++h) {
    const double* a = proj_.data() + (base * half + h) * d;
    double dot = 0;
    for (std::size_t c = 0; c < d; ++c) dot += a[c] * x[c];
    const auto cell =
        static_cast<std::int64_t>(std::floor((dot + offsets_[base * half + h]) / params_.bucket_width));
    key = mix64(key ^ static_cast<std::uint64_t>(cell));
  }
  return key;
}

void L2LshIndex::hash_all() {
  const std::size_t d = support_.size();
  buckets_.assign(params_.base_functions, {});
  for (std::size_t b = 0; b < params_.base_functions; ++b) {
    auto& table = buckets_[b];
    table.reserve(ids_.size());
    for (std::size_t pos = 0; pos < ids_.size(); ++pos) {
      table.emplace_back(bucket_key(b, std::span<const double>(rows_.data() + pos * d, d)),
                         static_cast<std::uint32_t>(pos));
    }
    std::sort(table.begin(), table.end());
  }
}

std::vector<double> L2LshIndex::compact(std::span<const double> q) const {
  if (q.size() != n_) throw std::invalid_argument("query length does not match domain");
  std::vector<double> out;
  out.reserve(support_.size());
  for (auto c : support_) out.push_back(q[c]);
  return out;
}

double L2LshIndex::distance_squared(std::size_t pos, std::span<const double> cq) const {
  const std::size_t d = support_.size();
  const double* row = rows_.data() + pos * d;
  double acc = 0;
  for (std::size_t c = 0; c < d; ++c) {
    const double diff = row[c] - cq[c];
    acc += diff * diff;
  }
  return acc;
}

NnsResult L2LshIndex::exact_query(std::span<const double> q, OpCounter& counter) const {
  const auto cq = compact(q);
  NnsResult res;
  res.distance = std::numeric_limits<double>::infinity();
  std::size_t best = npos;
  for (std::size_t pos = 0; pos < ids_.size(); ++pos) {
    const double d = distance_squared(pos, cq);
    if (d < res.distance || (d == res.distance && ids_[pos] < ids_[best])) {
      res.distance = d;
      best = pos;
    }
  }
  res.index = ids_[best];
  res.distance = std::sqrt(res.distance);
  res.candidates = ids_.size();
  counter.nns_candidate_evals += ids_.size();
  return res;
}

NnsResult L2LshIndex::query(std::span<const double> q, OpCounter& counter) const {
  if (ids_.empty()) throw std::logic_error("query on an empty lsh index");
  const auto cq = compact(q);
  std::vector<std::uint32_t> hits(ids_.size(), 0);
  std::vector<std::uint32_t> candidates;
  for (std::size_t b = 0; b < params_.base_functions; ++b) {
    const auto key = bucket_key(b, cq);
    const auto& table = buckets_[b];
    auto it = std::lower_bound(table.begin(), table.end(),
                               std::pair<std::uint64_t, std::uint32_t>{key, 0});
    for (; it != table.end() && it->first == key; ++it) {
      if (++hits[it->second] == 2) candidates.push_back(it->second);
    }
  }
  if (candidates.empty()) {
    auto res = exact_query(q, counter);
    res.fallback = true;
    return res;
  }
  NnsResult res;
  res.distance = std::numeric_limits<double>::infinity();
  std::size_t best = npos;
  for (auto pos : candidates) {
    const double d = distance_squared(pos, cq);
    if (d < res.distance || (d == res.distance && ids_[pos] < ids_[best])) {
      res.distance = d;
      best = pos;
    }
  }
  res.index = ids_[best];
  res.distance = std::sqrt(res.distance);
  res.candidates = candidates.size();
  counter.nns_candidate_evals += candidates.size();
  return res;
}

std::size_t L2LshIndex::memory_bytes() const noexcept {
  std::size_t bytes = sizeof(*this);
  bytes += support_.size() * sizeof(std::size_t) + ids_.size() * sizeof(std::size_t);
  bytes += (rows_.size() + proj_.size() + offsets_.size()) * sizeof(double);
  for (const auto& t : buckets_) bytes += t.size() * sizeof(t.front());
  return bytes;
}

// Tables are rebuilt from the stored projections on load.
void L2LshIndex::write(std::ostream& out) const {
  io::put_u64(out, params_.projections);
  io::put_u64(out, params_.base_functions);
  io::put_f64(out, params_.bucket_width);
  io::put_f64(out, params_.approx_c);
  io::put_u64(out, params_.seed);
  io::put_u64(out, n_);
  put_size_vector(out, support_);
  put_size_vector(out, ids_);
  for (double x : rows_) io::put_f64(out, x);
  for (double x : proj_) io::put_f64(out, x);
  for (double x : offsets_) io::put_f64(out, x);
}

L2LshIndex L2LshIndex::read(std::istream& in) {
  constexpr std::size_t limit = std::size_t{1} << 32;
  L2LshIndex idx;
  idx.params_.projections = io::get_u64(in);
  idx.params_.base_functions = io::get_u64(in);
  idx.params_.bucket_width = io::get_f64(in);
  idx.params_.approx_c = io::get_f64(in);
  idx.params_.seed = io::get_u64(in);
  idx.n_ = io::get_u64(in);
  const auto& p = idx.params_;
  if (p.projections < 2 || p.projections % 2 != 0 || p.projections > 4096 ||
      p.base_functions < 2 || p.base_functions > (1u << 16) || !(p.bucket_width > 0) ||
      idx.n_ > limit) {
    throw DataError("index file: invalid lsh parameters");
  }
  idx.support_ = get_size_vector(in, idx.n_);
  for (auto c : idx.support_) {
    if (c >= idx.n_) throw DataError("index file: lsh support out of range");
  }
  idx.ids_ = get_size_vector(in, limit);
  const std::size_t d = idx.support_.size();
  const std::size_t half = p.projections / 2;
  idx.rows_.resize(idx.ids_.size() * d);
  for (auto& x : idx.rows_) x = io::get_f64(in);
  idx.proj_.resize(p.base_functions * half * d);
  for (auto& x : idx.proj_) x = io::get_f64(in);
  idx.offsets_.resize(p.base_functions * half);
  for (auto& x : idx.offsets_) x = io::get_f64(in);
  if (!in) throw DataError("index file: truncated lsh table");
  idx.hash_all();
  return idx;
}

}  // namespace densel
