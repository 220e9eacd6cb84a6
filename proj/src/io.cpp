#include "densel/io.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

namespace densel::io {

namespace {

constexpr std::array<char, 4> kMagic{'D', 'D', 'E', '1'};

bool has_magic(std::istream& in) {
  std::array<char, 4> buf{};
  in.read(buf.data(), buf.size());
  const bool ok = in.gcount() == 4 && buf == kMagic;
  in.clear();
  in.seekg(0);
  return ok;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return in;
}

double parse_double(std::string_view token, std::size_t line) {
  double v = 0;
  const auto* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw DataError("line " + std::to_string(line) + ": bad number '" + std::string(token) + "'");
  }
  return v;
}

std::vector<double> read_f64_row(std::istream& in, std::size_t n) {
  std::vector<double> row(n);
  for (auto& v : row) v = get_f64(in);
  return row;
}

}  // namespace

void put_u32(std::ostream& out, std::uint32_t v) {
  std::array<char, 4> b{};
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(b.data(), b.size());
}

void put_u64(std::ostream& out, std::uint64_t v) {
  std::array<char, 8> b{};
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(b.data(), b.size());
}

void put_f64(std::ostream& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

std::uint32_t get_u32(std::istream& in) {
  std::array<unsigned char, 4> b{};
  in.read(reinterpret_cast<char*>(b.data()), b.size());
  if (in.gcount() != 4) throw DataError("truncated binary file");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

std::uint64_t get_u64(std::istream& in) {
  std::array<unsigned char, 8> b{};
  in.read(reinterpret_cast<char*>(b.data()), b.size());
  if (in.gcount() != 8) throw DataError("truncated binary file");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

double get_f64(std::istream& in) { return std::bit_cast<double>(get_u64(in)); }

Encoding encoding_for(const std::filesystem::path& path) {
  return path.extension() == ".bin" ? Encoding::Binary : Encoding::Text;
}

DistributionSet parse_distributions_text(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  auto next_line = [&]() -> bool {
    while (std::getline(in, line)) {
      ++lineno;
      if (line.find_first_not_of(" \t\r") != std::string::npos) return true;
    }
    return false;
  };
  if (!next_line()) throw DataError("empty distribution file");
  std::size_t n = 0;
  std::size_t k = 0;
  {
    std::istringstream header(line);
    if (!(header >> n >> k) || n == 0 || k == 0) {
      throw DataError("line " + std::to_string(lineno) + ": expected header 'n k'");
    }
  }
  std::vector<Distribution> dists;
  dists.reserve(k);
  for (std::size_t row = 0; row < k; ++row) {
    if (!next_line()) {
      throw DataError("expected " + std::to_string(k) + " rows, found " + std::to_string(row));
    }
    std::vector<double> probs;
    probs.reserve(n);
    std::istringstream ls(line);
    std::string token;
    while (ls >> token) probs.push_back(parse_double(token, lineno));
    if (probs.size() != n) {
      throw DataError("line " + std::to_string(lineno) + ": expected " + std::to_string(n) +
                      " values, found " + std::to_string(probs.size()));
    }
    try {
      dists.emplace_back(std::move(probs));
    } catch (const std::invalid_argument& e) {
      throw DataError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (next_line()) throw DataError("line " + std::to_string(lineno) + ": trailing data");
  return DistributionSet(std::move(dists));
}

DistributionSet parse_distributions_binary(std::istream& in) {
  std::array<char, 4> magic{};
  in.read(magic.data(), magic.size());
  if (in.gcount() != 4 || magic != kMagic) throw DataError("missing DDE1 magic");
  const std::uint32_t n = get_u32(in);
  const std::uint32_t k = get_u32(in);
  if (n == 0 || k == 0) throw DataError("binary distribution file with n or k = 0");
  std::vector<Distribution> dists;
  dists.reserve(k);
  for (std::uint32_t row = 0; row < k; ++row) {
    try {
      dists.emplace_back(read_f64_row(in, n));
    } catch (const std::invalid_argument& e) {
      throw DataError("row " + std::to_string(row) + ": " + e.what());
    }
  }
  return DistributionSet(std::move(dists));
}

DistributionSet read_distributions(const std::filesystem::path& path) {
  auto in = open_in(path);
  return has_magic(in) ? parse_distributions_binary(in) : parse_distributions_text(in);
}

void write_distributions_text(std::ostream& out, const DistributionSet& set) {
  out << set.n() << ' ' << set.k() << '\n';
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (const auto& d : set) {
    for (std::size_t i = 0; i < d.size(); ++i) {
      if (i) out << ' ';
      out << d[i];
    }
    out << '\n';
  }
}

void write_distributions_binary(std::ostream& out, const DistributionSet& set) {
  out.write(kMagic.data(), kMagic.size());
  put_u32(out, static_cast<std::uint32_t>(set.n()));
  put_u32(out, static_cast<std::uint32_t>(set.k()));
  for (const auto& d : set) {
    for (double v : d.probs()) put_f64(out, v);
  }
}

void write_distributions(const std::filesystem::path& path, const DistributionSet& set,
                         Encoding encoding) {
  const bool binary = encoding == Encoding::Binary;
  write_atomically(
      path,
      [&](std::ostream& out) {
        binary ? write_distributions_binary(out, set) : write_distributions_text(out, set);
      },
      binary);
}

SampleCounts read_sample_counts(const std::filesystem::path& path) {
  auto in = open_in(path);
  SampleCounts sc;
  if (has_magic(in)) {
    std::array<char, 4> magic{};
    in.read(magic.data(), magic.size());
    const std::uint32_t n = get_u32(in);
    const std::uint32_t k = get_u32(in);
    if (k != 1) throw DataError("binary sample file must have k = 1");
    for (double v : read_f64_row(in, n)) {
      if (v < 0 || v != std::floor(v)) throw DataError("sample counts must be whole numbers");
      sc.counts.push_back(static_cast<std::uint64_t>(v));
    }
  } else {
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto first = line.find_first_not_of(" \t\r");
      if (first == std::string::npos) continue;
      const auto last = line.find_last_not_of(" \t\r");
      const std::string_view tok(line.data() + first, last - first + 1);
      std::uint64_t v = 0;
      auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
      if (ec != std::errc() || ptr != tok.data() + tok.size()) {
        throw DataError("line " + std::to_string(lineno) + ": expected a non-negative integer");
      }
      sc.counts.push_back(v);
    }
  }
  if (sc.counts.empty()) throw DataError("empty sample file");
  for (auto c : sc.counts) sc.total += c;
  sc.nominal_s = sc.total;
  return sc;
}

void write_sample_counts(const std::filesystem::path& path, const SampleCounts& counts,
                         Encoding encoding) {
  const bool binary = encoding == Encoding::Binary;
  write_atomically(
      path,
      [&](std::ostream& out) {
        if (binary) {
          out.write(kMagic.data(), kMagic.size());
          put_u32(out, static_cast<std::uint32_t>(counts.size()));
          put_u32(out, 1);
          for (auto c : counts.counts) put_f64(out, static_cast<double>(c));
        } else {
          for (auto c : counts.counts) out << c << '\n';
        }
      },
      binary);
}

void write_atomically(const std::filesystem::path& path,
                      const std::function<void(std::ostream&)>& writer, bool binary) {
  auto tmp = path;
  tmp += ".tmp";
  try {
    std::ofstream out(tmp, binary ? std::ios::binary | std::ios::trunc : std::ios::trunc);
    if (!out) throw DataError("cannot write " + tmp.string());
    writer(out);
    out.flush();
    if (!out) throw DataError("write failed for " + tmp.string());
  } catch (...) {
    std::error_code ec;
    std::filesystem::remove(tmp, ec);
    throw;
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace densel::io
