#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "densel/distribution.hpp"

namespace densel::io {

enum class Encoding { Text, Binary };

/// Text: header "n k", then k lines of n decimal probabilities.
/// Binary: "DDE1", u32 n, u32 k, k*n little-endian f64, row-major.
DistributionSet read_distributions(const std::filesystem::path& path);
DistributionSet parse_distributions_text(std::istream& in);
DistributionSet parse_distributions_binary(std::istream& in);
void write_distributions(const std::filesystem::path& path, const DistributionSet& set,
                         Encoding encoding);
void write_distributions_text(std::ostream& out, const DistributionSet& set);
void write_distributions_binary(std::ostream& out, const DistributionSet& set);

/// Text: one count per line, n lines. Binary: DDE1 header with k = 1.
SampleCounts read_sample_counts(const std::filesystem::path& path);
void write_sample_counts(const std::filesystem::path& path, const SampleCounts& counts,
                         Encoding encoding);

/// ".bin" selects the binary variant, anything else text.
Encoding encoding_for(const std::filesystem::path& path);

/// Writes through a sibling temporary file and renames it into place, so the
/// target is either absent, the previous version, or complete.
void write_atomically(const std::filesystem::path& path,
                      const std::function<void(std::ostream&)>& writer, bool binary = false);

// Little-endian primitives shared by the binary formats.
void put_u32(std::ostream& out, std::uint32_t v);
void put_u64(std::ostream& out, std::uint64_t v);
void put_f64(std::ostream& out, double v);
std::uint32_t get_u32(std::istream& in);
std::uint64_t get_u64(std::istream& in);
double get_f64(std::istream& in);

}  // namespace densel::io
