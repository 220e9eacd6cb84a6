#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "densel/distribution.hpp"

namespace densel {

struct Packet {
  std::int64_t timestamp_us = 0;
  std::string src_key;
};

/// CSV lines `timestamp_us,src_key`. An optional first line
/// `timestamp_us,src_key` is skipped; blank lines are ignored. Malformed
/// lines raise DataError naming the line.
std::vector<Packet> parse_trace(std::istream& in, const std::string& source = "trace");
std::vector<Packet> parse_trace(const std::filesystem::path& path);
void write_trace(std::ostream& out, const std::vector<Packet>& packets);
void write_trace(const std::filesystem::path& path, const std::vector<Packet>& packets);

struct ChunkSpec {
  enum class Kind { ByCount, ByTime };
  Kind kind = Kind::ByCount;
  std::uint64_t value = 100000;  // packets, or milliseconds

  static ChunkSpec by_count(std::uint64_t m) { return {Kind::ByCount, m}; }
  static ChunkSpec by_time_ms(std::uint64_t ms) { return {Kind::ByTime, ms}; }
};

/// "count=M" or "time=MS".
ChunkSpec parse_chunk_spec(const std::string& text);

struct ChunkedTrace {
  DistributionSet dists;
  std::vector<std::string> dictionary;  // domain element i is dictionary[i]
  std::vector<std::uint64_t> packets;   // per chunk
  std::size_t dropped_empty = 0;
};

/// ByCount cuts consecutive runs of m packets in file order (the last chunk
/// may be shorter). ByTime cuts windows of ms milliseconds from the earliest
/// timestamp; windows without packets are dropped with a warning on `warn`.
/// The dictionary holds every key of the stream in order of first appearance.
ChunkedTrace chunk_to_distributions(const std::vector<Packet>& packets, ChunkSpec spec,
                                    std::ostream* warn = nullptr);

void write_dictionary(const std::filesystem::path& path, const std::vector<std::string>& dict);
std::vector<std::string> read_dictionary(const std::filesystem::path& path);

/// Chunked synthetic traffic over n_keys source keys. Key weights start at a
/// randomly permuted Zipf law and their logs take an independent Gaussian
/// step of size `drift` between consecutive chunks.
std::vector<Packet> gen_synthetic_trace(std::size_t n_keys, std::size_t chunks,
                                        std::size_t packets_per_chunk, double drift,
                                        std::uint64_t seed);

struct NetEvalSpec {
  std::size_t n_dataset = 2048;
  std::size_t n_queries = 100;
  std::uint64_t samples = 100;
  std::uint64_t fastconst = 10;
  std::size_t nallpairs = 0;
  std::size_t trials = 10;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
};

struct NetRow {
  std::size_t query_id = 0;  // chunk index of the query
  std::size_t trial = 0;
  std::string mode;          // "base" or "fast"
  std::uint64_t samples = 0;
  std::uint64_t fastconst = 0;
  std::size_t nallpairs = 0;
  double tv_answer = 0;
  double tv_nn = 0;
  double tv_mean = 0;
  std::uint64_t ops = 0;
};

/// Query j is chunk n_dataset + j, searched over the n_dataset chunks right
/// before it. Each trial draws `samples` draws with replacement from the
/// query chunk and runs the base and fast tournaments on them.
std::vector<NetRow> nn_eval(const DistributionSet& chunks, const NetEvalSpec& spec);

std::string net_csv_header();
void write_net_csv(std::ostream& out, const std::vector<NetRow>& rows);
void write_net_csv(const std::filesystem::path& path, const std::vector<NetRow>& rows);

}  // namespace densel
