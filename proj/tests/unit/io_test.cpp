#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "densel/io.hpp"

using namespace densel;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / "densel_io_test";
  fs::create_directories(dir);
  return dir / name;
}

std::string error_of(const std::string& text) {
  std::istringstream in(text);
  try {
    io::parse_distributions_text(in);
  } catch (const DataError& e) {
    return e.what();
  }
  return "";
}

DistributionSet sample_set() {
  return DistributionSet({Distribution({0.1, 0.2, 0.7}), Distribution({1.0 / 3, 1.0 / 3, 1.0 / 3}),
                          Distribution({0.0, 0.0, 1.0})});
}

}  // namespace

TEST(DistributionText, Parses) {
  std::istringstream in("3 2\n0.5 0.25 0.25\n\n0 1 0\n");
  auto vs = io::parse_distributions_text(in);
  EXPECT_EQ(vs.k(), 2u);
  EXPECT_EQ(vs.n(), 3u);
  EXPECT_DOUBLE_EQ(vs[0][1], 0.25);
  EXPECT_DOUBLE_EQ(vs[1][1], 1.0);
}

TEST(DistributionText, ErrorsNameTheLine) {
  EXPECT_EQ(error_of(""), "empty distribution file");
  EXPECT_NE(error_of("x y\n").find("line 1"), std::string::npos);
  EXPECT_NE(error_of("2 1\n0.5 abc\n").find("line 2"), std::string::npos);
  EXPECT_NE(error_of("2 2\n0.5 0.5\n0.5 0.4\n").find("line 3"), std::string::npos);
  EXPECT_NE(error_of("2 1\n0.5 0.5 0\n").find("expected 2 values"), std::string::npos);
  EXPECT_NE(error_of("2 2\n0.5 0.5\n").find("expected 2 rows"), std::string::npos);
  EXPECT_NE(error_of("2 1\n0.5 0.5\n1 0\n").find("trailing"), std::string::npos);
}

TEST(DistributionFiles, TextRoundTripIsExact) {
  auto path = scratch("set.txt");
  auto vs = sample_set();
  io::write_distributions(path, vs, io::Encoding::Text);
  auto back = io::read_distributions(path);
  ASSERT_EQ(back.k(), vs.k());
  for (std::size_t i = 0; i < vs.k(); ++i) EXPECT_EQ(back[i], vs[i]);
}

TEST(DistributionFiles, BinaryRoundTripIsExact) {
  auto path = scratch("set.bin");
  EXPECT_EQ(io::encoding_for(path), io::Encoding::Binary);
  auto vs = sample_set();
  io::write_distributions(path, vs, io::Encoding::Binary);
  // magic + n + k + k*n doubles
  EXPECT_EQ(fs::file_size(path), 4u + 4 + 4 + 9 * 8);
  auto back = io::read_distributions(path);
  ASSERT_EQ(back.k(), vs.k());
  for (std::size_t i = 0; i < vs.k(); ++i) EXPECT_EQ(back[i], vs[i]);
}

TEST(DistributionFiles, TruncatedBinaryFails) {
  std::ostringstream out;
  io::write_distributions_binary(out, sample_set());
  std::string bytes = out.str();
  std::istringstream in(bytes.substr(0, bytes.size() - 3));
  EXPECT_THROW(io::parse_distributions_binary(in), DataError);
}

TEST(DistributionFiles, MissingFileFails) {
  EXPECT_THROW(io::read_distributions(scratch("does_not_exist.txt")), DataError);
}

TEST(SampleCountFiles, RoundTrip) {
  SampleCounts sc;
  sc.counts = {3, 0, 5, 1};
  for (auto enc : {io::Encoding::Text, io::Encoding::Binary}) {
    auto path = scratch(enc == io::Encoding::Text ? "counts.txt" : "counts.bin");
    io::write_sample_counts(path, sc, enc);
    auto back = io::read_sample_counts(path);
    EXPECT_EQ(back.counts, sc.counts);
    EXPECT_EQ(back.total, 9u);
    EXPECT_EQ(back.nominal_s, 9u);
  }
}

TEST(SampleCountFiles, RejectsNegative) {
  auto path = scratch("bad_counts.txt");
  std::ofstream(path) << "1\n-2\n";
  try {
    io::read_sample_counts(path);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
}

TEST(AtomicWrite, LeavesNoTemporary) {
  auto path = scratch("atomic.txt");
  io::write_atomically(path, [](std::ostream& out) { out << "hello\n"; });
  std::ifstream in(path);
  std::string s;
  std::getline(in, s);
  EXPECT_EQ(s, "hello");
  for (const auto& entry : fs::directory_iterator(path.parent_path())) {
    EXPECT_EQ(entry.path().string().find(".tmp"), std::string::npos) << entry.path();
  }
}

TEST(AtomicWrite, FailingWriterKeepsOldFile) {
  auto path = scratch("atomic_keep.txt");
  io::write_atomically(path, [](std::ostream& out) { out << "old\n"; });
  EXPECT_THROW(io::write_atomically(path,
                                    [](std::ostream& out) {
                                      out << "partial";
                                      throw std::runtime_error("boom");
                                    }),
               std::runtime_error);
  std::ifstream in(path);
  std::string s;
  std::getline(in, s);
  EXPECT_EQ(s, "old");
}
