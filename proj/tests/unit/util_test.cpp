#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <set>

#include "hardneg/util.hpp"
#include "test_support.hpp"

namespace hardneg {
namespace {

TEST(Sha256, KnownDigests) {
  EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Sha256, FileMatchesBytes) {
  testing::TempDir dir;
  write_file_atomic(dir / "f.txt", "abc");
  EXPECT_EQ(sha256_file(dir / "f.txt"), sha256_hex("abc"));
}

TEST(Hash64, SeedChangesHash) {
  EXPECT_EQ(hash64("token", 1), hash64("token", 1));
  EXPECT_NE(hash64("token", 1), hash64("token", 2));
  EXPECT_NE(derive_seed(7, "a"), derive_seed(7, "b"));
}

TEST(Rng, SameSeedSameStream) {
  Rng a(5), b(5);
  for (int i = 0; i < 100; ++i) ASSERT_EQ(a.next(), b.next());
}

TEST(Rng, UniformAndIndexRanges) {
  Rng rng(1);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    ASSERT_LT(rng.index(7), 7u);
  }
}

TEST(Rng, ShuffleIsPermutation) {
  Rng rng(9);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<int> v(trial);
    for (int i = 0; i < trial; ++i) v[i] = i;
    rng.shuffle(v);
    std::multiset<int> seen(v.begin(), v.end());
    ASSERT_EQ(seen.size(), static_cast<std::size_t>(trial));
    for (int i = 0; i < trial; ++i) ASSERT_EQ(seen.count(i), 1u);
  }
}

TEST(FormatDouble, RoundTripsExactly) {
  Rng rng(3);
  for (int i = 0; i < 1000; ++i) {
    const double x = (rng.uniform() - 0.5) * std::pow(10.0, static_cast<double>(rng.index(30)) - 15);
    ASSERT_EQ(std::stod(format_double(x)), x);
  }
  EXPECT_EQ(format_double(0.5), "0.5");
  EXPECT_EQ(std::stod(format_double(0.1)), 0.1);
}

TEST(FormatFixed, Digits) { EXPECT_EQ(format_fixed(0.12345, 3), "0.123"); }

TEST(Csv, EscapeAndParseRoundTrip) {
  const std::vector<std::string> fields = {"plain", "with,comma", "with \"quote\"", "", "x"};
  std::string line;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) line += ',';
    line += csv_escape(fields[i]);
  }
  EXPECT_EQ(parse_csv_line(line), fields);
  EXPECT_EQ(csv_escape("a,b"), "\"a,b\"");
}

TEST(Split, KeepsEmptyFields) {
  EXPECT_EQ(split("a,,b", ','), (std::vector<std::string>{"a", "", "b"}));
}

TEST(WriteFileAtomic, ReplacesContents) {
  testing::TempDir dir;
  write_file_atomic(dir / "x", "one");
  write_file_atomic(dir / "x", "two");
  EXPECT_EQ(read_file(dir / "x"), "two");
  EXPECT_THROW(read_file(dir / "missing"), Error);
}

TEST(Log, SinkReceivesWarnings) {
  std::vector<std::string> seen;
  auto previous = log::set_sink([&](log::Level level, std::string_view msg) {
    if (level == log::Level::warning) seen.emplace_back(msg);
  });
  log::warn("careful");
  log::set_sink(previous);
  ASSERT_EQ(seen.size(), 1u);
  EXPECT_EQ(seen[0], "careful");
}

}  // namespace
}  // namespace hardneg
