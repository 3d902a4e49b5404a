#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "chromsearch/common.hpp"
#include "chromsearch/csv.hpp"
#include "test_util.hpp"

using namespace chromsearch;

TEST(Strings, TrimSplitJoin) {
  EXPECT_EQ(trim("  a b \t\n"), "a b");
  EXPECT_EQ(trim(""), "");
  EXPECT_EQ(split_whitespace("  one two\tthree\n"), (std::vector<std::string>{"one", "two", "three"}));
  EXPECT_EQ(split_char("a,,b", ','), (std::vector<std::string>{"a", "", "b"}));
  EXPECT_EQ(join({"x", "y", "z"}, "-"), "x-y-z");
  EXPECT_EQ(to_lower("CeO2 Mixed"), "ceo2 mixed");
  EXPECT_TRUE(starts_with_icase("Abstract: x", "abstract"));
}

TEST(Strings, ParseNumbers) {
  EXPECT_DOUBLE_EQ(parse_double(" 1e-4 ", "x"), 1e-4);
  EXPECT_EQ(parse_int("42", "x"), 42);
  EXPECT_THROW(parse_int("4.2", "x"), ConfigError);
  EXPECT_THROW(parse_double("abc", "x"), ConfigError);
  EXPECT_EQ(format_fixed(0.8333333, 3), "0.833");
  EXPECT_EQ(format_number(0.001), "0.001");
}

TEST(Utf8, CharsAndLength) {
  const std::string s = "CeN₃O₉";
  EXPECT_EQ(utf8_length(s), 6u);
  const auto chars = utf8_chars(s);
  ASSERT_EQ(chars.size(), 6u);
  EXPECT_EQ(chars[3], "₃");
  std::string out;
  append_utf8(out, 0x2083);
  EXPECT_EQ(out, "₃");
}

TEST(Hashing, KnownVectors) {
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(hex64(0xabcULL), "0000000000000abc");
  EXPECT_NE(derive_seed(42, "split"), derive_seed(42, "init"));
  EXPECT_EQ(derive_seed(42, "split"), derive_seed(42, "split"));
}

TEST(Rng, DeterministicAndInRange) {
  Rng a(7), b(7), c(8);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next_u64();
    EXPECT_EQ(x, b.next_u64());
    differs |= x != c.next_u64();
  }
  EXPECT_TRUE(differs);
  Rng r(1);
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 10000; ++i) {
    const auto v = r.below(10);
    ASSERT_LT(v, 10u);
    seen.insert(v);
    const double u = r.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
  EXPECT_EQ(seen.size(), 10u);
}

TEST(Rng, NormalMoments) {
  Rng r(3);
  double s = 0, s2 = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double x = r.normal();
    s += x;
    s2 += x * x;
  }
  EXPECT_NEAR(s / n, 0.0, 0.01);
  EXPECT_NEAR(s2 / n, 1.0, 0.02);
}

TEST(BinaryIo, RoundTrip) {
  std::stringstream ss;
  write_u32(ss, 0xdeadbeef);
  write_f32(ss, -1.5f);
  write_lp_string(ss, "piece");
  EXPECT_EQ(read_u32(ss, "u32"), 0xdeadbeefu);
  EXPECT_EQ(read_f32(ss, "f32"), -1.5f);
  EXPECT_EQ(read_lp_string(ss, "str"), "piece");
  EXPECT_THROW(read_u32(ss, "past end"), ParseError);
}

TEST(Files, MissingInputIsMissingArtifact) {
  EXPECT_THROW(read_lines("/nonexistent/path/file.txt"), MissingArtifact);
  EXPECT_THROW(open_output("/nonexistent/dir/out.txt"), IoError);
}

TEST(Csv, QuotedFields) {
  EXPECT_EQ(csv::parse_line("a,\"b,c\",\"d\"\"e\""), (std::vector<std::string>{"a", "b,c", "d\"e"}));
  EXPECT_EQ(csv::parse_line(""), (std::vector<std::string>{""}));
  EXPECT_THROW(csv::parse_line("\"open"), ParseError);
  EXPECT_EQ(csv::escape("x,y"), "\"x,y\"");
  EXPECT_EQ(csv::escape("plain"), "plain");
  for (const std::string s : {"a", "a,b", "q\"uote", ""}) EXPECT_EQ(csv::parse_line(csv::escape(s)).at(0), s);
}

TEST(Csv, TableValidation) {
  testutil::TempDir d;
  testutil::write_file(d.file("t.csv"), "a,b\n1,2\n\n3,4\n");
  const auto t = csv::read_table(d.file("t.csv"), {"a", "b"});
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_EQ(t.line_numbers[1], 4u);
  EXPECT_THROW(csv::read_table(d.file("t.csv"), {"a", "c"}), ParseError);
  testutil::write_file(d.file("bad.csv"), "a,b\n1\n");
  try {
    csv::read_table(d.file("bad.csv"), {});
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("bad.csv:2"), std::string::npos);
  }
}
