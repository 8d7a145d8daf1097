#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "avt/csv.hpp"

using namespace avt;

namespace {

std::string line(std::vector<std::string_view> fields) {
  std::ostringstream out;
  csv::write_record(out, fields);
  return out.str();
}

}  // namespace

TEST(Csv, QuotingRules) {
  EXPECT_EQ(line({"1", "a man playing a guitar", "0 1 -2"}), "1,a man playing a guitar,0 1 -2\r\n");
  EXPECT_EQ(line({"2", "dogs, cats", "x"}), "2,\"dogs, cats\",x\r\n");
  EXPECT_EQ(line({"3", "say \"hi\"", ""}), "3,\"say \"\"hi\"\"\",\r\n");
  EXPECT_EQ(line({"4", "two\nlines"}), "4,\"two\nlines\"\r\n");
}

TEST(Csv, ReadsBackWhatItWrites) {
  std::mt19937 rng(9);
  const std::string alphabet = "ab ,\"\r\n\txyz\xc3\xa9";
  std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1), len(0, 12), nf(1, 5);
  std::vector<std::vector<std::string>> records;
  std::ostringstream out;
  for (int r = 0; r < 300; ++r) {
    std::vector<std::string> rec(nf(rng));
    for (auto& f : rec) {
      const std::size_t n = len(rng);
      for (std::size_t i = 0; i < n; ++i) f += alphabet[pick(rng)];
    }
    // A lone empty field is indistinguishable from an empty line.
    if (rec.size() == 1 && rec[0].empty()) rec[0] = "e";
    records.push_back(rec);
    csv::write_record(out, std::vector<std::string_view>(rec.begin(), rec.end()));
  }
  std::istringstream in(out.str());
  for (const auto& expected : records) {
    const auto got = csv::read_record(in);
    ASSERT_TRUE(got.has_value());
    EXPECT_EQ(*got, expected);
  }
  EXPECT_FALSE(csv::read_record(in).has_value());
}

TEST(Csv, AcceptsBareLf) {
  std::istringstream in("a,b\nc,d\n");
  EXPECT_EQ(*csv::read_record(in), (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(*csv::read_record(in), (std::vector<std::string>{"c", "d"}));
}

TEST(Csv, RejectsMalformed) {
  std::istringstream unterminated("1,\"open\r\n");
  EXPECT_THROW(csv::read_record(unterminated), Error);
  std::istringstream stray("1,ab\"c\r\n");
  EXPECT_THROW(csv::read_record(stray), Error);
}
