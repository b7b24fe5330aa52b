#include <gtest/gtest.h>

#include <cmath>

#include "hardneg/bm25.hpp"
#include "test_support.hpp"

namespace hardneg {
namespace {

using Docs = std::vector<std::pair<std::string, std::vector<std::string>>>;

using Terms = std::vector<std::string>;

Bm25Index small_index() {
  return Bm25Index(Docs{{"d1", {"a", "b"}}, {"d2", {"a", "a", "b"}}, {"d3", {"c"}}});
}

TEST(Bm25, HandComputedScore) {
  const auto index = small_index();
  const Terms q = {"a"};
  EXPECT_NEAR(index.score(q, 0), 0.4700, 1e-3);
  EXPECT_NEAR(index.score(q, 0), std::log(1.6), 1e-12);  // length term cancels at avgdl
  EXPECT_EQ(index.score(q, 2), 0.0);
}

TEST(Bm25, OneDocIdf) {
  const Bm25Index index(Docs{{"d", {"x", "y"}}});
  EXPECT_NEAR(index.idf("x"), 0.2877, 1e-4);
  EXPECT_NEAR(index.idf("x"), std::log(1.0 + 0.5 / 1.5), 1e-15);
}

TEST(Bm25, ParamsValidated) {
  EXPECT_THROW((Bm25Params{0.0, 0.5}.validate()), ConfigError);
  EXPECT_THROW((Bm25Params{1.2, 1.5}.validate()), ConfigError);
  EXPECT_NO_THROW(Bm25Params{}.validate());
}

TEST(Bm25, MatchesFormulaOracle) {
  Rng rng(12);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + rng.index(40);
    std::vector<std::pair<std::string, Terms>> docs;
    std::vector<Terms> raw;
    for (std::size_t i = 0; i < n; ++i) {
      Terms t;
      for (std::size_t w = 0, len = 1 + rng.index(20); w < len; ++w) {
        t.push_back("t" + std::to_string(rng.index(15)));
      }
      raw.push_back(t);
      docs.emplace_back(testing::doc_name(i), t);
    }
    Bm25Params params{0.5 + rng.uniform() * 2.0, rng.uniform()};
    const Bm25Index index(docs, params);
    Terms q;
    for (std::size_t w = 0, len = 1 + rng.index(5); w < len; ++w) {
      q.push_back("t" + std::to_string(rng.index(18)));
    }
    const auto all = index.score_all(q);
    for (std::size_t d = 0; d < n; ++d) {
      const double expected = testing::oracle_bm25(q, raw, d, params.k1, params.b);
      ASSERT_NEAR(index.score(q, d), expected, 1e-9);
      ASSERT_NEAR(all[d], expected, 1e-9);
    }
  }
}

}  // namespace
}  // namespace hardneg
