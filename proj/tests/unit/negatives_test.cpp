#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "hardneg/bm25.hpp"
#include "hardneg/negatives.hpp"
#include "test_support.hpp"

namespace hardneg {
namespace {

using Docs = std::vector<std::pair<std::string, std::vector<std::string>>>;

using Ids = std::vector<std::string>;

HardNegativeCandidate cand(const std::string& id, double sq, double sp, std::size_t cluster = 0,
                           std::size_t words = 100) {
  HardNegativeCandidate c;
  c.doc_id = id;
  c.sim_query = sq;
  c.sim_positive = sp;
  c.cluster = cluster;
  c.word_count = words;
  return c;
}

HardNegativeConfig m_of(std::size_t m) {
  HardNegativeConfig c;
  c.m = m;
  return c;
}

TEST(HardNegatives, SpecExample) {
  const std::vector<HardNegativeCandidate> c = {
      cand("p", 1.0, 1.0), cand("d2", 0.90, 0.85), cand("d3", 0.40, 0.30), cand("d4", 0.88, 0.90)};
  const auto sel = select_hard_negatives(c, "p", 0, 100, m_of(2));
  EXPECT_EQ(sel.doc_ids, (Ids{"d4", "d2"}));
  EXPECT_EQ(sel.stage, SelectionStage::cluster_and_band);
  EXPECT_NEAR(hardness(0.88, 0.90), 0.89, 1e-15);
  EXPECT_NEAR(hardness(0.90, 0.85), 0.875, 1e-15);
}

TEST(HardNegatives, SingleCandidate) {
  const std::vector<HardNegativeCandidate> c = {cand("p", 1, 1), cand("x", 0.1, 0.2)};
  EXPECT_EQ(select_hard_negatives(c, "p", 0, 100, m_of(1)).doc_ids, (Ids{"x"}));
}

TEST(HardNegatives, OnlyPositiveGivesEmptyWithWarning) {
  std::vector<std::string> warnings;
  auto prev = log::set_sink([&](log::Level l, std::string_view m) {
    if (l == log::Level::warning) warnings.emplace_back(m);
  });
  const std::vector<HardNegativeCandidate> c = {cand("p", 1, 1)};
  const auto sel = select_hard_negatives(c, "p", 0, 100, m_of(2));
  log::set_sink(prev);
  EXPECT_TRUE(sel.doc_ids.empty());
  EXPECT_EQ(sel.stage, SelectionStage::none);
  EXPECT_EQ(warnings.size(), 1u);
}

TEST(HardNegatives, StagedRelaxation) {
  // d_far is hardest but in another cluster; d_long is out of band.
  const std::vector<HardNegativeCandidate> c = {
      cand("p", 1, 1, 0, 100), cand("d_near", 0.5, 0.5, 0, 100), cand("d_far", 0.9, 0.9, 1, 100),
      cand("d_long", 0.95, 0.95, 0, 500)};
  auto sel = select_hard_negatives(c, "p", 0, 100, m_of(1));
  EXPECT_EQ(sel.doc_ids, (Ids{"d_near"}));
  EXPECT_EQ(sel.stage, SelectionStage::cluster_and_band);
  sel = select_hard_negatives(c, "p", 0, 100, m_of(2));
  EXPECT_EQ(sel.doc_ids, (Ids{"d_far", "d_near"}));
  EXPECT_EQ(sel.stage, SelectionStage::pool_and_band);
  sel = select_hard_negatives(c, "p", 0, 100, m_of(3));
  EXPECT_EQ(sel.doc_ids, (Ids{"d_long", "d_far", "d_near"}));
  EXPECT_EQ(sel.stage, SelectionStage::pool);
}

TEST(HardNegatives, BandBoundsInclusive) {
  const std::vector<HardNegativeCandidate> c = {cand("lo", 0.1, 0.1, 0, 50),
                                                cand("hi", 0.2, 0.2, 0, 200)};
  const auto sel = select_hard_negatives(c, "p", 0, 100, m_of(2));
  EXPECT_EQ(sel.stage, SelectionStage::cluster_and_band);
}

TEST(HardNegatives, MinRule) {
  EXPECT_EQ(hardness(0.9, 0.2, HardnessRule::min), 0.2);
  EXPECT_EQ(parse_hardness_rule("min"), HardnessRule::min);
  EXPECT_THROW(parse_hardness_rule("max"), ConfigError);
}

TEST(HardNegatives, ContractHoldsOnRandomInstances) {
  Rng rng(77);
  for (int trial = 0; trial < 2000; ++trial) {
    const auto inst = testing::random_hard_negative_instance(rng);
    auto prev = log::set_sink([](log::Level, std::string_view) {});
    const auto sel = select_hard_negatives(inst.candidates, inst.positive, inst.positive_cluster,
                                           inst.positive_words, inst.config);
    log::set_sink(prev);
    ASSERT_EQ(testing::check_hard_negative_contract(inst, sel), "") << "trial " << trial;
  }
}

TEST(RandomNegatives, Forced) {
  const Ids docs = {"p", "d1"};
  EXPECT_EQ(sample_random_negatives(docs, "p", 1, 5), (Ids{"d1"}));
}

TEST(RandomNegatives, DeterministicDistinctAndOrderFree) {
  Ids docs;
  for (int i = 0; i < 50; ++i) docs.push_back(testing::doc_name(i));
  const auto a = sample_random_negatives(docs, "d007", 10, 123);
  Ids reversed(docs.rbegin(), docs.rend());
  EXPECT_EQ(sample_random_negatives(reversed, "d007", 10, 123), a);
  std::set<std::string> distinct(a.begin(), a.end());
  EXPECT_EQ(distinct.size(), 10u);
  EXPECT_FALSE(distinct.count("d007"));
  EXPECT_NE(sample_random_negatives(docs, "d007", 10, 124), a);
}

TEST(RandomNegatives, Insufficient) {
  const Ids docs = {"p", "d1"};
  EXPECT_THROW(sample_random_negatives(docs, "p", 2, 0), Error);
}

TEST(RandomNegatives, UniformWithinThreeSigma) {
  const Ids docs = {"p", "a", "b", "c"};
  std::map<std::string, double> counts;
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) {
    counts[sample_random_negatives(docs, "p", 1, derive_seed(2024, std::to_string(i)))[0]] += 1;
  }
  const double expected = draws / 3.0;
  const double sigma = std::sqrt(draws * (1.0 / 3.0) * (2.0 / 3.0));
  ASSERT_EQ(counts.size(), 3u);
  for (const auto& [id, n] : counts) EXPECT_LT(std::abs(n - expected), 3.0 * sigma) << id;
}

TEST(Bm25Negatives, ZeroScoresFallBackToLowestIds) {
  const Bm25Index index(Docs{{"p", {"x"}}, {"d3", {"y"}}, {"d1", {"z"}}, {"d2", {"w"}}});
  const std::vector<std::string> q = {"x"};
  EXPECT_EQ(bm25_negatives(index, q, "p", 2), (Ids{"d1", "d2"}));
}

TEST(Bm25Negatives, MoreThanAvailable) {
  const Bm25Index index(Docs{{"p", {"x"}}, {"d1", {"x"}}, {"d2", {"y"}}});
  const std::vector<std::string> q = {"x"};
  auto prev = log::set_sink([](log::Level, std::string_view) {});
  const auto out = bm25_negatives(index, q, "p", 5);
  log::set_sink(prev);
  EXPECT_EQ(out, (Ids{"d1", "d2"}));
}

TEST(Bm25Negatives, MatchesOracle) {
  Rng rng(40);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng.index(199);
    std::vector<std::pair<std::string, Ids>> docs;
    std::vector<Ids> raw;
    Ids ids;
    for (std::size_t i = 0; i < n; ++i) {
      Ids t;
      for (std::size_t w = 0, len = 1 + rng.index(10); w < len; ++w) {
        t.push_back("t" + std::to_string(rng.index(12)));
      }
      raw.push_back(t);
      ids.push_back(testing::doc_name(i));
      docs.emplace_back(ids.back(), t);
    }
    const Bm25Index index(docs);
    const Ids q = {"t" + std::to_string(rng.index(12)), "t" + std::to_string(rng.index(12))};
    const std::string positive = ids[rng.index(n)];
    const std::size_t m = 1 + rng.index(5);
    std::vector<double> scores;
    Ids kept;
    for (std::size_t d = 0; d < n; ++d) {
      if (ids[d] == positive) continue;
      scores.push_back(testing::oracle_bm25(q, raw, d, 1.2, 0.75));
      kept.push_back(ids[d]);
    }
    // Round to absorb summation-order noise before comparing orders.
    for (auto& s : scores) s = std::round(s * 1e9) / 1e9;
    Ids expected;
    for (const auto& [id, _] : testing::oracle_top_k(scores, kept, m)) expected.push_back(id);
    auto prev = log::set_sink([](log::Level, std::string_view) {});
    const auto got = bm25_negatives(index, q, positive, m);
    log::set_sink(prev);
    ASSERT_EQ(got, expected) << "trial " << trial;
  }
}

TEST(BuildTriplets, Counts) {
  const std::vector<QrelPair> one = {{"q1", "p1"}};
  NegativeSets sets;
  sets["q1"][NegativeKind::hard] = {"n1", "n2"};
  EXPECT_EQ(build_triplets(one, sets).size(), 2u);

  std::vector<QrelPair> qrels;
  NegativeSets many;
  for (int q = 3; q >= 1; --q) {
    const std::string id = "q" + std::to_string(q);
    qrels.push_back({id, "p" + std::to_string(q)});
    many[id][NegativeKind::random] = {"r1" + id, "r2" + id};
    many[id][NegativeKind::hard] = {"h1" + id, "h2" + id};
  }
  const auto triplets = build_triplets(qrels, many);
  std::size_t expected = 0;
  for (const auto& [_, kinds] : many) {
    for (const auto& [__, list] : kinds) expected += list.size();
  }
  ASSERT_EQ(expected, 12u);
  ASSERT_EQ(triplets.size(), expected);
  EXPECT_EQ(triplets[0], (Triplet{"q1", "p1", "h1q1", NegativeKind::hard}));
  EXPECT_EQ(triplets[1].negative_doc_id, "h2q1");
  EXPECT_EQ(triplets[2].negative_kind, NegativeKind::random);
  EXPECT_EQ(triplets[11].query_id, "q3");
}

TEST(BuildTriplets, PositiveAsNegativeRejected) {
  const std::vector<QrelPair> qrels = {{"q1", "p1"}};
  NegativeSets sets;
  sets["q1"][NegativeKind::hard] = {"n1", "p1"};
  EXPECT_THROW(build_triplets(qrels, sets), Error);
}

TEST(Triplets, JsonlRoundTrip) {
  Corpus corpus({{"p1", "", "positive text", 2, ""}, {"n1", "", "negative \"quoted\" text", 3, ""}},
                {{"q1", "the query", 2}}, {{"q1", "p1"}});
  const std::vector<Triplet> triplets = {{"q1", "p1", "n1", NegativeKind::bm25}};
  testing::TempDir dir;
  {
    std::ofstream out(dir / "t.jsonl");
    write_triplets_jsonl(out, triplets, corpus);
  }
  const auto back = read_triplets_jsonl(dir / "t.jsonl");
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0].triplet, triplets[0]);
  EXPECT_EQ(back[0].query, "the query");
  EXPECT_EQ(back[0].pos, "positive text");
  EXPECT_EQ(back[0].neg, "negative \"quoted\" text");
}

TEST(NegativeKind, RoundTrip) {
  for (auto k : {NegativeKind::hard, NegativeKind::random, NegativeKind::bm25}) {
    EXPECT_EQ(parse_negative_kind(to_string(k)), k);
  }
  EXPECT_THROW(parse_negative_kind("easy"), ConfigError);
}

}  // namespace
}  // namespace hardneg
