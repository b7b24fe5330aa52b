#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "hardneg/eval.hpp"
#include "test_support.hpp"

namespace hardneg {
namespace {

// Query `q` whose positive "p" sits at `rank` among `n` documents.
RankedList list_with_positive_at(const std::string& q, std::size_t rank, std::size_t n = 10) {
  RankedList l;
  l.query_id = q;
  for (std::size_t i = 1; i <= n; ++i) {
    l.entries.push_back({i == rank ? "p" : "x" + std::to_string(i), 1.0 - 0.01 * i});
  }
  return l;
}

Relevance positives(std::initializer_list<std::string> queries) {
  Relevance r;
  for (const auto& q : queries) r[q] = {"p"};
  return r;
}

TEST(Mrr, RanksOneTwoFour) {
  const std::vector<RankedList> lists = {list_with_positive_at("a", 1), list_with_positive_at("b", 2),
                                         list_with_positive_at("c", 4)};
  EXPECT_NEAR(mrr_at_k(lists, positives({"a", "b", "c"}), 10), 1.75 / 3.0, 1e-9);
  EXPECT_NEAR(mrr_at_k(lists, positives({"a", "b", "c"}), 10), 0.58333, 1e-5);
}

TEST(Mrr, PerfectAndCutoff) {
  const std::vector<RankedList> perfect = {list_with_positive_at("a", 1), list_with_positive_at("b", 1)};
  EXPECT_EQ(mrr_at_k(perfect, positives({"a", "b"}), 3), 1.0);
  const std::vector<RankedList> deep = {list_with_positive_at("a", 4)};
  EXPECT_EQ(mrr_at_k(deep, positives({"a"}), 3), 0.0);
  EXPECT_EQ(mrr(deep, positives({"a"})), 0.25);
  EXPECT_THROW(mrr_at_k(deep, positives({"a"}), 0), Error);
  EXPECT_THROW(mrr_at_k(deep, positives({"zz"}), 3), Error);
}

TEST(Precision, Examples) {
  const std::vector<RankedList> top3 = {list_with_positive_at("a", 2)};
  EXPECT_NEAR(precision_at_k(top3, positives({"a"}), 3), 1.0 / 3.0, 1e-15);
  const std::vector<RankedList> absent = {list_with_positive_at("a", 7)};
  EXPECT_EQ(precision_at_k(absent, positives({"a"}), 3), 0.0);
  EXPECT_THROW(precision_at_k(absent, positives({"a"}), 0), Error);

  RankedList multi;
  multi.query_id = "m";
  for (const char* id : {"r1", "x1", "r2", "x2", "x3"}) multi.entries.push_back({id, 0.5});
  const std::vector<RankedList> lists = {multi};
  EXPECT_NEAR(precision_at_k(lists, {{"m", {"r1", "r2"}}}, 5), 0.4, 1e-15);
}

TEST(SimAvg, Examples) {
  RankedList l{"q", {{"a", 0.9}, {"b", 0.8}, {"c", 0.7}, {"d", 0.1}}};
  const std::vector<RankedList> lists = {l};
  EXPECT_NEAR(sim_score_average_at_k(lists, 3), 0.8, 1e-15);
  EXPECT_EQ(sim_score_average_at_k(lists, 1), 0.9);
  RankedList flat{"q", {{"a", 0.25}, {"b", 0.25}}};
  const std::vector<RankedList> flats = {flat};
  EXPECT_EQ(sim_score_average_at_k(flats, 10), 0.25);
}

TEST(SimAvg, EmptyListSkippedWithWarning) {
  std::size_t warnings = 0;
  auto prev = log::set_sink([&](log::Level l, std::string_view) { warnings += l == log::Level::warning; });
  const std::vector<RankedList> lists = {RankedList{"e", {}}, RankedList{"q", {{"a", 0.5}}}};
  EXPECT_EQ(sim_score_average_at_k(lists, 3), 0.5);
  log::set_sink(prev);
  EXPECT_EQ(warnings, 1u);
}

TEST(Metrics, MatchOraclesOnRandomInstances) {
  Rng rng(100);
  for (int trial = 0; trial < 200; ++trial) {
    auto inst = testing::random_ranking_instance(rng, 50, 200);
    for (std::size_t k : {1, 3, 10, 1000}) {
      const double m = mrr_at_k(inst.lists, inst.relevance, k);
      ASSERT_NEAR(m, testing::oracle_mrr_at_k(inst.lists, inst.relevance, k), 1e-12);
      ASSERT_NEAR(precision_at_k(inst.lists, inst.relevance, k),
                  testing::oracle_precision_at_k(inst.lists, inst.relevance, k), 1e-12);
      ASSERT_GE(m, 0.0);
      ASSERT_LE(m, 1.0);
    }
    ASSERT_LE(mrr_at_k(inst.lists, inst.relevance, 3), mrr_at_k(inst.lists, inst.relevance, 10));
    const double before = mrr_at_k(inst.lists, inst.relevance, 10);
    const double p_before = precision_at_k(inst.lists, inst.relevance, 3);
    rng.shuffle(inst.lists);
    ASSERT_NEAR(mrr_at_k(inst.lists, inst.relevance, 10), before, 1e-12);
    ASSERT_NEAR(precision_at_k(inst.lists, inst.relevance, 3), p_before, 1e-12);
  }
}

TEST(Buckets, SplitByPositiveLength) {
  const std::vector<RankedList> lists = {list_with_positive_at("s", 1), list_with_positive_at("l", 2),
                                         list_with_positive_at("b", 4)};
  const std::map<std::string, std::size_t> words = {{"s", 100}, {"l", 5000}, {"b", 2048}};
  const auto reports = bucketed_report(lists, positives({"s", "l", "b"}), words);
  ASSERT_EQ(reports.size(), 3u);
  EXPECT_EQ(reports[0].bucket, Bucket::all);
  EXPECT_EQ(reports[0].num_queries, 3u);
  EXPECT_EQ(reports[1].bucket, Bucket::short_docs);
  EXPECT_EQ(reports[1].num_queries, 2u);  // 2048 counts as short
  EXPECT_EQ(reports[2].num_queries, 1u);
  EXPECT_EQ(reports[2].mrr_at.at(10), 0.5);
  EXPECT_NEAR(reports[1].mrr_at.at(10), (1.0 + 0.25) / 2.0, 1e-15);
}

TEST(Buckets, EmptyLongBucketIsFlaggedNotError) {
  const std::vector<RankedList> lists = {list_with_positive_at("s", 1)};
  const auto reports = bucketed_report(lists, positives({"s"}), {{"s", 10}});
  EXPECT_TRUE(reports[2].empty());
  EXPECT_FALSE(reports[1].empty());
}

TEST(Buckets, PartitionProperty) {
  Rng rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    const auto inst = testing::random_ranking_instance(rng, 40, 30);
    std::map<std::string, std::size_t> words;
    for (const auto& l : inst.lists) words[l.query_id] = 2040 + rng.index(20);
    const auto r = bucketed_report(inst.lists, inst.relevance, words);
    ASSERT_EQ(r[1].num_queries + r[2].num_queries, r[0].num_queries);
    ASSERT_EQ(r[0].num_queries, inst.lists.size());
  }
}

EvalReport report_with(double mrr3, double sim10) {
  EvalReport r;
  r.bucket = Bucket::short_docs;
  r.num_queries = 5;
  r.mrr_at = {{3, mrr3}};
  r.precision_at = {{3, 0.1}};
  r.sim_avg_at = {{10, sim10}};
  return r;
}

TEST(Compare, SignedDeltas) {
  const std::vector<EvalReport> a = {report_with(0.53, 0.75)};
  const std::vector<EvalReport> b = {report_with(0.64, 0.40)};
  const auto rows = compare_runs(a, b);
  bool saw_mrr = false, saw_sim = false;
  for (const auto& row : rows) {
    if (row.metric == "mrr" && row.k == 3) {
      EXPECT_NEAR(row.delta, 0.11, 1e-12);
      saw_mrr = true;
    }
    if (row.metric == "sim_avg" && row.k == 10) {
      EXPECT_NEAR(row.delta, -0.35, 1e-12);
      saw_sim = true;
    }
  }
  EXPECT_TRUE(saw_mrr && saw_sim);
  for (const auto& row : compare_runs(a, a)) EXPECT_EQ(row.delta, 0.0);
}

TEST(Compare, MismatchedKeys) {
  std::vector<EvalReport> a = {report_with(0.5, 0.5)};
  std::vector<EvalReport> b = a;
  b[0].mrr_at = {{10, 0.5}};
  EXPECT_THROW(compare_runs(a, b), Error);
  b = a;
  b[0].bucket = Bucket::long_docs;
  EXPECT_THROW(compare_runs(a, b), Error);
}

TEST(ReportCsv, RoundTrip) {
  const std::vector<RankedList> lists = {list_with_positive_at("s", 1), list_with_positive_at("l", 3)};
  const auto reports =
      bucketed_report(lists, positives({"s", "l"}), {{"s", 1}, {"l", 9000}});
  testing::TempDir dir;
  {
    std::ofstream out(dir / "r.csv");
    write_report_csv(out, reports);
  }
  const auto back = read_report_csv(dir / "r.csv");
  ASSERT_EQ(back.size(), reports.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    EXPECT_EQ(back[i].bucket, reports[i].bucket);
    EXPECT_EQ(back[i].num_queries, reports[i].num_queries);
    EXPECT_EQ(back[i].mrr_at, reports[i].mrr_at);
    EXPECT_EQ(back[i].precision_at, reports[i].precision_at);
    EXPECT_EQ(back[i].sim_avg_at, reports[i].sim_avg_at);
  }
  std::ostringstream again;
  write_report_csv(again, back);
  EXPECT_EQ(again.str(), read_file(dir / "r.csv"));
}

TEST(RankedJsonl, RoundTrip) {
  const std::vector<RankedList> lists = {list_with_positive_at("a", 2, 4), RankedList{"b", {}}};
  testing::TempDir dir;
  {
    std::ofstream out(dir / "ranked.jsonl");
    write_ranked_jsonl(out, lists);
  }
  const auto back = read_ranked_jsonl(dir / "ranked.jsonl");
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].query_id, "a");
  EXPECT_EQ(back[0].entries, lists[0].entries);
  EXPECT_TRUE(back[1].entries.empty());
}

TEST(BucketNames, RoundTrip) {
  for (auto b : {Bucket::all, Bucket::short_docs, Bucket::long_docs}) {
    EXPECT_EQ(parse_bucket(to_string(b)), b);
  }
  EXPECT_THROW(parse_bucket("medium"), Error);
}

}  // namespace
}  // namespace hardneg
