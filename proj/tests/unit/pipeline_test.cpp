#include <gtest/gtest.h>

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <filesystem>

#include "hardneg/config.hpp"
#include "hardneg/pipeline.hpp"
#include "test_support.hpp"

namespace hardneg {
namespace {

namespace fs = std::filesystem;

PipelineConfig small_config(const fs::path& out, std::uint64_t seed = 5) {
  auto c = demo_config();
  c.synthetic.n_queries = 20;
  c.synthetic.confounders = 5;
  c.train.epochs = 2;
  c.seed = seed;
  c.output_dir = out;
  return c;
}

class Quiet : public ::testing::Test {
 protected:
  void SetUp() override { previous_ = log::set_sink([](log::Level, std::string_view) {}); }
  void TearDown() override { log::set_sink(previous_); }
  log::Sink previous_;
};

using Pipeline = Quiet;

TEST_F(Pipeline, DemoIsDeterministicAcrossDirectories) {
  testing::TempDir dir;
  const auto a = run_demo(small_config(dir / "a"));
  const auto b = run_demo(small_config(dir / "b"));
  for (const std::string& file :
       {artifact::triplets("hard"), artifact::triplets("random"), artifact::model("hard"),
        artifact::model("random"), artifact::report("hard"), artifact::report(kBaselineRanker),
        std::string(artifact::pools), std::string(artifact::scores)}) {
    ASSERT_TRUE(fs::exists(a.run_dir / file)) << file;
    EXPECT_EQ(read_file(a.run_dir / file), read_file(b.run_dir / file)) << file;
  }
  EXPECT_TRUE(a.reports.count("hard"));
  EXPECT_TRUE(a.reports.count(kBaselineRanker));
  EXPECT_FALSE(a.comparisons.empty());
}

TEST_F(Pipeline, RerunSkipsEveryStage) {
  testing::TempDir dir;
  const auto first = run_demo(small_config(dir / "r"));
  for (const auto& s : first.stages) EXPECT_FALSE(s.skipped) << to_string(s.stage);
  const auto second = run_demo(small_config(dir / "r"));
  ASSERT_EQ(second.stages.size(), all_stages().size());
  for (const auto& s : second.stages) EXPECT_TRUE(s.skipped) << to_string(s.stage);
  EXPECT_EQ(second.reports.at("hard").front().mrr_at, first.reports.at("hard").front().mrr_at);
}

TEST_F(Pipeline, ChangedSettingRerunsFromThatStage) {
  testing::TempDir dir;
  auto cfg = small_config(dir / "c");
  run_demo(cfg);
  cfg.train.epochs = 3;
  const auto again = run_demo(cfg);
  for (const auto& s : again.stages) {
    const bool upstream = s.stage == Stage::ingest || s.stage == Stage::embed ||
                          s.stage == Stage::score || s.stage == Stage::mine;
    EXPECT_EQ(s.skipped, upstream) << to_string(s.stage);
  }
}

TEST_F(Pipeline, LockedRunDirectoryIsRefused) {
  testing::TempDir dir;
  const auto out = dir / "locked";
  fs::create_directories(out);
  const int fd = ::open((out / artifact::lock).c_str(), O_RDWR | O_CREAT, 0644);
  ASSERT_GE(fd, 0);
  ASSERT_EQ(::flock(fd, LOCK_EX | LOCK_NB), 0);
  auto cfg = small_config(out);
  cfg.corpus_path = dir / "nowhere";
  try {
    run_pipeline(cfg);
    ADD_FAILURE() << "expected the lock to be refused";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("in use"), std::string::npos) << e.what();
  }
  ::close(fd);
}

TEST_F(Pipeline, FailureNamesTheStage) {
  testing::TempDir dir;
  auto cfg = small_config(dir / "f");
  cfg.corpus_path = dir / "no-such-corpus";
  try {
    run_pipeline(cfg);
    FAIL() << "expected StageError";
  } catch (const StageError& e) {
    EXPECT_EQ(e.stage(), "ingest");
    EXPECT_NE(std::string(e.what()).find("stage 'ingest' failed"), std::string::npos);
  }
}

TEST_F(Pipeline, MissingSeedAndOutputRejected) {
  auto cfg = demo_config();
  cfg.seed.reset();
  EXPECT_THROW(run_demo(cfg), ConfigError);
  cfg = demo_config();
  cfg.output_dir.clear();
  EXPECT_THROW(run_demo(cfg), ConfigError);
}

TEST(SplitQueries, DisjointCoverAndDeterministic) {
  std::vector<std::string> ids;
  for (int i = 0; i < 200; ++i) ids.push_back("q" + std::to_string(i));
  const auto a = split_queries(ids, 3, 0.2);
  EXPECT_EQ(a.train.size() + a.test.size(), ids.size());
  std::set<std::string> all(a.train.begin(), a.train.end());
  for (const auto& q : a.test) EXPECT_TRUE(all.insert(q).second);
  EXPECT_GT(a.test.size(), 20u);
  EXPECT_LT(a.test.size(), 60u);
  std::vector<std::string> reversed(ids.rbegin(), ids.rend());
  const auto b = split_queries(reversed, 3, 0.2);
  EXPECT_EQ(a.test, b.test);
  EXPECT_NE(split_queries(ids, 4, 0.2).test, a.test);
}

TEST(SplitQueries, ZeroFractionUsesEverything) {
  const std::vector<std::string> ids = {"b", "a"};
  const auto s = split_queries(ids, 1, 0.0);
  EXPECT_EQ(s.train, (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(s.test, s.train);
}

TEST(Stages, NamesRoundTrip) {
  for (Stage s : all_stages()) EXPECT_EQ(parse_stage(to_string(s)), s);
  EXPECT_THROW(parse_stage("deploy"), Error);
}

}  // namespace
}  // namespace hardneg
