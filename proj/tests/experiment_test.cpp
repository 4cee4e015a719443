#include "kpe/experiment.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include <gtest/gtest.h>

#include "kpe/csv.hpp"
#include "kpe/errors.hpp"
#include "kpe/snapshot.hpp"
#include "test_support.hpp"

namespace kpe {
namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) out.push_back(line);
  return out;
}

class ExperimentTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("kpe_experiment_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  ExperimentConfig small_config() const {
    ExperimentConfig c;
    c.max_transitions = 1500;
    c.bucket = 250;
    c.output = dir_ / "out";
    return c;
  }

  fs::path dir_;
};

TEST_F(ExperimentTest, WritesOneCsvAndSnapshotPerSeedPlusAggregate) {
  const ExperimentConfig c = small_config();
  run_experiment(c, 2);
  for (std::uint64_t seed : c.seeds) {
    const auto csv = lines_of(slurp(seed_csv_path(c.output, seed)));
    ASSERT_GT(csv.size(), 1u) << "seed " << seed;
    EXPECT_EQ(csv.front(), kSeedCsvHeader);
    EXPECT_TRUE(fs::exists(seed_snapshot_path(c.output, seed)));
  }
  const auto agg = lines_of(slurp(aggregate_csv_path(c.output)));
  ASSERT_EQ(agg.size(), 1u + c.max_transitions / c.bucket);
  EXPECT_EQ(agg.front(), kAggregateCsvHeader);
  EXPECT_EQ(split_csv_line(agg.back()).front(), "1500");
}

TEST_F(ExperimentTest, ZeroTransitionsWriteHeadersOnly) {
  ExperimentConfig c = small_config();
  c.max_transitions = 0;
  run_experiment(c, 1);
  for (std::uint64_t seed : c.seeds) {
    EXPECT_EQ(slurp(seed_csv_path(c.output, seed)), std::string(kSeedCsvHeader) + "\n");
    EXPECT_FALSE(fs::exists(seed_snapshot_path(c.output, seed)));
  }
  EXPECT_EQ(slurp(aggregate_csv_path(c.output)), std::string(kAggregateCsvHeader) + "\n");
}

TEST_F(ExperimentTest, RerunsAreByteIdenticalForAnyWorkerCount) {
  ExperimentConfig a = small_config();
  a.output = dir_ / "a";
  ExperimentConfig b = small_config();
  b.output = dir_ / "b";
  run_experiment(a, 1);
  run_experiment(b, 3);
  for (std::uint64_t seed : a.seeds) {
    EXPECT_EQ(slurp(seed_csv_path(a.output, seed)), slurp(seed_csv_path(b.output, seed)));
    EXPECT_EQ(slurp(seed_snapshot_path(a.output, seed)), slurp(seed_snapshot_path(b.output, seed)));
  }
  EXPECT_EQ(slurp(aggregate_csv_path(a.output)), slurp(aggregate_csv_path(b.output)));
}

TEST_F(ExperimentTest, AggregateCanBeRecomputedFromSeedFiles) {
  const ExperimentConfig c = small_config();
  run_experiment(c, 2);
  std::vector<std::vector<EpisodeRecord>> curves;
  for (std::uint64_t seed : c.seeds) {
    std::ifstream in(seed_csv_path(c.output, seed));
    curves.push_back(read_seed_csv(in));
  }
  std::ostringstream recomputed;
  write_aggregate_csv(recomputed, aggregate(curves, c.bucket, c.max_transitions));
  EXPECT_EQ(recomputed.str(), slurp(aggregate_csv_path(c.output)));
}

TEST_F(ExperimentTest, SnapshotReproducesFinalPredictionsExactly) {
  ExperimentConfig c = small_config();
  c.seeds = {4};
  const auto runs = run_seeds(c, 1);
  run_experiment(c, 1);
  const Snapshot snap = load_snapshot(seed_snapshot_path(c.output, 4));
  EXPECT_EQ(snap.method, c.method);
  EXPECT_EQ(snap.network.dictionary.size(), runs[0].log.network.dictionary.size());
  Rng rng(9);
  for (int i = 0; i < 50; ++i) {
    const StateAction x = test::random_sa(rng, 1, 2);
    EXPECT_EQ(snap.network.predict(x), runs[0].log.network.predict(x));
  }
}

TEST_F(ExperimentTest, DictionaryExportListsEveryCenter) {
  ExperimentConfig c = small_config();
  c.seeds = {2};
  run_experiment(c, 1);
  const Snapshot snap = load_snapshot(seed_snapshot_path(c.output, 2));
  std::ostringstream out;
  write_dictionary_csv(out, snap.network.dictionary);
  const auto rows = lines_of(out.str());
  ASSERT_EQ(rows.size(), snap.network.dictionary.size() + 1);
  EXPECT_EQ(rows.front(), "index,insertion_step,action,s0");
  EXPECT_EQ(split_csv_line(rows[1]).size(), 4u);
}

TEST(SeedCsv, RoundTripIsExact) {
  std::vector<EpisodeRecord> records;
  Rng rng(3);
  std::normal_distribution<double> g(0.0, 1.0);
  for (std::size_t i = 0; i < 20; ++i) {
    records.push_back({10 * i + 3, i, g(rng), g(rng) / 3.0, i + 1, std::abs(g(rng)) * 1e-7, 0.1 / 3.0});
  }
  std::stringstream ss;
  write_seed_csv(ss, records);
  const auto back = read_seed_csv(ss);
  ASSERT_EQ(back.size(), records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    EXPECT_EQ(back[i].transitions_seen, records[i].transitions_seen);
    EXPECT_EQ(back[i].episode_index, records[i].episode_index);
    EXPECT_EQ(back[i].episode_return, records[i].episode_return);
    EXPECT_EQ(back[i].mean_return_window, records[i].mean_return_window);
    EXPECT_EQ(back[i].dict_size, records[i].dict_size);
    EXPECT_EQ(back[i].cost_xi, records[i].cost_xi);
    EXPECT_EQ(back[i].wallclock_ms_per_step, records[i].wallclock_ms_per_step);
  }
}

TEST(SeedCsv, MalformedInputThrows) {
  std::istringstream wrong_header("a,b\n");
  EXPECT_THROW(read_seed_csv(wrong_header), Error);
  std::istringstream short_row(std::string(kSeedCsvHeader) + "\n1,2,3\n");
  EXPECT_THROW(read_seed_csv(short_row), Error);
}

EpisodeRecord at(std::size_t transitions, double mean_return, std::size_t dict) {
  EpisodeRecord r;
  r.transitions_seen = transitions;
  r.mean_return_window = mean_return;
  r.dict_size = dict;
  return r;
}

TEST(Aggregate, UsesLatestEpisodePerSeedAndSampleDeviation) {
  const std::vector<std::vector<EpisodeRecord>> runs = {
      {at(5, 1.0, 2), at(9, 3.0, 4), at(15, 5.0, 6)},
      {at(12, 2.0, 3)},
  };
  const auto rows = aggregate(runs, 10, 20);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].transitions, 10u);
  EXPECT_EQ(rows[0].seeds, 1u);
  EXPECT_DOUBLE_EQ(rows[0].mean_return, 3.0);
  EXPECT_DOUBLE_EQ(rows[0].std_return, 0.0);
  EXPECT_EQ(rows[1].seeds, 2u);
  EXPECT_DOUBLE_EQ(rows[1].mean_return, 3.5);
  EXPECT_DOUBLE_EQ(rows[1].std_return, std::sqrt(4.5));
  EXPECT_DOUBLE_EQ(rows[1].mean_dict_size, 4.5);
}

TEST(Aggregate, PartialLastBucketEndsAtMaxTransitions) {
  const auto rows = aggregate({{at(3, 1.0, 1)}}, 10, 25);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows.back().transitions, 25u);
}

// Sets an environment variable for the lifetime of the object.
class ScopedEnv {
 public:
  ScopedEnv(const char* name, const char* value) : name_(name) { ::setenv(name, value, 1); }
  ~ScopedEnv() { ::unsetenv(name_); }

 private:
  const char* name_;
};

TEST(WorkerCap, HonoursEnvironmentVariable) {
  const std::size_t hw = std::max(1u, std::thread::hardware_concurrency());
  {
    ::unsetenv(kMaxWorkersEnv);
    EXPECT_EQ(worker_cap(), hw);
  }
  {
    ScopedEnv env(kMaxWorkersEnv, "1");
    EXPECT_EQ(worker_cap(), 1u);
  }
  {
    ScopedEnv env(kMaxWorkersEnv, "100000");
    EXPECT_EQ(worker_cap(), hw);
  }
  for (const char* bad : {"0", "-2", "four", "3x"}) {
    ScopedEnv env(kMaxWorkersEnv, bad);
    EXPECT_THROW(worker_cap(), ConfigError) << bad;
  }
}

TEST(RunSeeds, ResultsFollowSeedOrder) {
  ExperimentConfig c;
  c.max_transitions = 300;
  c.seeds = {9, 2, 5};
  const auto runs = run_seeds(c, 2);
  ASSERT_EQ(runs.size(), 3u);
  EXPECT_EQ(runs[0].seed, 9u);
  EXPECT_EQ(runs[1].seed, 2u);
  EXPECT_EQ(runs[2].seed, 5u);
}

}  // namespace
}  // namespace kpe
