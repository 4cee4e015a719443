#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "kpe/config.hpp"
#include "kpe/control.hpp"

namespace kpe {

/// Environment variable that caps the number of seeds run concurrently.
inline constexpr const char* kMaxWorkersEnv = "KPE_MAX_WORKERS";

/// min(hardware threads, KPE_MAX_WORKERS) and at least 1. Throws ConfigError
/// when the variable is set but is not a positive integer.
std::size_t worker_cap();

struct SeedRun {
  std::uint64_t seed = 0;
  RunLog log;
};

/// Runs every seed of the config (in parallel up to `workers`) and returns
/// the runs in seed-list order.
std::vector<SeedRun> run_seeds(const ExperimentConfig& config, std::size_t workers);

inline constexpr const char* kSeedCsvHeader =
    "transitions_seen,episode_index,episode_return,mean_return_window,dict_size,cost_xi,"
    "wallclock_ms_per_step";

void write_seed_csv(std::ostream& out, const std::vector<EpisodeRecord>& episodes);
/// Inverse of write_seed_csv. Throws Error on a malformed file.
std::vector<EpisodeRecord> read_seed_csv(std::istream& in);

/// One aggregate row: the learning-curve value of each seed at the end of
/// the bucket (mean_return_window and dict_size of its latest finished
/// episode), averaged across the seeds that have finished one.
struct AggregateRow {
  std::size_t transitions = 0;
  std::size_t seeds = 0;
  double mean_return = 0.0;
  double std_return = 0.0;
  double mean_dict_size = 0.0;
  double std_dict_size = 0.0;
};

inline constexpr const char* kAggregateCsvHeader =
    "transitions,seeds,mean_return,std_return,mean_dict_size,std_dict_size";

/// Buckets end at bucket, 2*bucket, ... and a final partial bucket ends at
/// max_transitions. Standard deviations are sample deviations (0 for a
/// single seed).
std::vector<AggregateRow> aggregate(const std::vector<std::vector<EpisodeRecord>>& runs,
                                    std::size_t bucket, std::size_t max_transitions);
void write_aggregate_csv(std::ostream& out, const std::vector<AggregateRow>& rows);

std::filesystem::path seed_csv_path(const std::filesystem::path& dir, std::uint64_t seed);
std::filesystem::path seed_snapshot_path(const std::filesystem::path& dir, std::uint64_t seed);
std::filesystem::path aggregate_csv_path(const std::filesystem::path& dir);

/// Runs the experiment and writes seed_<s>.csv, seed_<s>_snapshot.json and
/// aggregate.csv into config.output.
void run_experiment(const ExperimentConfig& config, std::size_t workers);

}  // namespace kpe
