#include "kpe/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <thread>

#include "kpe/csv.hpp"
#include "kpe/errors.hpp"
#include "kpe/snapshot.hpp"

namespace kpe {

std::size_t worker_cap() {
  std::size_t cap = std::max(1u, std::thread::hardware_concurrency());
  if (const char* raw = std::getenv(kMaxWorkersEnv); raw != nullptr && *raw != '\0') {
    const std::string value(raw);
    std::size_t parsed = 0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), parsed);
    if (ec != std::errc() || ptr != value.data() + value.size() || parsed == 0) {
      throw ConfigError(std::string(kMaxWorkersEnv) + " must be a positive integer, got '" + value + "'");
    }
    cap = std::min(cap, parsed);
  }
  return cap;
}

namespace {

RunLog run_one(const ExperimentConfig& config, std::uint64_t seed) {
  auto env = config.make_env(seed);
  const ControlConfig control = config.control();
  if (config.architecture == Architecture::Opi) return run_opi(*env, control, seed);
  return run_actor_critic(*env, control, seed);
}

}  // namespace

std::vector<SeedRun> run_seeds(const ExperimentConfig& config, std::size_t workers) {
  const std::size_t n = config.seeds.size();
  std::vector<SeedRun> runs(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        runs[i] = SeedRun{config.seeds[i], run_one(config, config.seeds[i])};
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t count = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(n, 1));
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < count; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return runs;
}

void write_seed_csv(std::ostream& out, const std::vector<EpisodeRecord>& episodes) {
  out << kSeedCsvHeader << '\n';
  for (const auto& e : episodes) {
    out << e.transitions_seen << ',' << e.episode_index << ',' << format_double(e.episode_return) << ','
        << format_double(e.mean_return_window) << ',' << e.dict_size << ',' << format_double(e.cost_xi)
        << ',' << format_double(e.wallclock_ms_per_step) << '\n';
  }
}

std::vector<EpisodeRecord> read_seed_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kSeedCsvHeader) throw Error("seed CSV: missing or unexpected header");
  std::vector<EpisodeRecord> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 7) throw Error("seed CSV: expected 7 fields in '" + line + "'");
    try {
      EpisodeRecord e;
      e.transitions_seen = std::stoull(f[0]);
      e.episode_index = std::stoull(f[1]);
      e.episode_return = std::stod(f[2]);
      e.mean_return_window = std::stod(f[3]);
      e.dict_size = std::stoull(f[4]);
      e.cost_xi = std::stod(f[5]);
      e.wallclock_ms_per_step = std::stod(f[6]);
      out.push_back(e);
    } catch (const std::logic_error&) {
      throw Error("seed CSV: malformed row '" + line + "'");
    }
  }
  return out;
}

namespace {

void mean_std(const std::vector<double>& xs, double& mean, double& sd) {
  mean = 0.0;
  sd = 0.0;
  if (xs.empty()) return;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  if (xs.size() < 2) return;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

}  // namespace

std::vector<AggregateRow> aggregate(const std::vector<std::vector<EpisodeRecord>>& runs,
                                    std::size_t bucket, std::size_t max_transitions) {
  if (bucket == 0) throw ContractViolation("aggregate: bucket must be positive");
  std::vector<AggregateRow> rows;
  std::vector<std::size_t> cursor(runs.size(), 0);
  std::vector<std::size_t> ends;
  for (std::size_t end = bucket; end <= max_transitions; end += bucket) ends.push_back(end);
  if (max_transitions % bucket != 0) ends.push_back(max_transitions);
  for (const std::size_t end : ends) {
    std::vector<double> returns;
    std::vector<double> sizes;
    for (std::size_t r = 0; r < runs.size(); ++r) {
      const auto& eps = runs[r];
      while (cursor[r] < eps.size() && eps[cursor[r]].transitions_seen <= end) ++cursor[r];
      if (cursor[r] == 0) continue;
      returns.push_back(eps[cursor[r] - 1].mean_return_window);
      sizes.push_back(static_cast<double>(eps[cursor[r] - 1].dict_size));
    }
    AggregateRow row;
    row.transitions = end;
    row.seeds = returns.size();
    mean_std(returns, row.mean_return, row.std_return);
    mean_std(sizes, row.mean_dict_size, row.std_dict_size);
    rows.push_back(row);
  }
  return rows;
}

void write_aggregate_csv(std::ostream& out, const std::vector<AggregateRow>& rows) {
  out << kAggregateCsvHeader << '\n';
  for (const auto& r : rows) {
    out << r.transitions << ',' << r.seeds << ',' << format_double(r.mean_return) << ','
        << format_double(r.std_return) << ',' << format_double(r.mean_dict_size) << ','
        << format_double(r.std_dict_size) << '\n';
  }
}

std::filesystem::path seed_csv_path(const std::filesystem::path& dir, std::uint64_t seed) {
  return dir / ("seed_" + std::to_string(seed) + ".csv");
}

std::filesystem::path seed_snapshot_path(const std::filesystem::path& dir, std::uint64_t seed) {
  return dir / ("seed_" + std::to_string(seed) + "_snapshot.json");
}

std::filesystem::path aggregate_csv_path(const std::filesystem::path& dir) { return dir / "aggregate.csv"; }

void run_experiment(const ExperimentConfig& config, std::size_t workers) {
  const auto runs = run_seeds(config, workers);
  std::filesystem::create_directories(config.output);
  std::vector<std::vector<EpisodeRecord>> curves;
  for (const auto& run : runs) {
    std::ofstream csv(seed_csv_path(config.output, run.seed));
    if (!csv) throw Error("cannot write " + seed_csv_path(config.output, run.seed).string());
    write_seed_csv(csv, run.log.episodes);
    if (!run.log.network.empty()) {
      Snapshot snap;
      snap.network = run.log.network;
      snap.method = config.method;
      snap.hyper = config.control().learner.hyper;
      snap.tol1 = config.tol1;
      snap.tol2 = config.tol2;
      snap.transitions_seen = config.max_transitions;
      save_snapshot(seed_snapshot_path(config.output, run.seed), snap);
    }
    curves.push_back(run.log.episodes);
  }
  std::ofstream agg(aggregate_csv_path(config.output));
  if (!agg) throw Error("cannot write " + aggregate_csv_path(config.output).string());
  write_aggregate_csv(agg, aggregate(curves, config.bucket, config.max_transitions));
}

}  // namespace kpe
