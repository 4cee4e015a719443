// kpe: run experiments, verify the implementation against its oracles and
// export dictionaries from snapshots.

#include <exception>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "kpe/acceptance.hpp"
#include "kpe/config.hpp"
#include "kpe/dictionary.hpp"
#include "kpe/errors.hpp"
#include "kpe/experiment.hpp"
#include "kpe/snapshot.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Online kernel least-squares policy evaluation and control"};
  app.require_subcommand(1);

  std::string config_path;
  auto* run = app.add_subcommand("run", "Run the seeds of a config file and write CSVs and snapshots");
  run->add_option("config", config_path, "Config file (key = value lines)")->required();

  kpe::AcceptanceOptions verify_opts;
  auto* verify = app.add_subcommand("verify", "Run the acceptance criteria and print one line per criterion");
  verify->add_option("--only", verify_opts.only, "Criterion ids to run (default: all)")
      ->check(CLI::Range(1, kpe::kCriterionCount));
  verify->add_option("--tolerance-scale", verify_opts.tolerance_scale, "Multiply every tolerance by this factor")
      ->check(CLI::NonNegativeNumber);
  verify->add_option("--work-dir", verify_opts.work_dir, "Scratch directory");

  std::string snapshot_path;
  std::string out_path;
  auto* export_dict = app.add_subcommand("export-dict", "Write the dictionary of a snapshot as CSV");
  export_dict->add_option("snapshot", snapshot_path, "Snapshot file")->required()->check(CLI::ExistingFile);
  export_dict->add_option("-o,--out", out_path, "Output CSV (default: stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      const kpe::ExperimentConfig config = kpe::load_config(config_path);
      const std::size_t workers = kpe::worker_cap();
      kpe::run_experiment(config, workers);
      std::cout << "wrote " << config.seeds.size() << " seed CSVs, snapshots and "
                << kpe::aggregate_csv_path(config.output).string() << '\n';
      return 0;
    }
    if (verify->parsed()) {
      const auto results = kpe::run_acceptance_suite(verify_opts);
      kpe::print_acceptance(std::cout, results);
      return kpe::all_passed(results) ? 0 : 1;
    }
    if (export_dict->parsed()) {
      const kpe::Snapshot snap = kpe::load_snapshot(snapshot_path);
      if (out_path.empty()) {
        kpe::write_dictionary_csv(std::cout, snap.network.dictionary);
      } else {
        std::ofstream out(out_path);
        if (!out) throw kpe::Error("cannot write " + out_path);
        kpe::write_dictionary_csv(out, snap.network.dictionary);
      }
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
