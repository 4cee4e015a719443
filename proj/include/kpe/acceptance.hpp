#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace kpe {

struct AcceptanceOptions {
  /// Multiplies every numeric tolerance; 0 forces failures.
  double tolerance_scale = 1.0;
  /// Criterion ids to run (empty = all).
  std::vector<int> only;
  /// Scratch directory for the determinism check.
  std::filesystem::path work_dir = std::filesystem::temp_directory_path() / "kpe_acceptance";
};

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

inline constexpr int kCriterionCount = 9;

/// Runs the selected criteria in id order. Exceptions inside a criterion
/// are reported as failures.
std::vector<CriterionResult> run_acceptance_suite(const AcceptanceOptions& options);

/// One "PASS|FAIL <id> <name>: <detail> (<seconds> s)" line per result.
void print_acceptance(std::ostream& out, const std::vector<CriterionResult>& results);

bool all_passed(const std::vector<CriterionResult>& results);

}  // namespace kpe
