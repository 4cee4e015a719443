#pragma once

#include <cstddef>
#include <filesystem>
#include <string>

#include "kpe/evaluator.hpp"
#include "kpe/learner.hpp"

namespace kpe {

inline constexpr int kSnapshotVersion = 1;

/// Checkpoint of a learned network plus the scalars needed to interpret it.
struct Snapshot {
  ValueNetwork network;
  Method method = Method::Lstd;
  Hyper hyper;
  double tol1 = 0.0;
  double tol2 = 0.0;
  std::size_t transitions_seen = 0;
};

/// Versioned JSON text. Doubles are written in shortest round-trip form, so
/// save followed by load is exact.
std::string snapshot_to_json(const Snapshot& snap);
Snapshot snapshot_from_json(const std::string& text);

void save_snapshot(const std::filesystem::path& path, const Snapshot& snap);
Snapshot load_snapshot(const std::filesystem::path& path);

}  // namespace kpe
