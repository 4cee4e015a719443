#pragma once

#include <cstddef>
#include <span>

#include "kpe/dictionary.hpp"
#include "kpe/evaluator.hpp"
#include "kpe/transition.hpp"

namespace kpe {

#ifdef NDEBUG
inline constexpr std::size_t kDefaultRebuildInterval = 0;
#else
inline constexpr std::size_t kDefaultRebuildInterval = 1000;
#endif

struct LearnerOptions {
  Method method = Method::Lspe;
  Hyper hyper;
  KernelSpec kernel;
  /// Novelty threshold on the projection residual delta.
  double tol1 = 0.1;
  /// Usefulness threshold on the cost reduction; 0 disables supervised selection.
  double tol2 = 0.0;
  bool growth = true;
  /// Also offer x_t as a candidate when x_{t+1} is not added. Replayed
  /// transitions then contribute the actions the behaviour policy explored,
  /// not only those of the evaluated policy.
  bool screen_current = false;
  /// Upper bound on the dictionary size (0 = unbounded).
  std::size_t max_dictionary = 0;
  /// Every N steps, check K_mm^-1 against its definition (0 = never).
  std::size_t rebuild_interval = kDefaultRebuildInterval;
  double max_drift = 1e-6;
  double relative_floor = 1e-12;
  bool record_log = false;
};

struct LearnerStats {
  std::size_t processed = 0;
  std::size_t skipped_updates = 0;
  std::size_t novel_candidates = 0;
  std::size_t rejected_by_usefulness = 0;
  std::size_t singular_growths = 0;
  std::size_t growths = 0;
};

/// Frozen copy of a learned Q-function: the dictionary and its weights.
struct ValueNetwork {
  Dictionary dictionary;
  Vector weights;

  bool empty() const { return dictionary.empty(); }
  double predict(const StateAction& x) const;
};

/// Online policy evaluation with basis selection: per transition a normal
/// step followed, when the successor is novel and useful, by a growing step.
class OnlineLearner {
 public:
  explicit OnlineLearner(LearnerOptions options);

  /// Starts from a preset dictionary (P = sigma^2 K_mm on it).
  void seed_dictionary(std::span<const StateAction> centers);

  /// One iteration of the evaluation loop. The first call seeds the
  /// dictionary with tr.x; until two centers exist, any successor with
  /// delta above the floor is added regardless of tol1/tol2.
  void observe(const Transition& tr);

  /// Forgets P, w and the traces but keeps the dictionary.
  void restart_evaluation();

  bool ready() const { return !dict_.empty(); }
  double predict(const StateAction& x) const;
  ValueNetwork network() const;

  const LearnerOptions& options() const { return options_; }
  const Dictionary& dictionary() const { return dict_; }
  const Evaluator& evaluator() const { return eval_; }
  const LearnerStats& stats() const { return stats_; }
  const TrajectoryLog& log() const { return log_; }

 private:
  void maybe_grow(const Transition& tr, const StepVectors& sv);
  bool try_grow(const Transition& tr, const StepVectors& sv, const StateAction& candidate);
  void check_drift();

  LearnerOptions options_;
  Dictionary dict_;
  Evaluator eval_;
  LearnerStats stats_;
  TrajectoryLog log_;
};

}  // namespace kpe
