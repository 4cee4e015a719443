#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "kpe/envs.hpp"
#include "kpe/learner.hpp"

namespace kpe {

/// Greedy action of a Q-function over {0, ..., n_actions - 1}; ties go to
/// the lowest id.
template <typename QModel>
int greedy_action(const QModel& q, const Vector& state, int n_actions) {
  int best = 0;
  double best_value = q.predict(StateAction{state, 0});
  for (int a = 1; a < n_actions; ++a) {
    const double value = q.predict(StateAction{state, a});
    if (value > best_value) {
      best_value = value;
      best = a;
    }
  }
  return best;
}

/// Epsilon-greedy action. The exploratory branch is uniform over all
/// actions; an empty model acts uniformly at random. Exactly tied greedy
/// values are broken uniformly, so an all-zero model still explores.
template <typename QModel>
int select_action(const QModel& q, bool ready, const Vector& state, int n_actions, double epsilon,
                  Rng& rng) {
  std::uniform_int_distribution<int> uniform(0, n_actions - 1);
  if (!ready) return uniform(rng);
  if (epsilon > 0.0 && std::uniform_real_distribution<double>(0.0, 1.0)(rng) < epsilon) {
    return uniform(rng);
  }
  std::vector<int> best{0};
  double best_value = q.predict(StateAction{state, 0});
  for (int a = 1; a < n_actions; ++a) {
    const double value = q.predict(StateAction{state, a});
    if (value > best_value) {
      best_value = value;
      best.assign(1, a);
    } else if (value == best_value) {
      best.push_back(a);
    }
  }
  if (best.size() == 1) return best.front();
  return best[std::uniform_int_distribution<std::size_t>(0, best.size() - 1)(rng)];
}

struct ControlConfig {
  LearnerOptions learner;
  double epsilon = 0.01;
  /// Stored transitions the critic consumes per environment step (0 = all).
  std::size_t batch_size = 20;
  /// Environment steps to simulate.
  std::size_t max_transitions = 20000;
  /// Episodes averaged in mean_return_window.
  std::size_t window = 20;
  /// Measure wall-clock time per step (otherwise written as 0).
  bool record_timing = false;
};

struct EpisodeRecord {
  std::size_t transitions_seen = 0;
  std::size_t episode_index = 0;
  double episode_return = 0.0;
  double mean_return_window = 0.0;
  std::size_t dict_size = 0;
  double cost_xi = 0.0;
  double wallclock_ms_per_step = 0.0;
};

struct RunLog {
  std::vector<EpisodeRecord> episodes;
  /// Final greedy Q-function (the critic for actor-critic).
  ValueNetwork network;
  LearnerStats stats;
  /// Completed critic passes (actor-critic only).
  std::size_t improvements = 0;
};

/// Raw environment step kept for replay. A boundary entry links a terminal
/// state to the next episode's start with zero reward and discount.
struct StoredStep {
  Vector state;
  /// Negative means "the action of the policy under evaluation".
  int action = -1;
  double reward = 0.0;
  Vector next_state;
  bool boundary = false;
};

/// Optimistic policy iteration: the evaluator's live estimate drives an
/// epsilon-greedy behaviour policy.
RunLog run_opi(Environment& env, const ControlConfig& config, std::uint64_t seed);

/// Actor-critic with experience replay: a frozen actor acts while the critic
/// evaluates its greedy policy over the stored transitions; after each full
/// pass the actor is replaced by the critic.
RunLog run_actor_critic(Environment& env, const ControlConfig& config, std::uint64_t seed);

/// Mean undiscounted return of the greedy policy of `q` over `episodes`
/// episodes (each capped at `max_steps` steps).
double evaluate_greedy(Environment& env, const ValueNetwork& q, std::size_t episodes,
                       std::size_t max_steps = 100000);

}  // namespace kpe
