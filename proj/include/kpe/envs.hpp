#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "kpe/batch_oracle.hpp"
#include "kpe/kernel.hpp"
#include "kpe/transition.hpp"

namespace kpe {

using Rng = std::mt19937_64;

struct StepResult {
  Vector state;
  double reward = 0.0;
  bool terminal = false;
};

/// Episodic simulator. After a terminal step, step() throws until reset().
class Environment {
 public:
  virtual ~Environment() = default;

  virtual Vector reset() = 0;
  virtual StepResult step(int action) = 0;
  virtual int state_dim() const = 0;
  virtual int n_actions() const = 0;
  virtual bool deterministic() const = 0;
  virtual std::string name() const = 0;
};

struct ChainParams {
  /// Number of states including the terminal right end.
  int n = 5;
  /// Probability that a move goes the opposite way.
  double slip = 0.0;
  /// Start uniformly among the non-terminal states instead of at `start`.
  bool random_start = false;
  int start = 0;
};

/// Linear chain with actions {0: left, 1: right}; state s is embedded as
/// s / (n - 1). Reaching the right end pays +1 and ends the episode.
class ChainEnv final : public Environment {
 public:
  static constexpr int kLeft = 0;
  static constexpr int kRight = 1;

  ChainEnv(ChainParams params, std::uint64_t seed);

  Vector reset() override;
  StepResult step(int action) override;
  int state_dim() const override { return 1; }
  int n_actions() const override { return 2; }
  bool deterministic() const override { return params_.slip == 0.0; }
  std::string name() const override { return "chain"; }

  const ChainParams& params() const { return params_; }
  int position() const { return position_; }
  Vector embed(int s) const;
  /// Inverse of embed() for states produced by this chain.
  int index_of(const Vector& state) const;

 private:
  ChainParams params_;
  Rng rng_;
  int position_ = 0;
  bool done_ = true;
};

struct NavParams {
  double noise_std = 0.05;
  double step_length = 0.1;
  double goal_radius = 0.15;
  double goal_x = 0.9;
  double goal_y = 0.9;
  /// Seconds charged per step; the reward is -step_time.
  double step_time = 0.1;
  int max_steps = 200;
  /// Start uniformly in the square (outside the goal) instead of (0.1, 0.1).
  bool random_start = false;
};

/// Point robot in the unit square with four compass moves
/// {0: +x, 1: +y, 2: -x, 3: -y} and Gaussian actuation noise.
class NoisyNav2D final : public Environment {
 public:
  NoisyNav2D(NavParams params, std::uint64_t seed);

  Vector reset() override;
  StepResult step(int action) override;
  int state_dim() const override { return 2; }
  int n_actions() const override { return 4; }
  bool deterministic() const override { return false; }
  std::string name() const override { return "nav2d"; }

  const NavParams& params() const { return params_; }
  bool in_goal(const Vector& p) const;

 private:
  NavParams params_;
  Rng rng_;
  Vector position_;
  int steps_ = 0;
  bool done_ = true;
};

/// Tabular model of a chain. Throws ContractViolation for any other env.
/// The terminal state is absorbing with zero reward.
FiniteMDP as_finite_mdp(const Environment& env, double gamma);

/// One episode: state-actions x_0..x_T (x_T at the terminal state) and the
/// rewards r_1..r_T.
struct Episode {
  std::vector<StateAction> steps;
  std::vector<double> rewards;
};

/// Concatenates episodes into one trajectory. Each episode that is followed
/// by another one (or by `next_start`) ends with a zero-reward, zero-discount
/// transition from its last state-action to the following start.
std::vector<Transition> adapt_episodic(std::span<const Episode> episodes, double gamma,
                                       const std::optional<StateAction>& next_start = {});

using StochasticPolicy = std::function<int(const Vector& state, Rng& rng)>;

/// Runs `policy` for n transitions, counting the zero-discount boundary
/// transition that links each terminal state-action to the next start. With
/// `random_first_action`, every episode starts with a uniform action.
std::vector<Transition> rollout(Environment& env, const StochasticPolicy& policy, std::size_t n,
                                double gamma, Rng& rng, bool random_first_action = false);

}  // namespace kpe
