#include "kpe/envs.hpp"

#include <algorithm>
#include <cmath>

#include "kpe/errors.hpp"

namespace kpe {

ChainEnv::ChainEnv(ChainParams params, std::uint64_t seed) : params_(params), rng_(seed) {
  if (params_.n < 2) throw ContractViolation("chain needs at least 2 states");
  if (params_.slip < 0.0 || params_.slip >= 0.5) throw ContractViolation("chain slip must lie in [0, 0.5)");
  if (params_.start < 0 || params_.start >= params_.n - 1) {
    throw ContractViolation("chain start must be a non-terminal state");
  }
}

Vector ChainEnv::embed(int s) const {
  return Vector::Constant(1, static_cast<double>(s) / static_cast<double>(params_.n - 1));
}

int ChainEnv::index_of(const Vector& state) const {
  return static_cast<int>(std::lround(state[0] * (params_.n - 1)));
}

Vector ChainEnv::reset() {
  if (params_.random_start) {
    position_ = std::uniform_int_distribution<int>(0, params_.n - 2)(rng_);
  } else {
    position_ = params_.start;
  }
  done_ = false;
  return embed(position_);
}

StepResult ChainEnv::step(int action) {
  if (done_) throw ContractViolation("chain: step after terminal without reset");
  if (action != kLeft && action != kRight) throw ContractViolation("chain: invalid action");
  int dir = action == kRight ? 1 : -1;
  if (params_.slip > 0.0 && std::uniform_real_distribution<double>(0.0, 1.0)(rng_) < params_.slip) {
    dir = -dir;
  }
  position_ = std::clamp(position_ + dir, 0, params_.n - 1);
  StepResult out{embed(position_), 0.0, false};
  if (position_ == params_.n - 1) {
    out.reward = 1.0;
    out.terminal = true;
    done_ = true;
  }
  return out;
}

NoisyNav2D::NoisyNav2D(NavParams params, std::uint64_t seed)
    : params_(params), rng_(seed), position_(Vector::Zero(2)) {
  if (!(params_.noise_std > 0.0)) throw ContractViolation("nav2d noise must be positive");
  if (!(params_.goal_radius > 0.0)) throw ContractViolation("nav2d goal radius must be positive");
  if (params_.max_steps <= 0) throw ContractViolation("nav2d step cap must be positive");
}

bool NoisyNav2D::in_goal(const Vector& p) const {
  const double dx = p[0] - params_.goal_x;
  const double dy = p[1] - params_.goal_y;
  return dx * dx + dy * dy <= params_.goal_radius * params_.goal_radius;
}

Vector NoisyNav2D::reset() {
  if (params_.random_start) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    do {
      position_ = Vector{{u(rng_), u(rng_)}};
    } while (in_goal(position_));
  } else {
    position_ = Vector{{0.1, 0.1}};
  }
  steps_ = 0;
  done_ = false;
  return position_;
}

StepResult NoisyNav2D::step(int action) {
  if (done_) throw ContractViolation("nav2d: step after terminal without reset");
  if (action < 0 || action > 3) throw ContractViolation("nav2d: invalid action");
  static constexpr double kDx[4] = {1.0, 0.0, -1.0, 0.0};
  static constexpr double kDy[4] = {0.0, 1.0, 0.0, -1.0};
  std::normal_distribution<double> noise(0.0, params_.noise_std);
  position_[0] = std::clamp(position_[0] + params_.step_length * kDx[action] + noise(rng_), 0.0, 1.0);
  position_[1] = std::clamp(position_[1] + params_.step_length * kDy[action] + noise(rng_), 0.0, 1.0);
  ++steps_;
  StepResult out{position_, -params_.step_time, false};
  if (in_goal(position_) || steps_ >= params_.max_steps) {
    out.terminal = true;
    done_ = true;
  }
  return out;
}

FiniteMDP as_finite_mdp(const Environment& env, double gamma) {
  const auto* chain = dynamic_cast<const ChainEnv*>(&env);
  if (chain == nullptr) throw ContractViolation("as_finite_mdp: only the chain has a tabular model");
  const ChainParams& p = chain->params();
  FiniteMDP mdp;
  mdp.n_states = p.n;
  mdp.n_actions = 2;
  mdp.gamma = gamma;
  const int terminal = p.n - 1;
  for (int a = 0; a < 2; ++a) {
    Matrix P = Matrix::Zero(p.n, p.n);
    Matrix R = Matrix::Zero(p.n, p.n);
    const int dir = a == ChainEnv::kRight ? 1 : -1;
    for (int s = 0; s < terminal; ++s) {
      P(s, std::clamp(s + dir, 0, terminal)) += 1.0 - p.slip;
      P(s, std::clamp(s - dir, 0, terminal)) += p.slip;
      R(s, terminal) = 1.0;
    }
    P(terminal, terminal) = 1.0;
    mdp.transition.push_back(std::move(P));
    mdp.reward.push_back(std::move(R));
  }
  return mdp;
}

std::vector<Transition> adapt_episodic(std::span<const Episode> episodes, double gamma,
                                       const std::optional<StateAction>& next_start) {
  std::vector<Transition> out;
  for (std::size_t e = 0; e < episodes.size(); ++e) {
    const Episode& ep = episodes[e];
    if (ep.steps.empty() || ep.rewards.size() + 1 != ep.steps.size()) {
      throw ContractViolation("adapt_episodic: episode needs T+1 state-actions and T rewards");
    }
    for (std::size_t i = 0; i + 1 < ep.steps.size(); ++i) {
      out.push_back({ep.steps[i], ep.rewards[i], ep.steps[i + 1], gamma});
    }
    const StateAction* following = nullptr;
    if (e + 1 < episodes.size()) {
      following = &episodes[e + 1].steps.front();
    } else if (next_start) {
      following = &*next_start;
    }
    if (following != nullptr) out.push_back({ep.steps.back(), 0.0, *following, 0.0});
  }
  return out;
}

std::vector<Transition> rollout(Environment& env, const StochasticPolicy& policy, std::size_t n,
                                double gamma, Rng& rng, bool random_first_action) {
  std::vector<Transition> out;
  out.reserve(n);
  std::uniform_int_distribution<int> uniform(0, env.n_actions() - 1);
  auto start = [&] {
    const Vector s = env.reset();
    return StateAction{s, random_first_action ? uniform(rng) : policy(s, rng)};
  };
  StateAction x = start();
  while (out.size() < n) {
    const StepResult res = env.step(x.action);
    const StateAction x_next{res.state, policy(res.state, rng)};
    out.push_back({x, res.reward, x_next, gamma});
    if (!res.terminal) {
      x = x_next;
      continue;
    }
    x = start();
    if (out.size() < n) out.push_back({x_next, 0.0, x, 0.0});
  }
  return out;
}

}  // namespace kpe
