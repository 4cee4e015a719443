#include "kpe/control.hpp"

#include <chrono>
#include <deque>
#include <numeric>

#include "kpe/errors.hpp"

namespace kpe {

namespace {

class EpisodeTracker {
 public:
  explicit EpisodeTracker(const ControlConfig& config) : window_(config.window), timing_(config.record_timing) {
    start_clock();
  }

  void add_reward(double r) {
    ret_ += r;
    ++steps_;
  }

  void finish(RunLog& log, std::size_t transitions_seen, const OnlineLearner& learner) {
    recent_.push_back(ret_);
    if (recent_.size() > window_) recent_.pop_front();
    EpisodeRecord rec;
    rec.transitions_seen = transitions_seen;
    rec.episode_index = log.episodes.size();
    rec.episode_return = ret_;
    rec.mean_return_window = std::accumulate(recent_.begin(), recent_.end(), 0.0) /
                             static_cast<double>(recent_.size());
    rec.dict_size = learner.dictionary().size();
    rec.cost_xi = learner.evaluator().xi();
    if (timing_ && steps_ > 0) {
      const auto elapsed = std::chrono::steady_clock::now() - start_;
      rec.wallclock_ms_per_step =
          std::chrono::duration<double, std::milli>(elapsed).count() / static_cast<double>(steps_);
    }
    log.episodes.push_back(rec);
    ret_ = 0.0;
    steps_ = 0;
    start_clock();
  }

 private:
  void start_clock() {
    if (timing_) start_ = std::chrono::steady_clock::now();
  }

  std::size_t window_;
  bool timing_;
  std::deque<double> recent_;
  double ret_ = 0.0;
  std::size_t steps_ = 0;
  std::chrono::steady_clock::time_point start_;
};

void check_config(const Environment& env, const ControlConfig& config) {
  if (config.window == 0) throw ContractViolation("window must be positive");
  if (config.epsilon < 0.0 || config.epsilon > 1.0) throw ContractViolation("epsilon outside [0, 1]");
  if (config.learner.method == Method::Brm && !env.deterministic()) {
    throw ContractViolation("BRM is biased on stochastic environments; use a deterministic one");
  }
}

}  // namespace

RunLog run_opi(Environment& env, const ControlConfig& config, std::uint64_t seed) {
  check_config(env, config);
  if (config.learner.method == Method::Lstd) {
    throw ContractViolation("optimistic policy iteration uses LSPE or BRM");
  }
  Rng rng(seed);
  OnlineLearner learner(config.learner);
  RunLog log;
  EpisodeTracker tracker(config);
  const int n_actions = env.n_actions();
  auto act = [&](const Vector& s) {
    return select_action(learner, learner.ready(), s, n_actions, config.epsilon, rng);
  };

  Vector s = env.reset();
  StateAction x{s, act(s)};
  for (std::size_t n = 1; n <= config.max_transitions; ++n) {
    const StepResult res = env.step(x.action);
    tracker.add_reward(res.reward);
    const StateAction x_next{res.state, act(res.state)};
    learner.observe({x, res.reward, x_next, config.learner.hyper.gamma});
    if (!res.terminal) {
      x = x_next;
      continue;
    }
    const Vector s0 = env.reset();
    const StateAction x0{s0, act(s0)};
    learner.observe({x_next, 0.0, x0, 0.0});
    tracker.finish(log, n, learner);
    x = x0;
  }
  log.network = learner.network();
  log.stats = learner.stats();
  return log;
}

RunLog run_actor_critic(Environment& env, const ControlConfig& config, std::uint64_t seed) {
  check_config(env, config);
  if (config.learner.method == Method::Lspe) {
    throw ContractViolation("actor-critic uses LSTD or BRM");
  }
  Rng rng(seed);
  OnlineLearner critic(config.learner);
  ValueNetwork actor;
  RunLog log;
  EpisodeTracker tracker(config);
  std::vector<StoredStep> store;
  std::size_t cursor = 0;
  const int n_actions = env.n_actions();
  const double gamma = config.learner.hyper.gamma;

  auto policy = [&](const Vector& s) {
    return actor.empty() ? 0 : greedy_action(actor, s, n_actions);
  };
  auto critic_step = [&](const StoredStep& st) {
    const StateAction x{st.state, st.action >= 0 ? st.action : policy(st.state)};
    const StateAction x_next{st.next_state, policy(st.next_state)};
    critic.observe({x, st.reward, x_next, st.boundary ? 0.0 : gamma});
  };

  Vector s = env.reset();
  for (std::size_t n = 1; n <= config.max_transitions; ++n) {
    const int a = select_action(actor, !actor.empty(), s, n_actions, config.epsilon, rng);
    const StepResult res = env.step(a);
    tracker.add_reward(res.reward);
    store.push_back({s, a, res.reward, res.state, false});
    if (res.terminal) {
      s = env.reset();
      store.push_back({res.state, -1, 0.0, s, true});
    } else {
      s = res.state;
    }

    const std::size_t budget = config.batch_size == 0 ? store.size() : config.batch_size;
    for (std::size_t i = 0; i < budget && cursor < store.size(); ++i) critic_step(store[cursor++]);
    if (cursor == store.size()) {
      actor = critic.network();
      ++log.improvements;
      critic.restart_evaluation();
      cursor = 0;
    }
    if (res.terminal) tracker.finish(log, n, critic);
  }
  log.network = actor.empty() ? critic.network() : actor;
  log.stats = critic.stats();
  return log;
}

double evaluate_greedy(Environment& env, const ValueNetwork& q, std::size_t episodes,
                       std::size_t max_steps) {
  if (episodes == 0) throw ContractViolation("evaluate_greedy: no episodes");
  double total = 0.0;
  for (std::size_t e = 0; e < episodes; ++e) {
    Vector s = env.reset();
    for (std::size_t t = 0; t < max_steps; ++t) {
      const int a = q.empty() ? 0 : greedy_action(q, s, env.n_actions());
      const StepResult res = env.step(a);
      total += res.reward;
      if (res.terminal) break;
      s = res.state;
    }
  }
  return total / static_cast<double>(episodes);
}

}  // namespace kpe
