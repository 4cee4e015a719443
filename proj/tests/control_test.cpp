#include "kpe/control.hpp"

#include <cmath>

#include <gtest/gtest.h>

#include "kpe/batch_oracle.hpp"
#include "kpe/errors.hpp"
#include "test_support.hpp"

namespace kpe {
namespace {

using test::sa;

// Q-function with fixed per-action values.
struct TableQ {
  std::vector<double> values;
  double predict(const StateAction& x) const { return values[static_cast<std::size_t>(x.action)]; }
};

double three_sigma(double p, double n) { return 3.0 * std::sqrt(p * (1.0 - p) / n); }

TEST(SelectAction, GreedyWhenEpsilonIsZero) {
  const TableQ q{{0.1, 0.9, 0.3}};
  Rng rng(1);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(select_action(q, true, Vector::Zero(1), 3, 0.0, rng), 1);
}

TEST(SelectAction, UniformWhenEpsilonIsOne) {
  const TableQ q{{0.1, 0.9, 0.3, 0.0}};
  Rng rng(2);
  constexpr int kDraws = 10000;
  std::vector<int> counts(4, 0);
  for (int i = 0; i < kDraws; ++i) ++counts[static_cast<std::size_t>(select_action(q, true, Vector::Zero(1), 4, 1.0, rng))];
  for (int c : counts) EXPECT_NEAR(c / double(kDraws), 0.25, three_sigma(0.25, kDraws));
}

TEST(SelectAction, NonGreedyFrequencyMatchesEpsilon) {
  const TableQ q{{0.0, 1.0, 0.5, 0.2}};
  Rng rng(3);
  constexpr int kDraws = 100000;
  constexpr double kEps = 0.01;
  int non_greedy = 0;
  for (int i = 0; i < kDraws; ++i) non_greedy += select_action(q, true, Vector::Zero(1), 4, kEps, rng) != 1;
  const double p = kEps * 3.0 / 4.0;
  EXPECT_NEAR(non_greedy / double(kDraws), p, three_sigma(p, kDraws));
}

TEST(SelectAction, GreedyTieGoesToLowestAction) {
  const TableQ tied{{0.2, 0.5, 0.5}};
  EXPECT_EQ(greedy_action(tied, Vector::Zero(1), 3), 1);
}

TEST(SelectAction, BehaviourBreaksTiesUniformly) {
  const TableQ tied{{0.5, 0.2, 0.5}};
  Rng rng(4);
  constexpr int kDraws = 10000;
  std::vector<int> counts(3, 0);
  for (int i = 0; i < kDraws; ++i) ++counts[static_cast<std::size_t>(select_action(tied, true, Vector::Zero(1), 3, 0.0, rng))];
  EXPECT_EQ(counts[1], 0);
  EXPECT_NEAR(counts[0] / double(kDraws), 0.5, three_sigma(0.5, kDraws));
}

TEST(SelectAction, EmptyModelIsUniform) {
  const TableQ q{{0.0, 1.0, 0.0}};
  Rng rng(4);
  constexpr int kDraws = 9000;
  std::vector<int> counts(3, 0);
  for (int i = 0; i < kDraws; ++i) ++counts[static_cast<std::size_t>(select_action(q, false, Vector::Zero(1), 3, 0.0, rng))];
  for (int c : counts) EXPECT_NEAR(c / double(kDraws), 1.0 / 3.0, three_sigma(1.0 / 3.0, kDraws));
}

TEST(SelectAction, GreedyChoiceInvariantUnderPositiveScaling) {
  Rng rng(5);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    TableQ q{{g(rng), g(rng), g(rng)}};
    const int a = greedy_action(q, Vector::Zero(1), 3);
    const double scale = std::exp(g(rng) * 3.0);
    for (double& v : q.values) v *= scale;
    EXPECT_EQ(greedy_action(q, Vector::Zero(1), 3), a);
  }
}

ControlConfig chain_config(Method method, std::size_t transitions) {
  ControlConfig c;
  c.learner.method = method;
  c.learner.tol1 = 0.01;
  c.learner.tol2 = 0.0;
  c.max_transitions = transitions;
  return c;
}

TEST(Opi, DeterministicChainReachesOptimalReturn) {
  ChainEnv env(ChainParams{5, 0.0, false, 0}, 1);
  const ControlConfig config = chain_config(Method::Lspe, 20000);
  const RunLog log = run_opi(env, config, 7);
  ASSERT_GT(log.episodes.size(), 100u);
  // The optimal policy always pays 1 after 4 steps.
  const FiniteMDP mdp = as_finite_mdp(env, config.learner.hyper.gamma);
  const TabularPolicy optimal = policy_iteration(mdp);
  double mean = 0.0;
  double mean_length = 0.0;
  const std::size_t tail = log.episodes.size() / 2;
  for (std::size_t i = log.episodes.size() - tail; i < log.episodes.size(); ++i) {
    mean += log.episodes[i].episode_return / static_cast<double>(tail);
    mean_length += static_cast<double>(log.episodes[i].transitions_seen - log.episodes[i - 1].transitions_seen) /
                   static_cast<double>(tail);
  }
  EXPECT_NEAR(mean, 1.0, 0.05);
  EXPECT_LE(mean_length, 4.0 * 1.05);
  for (int s = 0; s < 4; ++s) {
    EXPECT_EQ(greedy_action(log.network, env.embed(s), 2), optimal[static_cast<std::size_t>(s)]) << "state " << s;
  }
}

TEST(Opi, BrmOnDeterministicChainLearnsToGoRight) {
  ChainEnv env(ChainParams{5, 0.0, false, 0}, 1);
  const RunLog log = run_opi(env, chain_config(Method::Brm, 5000), 3);
  for (int s = 0; s < 4; ++s) EXPECT_EQ(greedy_action(log.network, env.embed(s), 2), ChainEnv::kRight);
  EXPECT_GT(log.episodes.back().cost_xi, 0.0);
}

TEST(Opi, ReproducibleWithFixedSeed) {
  ControlConfig config = chain_config(Method::Lspe, 3000);
  config.epsilon = 0.0;
  ChainEnv a(ChainParams{5, 0.0, false, 0}, 1);
  ChainEnv b(ChainParams{5, 0.0, false, 0}, 1);
  const RunLog la = run_opi(a, config, 5);
  const RunLog lb = run_opi(b, config, 5);
  ASSERT_EQ(la.episodes.size(), lb.episodes.size());
  for (std::size_t i = 0; i < la.episodes.size(); ++i) {
    EXPECT_EQ(la.episodes[i].transitions_seen, lb.episodes[i].transitions_seen);
    EXPECT_EQ(la.episodes[i].mean_return_window, lb.episodes[i].mean_return_window);
  }
  EXPECT_EQ(la.network.weights, lb.network.weights);
}

// Chain that never pays anything.
class SilentChain final : public Environment {
 public:
  explicit SilentChain(std::uint64_t seed) : inner_(ChainParams{5, 0.0, false, 0}, seed) {}
  Vector reset() override { return inner_.reset(); }
  StepResult step(int action) override {
    StepResult r = inner_.step(action);
    r.reward = 0.0;
    return r;
  }
  int state_dim() const override { return 1; }
  int n_actions() const override { return 2; }
  bool deterministic() const override { return true; }
  std::string name() const override { return "silent"; }

 private:
  ChainEnv inner_;
};

TEST(Opi, ZeroRewardKeepsWeightsAtZero) {
  SilentChain env(1);
  const RunLog log = run_opi(env, chain_config(Method::Lspe, 2000), 2);
  EXPECT_EQ(log.network.weights, Vector::Zero(log.network.weights.size()));
  EXPECT_EQ(greedy_action(log.network, Vector::Constant(1, 0.5), 2), 0);
}

TEST(Opi, RejectsUnsuitableMethodsAndEnvironments) {
  ChainEnv stochastic(ChainParams{5, 0.2, false, 0}, 1);
  EXPECT_THROW(run_opi(stochastic, chain_config(Method::Brm, 10), 1), ContractViolation);
  EXPECT_THROW(run_opi(stochastic, chain_config(Method::Lstd, 10), 1), ContractViolation);
  EXPECT_THROW(run_actor_critic(stochastic, chain_config(Method::Lspe, 10), 1), ContractViolation);
}

TEST(ActorCritic, StochasticChainRecoversOptimalActions) {
  ChainEnv env(ChainParams{5, 0.2, false, 0}, 4);
  const ControlConfig config = chain_config(Method::Lstd, 50000);
  const RunLog log = run_actor_critic(env, config, 4);
  const TabularPolicy optimal = policy_iteration(as_finite_mdp(env, config.learner.hyper.gamma));
  int matches = 0;
  for (int s = 0; s < 5; ++s) {
    matches += greedy_action(log.network, env.embed(s), 2) == optimal[static_cast<std::size_t>(s)];
  }
  EXPECT_GE(matches, 4);
  EXPECT_GT(log.improvements, 10u);
}

TEST(ActorCritic, UnboundedBatchImprovesOncePerStep) {
  ChainEnv env(ChainParams{5, 0.0, false, 0}, 1);
  ControlConfig config = chain_config(Method::Lstd, 300);
  config.batch_size = 0;
  const RunLog log = run_actor_critic(env, config, 1);
  EXPECT_EQ(log.improvements, 300u);
}

TEST(ActorCritic, BrmOnDeterministicChain) {
  ChainEnv env(ChainParams{5, 0.0, false, 0}, 1);
  const RunLog log = run_actor_critic(env, chain_config(Method::Brm, 5000), 2);
  for (int s = 0; s < 4; ++s) EXPECT_EQ(greedy_action(log.network, env.embed(s), 2), ChainEnv::kRight);
}

TEST(RunLog, EpisodeRecordsAreConsistent) {
  ChainEnv env(ChainParams{5, 0.2, false, 0}, 3);
  ControlConfig config = chain_config(Method::Lstd, 5000);
  config.window = 5;
  const RunLog log = run_actor_critic(env, config, 3);
  ASSERT_GT(log.episodes.size(), 10u);
  for (std::size_t i = 0; i < log.episodes.size(); ++i) {
    const EpisodeRecord& e = log.episodes[i];
    EXPECT_EQ(e.episode_index, i);
    EXPECT_LE(e.transitions_seen, config.max_transitions);
    if (i > 0) EXPECT_GT(e.transitions_seen, log.episodes[i - 1].transitions_seen);
    const std::size_t first = i + 1 >= 5 ? i + 1 - 5 : 0;
    double mean = 0.0;
    for (std::size_t j = first; j <= i; ++j) mean += log.episodes[j].episode_return;
    EXPECT_NEAR(e.mean_return_window, mean / static_cast<double>(i + 1 - first), 1e-12);
    EXPECT_EQ(e.wallclock_ms_per_step, 0.0);
  }
}

TEST(RunLog, TimingIsRecordedOnRequest) {
  ChainEnv env(ChainParams{5, 0.0, false, 0}, 3);
  ControlConfig config = chain_config(Method::Lspe, 2000);
  config.record_timing = true;
  const RunLog log = run_opi(env, config, 3);
  ASSERT_FALSE(log.episodes.empty());
  EXPECT_GT(log.episodes.back().wallclock_ms_per_step, 0.0);
}

TEST(EvaluateGreedy, OptimalChainPolicyEarnsOne) {
  ChainEnv env(ChainParams{5, 0.0, false, 0}, 1);
  const RunLog log = run_opi(env, chain_config(Method::Lspe, 5000), 1);
  EXPECT_DOUBLE_EQ(evaluate_greedy(env, log.network, 10), 1.0);
  EXPECT_THROW(evaluate_greedy(env, log.network, 0), ContractViolation);
}

}  // namespace
}  // namespace kpe
