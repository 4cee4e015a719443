#include "kpe/evaluator.hpp"

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "kpe/batch_oracle.hpp"
#include "kpe/errors.hpp"
#include "test_support.hpp"

namespace kpe {
namespace {

using test::sa;

const KernelSpec kSpec{5.0, KernelKind::GaussianRbfProduct};

Hyper hyper(double sigma2 = 0.1, double gamma = 0.9, double lambda = 0.5) {
  Hyper h;
  h.sigma2 = sigma2;
  h.gamma = gamma;
  h.lambda = lambda;
  return h;
}

// Drives a dictionary and an evaluator by hand, growing whenever the
// successor is novel, and records what the batch oracle needs.
struct Harness {
  Dictionary dict;
  Evaluator eval;
  TrajectoryLog log;
  double tol1;

  Harness(Method method, Hyper h, std::vector<StateAction> seed, double tol = 0.1)
      : dict(kSpec), eval(method, h), tol1(tol) {
    dict.assign(seed, std::vector<std::size_t>(seed.size(), 0));
    for (const auto& c : seed) log.insertions.push_back({0, c});
    eval.initialize(dict);
  }

  void step(const Transition& tr, bool allow_growth = true) {
    const StepVectors sv = make_step_vectors(dict, tr);
    eval.normal_step(tr, sv);
    log.transitions.push_back(tr);
    if (!allow_growth) return;
    const Projection p = dict.project(tr.x_next);
    if (!is_novel(p, tol1)) return;
    const GrowthTerms terms = eval.usefulness(tr, sv, p);
    dict.grow(tr.x_next, p, log.transitions.size());
    eval.grow_step(tr, sv, p, terms);
    log.insertions.push_back({log.transitions.size(), tr.x_next});
  }
};

TEST(NormalStep, BrmScalarExample) {
  // sigma2 = 1 and one center give P^-1 = (1).
  Harness hx(Method::Brm, hyper(1.0), {sa({0.0}, 0)});
  ASSERT_DOUBLE_EQ(hx.eval.p_inv()(0, 0), 1.0);
  const Transition tr{sa({0.0}, 0), 1.0, sa({0.0}, 0), 0.0};
  hx.step(tr, false);
  EXPECT_DOUBLE_EQ(hx.eval.p_inv()(0, 0), 0.5);
  EXPECT_DOUBLE_EQ(hx.eval.weights()[0], 0.5);
  EXPECT_DOUBLE_EQ(hx.eval.xi(), 0.5);
  EXPECT_LE((batch_solve(Method::Brm, hx.log, kSpec, hyper(1.0)) - hx.eval.weights()).norm(), 1e-15);
}

TEST(NormalStep, ZeroRewardKeepsZeroWeights) {
  std::mt19937_64 rng(1);
  for (Method m : {Method::Brm, Method::Lstd, Method::Lspe}) {
    Harness hx(m, hyper(), {sa({0.2, 0.2}, 0), sa({0.8, 0.8}, 1)});
    for (auto tr : test::random_walk(rng, 50)) {
      tr.reward = 0.0;
      hx.step(tr, false);
    }
    EXPECT_EQ(hx.eval.weights(), Vector::Zero(2)) << to_string(m);
  }
}

TEST(NormalStep, LstdOnTwoFixedCentersMatchesBatch) {
  std::mt19937_64 rng(2);
  Harness hx(Method::Lstd, hyper(), {sa({0.3, 0.3}, 0), sa({0.6, 0.6}, 1)});
  for (const auto& tr : test::random_walk(rng, 200)) hx.step(tr, false);
  const Vector oracle = batch_solve(Method::Lstd, hx.log, kSpec, hyper());
  EXPECT_LE((hx.eval.weights() - oracle).lpNorm<Eigen::Infinity>(), 1e-8 * std::max(1.0, oracle.norm()));
}

TEST(NormalStep, EpisodeBoundaryResetsTrace) {
  for (Method m : {Method::Lstd, Method::Lspe}) {
    Harness hx(m, hyper(), {sa({0.2}, 0), sa({0.7}, 0)});
    hx.step({sa({0.2}, 0), 1.0, sa({0.4}, 0), 0.9}, false);
    const Transition boundary{sa({0.5}, 0), 0.0, sa({0.1}, 0), 0.0};
    hx.step(boundary, false);
    EXPECT_LE((hx.eval.trace() - hx.dict.kernel_vector(boundary.x)).norm(), 1e-15) << to_string(m);
  }
}

TEST(NormalStep, BoundaryMakesHEqualToKt) {
  Dictionary dict(kSpec);
  dict.assign({sa({0.2}, 0), sa({0.7}, 0)}, {0, 0});
  const Transition tr{sa({0.4}, 0), 0.0, sa({0.6}, 0), 0.0};
  const StepVectors sv = make_step_vectors(dict, tr);
  EXPECT_EQ(sv.h, sv.k_t);
  EXPECT_EQ(sv.h_star, sv.k_star_t);
}

TEST(NormalStep, SymmetricInverseForBrmAndLspe) {
  std::mt19937_64 rng(3);
  for (Method m : {Method::Brm, Method::Lspe}) {
    Harness hx(m, hyper(), {sa({0.5, 0.5}, 0)}, 0.2);
    for (const auto& tr : test::random_walk(rng, 300)) hx.step(tr);
    const Matrix& p = hx.eval.p_inv();
    EXPECT_LE((p - p.transpose()).cwiseAbs().maxCoeff(), 1e-8) << to_string(m);
  }
}

TEST(NormalStep, BrmCostStaysNonNegative) {
  std::mt19937_64 rng(4);
  Harness hx(Method::Brm, hyper(), {sa({0.5, 0.5}, 0)}, 0.2);
  for (const auto& tr : test::random_walk(rng, 300)) {
    hx.step(tr);
    EXPECT_GE(hx.eval.xi(), 0.0);
  }
}

TEST(NormalStep, SingularUpdateLeavesStateUntouched) {
  // A relative floor of 100 puts every denominator below the floor.
  Dictionary dict(kSpec);
  dict.seed(sa({0.0}, 0));
  for (Method m : {Method::Brm, Method::Lstd, Method::Lspe}) {
    Evaluator eval(m, hyper(), 100.0);
    eval.initialize(dict);
    const Matrix p = eval.p_inv();
    const Transition tr{sa({0.0}, 0), 1.0, sa({0.1}, 0), 0.9};
    EXPECT_THROW(eval.normal_step(tr, make_step_vectors(dict, tr)), SingularUpdate) << to_string(m);
    EXPECT_EQ(eval.p_inv(), p);
    EXPECT_EQ(eval.weights(), Vector::Zero(1));
    EXPECT_EQ(eval.trace(), Vector::Zero(1));
    EXPECT_EQ(eval.steps(), 0u);
  }
}

TEST(NormalStep, UninitializedOrMissizedInputsThrow) {
  Evaluator eval(Method::Brm, hyper());
  Dictionary dict(kSpec);
  dict.seed(sa({0.0}, 0));
  const Transition tr{sa({0.0}, 0), 1.0, sa({0.5}, 0), 0.9};
  EXPECT_THROW(eval.normal_step(tr, make_step_vectors(dict, tr)), ContractViolation);
  EXPECT_THROW(eval.initialize(Dictionary(kSpec)), EmptyDictionary);
  eval.initialize(dict);
  dict.grow(sa({1.0}, 0), dict.project(sa({1.0}, 0)), 1);
  EXPECT_THROW(eval.normal_step(tr, make_step_vectors(dict, tr)), ContractViolation);
}

TEST(Usefulness, PerfectlyPredictedRewardGivesZeroGain) {
  Harness hx(Method::Brm, hyper(), {sa({0.2}, 0)});
  // w = 0 and r = 0: rho = 0.
  const Transition tr{sa({0.2}, 0), 0.0, sa({0.9}, 0), 0.9};
  const StepVectors sv = make_step_vectors(hx.dict, tr);
  hx.eval.normal_step(tr, sv);
  const GrowthTerms g = hx.eval.usefulness(tr, sv, hx.dict.project(tr.x_next));
  EXPECT_EQ(g.kappa, 0.0);
  EXPECT_EQ(g.gain, 0.0);
}

TEST(Usefulness, BrmGainEqualsBatchCostReduction) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    Harness hx(Method::Brm, hyper(), {test::random_sa(rng, 1, 1)});
    auto walk = test::random_walk(rng, 30, 1, 1);
    for (std::size_t i = 0; i + 1 < walk.size(); ++i) hx.step(walk[i], false);
    const Transition& tr = walk.back();
    const StepVectors sv = make_step_vectors(hx.dict, tr);
    hx.eval.normal_step(tr, sv);
    hx.log.transitions.push_back(tr);
    const Projection p = hx.dict.project(tr.x_next);
    if (p.delta < 1e-3) continue;
    const GrowthTerms g = hx.eval.usefulness(tr, sv, p);

    const auto cost = [&](const TrajectoryLog& log) {
      const DataMatrices d = materialize(log, kSpec, 0.5);
      return brm_objective(d, 0.1, batch_solve(Method::Brm, log, kSpec, hyper()));
    };
    TrajectoryLog grown = hx.log;
    grown.insertions.push_back({grown.transitions.size(), tr.x_next});
    EXPECT_NEAR(cost(hx.log) - cost(grown), g.gain, 1e-9 * std::max(1.0, cost(hx.log)));
    EXPECT_NEAR(cost(hx.log), hx.eval.xi(), 1e-9 * std::max(1.0, cost(hx.log)));
  }
}

TEST(Usefulness, RequiresPrecedingNormalStep) {
  Harness hx(Method::Lstd, hyper(), {sa({0.2}, 0)});
  const Transition tr{sa({0.2}, 0), 1.0, sa({0.9}, 0), 0.9};
  const StepVectors sv = make_step_vectors(hx.dict, tr);
  EXPECT_THROW(hx.eval.usefulness(tr, sv, hx.dict.project(tr.x_next)), ContractViolation);
}

TEST(GrowStep, UncoupledCenterLeavesPredictionsUnchanged) {
  // gamma_eff = 0 and x_t of another action: h = 0 and h* = 0, so delta_h = 0.
  Harness hx(Method::Brm, hyper(), {sa({0.0}, 0)});
  hx.step({sa({0.0}, 0), 1.0, sa({0.1}, 0), 0.9}, false);
  const std::vector<StateAction> probes{sa({0.0}, 0), sa({0.3}, 0), sa({0.8}, 0)};
  std::vector<double> before;
  for (const auto& x : probes) before.push_back(hx.eval.predict(hx.dict, x));

  const Transition tr{sa({0.4}, 1), 0.5, sa({0.5}, 0), 0.0};
  const StepVectors sv = make_step_vectors(hx.dict, tr);
  hx.eval.normal_step(tr, sv);
  const Projection p = hx.dict.project(tr.x_next);
  ASSERT_GT(p.delta, 0.0);
  const GrowthTerms g = hx.eval.usefulness(tr, sv, p);
  EXPECT_EQ(g.kappa, 0.0);
  const Vector w_old = hx.eval.weights();
  hx.dict.grow(tr.x_next, p, 2);
  hx.eval.grow_step(tr, sv, p, g);
  EXPECT_EQ(hx.eval.weights().head(1), w_old);
  EXPECT_EQ(hx.eval.weights()[1], 0.0);
  for (std::size_t i = 0; i < probes.size(); ++i) {
    EXPECT_NEAR(hx.eval.predict(hx.dict, probes[i]), before[i], 1e-15);
  }
}

TEST(GrowStep, BrmOneToTwoCentersMatchesBatch) {
  std::mt19937_64 rng(6);
  Harness hx(Method::Brm, hyper(), {sa({0.1, 0.1}, 0)}, 10.0);
  const auto walk = test::random_walk(rng, 50);
  for (std::size_t i = 0; i < walk.size(); ++i) {
    hx.tol1 = i == 20 ? 0.0 : 10.0;
    hx.step(walk[i]);
  }
  ASSERT_EQ(hx.dict.size(), 2u);
  const Vector oracle = batch_solve(Method::Brm, hx.log, kSpec, hyper());
  EXPECT_LE((hx.eval.weights() - oracle).lpNorm<Eigen::Infinity>(), 1e-8 * std::max(1.0, oracle.norm()));
}

TEST(GrowStep, EveryMethodMatchesBatchAfterSeveralGrowths) {
  std::mt19937_64 rng(7);
  for (Method m : {Method::Brm, Method::Lstd, Method::Lspe}) {
    Harness hx(m, hyper(), {sa({0.5, 0.5}, 0)}, 0.3);
    for (const auto& tr : test::random_walk(rng, 200)) hx.step(tr);
    ASSERT_GE(hx.dict.size(), 4u) << to_string(m);
    const Vector oracle = batch_solve(m, hx.log, kSpec, hyper());
    EXPECT_LE((hx.eval.weights() - oracle).lpNorm<Eigen::Infinity>(),
              1e-6 * std::max(1.0, oracle.lpNorm<Eigen::Infinity>()))
        << to_string(m);
  }
}

TEST(GrowStep, CandidateOtherThanSuccessorMatchesBatch) {
  std::mt19937_64 rng(8);
  for (Method m : {Method::Brm, Method::Lstd, Method::Lspe}) {
    Harness hx(m, hyper(), {sa({0.5, 0.5}, 0)});
    for (const auto& tr : test::random_walk(rng, 150)) {
      const StepVectors sv = make_step_vectors(hx.dict, tr);
      hx.eval.normal_step(tr, sv);
      hx.log.transitions.push_back(tr);
      const Projection p = hx.dict.project(tr.x);
      if (!is_novel(p, 0.3)) continue;
      const StepVectors cand = with_candidate(sv, kSpec, tr, tr.x);
      const GrowthTerms g = hx.eval.usefulness(tr, cand, p);
      hx.dict.grow(tr.x, p, hx.log.transitions.size());
      hx.eval.grow_step(tr, cand, p, g);
      hx.log.insertions.push_back({hx.log.transitions.size(), tr.x});
    }
    ASSERT_GE(hx.dict.size(), 3u);
    const Vector oracle = batch_solve(m, hx.log, kSpec, hyper());
    EXPECT_LE((hx.eval.weights() - oracle).lpNorm<Eigen::Infinity>(),
              1e-6 * std::max(1.0, oracle.lpNorm<Eigen::Infinity>()))
        << to_string(m);
  }
}

TEST(Predict, ZeroWeightsPredictZero) {
  Harness hx(Method::Lspe, hyper(), {sa({0.5}, 0), sa({0.1}, 1)});
  EXPECT_EQ(hx.eval.predict(hx.dict, sa({0.3}, 0)), 0.0);
}

TEST(Predict, MatchesKernelVectorDotWeights) {
  std::mt19937_64 rng(9);
  Harness hx(Method::Lstd, hyper(), {sa({0.5, 0.5}, 0)}, 0.3);
  for (const auto& tr : test::random_walk(rng, 100)) hx.step(tr);
  for (int trial = 0; trial < 10; ++trial) {
    const StateAction x = test::random_sa(rng, 2, 2);
    EXPECT_EQ(hx.eval.predict(hx.dict, x), hx.dict.kernel_vector(x).dot(hx.eval.weights()));
  }
}

TEST(Predict, SingleCenterReturnsItsWeight) {
  // One BRM step with target 2 * (1 + sigma2) on P^-1 = 1 / sigma2 gives w = 2.
  Harness hx(Method::Brm, hyper(1.0), {sa({0.4}, 1)});
  hx.step({sa({0.4}, 1), 4.0, sa({0.4}, 1), 0.0}, false);
  EXPECT_DOUBLE_EQ(hx.eval.predict(hx.dict, sa({0.4}, 1)), 2.0);
}

TEST(StepSize, ConstantAndHarmonic) {
  StepSize constant;
  EXPECT_EQ(constant.at(0), 0.5);
  EXPECT_EQ(constant.at(1000), 0.5);
  StepSize harmonic{0.5, 10.0};
  EXPECT_DOUBLE_EQ(harmonic.at(0), 0.5);
  EXPECT_DOUBLE_EQ(harmonic.at(10), 0.25);
}

TEST(MethodNames, RoundTrip) {
  for (Method m : {Method::Brm, Method::Lstd, Method::Lspe}) EXPECT_EQ(method_from_string(to_string(m)), m);
  EXPECT_THROW(method_from_string("td"), ContractViolation);
}

TEST(Hyperparameters, InvalidValuesThrow) {
  EXPECT_THROW(Evaluator(Method::Brm, hyper(0.0)), ContractViolation);
  EXPECT_THROW(Evaluator(Method::Brm, hyper(0.1, 1.5)), ContractViolation);
  EXPECT_THROW(Evaluator(Method::Brm, hyper(0.1, 0.9, -0.1)), ContractViolation);
}

}  // namespace
}  // namespace kpe
