#include "kpe/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <ostream>
#include <set>
#include <sstream>

#include "kpe/batch_oracle.hpp"
#include "kpe/config.hpp"
#include "kpe/control.hpp"
#include "kpe/envs.hpp"
#include "kpe/errors.hpp"
#include "kpe/experiment.hpp"
#include "kpe/learner.hpp"

namespace kpe {

namespace {

std::string fmt(const char* pattern, double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, value);
  return buf;
}

double rel_inf_diff(const Vector& got, const Vector& want) {
  return (got - want).lpNorm<Eigen::Infinity>() / std::max(1.0, want.lpNorm<Eigen::Infinity>());
}

struct Outcome {
  bool passed = false;
  std::string detail;
};

// Random 2-D trajectory with resets, two actions and Gaussian rewards.
std::vector<Transition> random_trajectory(Rng& rng, std::size_t length) {
  std::normal_distribution<double> step(0.0, 0.15);
  std::normal_distribution<double> reward(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::bernoulli_distribution coin(0.5);
  std::bernoulli_distribution reset(0.05);
  auto random_state = [&] { return Vector{{unit(rng), unit(rng)}}; };
  StateAction x{random_state(), coin(rng) ? 1 : 0};
  std::vector<Transition> out;
  for (std::size_t t = 0; t < length; ++t) {
    const bool boundary = reset(rng);
    Vector s = boundary ? random_state() : x.state;
    if (!boundary) {
      for (Eigen::Index i = 0; i < 2; ++i) s[i] = std::clamp(s[i] + step(rng), 0.0, 1.0);
    }
    const StateAction x_next{s, coin(rng) ? 1 : 0};
    out.push_back({x, reward(rng), x_next, boundary ? 0.0 : 0.9});
    x = x_next;
  }
  return out;
}

LearnerOptions equivalence_options(Method method, Rng& rng) {
  LearnerOptions opts;
  opts.method = method;
  opts.hyper.gamma = 0.9;
  opts.hyper.lambda = 0.5;
  opts.hyper.sigma2 = 0.1;
  opts.kernel = KernelSpec{5.0, KernelKind::GaussianRbfProduct};
  opts.tol1 = std::uniform_real_distribution<double>(0.02, 0.3)(rng);
  opts.tol2 = std::bernoulli_distribution(0.5)(rng) ? 0.0 : 1e-3;
  opts.screen_current = std::bernoulli_distribution(0.5)(rng);
  opts.max_dictionary = 50;
  opts.record_log = true;
  return opts;
}

Outcome batch_equivalence(double scale) {
  const double tol = 1e-6 * scale;
  const auto start = std::chrono::steady_clock::now();
  double worst = 0.0;
  std::size_t max_m = 0;
  std::size_t growths = 0;
  for (Method method : {Method::Brm, Method::Lstd, Method::Lspe}) {
    Rng rng(1000 + static_cast<int>(method));
    for (int run = 0; run < 20; ++run) {
      const std::size_t length = std::uniform_int_distribution<std::size_t>(50, 500)(rng);
      OnlineLearner learner(equivalence_options(method, rng));
      for (const auto& tr : random_trajectory(rng, length)) learner.observe(tr);
      const Vector oracle = batch_solve(method, learner.log(), learner.options().kernel, learner.options().hyper);
      worst = std::max(worst, rel_inf_diff(learner.evaluator().weights(), oracle));
      max_m = std::max(max_m, learner.dictionary().size());
      growths += learner.stats().growths;
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {worst <= tol && secs < 30.0,
          "60 runs, max rel diff " + fmt("%.3g", worst) + " (tol " + fmt("%.3g", tol) + "), max m " +
              std::to_string(max_m) + ", " + std::to_string(growths) + " growths, " + fmt("%.2f", secs) +
              " s (limit 30 s)"};
}

Outcome cost_recursion(double scale) {
  const double tol = 1e-6 * scale;
  double worst = 0.0;
  Rng rng(1000 + static_cast<int>(Method::Brm));
  for (int run = 0; run < 20; ++run) {
    const std::size_t length = std::uniform_int_distribution<std::size_t>(50, 500)(rng);
    OnlineLearner learner(equivalence_options(Method::Brm, rng));
    for (const auto& tr : random_trajectory(rng, length)) learner.observe(tr);
    const LearnerOptions& opts = learner.options();
    const DataMatrices data = materialize(learner.log(), opts.kernel, opts.hyper.lambda);
    const Vector w = batch_solve(Method::Brm, learner.log(), opts.kernel, opts.hyper);
    const double direct = brm_objective(data, opts.hyper.sigma2, w);
    const double xi = learner.evaluator().xi();
    worst = std::max(worst, std::abs(xi - direct) / std::max(1.0, std::abs(direct)));
  }
  return {worst <= tol, "20 runs, max rel diff " + fmt("%.3g", worst) + " (tol " + fmt("%.3g", tol) + ")"};
}

// Stochastic 5-chain used by the exact-Q and common-limit checks.
ChainEnv stochastic_chain(std::uint64_t seed) { return ChainEnv(ChainParams{5, 0.2, true, 0}, seed); }

Outcome exact_q_agreement(double scale) {
  const double tol = 0.05 * scale;
  const auto start = std::chrono::steady_clock::now();
  ChainEnv env = stochastic_chain(7);
  Rng rng(11);
  const StochasticPolicy always_right = [](const Vector&, Rng&) { return ChainEnv::kRight; };
  LearnerOptions opts;
  opts.method = Method::Lstd;
  opts.hyper.lambda = 0.5;
  opts.tol1 = 1e-6;
  OnlineLearner learner(opts);
  std::set<std::pair<int, int>> visited;
  for (const auto& tr : rollout(env, always_right, 50000, opts.hyper.gamma, rng, true)) {
    learner.observe(tr);
    visited.insert({env.index_of(tr.x.state), tr.x.action});
  }
  const Matrix q = exact_q(as_finite_mdp(env, opts.hyper.gamma),
                           TabularPolicy(5, ChainEnv::kRight));
  double worst = 0.0;
  for (const auto& [s, a] : visited) {
    worst = std::max(worst, std::abs(learner.predict({env.embed(s), a}) - q(s, a)));
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {worst <= tol && secs < 60.0,
          std::to_string(visited.size()) + " visited pairs, m " + std::to_string(learner.dictionary().size()) +
              ", max |Q - Q_pi| " + fmt("%.3g", worst) + " (tol " + fmt("%.3g", tol) + "), " +
              fmt("%.2f", secs) + " s (limit 60 s)"};
}

Outcome common_limit(double scale) {
  const double tol = 1e-2 * scale;
  ChainEnv env = stochastic_chain(13);
  Rng rng(17);
  const StochasticPolicy mostly_right = [](const Vector&, Rng& r) {
    return std::bernoulli_distribution(0.7)(r) ? ChainEnv::kRight : ChainEnv::kLeft;
  };
  const auto trajectory = rollout(env, mostly_right, 50000, 0.99, rng);
  std::vector<StateAction> all;
  for (int s = 0; s < 5; ++s) {
    for (int a = 0; a < 2; ++a) all.push_back({env.embed(s), a});
  }
  Vector weights[2];
  int i = 0;
  for (Method method : {Method::Lstd, Method::Lspe}) {
    LearnerOptions opts;
    opts.method = method;
    opts.growth = false;
    OnlineLearner learner(opts);
    learner.seed_dictionary(all);
    for (const auto& tr : trajectory) learner.observe(tr);
    weights[i++] = learner.evaluator().weights();
  }
  const double diff = (weights[0] - weights[1]).lpNorm<Eigen::Infinity>();
  return {diff <= tol, "|w_lstd - w_lspe|_inf " + fmt("%.3g", diff) + " (tol " + fmt("%.3g", tol) +
                           "), |w_lstd|_inf " + fmt("%.3g", weights[0].lpNorm<Eigen::Infinity>())};
}

ExperimentConfig nav_config(double tol2) {
  ExperimentConfig c;
  c.env = EnvKind::Nav2D;
  c.method = Method::Lstd;
  c.architecture = Architecture::ActorCritic;
  c.nav.random_start = true;
  c.tol1 = 0.1;
  c.tol2 = tol2;
  c.max_transitions = 15000;
  return c;
}

Outcome supervised_economy(double scale) {
  const double allowed = 0.10 * scale;
  // A few percent of actor-critic runs end on a diverged critic whatever
  // TOL2 is, so returns are compared per seed and summarized by the median.
  constexpr std::uint64_t kSeeds = 10;
  constexpr double kDiverged = -1.5;
  std::vector<double> degradations;
  double mean_return[2] = {0.0, 0.0};
  double mean_size[2] = {0.0, 0.0};
  int diverged[2] = {0, 0};
  int smaller = 0;
  std::string sizes;
  for (std::uint64_t seed = 1; seed <= kSeeds; ++seed) {
    std::size_t m[2];
    double ret[2];
    int i = 0;
    for (double tol2 : {0.0, 0.01}) {
      const ExperimentConfig c = nav_config(tol2);
      auto env = c.make_env(seed);
      const RunLog log = run_actor_critic(*env, c.control(), seed);
      NoisyNav2D eval_env(c.nav, 99);
      m[i] = log.network.dictionary.size();
      ret[i] = evaluate_greedy(eval_env, log.network, 200, static_cast<std::size_t>(c.nav.max_steps));
      mean_return[i] += ret[i] / static_cast<double>(kSeeds);
      mean_size[i] += static_cast<double>(m[i]) / static_cast<double>(kSeeds);
      if (ret[i] < kDiverged) ++diverged[i];
      ++i;
    }
    if (m[1] < m[0]) ++smaller;
    degradations.push_back((ret[0] - ret[1]) / std::abs(ret[0]));
    sizes += (sizes.empty() ? "" : " ") + std::to_string(m[0]) + "/" + std::to_string(m[1]);
  }
  std::sort(degradations.begin(), degradations.end());
  const double median_degradation = (degradations[kSeeds / 2 - 1] + degradations[kSeeds / 2]) / 2.0;
  return {smaller == static_cast<int>(kSeeds) && median_degradation <= allowed,
          "dictionary smaller on " + std::to_string(smaller) + " of " + std::to_string(kSeeds) + " seeds [" + sizes +
              "], mean " + fmt("%.1f", mean_size[0]) + " -> " + fmt("%.1f", mean_size[1]) +
              "; median paired return degradation " + fmt("%.1f%%", 100.0 * median_degradation) + " (allowed " +
              fmt("%.1f%%", 100.0 * allowed) + "), mean greedy return " + fmt("%.4g", mean_return[0]) + " -> " +
              fmt("%.4g", mean_return[1]) + ", diverged runs " + std::to_string(diverged[0]) + "/" +
              std::to_string(diverged[1])};
}

Outcome policy_improvement(double) {
  ExperimentConfig c;
  c.max_transitions = 50000;
  // Fine enough to hold all ten state-actions of the chain.
  c.tol1 = 0.01;
  const FiniteMDP mdp = as_finite_mdp(*c.make_env(0), c.gamma);
  const TabularPolicy optimal = policy_iteration(mdp);
  int good_seeds = 0;
  std::string per_seed;
  for (std::uint64_t seed : c.seeds) {
    auto env = c.make_env(seed);
    const RunLog log = run_actor_critic(*env, c.control(), seed);
    const auto& chain = dynamic_cast<const ChainEnv&>(*env);
    int matches = 0;
    for (int s = 0; s < mdp.n_states; ++s) {
      if (greedy_action(log.network, chain.embed(s), 2) == optimal[static_cast<std::size_t>(s)]) ++matches;
    }
    if (matches >= 4) ++good_seeds;
    per_seed += (per_seed.empty() ? "" : " ") + std::to_string(matches);
  }
  return {good_seeds >= 4, "optimal actions per seed [" + per_seed + "] of 5 states, " +
                               std::to_string(good_seeds) + " of 5 seeds with >= 4"};
}

double median(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  return xs[xs.size() / 2];
}

Outcome real_time(double scale) {
  const double limit = 2.0 * scale;
  constexpr int kBlock = 50;
  constexpr int kBlocks = 21;
  Rng rng(23);
  std::vector<StateAction> centers;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int i = 0; i < 40; ++i) centers.push_back({Vector{{unit(rng), unit(rng)}}, i % 2});
  Dictionary dict;
  dict.assign(centers, std::vector<std::size_t>(centers.size(), 0));
  const auto trajectory = random_trajectory(rng, 10000 + kBlock * kBlocks);
  std::vector<StepVectors> vectors;
  vectors.reserve(trajectory.size());
  for (const auto& tr : trajectory) vectors.push_back(make_step_vectors(dict, tr));

  std::string detail;
  bool ok = true;
  for (Method method : {Method::Brm, Method::Lstd, Method::Lspe}) {
    Evaluator eval(method, Hyper{});
    eval.initialize(dict);
    std::vector<double> early;
    std::vector<double> late;
    for (std::size_t t = 0; t < trajectory.size(); ++t) {
      const bool in_early = t >= 100 && t < 100 + kBlock * kBlocks;
      const bool in_late = t >= 10000;
      const auto begin = std::chrono::steady_clock::now();
      eval.normal_step(trajectory[t], vectors[t]);
      const double ns = std::chrono::duration<double, std::nano>(std::chrono::steady_clock::now() - begin).count();
      if (in_early) early.push_back(ns);
      if (in_late) late.push_back(ns);
    }
    const double ratio = median(late) / median(early);
    ok = ok && ratio <= limit;
    detail += (detail.empty() ? "" : ", ") + to_string(method) + " " + fmt("%.2f", ratio);
  }
  return {ok, "median step time ratio t=1e4 vs t=1e2 at m=40: " + detail + " (limit " + fmt("%.2f", limit) + ")"};
}

Outcome sr_identity(double scale) {
  const double tol = 1e-8 * scale;
  Rng rng(29);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, 1.0);
  const KernelSpec spec{5.0, KernelKind::GaussianRbfProduct};
  double worst = 0.0;
  for (int problem = 0; problem < 10; ++problem) {
    std::vector<StateAction> points;
    Vector y(20);
    for (int i = 0; i < 20; ++i) {
      points.push_back({Vector{{unit(rng), unit(rng), unit(rng)}}, i % 2});
      y[i] = noise(rng);
    }
    const Vector full = full_rn_solve(points, y, spec, 0.1);
    const Vector sr = sr_solve(points, y, points, spec, 0.1);
    worst = std::max(worst, rel_inf_diff(sr, full));
  }
  return {worst <= tol, "10 problems of 20 points, max rel diff " + fmt("%.3g", worst) + " (tol " +
                            fmt("%.3g", tol) + ")"};
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

Outcome determinism(const std::filesystem::path& work_dir) {
  ExperimentConfig c;
  c.max_transitions = 3000;
  c.seeds = {1, 2, 3};
  c.bucket = 500;
  std::filesystem::remove_all(work_dir);
  std::string contents[2];
  for (int run = 0; run < 2; ++run) {
    c.output = work_dir / ("run" + std::to_string(run));
    run_experiment(c, worker_cap());
    for (std::uint64_t seed : c.seeds) contents[run] += read_file(seed_csv_path(c.output, seed));
    contents[run] += read_file(aggregate_csv_path(c.output));
  }
  std::filesystem::remove_all(work_dir);
  const bool same = !contents[0].empty() && contents[0] == contents[1];
  return {same, std::to_string(c.seeds.size()) + " seeds + aggregate, " + std::to_string(contents[0].size()) +
                    " bytes, " + (same ? "identical" : "different")};
}

}  // namespace

std::vector<CriterionResult> run_acceptance_suite(const AcceptanceOptions& options) {
  const double s = options.tolerance_scale;
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"batch equivalence", [s] { return batch_equivalence(s); }},
      {"cost recursion", [s] { return cost_recursion(s); }},
      {"exact-Q agreement", [s] { return exact_q_agreement(s); }},
      {"common limit", [s] { return common_limit(s); }},
      {"supervised selection economy", [s] { return supervised_economy(s); }},
      {"policy improvement", [s] { return policy_improvement(s); }},
      {"real-time step cost", [s] { return real_time(s); }},
      {"SR identity", [s] { return sr_identity(s); }},
      {"determinism", [&options] { return determinism(options.work_dir); }},
  };
  std::vector<CriterionResult> results;
  for (int id = 1; id <= kCriterionCount; ++id) {
    if (!options.only.empty() && std::find(options.only.begin(), options.only.end(), id) == options.only.end()) {
      continue;
    }
    CriterionResult r;
    r.id = id;
    r.name = criteria[static_cast<std::size_t>(id - 1)].first;
    const auto begin = std::chrono::steady_clock::now();
    try {
      const Outcome o = criteria[static_cast<std::size_t>(id - 1)].second();
      r.passed = o.passed;
      r.detail = o.detail;
    } catch (const std::exception& e) {
      r.passed = false;
      r.detail = std::string("exception: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - begin).count();
    results.push_back(std::move(r));
  }
  return results;
}

void print_acceptance(std::ostream& out, const std::vector<CriterionResult>& results) {
  for (const auto& r : results) {
    out << (r.passed ? "PASS " : "FAIL ") << r.id << ' ' << r.name << ": " << r.detail << " ("
        << fmt("%.2f", r.seconds) << " s)\n";
  }
}

bool all_passed(const std::vector<CriterionResult>& results) {
  return !results.empty() &&
         std::all_of(results.begin(), results.end(), [](const auto& r) { return r.passed; });
}

}  // namespace kpe
