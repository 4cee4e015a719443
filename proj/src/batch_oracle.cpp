#include "kpe/batch_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "kpe/errors.hpp"

namespace kpe {

namespace {

constexpr double kMinRcond = 1e-15;

Vector solve_dense(const Matrix& system, const Vector& rhs, const char* what) {
  Eigen::PartialPivLU<Matrix> lu(system);
  if (!(lu.rcond() > kMinRcond)) {
    throw OracleSingular(std::string(what) + ": singular system (rcond " +
                         std::to_string(lu.rcond()) + ")");
  }
  return lu.solve(rhs);
}

}  // namespace

DataMatrices materialize(const TrajectoryLog& log, const KernelSpec& spec, double lambda) {
  const auto T = static_cast<Eigen::Index>(log.transitions.size());
  DataMatrices d;
  std::size_t next_insertion = 0;
  for (std::size_t i = 1; i < log.insertions.size(); ++i) {
    if (log.insertions[i].step < log.insertions[i - 1].step ||
        (log.insertions[i].step == log.insertions[i - 1].step && log.insertions[i].step != 0)) {
      throw ContractViolation("materialize: insertion steps must increase");
    }
  }
  while (next_insertion < log.insertions.size() && log.insertions[next_insertion].step == 0) {
    d.centers.push_back(log.insertions[next_insertion++].center);
  }
  if (d.centers.empty()) throw EmptyDictionary();

  const Eigen::Index max_m = static_cast<Eigen::Index>(log.insertions.size());
  d.K = Matrix::Zero(T, max_m);
  d.H = Matrix::Zero(T, max_m);
  d.r = Vector::Zero(T);
  d.columns_after_row.resize(static_cast<std::size_t>(T));

  for (Eigen::Index t = 0; t < T; ++t) {
    const Transition& tr = log.transitions[static_cast<std::size_t>(t)];
    const auto m = static_cast<Eigen::Index>(d.centers.size());
    for (Eigen::Index j = 0; j < m; ++j) {
      const StateAction& c = d.centers[static_cast<std::size_t>(j)];
      const double kx = eval_kernel(spec, tr.x, c);
      d.K(t, j) = kx;
      d.H(t, j) = kx - tr.gamma_eff * eval_kernel(spec, tr.x_next, c);
    }
    d.r[t] = tr.reward;

    while (next_insertion < log.insertions.size() &&
           log.insertions[next_insertion].step == static_cast<std::size_t>(t + 1)) {
      const StateAction& c = log.insertions[next_insertion++].center;
      const Matrix gram = gram_matrix(spec, d.centers);
      const Vector kc = cross_kernel_matrix(spec, d.centers, std::span(&c, 1));
      const Vector a = gram.ldlt().solve(kc);
      const Eigen::Index j = static_cast<Eigen::Index>(d.centers.size());
      if (t > 0) {
        d.K.col(j).head(t) = d.K.topLeftCorner(t, j) * a;
        d.H.col(j).head(t) = d.H.topLeftCorner(t, j) * a;
      }
      const double kx = eval_kernel(spec, tr.x, c);
      d.K(t, j) = kx;
      d.H(t, j) = kx - tr.gamma_eff * eval_kernel(spec, tr.x_next, c);
      d.centers.push_back(c);
    }
    d.columns_after_row[static_cast<std::size_t>(t)] = static_cast<Eigen::Index>(d.centers.size());
  }
  if (next_insertion != log.insertions.size()) {
    throw ContractViolation("materialize: insertion beyond the last transition");
  }

  const auto m = static_cast<Eigen::Index>(d.centers.size());
  d.K.conservativeResize(T, m);
  d.H.conservativeResize(T, m);
  d.Kmm = gram_matrix(spec, d.centers);

  // Lambda(k, i) = prod_{j=k+1..i} lambda * gamma_j for k <= i.
  d.Lambda = Matrix::Zero(T, T);
  for (Eigen::Index k = 0; k < T; ++k) {
    d.Lambda(k, k) = 1.0;
    for (Eigen::Index i = k + 1; i < T; ++i) {
      d.Lambda(k, i) =
          d.Lambda(k, i - 1) * lambda * log.transitions[static_cast<std::size_t>(i)].gamma_eff;
    }
  }
  d.Z = d.Lambda.transpose() * d.K;
  return d;
}

double brm_objective(const DataMatrices& data, double sigma2, const Vector& w) {
  return (data.r - data.H * w).squaredNorm() + sigma2 * w.dot(data.Kmm * w);
}

Vector batch_solve(Method method, const TrajectoryLog& log, const KernelSpec& spec,
                   const Hyper& hyper) {
  const DataMatrices d = materialize(log, spec, hyper.lambda);
  const double s2 = hyper.sigma2;
  switch (method) {
    case Method::Brm:
      return solve_dense(d.H.transpose() * d.H + s2 * d.Kmm, d.H.transpose() * d.r, "BRM");
    case Method::Lstd:
      return solve_dense(d.Z.transpose() * d.H + s2 * d.Kmm, d.Z.transpose() * d.r, "LSTD");
    case Method::Lspe:
      break;
  }

  // LSPE: replay the iterate. Entries of finished rows never change, so the
  // data at step s are the leading rows/columns of the final matrices.
  const Eigen::Index T = d.K.rows();
  const Eigen::Index M = d.K.cols();
  Matrix KtK = Matrix::Zero(M, M);
  Matrix ZtH = Matrix::Zero(M, M);
  Vector Ztr = Vector::Zero(M);
  Eigen::Index m0 = M;
  if (T > 0) {
    m0 = static_cast<Eigen::Index>(
        std::count_if(log.insertions.begin(), log.insertions.end(),
                      [](const Insertion& ins) { return ins.step == 0; }));
  }
  Vector w = Vector::Zero(m0);
  for (Eigen::Index s = 0; s < T; ++s) {
    KtK.noalias() += d.K.row(s).transpose() * d.K.row(s);
    ZtH.noalias() += d.Z.row(s).transpose() * d.H.row(s);
    Ztr += d.Z.row(s).transpose() * d.r[s];
    const Eigen::Index m = d.columns_after_row[static_cast<std::size_t>(s)];
    Vector w_prev = Vector::Zero(m);
    w_prev.head(w.size()) = w;
    const Matrix P = KtK.topLeftCorner(m, m) + s2 * d.Kmm.topLeftCorner(m, m);
    const Vector resid = Ztr.head(m) - ZtH.topLeftCorner(m, m) * w_prev;
    w = w_prev + hyper.step.at(static_cast<std::size_t>(s)) * solve_dense(P, resid, "LSPE");
  }
  return w;
}

Vector full_rn_solve(std::span<const StateAction> points, const Vector& targets,
                     const KernelSpec& spec, double sigma2) {
  if (static_cast<Eigen::Index>(points.size()) != targets.size()) {
    throw ContractViolation("full_rn_solve: size mismatch");
  }
  const Matrix K = gram_matrix(spec, points);
  return solve_dense(K + sigma2 * Matrix::Identity(K.rows(), K.cols()), targets, "full RN");
}

Vector sr_solve(std::span<const StateAction> points, const Vector& targets,
                std::span<const StateAction> centers, const KernelSpec& spec, double sigma2) {
  if (static_cast<Eigen::Index>(points.size()) != targets.size()) {
    throw ContractViolation("sr_solve: size mismatch");
  }
  const Matrix Ktm = cross_kernel_matrix(spec, points, centers);
  const Matrix Kmm = gram_matrix(spec, centers);
  return solve_dense(Ktm.transpose() * Ktm + sigma2 * Kmm, Ktm.transpose() * targets, "SR");
}

void FiniteMDP::validate() const {
  if (n_states <= 0 || n_actions <= 0) throw ContractViolation("FiniteMDP: empty state or action set");
  if (!(gamma >= 0.0 && gamma < 1.0)) throw ContractViolation("FiniteMDP: gamma must lie in [0, 1)");
  if (transition.size() != static_cast<std::size_t>(n_actions) ||
      reward.size() != static_cast<std::size_t>(n_actions)) {
    throw ContractViolation("FiniteMDP: one transition and reward matrix per action required");
  }
  for (int a = 0; a < n_actions; ++a) {
    const Matrix& P = transition[static_cast<std::size_t>(a)];
    const Matrix& R = reward[static_cast<std::size_t>(a)];
    if (P.rows() != n_states || P.cols() != n_states || R.rows() != n_states ||
        R.cols() != n_states) {
      throw ContractViolation("FiniteMDP: matrix shape mismatch");
    }
    if ((P.array() < 0.0).any()) throw ContractViolation("FiniteMDP: negative probability");
    for (int s = 0; s < n_states; ++s) {
      if (std::abs(P.row(s).sum() - 1.0) > 1e-12) {
        throw ContractViolation("FiniteMDP: row " + std::to_string(s) + " of action " +
                                std::to_string(a) + " does not sum to 1");
      }
    }
  }
}

Matrix FiniteMDP::expected_reward() const {
  Matrix rbar(n_states, n_actions);
  for (int a = 0; a < n_actions; ++a) {
    const auto ua = static_cast<std::size_t>(a);
    rbar.col(a) = transition[ua].cwiseProduct(reward[ua]).rowwise().sum();
  }
  return rbar;
}

namespace {

void check_policy(const FiniteMDP& mdp, const TabularPolicy& policy) {
  if (policy.size() != static_cast<std::size_t>(mdp.n_states)) {
    throw ContractViolation("policy size does not match the state count");
  }
  for (int a : policy) {
    if (a < 0 || a >= mdp.n_actions) throw ContractViolation("policy action out of range");
  }
}

}  // namespace

Matrix exact_q(const FiniteMDP& mdp, const TabularPolicy& policy) {
  mdp.validate();
  check_policy(mdp, policy);
  const int S = mdp.n_states;
  const int A = mdp.n_actions;
  const Eigen::Index n = static_cast<Eigen::Index>(S) * A;
  // Unknown (s, a) lives at index s * A + a.
  Matrix system = Matrix::Identity(n, n);
  Vector rhs(n);
  const Matrix rbar = mdp.expected_reward();
  for (int s = 0; s < S; ++s) {
    for (int a = 0; a < A; ++a) {
      const Eigen::Index row = static_cast<Eigen::Index>(s) * A + a;
      rhs[row] = rbar(s, a);
      const Matrix& P = mdp.transition[static_cast<std::size_t>(a)];
      for (int s2 = 0; s2 < S; ++s2) {
        const Eigen::Index col =
            static_cast<Eigen::Index>(s2) * A + policy[static_cast<std::size_t>(s2)];
        system(row, col) -= mdp.gamma * P(s, s2);
      }
    }
  }
  const Vector q = solve_dense(system, rhs, "exact Q");
  Matrix table(S, A);
  for (int s = 0; s < S; ++s) {
    for (int a = 0; a < A; ++a) table(s, a) = q[static_cast<Eigen::Index>(s) * A + a];
  }
  return table;
}

double bellman_residual(const FiniteMDP& mdp, const TabularPolicy& policy, const Matrix& q) {
  check_policy(mdp, policy);
  Vector next_value(mdp.n_states);
  for (int s = 0; s < mdp.n_states; ++s) next_value[s] = q(s, policy[static_cast<std::size_t>(s)]);
  const Matrix rbar = mdp.expected_reward();
  double worst = 0.0;
  for (int a = 0; a < mdp.n_actions; ++a) {
    const Vector backup =
        rbar.col(a) + mdp.gamma * mdp.transition[static_cast<std::size_t>(a)] * next_value;
    worst = std::max(worst, (q.col(a) - backup).cwiseAbs().maxCoeff());
  }
  return worst;
}

TabularPolicy greedy_policy(const Matrix& q) {
  TabularPolicy pi(static_cast<std::size_t>(q.rows()), 0);
  for (Eigen::Index s = 0; s < q.rows(); ++s) {
    int best = 0;
    for (Eigen::Index a = 1; a < q.cols(); ++a) {
      if (q(s, a) > q(s, best)) best = static_cast<int>(a);
    }
    pi[static_cast<std::size_t>(s)] = best;
  }
  return pi;
}

TabularPolicy policy_iteration(const FiniteMDP& mdp, int max_iterations) {
  TabularPolicy pi(static_cast<std::size_t>(mdp.n_states), 0);
  for (int it = 0; it < max_iterations; ++it) {
    const Matrix q = exact_q(mdp, pi);
    const TabularPolicy greedy = greedy_policy(q);
    TabularPolicy next = pi;
    // Switch only on strict improvement so that ties cannot cycle.
    for (std::size_t s = 0; s < pi.size(); ++s) {
      const auto row = static_cast<Eigen::Index>(s);
      if (q(row, greedy[s]) > q(row, pi[s]) + 1e-12) next[s] = greedy[s];
    }
    if (next == pi) return pi;
    pi = std::move(next);
  }
  return pi;
}

Vector stationary_distribution(const Matrix& chain) {
  const Eigen::Index n = chain.rows();
  // Solve pi^T (P - I) = 0 with sum(pi) = 1 by replacing one equation.
  Matrix system = chain.transpose() - Matrix::Identity(n, n);
  system.row(n - 1).setOnes();
  Vector rhs = Vector::Zero(n);
  rhs[n - 1] = 1.0;
  return solve_dense(system, rhs, "stationary distribution");
}

}  // namespace kpe
