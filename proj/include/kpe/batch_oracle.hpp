#pragma once

// Dense, non-recursive reference solvers. Nothing here shares code with the
// rank-1 recursions in evaluator.cpp: the data matrices are materialized in
// full and every system is solved by a dense factorization.

#include <cstddef>
#include <span>
#include <vector>

#include "kpe/evaluator.hpp"
#include "kpe/kernel.hpp"
#include "kpe/transition.hpp"

namespace kpe {

/// K, H, r, Lambda and Z = Lambda^T K for a logged run. Columns of centers
/// inserted after row s-1 use the subset-of-regressors kernel
/// k(x_i, c) ~ k_m(x_i)^T K_mm^-1 k_m(c) on rows i < s-1 and the exact kernel
/// on row s-1 and later.
struct DataMatrices {
  Matrix K;
  Matrix H;
  Vector r;
  Matrix Lambda;
  Matrix Z;
  Matrix Kmm;
  std::vector<StateAction> centers;
  /// Number of columns in use once row i (and any growth after it) is done.
  std::vector<Eigen::Index> columns_after_row;
};

DataMatrices materialize(const TrajectoryLog& log, const KernelSpec& spec, double lambda);

/// Closed-form weights: (H^T H + s2 K_mm)^-1 H^T r for BRM,
/// (Z^T H + s2 K_mm)^-1 Z^T r for LSTD, and for LSPE the iterate
/// w <- w + eta P^-1 (b - A w) replayed step by step with P, A, b rebuilt
/// from the data matrices. Throws OracleSingular.
Vector batch_solve(Method method, const TrajectoryLog& log, const KernelSpec& spec,
                   const Hyper& hyper);

/// |r - H w|^2 + s2 w^T K_mm w.
double brm_objective(const DataMatrices& data, double sigma2, const Vector& w);

/// (K + s2 I)^-1 y.
Vector full_rn_solve(std::span<const StateAction> points, const Vector& targets,
                     const KernelSpec& spec, double sigma2);

/// (K_tm^T K_tm + s2 K_mm)^-1 K_tm^T y.
Vector sr_solve(std::span<const StateAction> points, const Vector& targets,
                std::span<const StateAction> centers, const KernelSpec& spec, double sigma2);

/// Tabular MDP. transition[a](s, s') = P(s'|s,a), reward[a](s, s') = R(s'|s,a).
struct FiniteMDP {
  int n_states = 0;
  int n_actions = 0;
  std::vector<Matrix> transition;
  std::vector<Matrix> reward;
  double gamma = 0.9;

  /// Throws ContractViolation on malformed tensors or gamma outside [0, 1).
  void validate() const;
  /// Expected immediate reward sum_s' P(s'|s,a) R(s'|s,a) as an S x A table.
  Matrix expected_reward() const;
};

using TabularPolicy = std::vector<int>;

/// Q^pi as an S x A table, by solving (I - gamma P_pi) Q = R_bar.
Matrix exact_q(const FiniteMDP& mdp, const TabularPolicy& policy);

/// max |Q - T_pi Q|.
double bellman_residual(const FiniteMDP& mdp, const TabularPolicy& policy, const Matrix& q);

/// argmax per row, ties to the lowest action id.
TabularPolicy greedy_policy(const Matrix& q);

/// Exact policy iteration from the all-zeros policy.
TabularPolicy policy_iteration(const FiniteMDP& mdp, int max_iterations = 1000);

/// Stationary distribution of a row-stochastic matrix (left eigenvector for
/// eigenvalue 1, normalized to sum 1).
Vector stationary_distribution(const Matrix& chain);

}  // namespace kpe
