#pragma once

// Recursive inverse updates: Sherman-Morrison for appending a row to a data
// matrix and the partitioned inverse for appending a column. Every routine
// is templated on the scalar type and accepts arbitrary Eigen expressions.

#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "kpe/errors.hpp"

namespace kpe {

template <typename Scalar>
using DenseMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using DenseVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using DenseRowVector = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

inline constexpr double kDefaultRelativeFloor = 1e-12;

/// Singularity floor for updates of `inv`: rel * (1 + |trace(inv)|).
template <typename Derived>
typename Derived::Scalar singularity_floor(const Eigen::MatrixBase<Derived>& inv,
                                           typename Derived::Scalar rel = kDefaultRelativeFloor) {
  using std::abs;
  return rel * (typename Derived::Scalar(1) + abs(inv.trace()));
}

/// Pre-update quantities of a rank-1 update of B^-1 by u v^T. Callers reuse
/// them (the RLS gain is inv_u / denom).
template <typename Scalar>
struct Rank1Terms {
  DenseVector<Scalar> inv_u;     // B^-1 u
  DenseRowVector<Scalar> v_inv;  // v^T B^-1
  Scalar denom;                  // 1 + v^T B^-1 u
};

/// Replaces `inv` = B^-1 by (B + u v^T)^-1 and returns the terms used.
/// Throws SingularUpdate, leaving `inv` untouched, when |1 + v^T B^-1 u| <= floor.
template <typename Scalar, typename DerivedU, typename DerivedV>
Rank1Terms<Scalar> sm_update_in_place(DenseMatrix<Scalar>& inv,
                                      const Eigen::MatrixBase<DerivedU>& u,
                                      const Eigen::MatrixBase<DerivedV>& v, Scalar floor) {
  using std::abs;
  if (inv.rows() != inv.cols() || u.size() != inv.rows() || v.size() != inv.rows()) {
    throw ContractViolation("sm_update: dimension mismatch");
  }
  Rank1Terms<Scalar> terms{inv * u, v.transpose() * inv, Scalar(0)};
  terms.denom = Scalar(1) + terms.v_inv.dot(u.derived().transpose());
  if (!(abs(terms.denom) > floor)) {
    throw SingularUpdate("sm_update: |1 + v^T B^-1 u| = " + std::to_string(double(abs(terms.denom))) +
                         " is below the singularity floor");
  }
  inv.noalias() -= (terms.inv_u / terms.denom) * terms.v_inv;
  return terms;
}

/// (B + u v^T)^-1 from B^-1. The symmetric Sherman-Morrison update is u == v.
template <typename DerivedB, typename DerivedU, typename DerivedV>
DenseMatrix<typename DerivedB::Scalar> sm_update(const Eigen::MatrixBase<DerivedB>& b_inv,
                                                 const Eigen::MatrixBase<DerivedU>& u,
                                                 const Eigen::MatrixBase<DerivedV>& v) {
  DenseMatrix<typename DerivedB::Scalar> inv = b_inv;
  sm_update_in_place(inv, u, v, singularity_floor(inv));
  return inv;
}

template <typename DerivedB, typename DerivedU, typename DerivedV>
DenseMatrix<typename DerivedB::Scalar> sm_update(const Eigen::MatrixBase<DerivedB>& b_inv,
                                                 const Eigen::MatrixBase<DerivedU>& u,
                                                 const Eigen::MatrixBase<DerivedV>& v,
                                                 typename DerivedB::Scalar floor) {
  DenseMatrix<typename DerivedB::Scalar> inv = b_inv;
  sm_update_in_place(inv, u, v, floor);
  return inv;
}

/// [[B^-1, 0], [0, 0]] + (1 / delta_b) [-left; 1] [-right; 1]^T.
///
/// `left` = B^-1 c and `right` = B^-T r (both column vectors) for the border
/// column c and row r^T; delta_b is the Schur complement d - r^T B^-1 c. The
/// symmetric case has left == right.
template <typename DerivedB, typename DerivedL, typename DerivedR>
DenseMatrix<typename DerivedB::Scalar> bordered_inverse(const Eigen::MatrixBase<DerivedB>& b_inv,
                                                        const Eigen::MatrixBase<DerivedL>& left,
                                                        const Eigen::MatrixBase<DerivedR>& right,
                                                        typename DerivedB::Scalar delta_b) {
  using Scalar = typename DerivedB::Scalar;
  const Eigen::Index m = b_inv.rows();
  DenseVector<Scalar> l(m + 1);
  l.head(m) = -left;
  l[m] = Scalar(1);
  DenseVector<Scalar> r(m + 1);
  r.head(m) = -right;
  r[m] = Scalar(1);
  DenseMatrix<Scalar> out(m + 1, m + 1);
  out.noalias() = (l / delta_b) * r.transpose();
  out.topLeftCorner(m, m) += b_inv;
  return out;
}

template <typename Scalar>
struct GrownInverse {
  DenseMatrix<Scalar> inv;
  Scalar delta_b;
};

/// Inverse of [[B, b], [b^T, b_star]] from B^-1. Throws SingularGrowth when
/// |b_star - b^T B^-1 b| <= floor.
template <typename DerivedB, typename DerivedV>
GrownInverse<typename DerivedB::Scalar> grow_inverse(const Eigen::MatrixBase<DerivedB>& b_inv,
                                                     const Eigen::MatrixBase<DerivedV>& b,
                                                     typename DerivedB::Scalar b_star,
                                                     typename DerivedB::Scalar floor) {
  using Scalar = typename DerivedB::Scalar;
  using std::abs;
  if (b_inv.rows() != b_inv.cols() || b.size() != b_inv.rows()) {
    throw ContractViolation("grow_inverse: dimension mismatch");
  }
  const DenseVector<Scalar> solved = b_inv * b;
  const Scalar delta_b = b_star - b.dot(solved);
  if (!(abs(delta_b) > floor)) {
    throw SingularGrowth("grow_inverse: Schur complement " + std::to_string(double(delta_b)) +
                         " is below the singularity floor");
  }
  return {bordered_inverse(b_inv, solved, solved, delta_b), delta_b};
}

template <typename DerivedB, typename DerivedV>
GrownInverse<typename DerivedB::Scalar> grow_inverse(const Eigen::MatrixBase<DerivedB>& b_inv,
                                                     const Eigen::MatrixBase<DerivedV>& b,
                                                     typename DerivedB::Scalar b_star) {
  return grow_inverse(b_inv, b, b_star, singularity_floor(b_inv));
}

/// Inverse of the non-symmetric bordered matrix [[B, col], [row^T, corner]].
template <typename DerivedB, typename DerivedC, typename DerivedR>
GrownInverse<typename DerivedB::Scalar> grow_inverse(const Eigen::MatrixBase<DerivedB>& b_inv,
                                                     const Eigen::MatrixBase<DerivedC>& col,
                                                     const Eigen::MatrixBase<DerivedR>& row,
                                                     typename DerivedB::Scalar corner,
                                                     typename DerivedB::Scalar floor) {
  using Scalar = typename DerivedB::Scalar;
  using std::abs;
  if (b_inv.rows() != b_inv.cols() || col.size() != b_inv.rows() || row.size() != b_inv.rows()) {
    throw ContractViolation("grow_inverse: dimension mismatch");
  }
  const DenseVector<Scalar> left = b_inv * col;
  const DenseRowVector<Scalar> right = row.transpose() * b_inv;
  const Scalar delta_b = corner - right.dot(col.transpose());
  if (!(abs(delta_b) > floor)) {
    throw SingularGrowth("grow_inverse: Schur complement " + std::to_string(double(delta_b)) +
                         " is below the singularity floor");
  }
  return {bordered_inverse(b_inv, left, right.transpose(), delta_b), delta_b};
}

}  // namespace kpe
