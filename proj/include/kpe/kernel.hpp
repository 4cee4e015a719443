#pragma once

#include <span>
#include <string>

#include <Eigen/Dense>

namespace kpe {

using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;
using Matrix = Eigen::MatrixXd;

/// A continuous state paired with a discrete action id.
struct StateAction {
  Vector state;
  int action = 0;

  friend bool operator==(const StateAction& lhs, const StateAction& rhs) {
    return lhs.action == rhs.action && lhs.state.size() == rhs.state.size() &&
           lhs.state == rhs.state;
  }
};

enum class KernelKind {
  // exp(-h |s - s'|^2) * [a == a']
  GaussianRbfProduct,
};

std::string to_string(KernelKind kind);
KernelKind kernel_kind_from_string(const std::string& name);

struct KernelSpec {
  /// Inverse length-scale h; the state kernel is exp(-h |s - s'|^2).
  double h = 5.0;
  KernelKind kind = KernelKind::GaussianRbfProduct;

  static KernelSpec from_lengthscale(double lengthscale);
};

/// Throws ContractViolation on state dimension mismatch or h <= 0.
double eval_kernel(const KernelSpec& spec, const StateAction& x, const StateAction& y);

/// Column of kernel values k(centers[i], x). Throws EmptyDictionary if
/// `centers` is empty.
Vector eval_kernel_vector(const KernelSpec& spec, std::span<const StateAction> centers,
                          const StateAction& x);

/// Dense Gram matrix [k(points[i], points[j])].
Matrix gram_matrix(const KernelSpec& spec, std::span<const StateAction> points);

/// Rectangular cross-kernel matrix [k(rows[i], cols[j])].
Matrix cross_kernel_matrix(const KernelSpec& spec, std::span<const StateAction> rows,
                           std::span<const StateAction> cols);

}  // namespace kpe
