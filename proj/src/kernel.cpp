#include "kpe/kernel.hpp"

#include <cmath>

#include "kpe/errors.hpp"

namespace kpe {

std::string to_string(KernelKind kind) {
  switch (kind) {
    case KernelKind::GaussianRbfProduct:
      return "gaussian-rbf-product";
  }
  return "unknown";
}

KernelKind kernel_kind_from_string(const std::string& name) {
  if (name == "gaussian-rbf-product") return KernelKind::GaussianRbfProduct;
  throw ContractViolation("unknown kernel kind '" + name + "'");
}

KernelSpec KernelSpec::from_lengthscale(double lengthscale) {
  if (!(lengthscale > 0.0)) throw ContractViolation("lengthscale must be positive");
  return KernelSpec{1.0 / lengthscale, KernelKind::GaussianRbfProduct};
}

double eval_kernel(const KernelSpec& spec, const StateAction& x, const StateAction& y) {
  if (x.state.size() != y.state.size()) {
    throw ContractViolation("state dimension mismatch: " + std::to_string(x.state.size()) +
                            " vs " + std::to_string(y.state.size()));
  }
  if (!(spec.h > 0.0)) throw ContractViolation("kernel inverse length-scale must be positive");
  if (x.action != y.action) return 0.0;
  double sq = 0.0;
  for (Eigen::Index i = 0; i < x.state.size(); ++i) {
    const double d = x.state[i] - y.state[i];
    sq += d * d;
  }
  return std::exp(-spec.h * sq);
}

Vector eval_kernel_vector(const KernelSpec& spec, std::span<const StateAction> centers,
                          const StateAction& x) {
  if (centers.empty()) throw EmptyDictionary();
  Vector k(static_cast<Eigen::Index>(centers.size()));
  for (std::size_t i = 0; i < centers.size(); ++i) {
    k[static_cast<Eigen::Index>(i)] = eval_kernel(spec, centers[i], x);
  }
  return k;
}

Matrix gram_matrix(const KernelSpec& spec, std::span<const StateAction> points) {
  const auto n = static_cast<Eigen::Index>(points.size());
  Matrix g(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    g(i, i) = eval_kernel(spec, points[i], points[i]);
    for (Eigen::Index j = 0; j < i; ++j) {
      g(i, j) = g(j, i) = eval_kernel(spec, points[i], points[j]);
    }
  }
  return g;
}

Matrix cross_kernel_matrix(const KernelSpec& spec, std::span<const StateAction> rows,
                           std::span<const StateAction> cols) {
  Matrix g(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < cols.size(); ++j) {
      g(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          eval_kernel(spec, rows[i], cols[j]);
    }
  }
  return g;
}

}  // namespace kpe
