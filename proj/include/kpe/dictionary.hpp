#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "kpe/kernel.hpp"

namespace kpe {

/// Result of projecting a candidate onto the span of the dictionary in the
/// kernel feature space.
struct Projection {
  Vector k;            // k_m(x)
  Vector a;            // K_mm^-1 k_m(x)
  double delta = 0.0;  // k(x, x) - k_m(x)^T a, clamped at zero
};

/// True iff delta > tol1 (strict).
bool is_novel(const Projection& proj, double tol1);

/// The ordered set of basis centers together with the inverse of their Gram
/// matrix, maintained by partitioned-inverse updates.
class Dictionary {
 public:
  explicit Dictionary(KernelSpec spec = {}, double relative_floor = 1e-12);

  const KernelSpec& kernel() const { return spec_; }
  std::size_t size() const { return centers_.size(); }
  bool empty() const { return centers_.empty(); }
  const std::vector<StateAction>& centers() const { return centers_; }
  const std::vector<std::size_t>& insertion_steps() const { return steps_; }
  const Matrix& kmm_inv() const { return kmm_inv_; }

  /// k_m(x). Throws EmptyDictionary.
  Vector kernel_vector(const StateAction& x) const;

  /// (a, delta) for candidate x. Throws EmptyDictionary.
  Projection project(const StateAction& x) const;

  /// Singularity floor applied to delta before growing.
  double growth_floor() const;

  /// Inserts the first center. Throws ContractViolation if not empty.
  void seed(const StateAction& x, std::size_t step = 0);

  /// Appends x, whose projection is `proj`, and borders K_mm^-1. Throws
  /// SingularGrowth (dictionary unchanged) when proj.delta <= growth_floor().
  void grow(const StateAction& x, const Projection& proj, std::size_t step);

  /// Max-abs deviation of kmm_inv() * K_mm from the identity.
  double inverse_drift() const;

  /// Recomputes K_mm^-1 from the Gram matrix of the centers.
  void rebuild_inverse();

  /// Rebuilds the dictionary wholesale (used when restoring snapshots).
  void assign(std::vector<StateAction> centers, std::vector<std::size_t> steps);

 private:
  KernelSpec spec_;
  double relative_floor_;
  std::vector<StateAction> centers_;
  std::vector<std::size_t> steps_;
  Matrix kmm_inv_;
};

/// CSV with columns index,insertion_step,action,s0,...,s{d-1}.
void write_dictionary_csv(std::ostream& out, const Dictionary& dict);

}  // namespace kpe
