#pragma once

#include <cstddef>
#include <string>

#include "kpe/dictionary.hpp"
#include "kpe/kernel.hpp"
#include "kpe/transition.hpp"

namespace kpe {

enum class Method { Brm, Lstd, Lspe };

std::string to_string(Method method);
Method method_from_string(const std::string& name);

/// LSPE step size: constant eta, or eta * c / (c + t) when harmonic_c > 0.
struct StepSize {
  double eta = 0.5;
  double harmonic_c = 0.0;

  double at(std::size_t t) const;
};

struct Hyper {
  double gamma = 0.99;
  double lambda = 0.5;
  double sigma2 = 0.1;
  StepSize step;
};

/// Kernel quantities of one transition w.r.t. the current dictionary.
struct StepVectors {
  Vector k_t;                // k_m(x_t)
  Vector k_next;             // k_m(x_{t+1})
  Vector h;                  // k_t - gamma_eff * k_next
  double k_star_t = 0.0;     // k(x_t, c) for the growth candidate c
  double k_star_next = 0.0;  // k(x_{t+1}, c)
  double h_star = 0.0;       // k_star_t - gamma_eff * k_star_next
};

/// Step vectors with the growth candidate c = x_{t+1}.
StepVectors make_step_vectors(const Dictionary& dict, const Transition& tr);

/// Copy of `sv` with the candidate terms recomputed for center c.
StepVectors with_candidate(const StepVectors& sv, const KernelSpec& spec, const Transition& tr,
                           const StateAction& c);

/// Quantities of a candidate growing step, computed once by
/// Evaluator::usefulness and consumed by Evaluator::grow_step.
struct GrowthTerms {
  Vector w_b;          // left border solve (w_b^(1) for LSTD)
  Vector w_b_row;      // right border solve (equals w_b except for LSTD)
  double delta_b = 0.0;
  double kappa = 0.0;  // weight of the new center
  double gain = 0.0;   // reduction of the regularized cost
  double z_star = 0.0; // new trace component (LSTD/LSPE)
};

/// Recursive least-squares policy evaluation over a growing kernel basis.
///
/// The state is sized to the dictionary it was initialized with; every
/// growing step must be mirrored by a Dictionary::grow of the same candidate.
/// A call to usefulness/grow_step is only valid right after normal_step on
/// the same transition.
class Evaluator {
 public:
  Evaluator(Method method, Hyper hyper, double relative_floor = 1e-12);

  /// P = sigma^2 K_mm, w = 0, z = 0, A = 0, b = 0, xi = 0.
  void initialize(const Dictionary& dict);

  /// Processes one transition on the fixed basis. Throws SingularUpdate and
  /// leaves the state untouched when the rank-1 denominator vanishes.
  void normal_step(const Transition& tr, const StepVectors& sv);

  /// Growth terms for adding the candidate of `sv`, whose projection is
  /// `proj`. Throws SingularGrowth when
  /// |delta_b| is below the floor.
  GrowthTerms usefulness(const Transition& tr, const StepVectors& sv,
                         const Projection& proj) const;

  /// Borders every matrix and vector with the new center.
  void grow_step(const Transition& tr, const StepVectors& sv, const Projection& proj,
                 const GrowthTerms& terms);

  double predict(const Dictionary& dict, const StateAction& x) const;

  Method method() const { return method_; }
  const Hyper& hyper() const { return hyper_; }
  bool initialized() const { return initialized_; }
  Eigen::Index dim() const { return w_.size(); }
  std::size_t steps() const { return t_; }
  const Vector& weights() const { return w_; }
  const Matrix& p_inv() const { return p_inv_; }
  const Vector& trace() const { return z_; }
  const Matrix& a_matrix() const { return a_; }
  const Vector& b_vector() const { return b_; }
  /// Regularized BRM cost J(w) of the data seen so far (0 for LSTD/LSPE).
  double xi() const { return xi_; }

 private:
  struct StepCache {
    bool valid = false;
    Vector gain_u;   // P_tm^-1 u  (u = h, z or k_t)
    Vector gain_v;   // P_tm^-T v  (v = h or k_t)
    double denom = 1.0;
    double rho = 0.0;  // r - h^T w_tm
    double decay = 0.0;
    double eta = 0.0;
    Vector z_prev;
    Vector w_prev;
  };

  Method method_;
  Hyper hyper_;
  double relative_floor_;
  bool initialized_ = false;
  std::size_t t_ = 0;
  Vector w_;
  Matrix p_inv_;
  double xi_ = 0.0;
  Vector z_;
  Matrix a_;
  Vector b_;
  StepCache cache_;
};

}  // namespace kpe
