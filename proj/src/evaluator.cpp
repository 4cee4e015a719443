#include "kpe/evaluator.hpp"

#include <cmath>

#include "kpe/errors.hpp"
#include "kpe/rank1.hpp"

namespace kpe {

std::string to_string(Method method) {
  switch (method) {
    case Method::Brm:
      return "brm";
    case Method::Lstd:
      return "lstd";
    case Method::Lspe:
      return "lspe";
  }
  return "unknown";
}

Method method_from_string(const std::string& name) {
  if (name == "brm") return Method::Brm;
  if (name == "lstd") return Method::Lstd;
  if (name == "lspe") return Method::Lspe;
  throw ContractViolation("unknown method '" + name + "' (expected brm, lstd or lspe)");
}

double StepSize::at(std::size_t t) const {
  if (harmonic_c > 0.0) return eta * harmonic_c / (harmonic_c + static_cast<double>(t));
  return eta;
}

StepVectors make_step_vectors(const Dictionary& dict, const Transition& tr) {
  const KernelSpec& spec = dict.kernel();
  StepVectors sv;
  sv.k_t = dict.kernel_vector(tr.x);
  sv.k_next = dict.kernel_vector(tr.x_next);
  sv.h = sv.k_t - tr.gamma_eff * sv.k_next;
  sv.k_star_t = eval_kernel(spec, tr.x, tr.x_next);
  sv.k_star_next = eval_kernel(spec, tr.x_next, tr.x_next);
  sv.h_star = sv.k_star_t - tr.gamma_eff * sv.k_star_next;
  return sv;
}

StepVectors with_candidate(const StepVectors& sv, const KernelSpec& spec, const Transition& tr,
                           const StateAction& c) {
  StepVectors out = sv;
  out.k_star_t = eval_kernel(spec, tr.x, c);
  out.k_star_next = eval_kernel(spec, tr.x_next, c);
  out.h_star = out.k_star_t - tr.gamma_eff * out.k_star_next;
  return out;
}

namespace {

Vector append(const Vector& v, double last) {
  Vector out(v.size() + 1);
  out.head(v.size()) = v;
  out[v.size()] = last;
  return out;
}

}  // namespace

Evaluator::Evaluator(Method method, Hyper hyper, double relative_floor)
    : method_(method), hyper_(hyper), relative_floor_(relative_floor) {
  if (!(hyper_.sigma2 > 0.0)) throw ContractViolation("sigma2 must be positive");
  if (hyper_.gamma < 0.0 || hyper_.gamma > 1.0) throw ContractViolation("gamma outside [0, 1]");
  if (hyper_.lambda < 0.0 || hyper_.lambda > 1.0) throw ContractViolation("lambda outside [0, 1]");
}

void Evaluator::initialize(const Dictionary& dict) {
  if (dict.empty()) throw EmptyDictionary();
  const Eigen::Index m = static_cast<Eigen::Index>(dict.size());
  p_inv_ = dict.kmm_inv() / hyper_.sigma2;
  w_ = Vector::Zero(m);
  z_ = Vector::Zero(m);
  xi_ = 0.0;
  t_ = 0;
  if (method_ == Method::Lspe) {
    a_ = Matrix::Zero(m, m);
    b_ = Vector::Zero(m);
  } else {
    a_.resize(0, 0);
    b_.resize(0);
  }
  cache_ = StepCache{};
  initialized_ = true;
}

void Evaluator::normal_step(const Transition& tr, const StepVectors& sv) {
  if (!initialized_) throw ContractViolation("normal_step on uninitialized evaluator");
  if (sv.k_t.size() != w_.size()) throw ContractViolation("normal_step: state not sized to dictionary");
  const double floor = singularity_floor(p_inv_, relative_floor_);
  const double r = tr.reward;
  StepCache cache;
  cache.valid = true;
  cache.decay = hyper_.lambda * tr.gamma_eff;
  cache.rho = r - sv.h.dot(w_);
  cache.w_prev = w_;

  switch (method_) {
    case Method::Brm: {
      const auto terms = sm_update_in_place(p_inv_, sv.h, sv.h, floor);
      cache.gain_u = terms.inv_u;
      cache.gain_v = terms.inv_u;
      cache.denom = terms.denom;
      w_ += (cache.rho / terms.denom) * terms.inv_u;
      xi_ += cache.rho * cache.rho / terms.denom;
      break;
    }
    case Method::Lstd: {
      Vector z = cache.decay * z_ + sv.k_t;
      const auto terms = sm_update_in_place(p_inv_, z, sv.h, floor);
      cache.gain_u = terms.inv_u;
      cache.gain_v = terms.v_inv.transpose();
      cache.denom = terms.denom;
      cache.z_prev = std::move(z_);
      z_ = std::move(z);
      w_ += (cache.rho / terms.denom) * terms.inv_u;
      break;
    }
    case Method::Lspe: {
      const auto terms = sm_update_in_place(p_inv_, sv.k_t, sv.k_t, floor);
      cache.gain_u = terms.inv_u;
      cache.gain_v = terms.inv_u;
      cache.denom = terms.denom;
      cache.eta = hyper_.step.at(t_);
      cache.z_prev = z_;
      z_ = cache.decay * z_ + sv.k_t;
      a_.noalias() += z_ * sv.h.transpose();
      b_ += r * z_;
      w_ += cache.eta * (p_inv_ * (b_ - a_ * w_));
      break;
    }
  }
  ++t_;
  cache_ = std::move(cache);
}

GrowthTerms Evaluator::usefulness(const Transition& tr, const StepVectors& sv,
                                  const Projection& proj) const {
  if (!cache_.valid) throw ContractViolation("usefulness requires a preceding normal_step");
  if (proj.a.size() != w_.size()) throw ContractViolation("usefulness: stale projection");
  const double floor = singularity_floor(p_inv_, relative_floor_);
  const double sigma2 = hyper_.sigma2;
  const Vector& a = proj.a;
  const double denom = cache_.denom;
  GrowthTerms g;

  switch (method_) {
    case Method::Brm: {
      const double delta_h = sv.h_star - sv.h.dot(a);
      g.w_b = a + (delta_h / denom) * cache_.gain_u;
      g.w_b_row = g.w_b;
      g.delta_b = delta_h * delta_h / denom + sigma2 * proj.delta;
      if (!(std::abs(g.delta_b) > floor)) throw SingularGrowth("BRM growth: delta_b below floor");
      g.kappa = delta_h * cache_.rho / (g.delta_b * denom);
      g.gain = g.kappa * g.kappa * g.delta_b;
      break;
    }
    case Method::Lstd: {
      g.z_star = cache_.decay * cache_.z_prev.dot(a) + sv.k_star_t;
      const double delta1 = sv.h_star - a.dot(sv.h);
      const double delta2 = g.z_star - a.dot(z_);
      g.w_b = a + (delta1 / denom) * cache_.gain_u;
      g.w_b_row = a + (delta2 / denom) * cache_.gain_v;
      g.delta_b = delta1 * delta2 / denom + sigma2 * proj.delta;
      if (!(std::abs(g.delta_b) > floor)) throw SingularGrowth("LSTD growth: delta_b below floor");
      g.kappa = delta2 * cache_.rho / (g.delta_b * denom);
      // BRM-style cost reduction evaluated on the LSTD border terms.
      g.gain = g.kappa * g.kappa * g.delta_b;
      break;
    }
    case Method::Lspe: {
      g.z_star = cache_.decay * cache_.z_prev.dot(a) + sv.k_star_t;
      const double delta_k = sv.k_star_t - sv.k_t.dot(a);
      g.w_b = a + (delta_k / denom) * cache_.gain_u;
      g.w_b_row = g.w_b;
      g.delta_b = delta_k * delta_k / denom + sigma2 * proj.delta;
      if (!(std::abs(g.delta_b) > floor)) throw SingularGrowth("LSPE growth: delta_b below floor");
      const Vector& w_prev = cache_.w_prev;
      const double r = tr.reward;
      // Residual of the previous iterate before and after this step's row.
      const Vector d = b_ - a_ * w_prev;
      const Vector d_prev = d - z_ * (r - sv.h.dot(w_prev));
      const double c = a.dot(d_prev) + g.z_star * (r - sv.h.dot(w_prev));
      const double e = c - g.w_b.dot(d);
      g.kappa = cache_.eta * e / g.delta_b;
      g.gain = e * e / g.delta_b;
      break;
    }
  }
  return g;
}

void Evaluator::grow_step(const Transition& tr, const StepVectors& sv, const Projection& proj,
                          const GrowthTerms& terms) {
  if (!cache_.valid) throw ContractViolation("grow_step requires a preceding normal_step");
  if (proj.a.size() != w_.size()) throw ContractViolation("grow_step: stale projection");
  const Eigen::Index m = w_.size();
  const Vector& a = proj.a;

  if (method_ == Method::Lspe) {
    // Rows before this step, times a: A_tm a and a^T A_tm.
    const Vector a_prev_a = a_ * a - z_ * sv.h.dot(a);
    const RowVector at_a_prev = a.transpose() * a_ - a.dot(z_) * sv.h.transpose();
    const Vector b_prev = b_ - tr.reward * z_;
    Matrix grown(m + 1, m + 1);
    grown.topLeftCorner(m, m) = a_;
    grown.col(m).head(m) = a_prev_a + z_ * sv.h_star;
    grown.row(m).head(m) = at_a_prev + terms.z_star * sv.h.transpose();
    grown(m, m) = a.dot(a_prev_a) + terms.z_star * sv.h_star;
    a_ = std::move(grown);
    b_ = append(b_, a.dot(b_prev) + terms.z_star * tr.reward);
  }
  if (method_ != Method::Brm) z_ = append(z_, terms.z_star);

  p_inv_ = bordered_inverse(p_inv_, terms.w_b, terms.w_b_row, terms.delta_b);
  Vector border = append(-terms.w_b, 1.0);
  w_ = append(w_, 0.0) + terms.kappa * border;
  if (method_ == Method::Brm) xi_ -= terms.gain;

  // Cached vectors now refer to the old basis.
  cache_.valid = false;
}

double Evaluator::predict(const Dictionary& dict, const StateAction& x) const {
  if (dict.empty()) throw EmptyDictionary();
  if (static_cast<Eigen::Index>(dict.size()) != w_.size()) {
    throw ContractViolation("predict: weights not sized to dictionary");
  }
  return dict.kernel_vector(x).dot(w_);
}

}  // namespace kpe
