#include "kpe/dictionary.hpp"

#include <algorithm>
#include <ostream>

#include "kpe/csv.hpp"
#include "kpe/errors.hpp"
#include "kpe/rank1.hpp"

namespace kpe {

bool is_novel(const Projection& proj, double tol1) { return proj.delta > tol1; }

Dictionary::Dictionary(KernelSpec spec, double relative_floor)
    : spec_(spec), relative_floor_(relative_floor) {}

Vector Dictionary::kernel_vector(const StateAction& x) const {
  return eval_kernel_vector(spec_, centers_, x);
}

Projection Dictionary::project(const StateAction& x) const {
  Projection p;
  p.k = kernel_vector(x);
  p.a = kmm_inv_ * p.k;
  p.delta = std::max(eval_kernel(spec_, x, x) - p.k.dot(p.a), 0.0);
  return p;
}

double Dictionary::growth_floor() const { return singularity_floor(kmm_inv_, relative_floor_); }

void Dictionary::seed(const StateAction& x, std::size_t step) {
  if (!centers_.empty()) throw ContractViolation("seed: dictionary already initialized");
  const double kxx = eval_kernel(spec_, x, x);
  centers_.push_back(x);
  steps_.push_back(step);
  kmm_inv_ = Matrix::Constant(1, 1, 1.0 / kxx);
}

void Dictionary::grow(const StateAction& x, const Projection& proj, std::size_t step) {
  if (centers_.empty()) throw EmptyDictionary();
  if (proj.a.size() != kmm_inv_.rows()) throw ContractViolation("grow: stale projection");
  if (!(proj.delta > growth_floor())) {
    throw SingularGrowth("dictionary growth with delta = " + std::to_string(proj.delta));
  }
  kmm_inv_ = bordered_inverse(kmm_inv_, proj.a, proj.a, proj.delta);
  centers_.push_back(x);
  steps_.push_back(step);
}

double Dictionary::inverse_drift() const {
  if (centers_.empty()) return 0.0;
  const Matrix gram = gram_matrix(spec_, centers_);
  return (kmm_inv_ * gram - Matrix::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();
}

void Dictionary::rebuild_inverse() {
  if (centers_.empty()) return;
  const Matrix gram = gram_matrix(spec_, centers_);
  kmm_inv_ = gram.ldlt().solve(Matrix::Identity(gram.rows(), gram.cols()));
}

void Dictionary::assign(std::vector<StateAction> centers, std::vector<std::size_t> steps) {
  if (centers.size() != steps.size()) throw ContractViolation("assign: size mismatch");
  centers_ = std::move(centers);
  steps_ = std::move(steps);
  if (centers_.empty()) {
    kmm_inv_.resize(0, 0);
  } else {
    rebuild_inverse();
  }
}

void write_dictionary_csv(std::ostream& out, const Dictionary& dict) {
  const Eigen::Index d = dict.empty() ? 0 : dict.centers().front().state.size();
  out << "index,insertion_step,action";
  for (Eigen::Index j = 0; j < d; ++j) out << ",s" << j;
  out << '\n';
  for (std::size_t i = 0; i < dict.size(); ++i) {
    const auto& c = dict.centers()[i];
    out << i << ',' << dict.insertion_steps()[i] << ',' << c.action;
    for (Eigen::Index j = 0; j < c.state.size(); ++j) out << ',' << format_double(c.state[j]);
    out << '\n';
  }
}

}  // namespace kpe
