#include "kpe/learner.hpp"

#include <string>

#include "kpe/errors.hpp"

namespace kpe {

double ValueNetwork::predict(const StateAction& x) const {
  if (dictionary.empty()) throw EmptyDictionary();
  return dictionary.kernel_vector(x).dot(weights);
}

OnlineLearner::OnlineLearner(LearnerOptions options)
    : options_(options),
      dict_(options.kernel, options.relative_floor),
      eval_(options.method, options.hyper, options.relative_floor) {
  if (options_.tol1 < 0.0 || options_.tol2 < 0.0) {
    throw ContractViolation("thresholds must be non-negative");
  }
}

void OnlineLearner::seed_dictionary(std::span<const StateAction> centers) {
  if (!dict_.empty()) throw ContractViolation("seed_dictionary: dictionary already initialized");
  for (const auto& c : centers) {
    if (dict_.empty()) {
      dict_.seed(c, 0);
      continue;
    }
    const Projection proj = dict_.project(c);
    dict_.grow(c, proj, 0);
  }
  if (options_.record_log) {
    for (const auto& c : dict_.centers()) log_.insertions.push_back({0, c});
  }
  eval_.initialize(dict_);
}

void OnlineLearner::restart_evaluation() {
  if (!dict_.empty()) eval_.initialize(dict_);
  log_ = {};
  if (options_.record_log) {
    for (const auto& c : dict_.centers()) log_.insertions.push_back({0, c});
  }
}

void OnlineLearner::observe(const Transition& tr) {
  if (dict_.empty()) {
    dict_.seed(tr.x, 0);
    eval_.initialize(dict_);
    if (options_.record_log) log_.insertions.push_back({0, tr.x});
  }
  const StepVectors sv = make_step_vectors(dict_, tr);
  try {
    eval_.normal_step(tr, sv);
  } catch (const SingularUpdate&) {
    ++stats_.skipped_updates;
    return;
  }
  ++stats_.processed;
  if (options_.record_log) log_.transitions.push_back(tr);
  maybe_grow(tr, sv);
  check_drift();
}

void OnlineLearner::maybe_grow(const Transition& tr, const StepVectors& sv) {
  const bool seeding = dict_.size() < 2;
  if (!options_.growth && !seeding) return;
  if (!seeding && options_.max_dictionary > 0 && dict_.size() >= options_.max_dictionary) return;
  if (try_grow(tr, sv, tr.x_next)) return;
  if (options_.screen_current && !(tr.x == tr.x_next)) {
    try_grow(tr, with_candidate(sv, dict_.kernel(), tr, tr.x), tr.x);
  }
}

bool OnlineLearner::try_grow(const Transition& tr, const StepVectors& sv, const StateAction& candidate) {
  const bool seeding = dict_.size() < 2;
  const Projection proj = dict_.project(candidate);
  if (!(proj.delta > dict_.growth_floor())) return false;
  if (!seeding && !is_novel(proj, options_.tol1)) return false;
  ++stats_.novel_candidates;

  GrowthTerms terms;
  try {
    terms = eval_.usefulness(tr, sv, proj);
  } catch (const SingularGrowth&) {
    ++stats_.singular_growths;
    return false;
  }
  if (!seeding && options_.tol2 > 0.0 && !(terms.gain > options_.tol2)) {
    ++stats_.rejected_by_usefulness;
    return false;
  }
  const std::size_t step = stats_.processed;
  dict_.grow(candidate, proj, step);
  eval_.grow_step(tr, sv, proj, terms);
  ++stats_.growths;
  if (options_.record_log) log_.insertions.push_back({step, candidate});
  return true;
}

void OnlineLearner::check_drift() {
  const std::size_t n = options_.rebuild_interval;
  if (n == 0 || stats_.processed % n != 0) return;
  const double drift = dict_.inverse_drift();
  if (drift > options_.max_drift) {
    throw NumericalDrift("K_mm^-1 drifted by " + std::to_string(drift) + " after " +
                         std::to_string(stats_.processed) + " steps");
  }
  dict_.rebuild_inverse();
}

double OnlineLearner::predict(const StateAction& x) const { return eval_.predict(dict_, x); }

ValueNetwork OnlineLearner::network() const { return ValueNetwork{dict_, eval_.weights()}; }

}  // namespace kpe
