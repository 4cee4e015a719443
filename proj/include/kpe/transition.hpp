#pragma once

#include <cstddef>
#include <vector>

#include "kpe/kernel.hpp"

namespace kpe {

/// One observed step x -> x_next with reward r. gamma_eff is the discount
/// for ordinary steps and 0 for the episode-boundary step.
struct Transition {
  StateAction x;
  double reward = 0.0;
  StateAction x_next;
  double gamma_eff = 0.0;
};

/// A center added to the dictionary after `step` transitions were processed.
/// step == 0 is the seed; otherwise the center is x_next of transition step-1.
struct Insertion {
  std::size_t step = 0;
  StateAction center;
};

/// Everything the dense reference solvers need to rebuild the data matrices
/// of a recursive run.
struct TrajectoryLog {
  std::vector<Transition> transitions;
  std::vector<Insertion> insertions;
};

}  // namespace kpe
