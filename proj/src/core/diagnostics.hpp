#pragma once

#include <string>
#include <vector>

#include "solver.hpp"

namespace nlslab {

struct ObserverOptions {
  std::size_t stride = 1;          // steps between evaluations of the cheap norms
  bool pseudoconformal = false;    // adds V_pc (about eight transforms per evaluation)
  std::size_t pc_stride = 1;
};

// linf, l2 .. l6, h_half_dot, h1, mass, energy and optionally V_pc. The
// observers share a per-step cache, so one set must not be used by two
// concurrent runs.
std::vector<Observable> standard_observers(const ObserverOptions& options = {});

}  // namespace nlslab
