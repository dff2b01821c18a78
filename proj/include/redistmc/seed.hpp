#pragma once

#include <cstdint>

#include "redistmc/graph.hpp"
#include "redistmc/plan.hpp"
#include "redistmc/rng.hpp"

namespace redistmc {

// Builds a valid plan within `tol` by balanced region growing from n random
// seed vertices, then repairs population with single-vertex moves under a
// rising population weight. Throws SeedFailure when n > |V| or every retry
// fails.
Districting seed_plan(const DualGraph& graph, int n, double tol, RandomStream& rng, int max_retries = 20);

}  // namespace redistmc
