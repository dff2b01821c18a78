#pragma once

#include <vector>

#include "redistmc/analysis.hpp"
#include "redistmc/diagnostics.hpp"
#include "redistmc/io.hpp"

namespace redistmc {

struct RunResult {
    Ensemble ensemble;
    std::vector<ChainTrace> traces;  // one per plan
    std::vector<AcceptanceSummary> acceptance;
};

// Draws config.n_plans plans, each from an independent chain started at
// `initial` with seed derive_seed(config.seed, plan index): n_sims accepted
// steps for flip / single-vertex chains, one full schedule for "anneal".
// Chains run on config.n_chains workers; output order is by plan index, so
// the result is identical for any worker count.
RunResult run_ensemble(const DualGraph& graph, const Districting& initial, const RunConfig& config);

}  // namespace redistmc
