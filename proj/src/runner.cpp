#include "redistmc/runner.hpp"

#include "redistmc/error.hpp"
#include "redistmc/parallel.hpp"

namespace redistmc {

RunResult run_ensemble(const DualGraph& graph, const Districting& initial, const RunConfig& config) {
    config.validate();
    if (initial.n_districts() != config.params.n_districts)
        throw Error(ErrorKind::InvalidArgument, "initial plan district count differs from the configuration");
    if (!is_valid(graph, initial)) throw Error(ErrorKind::InvalidPlan, "initial plan is not valid");
    const bool anneal = config.chain == "anneal";
    if (!within_pop_tolerance(graph, initial, anneal ? config.schedule.pop_tol_start : config.params.pop_tolerance))
        throw Error(ErrorKind::InvalidPlan, "initial plan is outside the starting population tolerance");

    RunResult result;
    result.ensemble.n_districts = config.params.n_districts;
    result.ensemble.provenance = {config.seed, config.chain, config.params,
                                  anneal ? std::optional<AnnealSchedule>(config.schedule) : std::nullopt,
                                  anneal ? total_steps(config.schedule) : config.n_sims};
    result.ensemble.plans.resize(config.n_plans);
    result.traces.resize(config.n_plans);
    result.acceptance.resize(config.n_plans);

    parallel_for(config.n_plans, config.n_chains, [&](std::size_t i) {
        SeededStream rng(derive_seed(config.seed, i));
        auto recorder = trace_recorder(graph, result.traces[i], config.statistic);
        ChainRun run = anneal ? run_annealed_sample(graph, initial, config.params, config.schedule, rng,
                                                    config.kind(), recorder)
                              : run_chain(graph, initial, config.params, config.n_sims, rng, config.kind(), recorder);
        result.acceptance[i] = acceptance_summary(run.trace);
        result.ensemble.plans[i] = score_plan(graph, run.plan);
    });
    return result;
}

}  // namespace redistmc
