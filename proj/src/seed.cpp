#include "redistmc/seed.hpp"

#include <algorithm>
#include <limits>

#include "redistmc/error.hpp"
#include "redistmc/flip_chain.hpp"
#include "redistmc/metrics.hpp"

namespace redistmc {

namespace {

constexpr District unassigned = -1;

std::vector<District> grow_regions(const DualGraph& graph, int n, RandomStream& rng) {
    const std::size_t nv = graph.size();
    std::vector<District> label(nv, unassigned);
    std::vector<std::int64_t> pop(static_cast<std::size_t>(n), 0);
    std::vector<std::vector<UnitId>> frontier(static_cast<std::size_t>(n));

    std::vector<UnitId> pool(nv);
    for (UnitId v = 0; v < nv; ++v) pool[v] = v;
    for (int d = 0; d < n; ++d) {
        const std::size_t pick = d + rng.below(nv - static_cast<std::size_t>(d));
        std::swap(pool[static_cast<std::size_t>(d)], pool[pick]);
        const UnitId s = pool[static_cast<std::size_t>(d)];
        label[s] = d;
        pop[static_cast<std::size_t>(d)] += graph.population(s);
        for (UnitId u : graph.neighbors(s)) frontier[static_cast<std::size_t>(d)].push_back(u);
    }

    std::size_t remaining = nv - static_cast<std::size_t>(n);
    while (remaining > 0) {
        // region with the smallest population that can still grow
        int best = -1;
        for (int d = 0; d < n; ++d) {
            auto& f = frontier[static_cast<std::size_t>(d)];
            std::erase_if(f, [&](UnitId u) { return label[u] != unassigned; });
            if (f.empty()) continue;
            if (best < 0 || pop[static_cast<std::size_t>(d)] < pop[static_cast<std::size_t>(best)]) best = d;
        }
        if (best < 0) break;  // unreachable on a connected graph
        auto& f = frontier[static_cast<std::size_t>(best)];
        const std::size_t i = rng.below(f.size());
        const UnitId v = f[i];
        label[v] = best;
        pop[static_cast<std::size_t>(best)] += graph.population(v);
        --remaining;
        for (UnitId u : graph.neighbors(v))
            if (label[u] == unassigned) f.push_back(u);
    }
    return label;
}

}  // namespace

Districting seed_plan(const DualGraph& graph, int n, double tol, RandomStream& rng, int max_retries) {
    if (n < 1) throw Error(ErrorKind::InvalidArgument, "number of districts must be at least 1");
    if (static_cast<std::size_t>(n) > graph.size())
        throw Error(ErrorKind::SeedFailure, "more districts than units");
    if (n == 1) return Districting(graph, std::vector<District>(graph.size(), 0), 1);

    const double avg_unit_pop =
        std::max(1.0, static_cast<double>(graph.total_population()) / static_cast<double>(graph.size()));
    const std::uint64_t repair_steps = 400 * static_cast<std::uint64_t>(graph.size()) + 10'000;

    for (int attempt = 0; attempt < max_retries; ++attempt) {
        Districting plan(graph, grow_regions(graph, n, rng), n);
        if (within_pop_tolerance(graph, plan, tol)) return plan;

        ChainParams params;
        params.n_districts = n;
        params.hastings_correction = false;
        Sampler sampler(graph, params, ChainKind::single_vertex);
        for (std::uint64_t t = 0; t < repair_steps; ++t) {
            // Moving one average unit the wrong way ends up penalised by e^-8.
            const double beta = 8.0 * static_cast<double>(t + 1) / static_cast<double>(repair_steps) / avg_unit_pop;
            sampler.step(plan, Constraints{std::numeric_limits<double>::infinity(), beta, 0.0}, rng);
            if (within_pop_tolerance(graph, plan, tol)) return plan;
        }
    }
    throw Error(ErrorKind::SeedFailure,
                "could not build a plan within tolerance after " + std::to_string(max_retries) + " attempts");
}

}  // namespace redistmc
