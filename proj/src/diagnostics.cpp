#include "redistmc/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "redistmc/analysis.hpp"
#include "redistmc/error.hpp"
#include "redistmc/parallel.hpp"

namespace redistmc {

std::string to_string(TraceStatistic s) {
    switch (s) {
        case TraceStatistic::cut_edges: return "cut_edges";
        case TraceStatistic::pop_equality: return "pop_equality";
        case TraceStatistic::dem_seats: return "dem_seats";
    }
    return "cut_edges";
}

TraceStatistic trace_statistic_from_string(const std::string& s) {
    if (s == "cut_edges") return TraceStatistic::cut_edges;
    if (s == "pop_equality") return TraceStatistic::pop_equality;
    if (s == "dem_seats") return TraceStatistic::dem_seats;
    throw Error(ErrorKind::InvalidArgument, "unknown trace statistic: " + s);
}

double trace_value(const DualGraph& graph, const Districting& plan, TraceStatistic statistic) {
    switch (statistic) {
        case TraceStatistic::cut_edges: return static_cast<double>(plan.cut_edge_count());
        case TraceStatistic::pop_equality: return pop_equality(graph, plan);
        case TraceStatistic::dem_seats: return seats_won(graph, plan).dem_seats;
    }
    return 0.0;
}

StepObserver trace_recorder(const DualGraph& graph, ChainTrace& trace, TraceStatistic statistic) {
    return [&graph, &trace, statistic](const Districting& plan, const StepRecord& rec) {
        trace.series.push_back(trace_value(graph, plan, statistic));
        trace.outcomes.push_back(rec.accepted ? RejectReason::none : rec.rejected_reason);
    };
}

double gelman_rubin(std::span<const std::vector<double>> chains, double discard_fraction) {
    if (chains.size() < 2) throw Error(ErrorKind::InsufficientData, "Gelman-Rubin needs at least two chains");
    if (!(discard_fraction >= 0.0 && discard_fraction < 1.0))
        throw Error(ErrorKind::InvalidArgument, "discard_fraction must lie in [0, 1)");
    std::size_t len = chains.front().size();
    for (const auto& c : chains) len = std::min(len, c.size());
    const auto skip = static_cast<std::size_t>(std::floor(discard_fraction * static_cast<double>(len)));
    const std::size_t n = len - skip;
    if (n < 2) throw Error(ErrorKind::InsufficientData, "each chain needs at least two retained values");

    const auto m = static_cast<double>(chains.size());
    const auto nd = static_cast<double>(n);
    std::vector<double> means, variances;
    for (const auto& c : chains) {
        double mean = 0.0;
        for (std::size_t i = skip; i < len; ++i) mean += c[i];
        mean /= nd;
        double ss = 0.0;
        for (std::size_t i = skip; i < len; ++i) ss += (c[i] - mean) * (c[i] - mean);
        means.push_back(mean);
        variances.push_back(ss / (nd - 1.0));
    }
    double grand = 0.0;
    for (double x : means) grand += x;
    grand /= m;
    double between = 0.0;
    for (double x : means) between += (x - grand) * (x - grand);
    between *= nd / (m - 1.0);
    double within = 0.0;
    for (double s : variances) within += s;
    within /= m;
    if (!(within > 0.0)) throw Error(ErrorKind::ZeroWithinVariance, "all chains are constant after burn-in");

    const double pooled = (nd - 1.0) / nd * within + between / nd;
    return std::sqrt(pooled / within);
}

double gelman_rubin(std::span<const ChainTrace> traces, double discard_fraction) {
    std::vector<std::vector<double>> chains;
    chains.reserve(traces.size());
    for (const auto& t : traces) chains.push_back(t.series);
    return gelman_rubin(std::span<const std::vector<double>>(chains), discard_fraction);
}

MinStepsResult min_steps_search(const DualGraph& graph, const Districting& initial_plan,
                                const ChainParams& params, std::size_t n_chains, double threshold,
                                std::span<const std::uint64_t> step_grid, std::uint64_t seed,
                                const SearchOptions& options) {
    if (n_chains < 2) throw Error(ErrorKind::InvalidArgument, "min_steps_search needs at least two chains");
    if (step_grid.empty()) throw Error(ErrorKind::InvalidArgument, "step grid is empty");
    if (!std::is_sorted(step_grid.begin(), step_grid.end()))
        throw Error(ErrorKind::InvalidArgument, "step grid must be ascending");
    if (initial_plan.n_districts() != params.n_districts)
        throw Error(ErrorKind::InvalidArgument, "initial plan district count differs from the parameters");

    MinStepsResult result{0, {}};
    for (std::size_t g = 0; g < step_grid.size(); ++g) {
        std::vector<ChainTrace> traces(n_chains);
        parallel_for(n_chains, options.workers, [&](std::size_t c) {
            SeededStream rng(derive_seed(seed, g * n_chains + c));
            run_chain(graph, initial_plan, params, step_grid[g], rng, options.kind,
                      trace_recorder(graph, traces[c], options.statistic));
        });
        double rhat;
        try {
            rhat = gelman_rubin(std::span<const ChainTrace>(traces), options.discard_fraction);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::ZeroWithinVariance && e.kind() != ErrorKind::InsufficientData) throw;
            rhat = std::numeric_limits<double>::infinity();
        }
        result.profile.emplace_back(static_cast<std::size_t>(step_grid[g]), rhat);
        if (rhat < threshold) {
            result.steps = step_grid[g];
            return result;
        }
    }
    throw NotConvergedError("no step count in the grid reached R-hat below threshold", result.profile);
}

char outcome_code(RejectReason r) {
    switch (r) {
        case RejectReason::none: return 'a';
        case RejectReason::invalid_contiguity: return 'c';
        case RejectReason::tolerance: return 't';
        case RejectReason::metropolis: return 'm';
    }
    return 'a';
}

RejectReason outcome_from_code(char c) {
    switch (c) {
        case 'a': return RejectReason::none;
        case 'c': return RejectReason::invalid_contiguity;
        case 't': return RejectReason::tolerance;
        case 'm': return RejectReason::metropolis;
        default: throw Error(ErrorKind::ParseError, std::string("unknown step outcome code '") + c + "'");
    }
}

namespace {

void count(AcceptanceSummary& s, RejectReason r) {
    ++s.proposals;
    switch (r) {
        case RejectReason::none: ++s.accepted; break;
        case RejectReason::invalid_contiguity: ++s.invalid_contiguity; break;
        case RejectReason::tolerance: ++s.tolerance; break;
        case RejectReason::metropolis: ++s.metropolis; break;
    }
}

}  // namespace

AcceptanceSummary acceptance_summary(std::span<const StepRecord> trace) {
    AcceptanceSummary s;
    for (const auto& rec : trace) count(s, rec.accepted ? RejectReason::none : rec.rejected_reason);
    s.rate = s.proposals == 0 ? 0.0 : static_cast<double>(s.accepted) / static_cast<double>(s.proposals);
    return s;
}

AcceptanceSummary acceptance_summary(const ChainTrace& trace) {
    AcceptanceSummary s;
    for (RejectReason r : trace.outcomes) count(s, r);
    s.rate = s.proposals == 0 ? 0.0 : static_cast<double>(s.accepted) / static_cast<double>(s.proposals);
    return s;
}

}  // namespace redistmc
