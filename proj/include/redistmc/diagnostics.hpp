#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "redistmc/flip_chain.hpp"

namespace redistmc {

enum class TraceStatistic { cut_edges, pop_equality, dem_seats };

std::string to_string(TraceStatistic s);
TraceStatistic trace_statistic_from_string(const std::string& s);

// Scalar summary of the held plan after every proposal, with each
// proposal's outcome (RejectReason::none when accepted).
struct ChainTrace {
    std::vector<double> series;
    std::vector<RejectReason> outcomes;
};

double trace_value(const DualGraph& graph, const Districting& plan, TraceStatistic statistic);

// Observer that appends to `trace` after every step.
StepObserver trace_recorder(const DualGraph& graph, ChainTrace& trace,
                            TraceStatistic statistic = TraceStatistic::cut_edges);

// Potential scale reduction factor (Gelman & Rubin 1992). Series are
// truncated to the shortest one, then the first floor(discard * n) values
// of each are dropped. Throws InsufficientData with fewer than two chains
// or fewer than two retained values; ZeroWithinVariance when W = 0.
double gelman_rubin(std::span<const std::vector<double>> chains, double discard_fraction = 0.5);
double gelman_rubin(std::span<const ChainTrace> traces, double discard_fraction = 0.5);

struct MinStepsResult {
    std::uint64_t steps;
    std::vector<std::pair<std::size_t, double>> profile;  // (grid value, R-hat)
};

struct SearchOptions {
    ChainKind kind = ChainKind::flip;
    TraceStatistic statistic = TraceStatistic::cut_edges;
    double discard_fraction = 0.5;
    std::size_t workers = 0;
};

// For each grid value runs n_chains independent chains of that many accepted
// steps from initial_plan and returns the first value whose R-hat is below
// threshold. Chain c at grid index g uses seed derive_seed(seed, g * n_chains + c).
// Throws NotConvergedError carrying the R-hat profile.
MinStepsResult min_steps_search(const DualGraph& graph, const Districting& initial_plan,
                                const ChainParams& params, std::size_t n_chains, double threshold,
                                std::span<const std::uint64_t> step_grid, std::uint64_t seed,
                                const SearchOptions& options = {});

struct AcceptanceSummary {
    std::uint64_t proposals = 0;
    std::uint64_t accepted = 0;
    double rate = 0.0;
    std::uint64_t invalid_contiguity = 0;
    std::uint64_t tolerance = 0;
    std::uint64_t metropolis = 0;
};

AcceptanceSummary acceptance_summary(std::span<const StepRecord> trace);
AcceptanceSummary acceptance_summary(const ChainTrace& trace);

char outcome_code(RejectReason r);
RejectReason outcome_from_code(char c);

}  // namespace redistmc
