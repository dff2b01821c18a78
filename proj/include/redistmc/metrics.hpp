#pragma once

#include <cstdint>

#include "redistmc/graph.hpp"
#include "redistmc/plan.hpp"

namespace redistmc {

// How the flip algorithm picks its set of boundary components. Components
// are visited in random order and any adjacent to one already chosen is
// skipped. `count` stops after 1 + Poisson(extra_mean) components; `coin`
// visits all of them and takes each on a fair coin.
struct FlipSelection {
    enum class Rule { count, coin };
    Rule rule = Rule::count;
    double extra_mean = 0.0;
};

struct ChainParams {
    double beta_pop = 0.0;       // weight on population equality
    double beta_comp = 0.0;      // weight on cut-edge compactness
    double pop_tolerance = 1.0;  // hard bound on relative district deviation
    double lambda = 0.05;        // flip-edge labelling probability
    FlipSelection flip_selection;
    int n_districts = 2;
    std::uint64_t rng_seed = 0;
    // Include the proposal ratio in the single-vertex acceptance test so that
    // its stationary law is exactly proportional to the weight.
    bool hastings_correction = true;
    // Consecutive rejected proposals tolerated before StallDetected.
    std::uint64_t stall_cap = 1'000'000;

    // Throws InvalidArgument when a field is out of range.
    void validate() const;
};

// Per-step constraint values; a fixed chain uses the ChainParams values,
// an annealed chain takes them from the schedule.
struct Constraints {
    double pop_tolerance = 1.0;
    double beta_pop = 0.0;
    double beta_comp = 0.0;

    static Constraints from(const ChainParams& p) { return {p.pop_tolerance, p.beta_pop, p.beta_comp}; }
};

// Sum over districts of |pop(district) - pop(V)/n|.
double pop_equality(const DualGraph& graph, const Districting& plan);

// Fraction of edges that are cut. Throws DegenerateGraph when |E| = 0.
double compactness(const DualGraph& graph, const Districting& plan);

// -(beta_pop * pop_eq + beta_comp * comp); the log of weight().
double log_weight(const DualGraph& graph, const Districting& plan, double beta_pop, double beta_comp);

double weight(const DualGraph& graph, const Districting& plan, const ChainParams& params);
double weight(const DualGraph& graph, const Districting& plan, double beta_pop, double beta_comp);

// min(w_new / w_old, 1). Throws DegenerateWeight when w_old is not positive.
double acceptance_probability(double w_new, double w_old);

// max_i |n * pop_i - pop(V)|: the largest district deviation from ideal,
// scaled by n so it stays integral.
std::int64_t scaled_pop_deviation(const DualGraph& graph, const Districting& plan);

// Every district within tol * pop(V)/n of the ideal population.
bool within_pop_tolerance(const DualGraph& graph, const Districting& plan, double tol);

}  // namespace redistmc
