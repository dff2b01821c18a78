#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "redistmc/annealing.hpp"
#include "redistmc/graph.hpp"
#include "redistmc/metrics.hpp"
#include "redistmc/plan.hpp"

namespace redistmc {

struct SeatTally {
    int dem_seats = 0;
    int ties = 0;  // districts with equal dem and rep votes; not counted as won
};

// Districts where Democratic votes strictly exceed Republican votes.
SeatTally seats_won(const DualGraph& graph, const Districting& plan);

struct EnsemblePlan {
    std::vector<District> assignment;
    double pop_eq = 0.0;
    double comp = 0.0;
    int seats = 0;
    int ties = 0;
};

struct Provenance {
    std::uint64_t seed = 0;
    std::string chain = "flip";  // flip | single-vertex | anneal
    ChainParams params;
    std::optional<AnnealSchedule> schedule;
    std::uint64_t steps_per_plan = 0;
};

struct Ensemble {
    int n_districts = 0;
    Provenance provenance;
    std::vector<EnsemblePlan> plans;
};

// Scores and tallies a plan for inclusion in an ensemble.
EnsemblePlan score_plan(const DualGraph& graph, const Districting& plan);

struct OutcomeDistribution {
    std::map<int, std::size_t> counts;
    double mean = 0.0;
    double stddev = 0.0;  // sample standard deviation, n-1 denominator
    std::size_t n_plans = 0;
};

// Throws InsufficientPlans when fewer than two outcomes are given.
OutcomeDistribution outcome_distribution(std::span<const int> seats);
OutcomeDistribution outcome_distribution(const Ensemble& ensemble);

double normal_cdf(double z);

// Continuity-corrected mass of integer k under N(mean, stddev).
// Throws DegenerateSpread when stddev is zero.
double outcome_probability(const OutcomeDistribution& dist, int k);

struct EnactedComparison {
    double z_score;
    double probability;
    double sigma_distance;
};

EnactedComparison enacted_comparison(const OutcomeDistribution& dist, int enacted_seats);

// seats,count,fitted_density,probability rows over the observed range (and
// the enacted value), then an "enacted" marker row. Empty input gives only
// the header.
std::string histogram_csv(const OutcomeDistribution& dist, std::optional<int> enacted = std::nullopt);

// Minimal bar chart with the fitted normal and an enacted marker line.
std::string histogram_svg(const OutcomeDistribution& dist, std::optional<int> enacted = std::nullopt);

struct HomogeneityTest {
    double statistic = 0.0;
    int degrees_of_freedom = 0;
    double p_value = 1.0;
};

// Pearson chi-squared test that two samples of integer outcomes come from the
// same distribution. Bins with expected count below `min_expected` in either
// sample are pooled with their neighbors.
HomogeneityTest chi_squared_homogeneity(const OutcomeDistribution& a, const OutcomeDistribution& b,
                                        double min_expected = 5.0);

}  // namespace redistmc
