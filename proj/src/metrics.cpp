#include "redistmc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "redistmc/error.hpp"

namespace redistmc {

void ChainParams::validate() const {
    if (!(beta_pop >= 0.0) || !(beta_comp >= 0.0))
        throw Error(ErrorKind::InvalidArgument, "beta weights must be nonnegative");
    if (!(pop_tolerance >= 0.0 && pop_tolerance <= 1.0))
        throw Error(ErrorKind::InvalidArgument, "pop_tolerance must lie in [0, 1]");
    if (!(lambda >= 0.0 && lambda < 1.0))
        throw Error(ErrorKind::InvalidArgument, "lambda must lie in [0, 1)");
    if (!(flip_selection.extra_mean >= 0.0 && flip_selection.extra_mean <= 50.0))
        throw Error(ErrorKind::InvalidArgument, "flip extra_mean must lie in [0, 50]");
    if (n_districts < 1) throw Error(ErrorKind::InvalidArgument, "n_districts must be at least 1");
    if (stall_cap == 0) throw Error(ErrorKind::InvalidArgument, "stall_cap must be positive");
}

double pop_equality(const DualGraph& graph, const Districting& plan) {
    const double ideal = static_cast<double>(graph.total_population()) / plan.n_districts();
    double total = 0.0;
    for (std::int64_t p : plan.district_populations()) total += std::abs(static_cast<double>(p) - ideal);
    return total;
}

double compactness(const DualGraph& graph, const Districting& plan) {
    if (graph.edge_count() == 0) throw Error(ErrorKind::DegenerateGraph, "graph has no edges");
    return static_cast<double>(plan.cut_edge_count()) / static_cast<double>(graph.edge_count());
}

double log_weight(const DualGraph& graph, const Districting& plan, double beta_pop, double beta_comp) {
    double score = 0.0;
    if (beta_pop != 0.0) score += beta_pop * pop_equality(graph, plan);
    if (beta_comp != 0.0) score += beta_comp * compactness(graph, plan);
    return -score;
}

double weight(const DualGraph& graph, const Districting& plan, double beta_pop, double beta_comp) {
    return std::exp(log_weight(graph, plan, beta_pop, beta_comp));
}

double weight(const DualGraph& graph, const Districting& plan, const ChainParams& params) {
    return weight(graph, plan, params.beta_pop, params.beta_comp);
}

double acceptance_probability(double w_new, double w_old) {
    if (!(w_old > 0.0)) throw Error(ErrorKind::DegenerateWeight, "current plan has non-positive weight");
    return std::min(w_new / w_old, 1.0);
}

std::int64_t scaled_pop_deviation(const DualGraph& graph, const Districting& plan) {
    const std::int64_t total = graph.total_population();
    const std::int64_t n = plan.n_districts();
    std::int64_t worst = 0;
    for (std::int64_t p : plan.district_populations()) worst = std::max<std::int64_t>(worst, std::llabs(n * p - total));
    return worst;
}

bool within_pop_tolerance(const DualGraph& graph, const Districting& plan, double tol) {
    // |pop_i - P/n| <= tol * P/n, scaled by n to keep the left side integral.
    return static_cast<double>(scaled_pop_deviation(graph, plan)) <= tol * static_cast<double>(graph.total_population());
}

}  // namespace redistmc
