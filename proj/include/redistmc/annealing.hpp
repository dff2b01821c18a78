#pragma once

#include <cstdint>

#include "redistmc/flip_chain.hpp"

namespace redistmc {

// Hot phase, population-tolerance staircase, compactness-weight staircase,
// cold phase. Each staircase moves by one delta every steps_per_delta steps.
struct AnnealSchedule {
    std::uint64_t hot_steps = 500;
    std::uint64_t steps_per_delta = 10;
    std::uint64_t cold_steps = 100;
    double pop_tol_start = 1.0;
    double pop_tol_target = 0.1;
    double pop_tol_delta = 0.005;
    double comp_weight_start = 0.0;
    double comp_weight_target = 0.4;
    double comp_weight_delta = 0.01;

    void validate() const;
    std::uint64_t pop_phase_steps() const;
    std::uint64_t comp_phase_steps() const;
};

enum class Phase { hot, anneal_pop, anneal_comp, cold };

struct SchedulePoint {
    double pop_tolerance;
    double beta_comp;
    Phase phase;
};

std::uint64_t total_steps(const AnnealSchedule& schedule);

// Throws StepOutOfRange when step >= total_steps(schedule).
SchedulePoint params_at(const AnnealSchedule& schedule, std::uint64_t step);

// Constraints for one step. The hot phase runs with no weights at all.
Constraints constraints_at(const SchedulePoint& point, const ChainParams& params);

// Runs total_steps(schedule) proposals, each step gated by that step's
// schedule point. Throws StallDetected after params.stall_cap consecutive
// rejections, or if the final plan misses the target tolerance.
ChainRun run_annealed_sample(const DualGraph& graph, Districting initial, const ChainParams& params,
                             const AnnealSchedule& schedule, RandomStream& rng,
                             ChainKind kind = ChainKind::flip, const StepObserver& observer = {});

}  // namespace redistmc
