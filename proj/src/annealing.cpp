#include "redistmc/annealing.hpp"

#include <algorithm>
#include <cmath>

#include "redistmc/error.hpp"

namespace redistmc {

namespace {

// ceil(span / delta) with slack for representation error, e.g. 0.9 / 0.005.
std::uint64_t delta_count(double span, double delta) {
    if (span <= 0.0) return 0;
    return static_cast<std::uint64_t>(std::ceil(span / delta - 1e-9));
}

}  // namespace

void AnnealSchedule::validate() const {
    if (steps_per_delta == 0) throw Error(ErrorKind::InvalidArgument, "steps_per_delta must be positive");
    if (!(pop_tol_delta > 0.0) || !(comp_weight_delta > 0.0))
        throw Error(ErrorKind::InvalidArgument, "schedule deltas must be positive");
    if (!(pop_tol_start >= pop_tol_target))
        throw Error(ErrorKind::InvalidArgument, "pop_tol_start must not be below pop_tol_target");
    if (!(comp_weight_start <= comp_weight_target))
        throw Error(ErrorKind::InvalidArgument, "comp_weight_start must not exceed comp_weight_target");
    if (pop_tol_target < 0.0 || pop_tol_start > 1.0)
        throw Error(ErrorKind::InvalidArgument, "population tolerances must lie in [0, 1]");
    if (comp_weight_start < 0.0) throw Error(ErrorKind::InvalidArgument, "compactness weight must be nonnegative");
}

std::uint64_t AnnealSchedule::pop_phase_steps() const {
    return delta_count(pop_tol_start - pop_tol_target, pop_tol_delta) * steps_per_delta;
}

std::uint64_t AnnealSchedule::comp_phase_steps() const {
    return delta_count(comp_weight_target - comp_weight_start, comp_weight_delta) * steps_per_delta;
}

std::uint64_t total_steps(const AnnealSchedule& s) {
    s.validate();
    return s.hot_steps + s.pop_phase_steps() + s.comp_phase_steps() + s.cold_steps;
}

SchedulePoint params_at(const AnnealSchedule& s, std::uint64_t step) {
    const std::uint64_t total = total_steps(s);
    if (step >= total)
        throw Error(ErrorKind::StepOutOfRange,
                    "step " + std::to_string(step) + " outside schedule of " + std::to_string(total) + " steps");
    if (step < s.hot_steps) return {s.pop_tol_start, s.comp_weight_start, Phase::hot};
    step -= s.hot_steps;
    if (step < s.pop_phase_steps()) {
        const double k = static_cast<double>(step / s.steps_per_delta);
        return {std::max(s.pop_tol_target, s.pop_tol_start - k * s.pop_tol_delta), s.comp_weight_start,
                Phase::anneal_pop};
    }
    step -= s.pop_phase_steps();
    if (step < s.comp_phase_steps()) {
        const double k = static_cast<double>(step / s.steps_per_delta);
        return {s.pop_tol_target, std::min(s.comp_weight_target, s.comp_weight_start + k * s.comp_weight_delta),
                Phase::anneal_comp};
    }
    return {s.pop_tol_target, s.comp_weight_target, Phase::cold};
}

Constraints constraints_at(const SchedulePoint& point, const ChainParams& params) {
    if (point.phase == Phase::hot) return {point.pop_tolerance, 0.0, 0.0};
    return {point.pop_tolerance, params.beta_pop, point.beta_comp};
}

ChainRun run_annealed_sample(const DualGraph& graph, Districting initial, const ChainParams& params,
                             const AnnealSchedule& schedule, RandomStream& rng, ChainKind kind,
                             const StepObserver& observer) {
    const std::uint64_t total = total_steps(schedule);
    Sampler sampler(graph, params, kind);
    ChainRun run{std::move(initial), {}};
    run.trace.reserve(total);
    std::uint64_t since_accept = 0;
    for (std::uint64_t step = 0; step < total; ++step) {
        const StepRecord rec = sampler.step(run.plan, constraints_at(params_at(schedule, step), params), rng);
        run.trace.push_back(rec);
        if (observer) observer(run.plan, rec);
        since_accept = rec.accepted ? 0 : since_accept + 1;
        if (since_accept >= params.stall_cap)
            throw Error(ErrorKind::StallDetected,
                        "annealed chain stalled at step " + std::to_string(step) + " after " +
                            std::to_string(since_accept) + " consecutive rejections");
    }
    if (!within_pop_tolerance(graph, run.plan, schedule.pop_tol_target))
        throw Error(ErrorKind::StallDetected, "annealed sample ended outside the target population tolerance");
    return run;
}

}  // namespace redistmc
