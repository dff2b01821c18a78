#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "redistmc/graph.hpp"
#include "redistmc/metrics.hpp"
#include "redistmc/plan.hpp"
#include "redistmc/rng.hpp"

namespace redistmc {

enum class ChainKind { flip, single_vertex };

enum class RejectReason : std::uint8_t { none, invalid_contiguity, tolerance, metropolis };

struct StepRecord {
    std::uint64_t step_index = 0;
    bool proposed = true;
    bool accepted = false;
    RejectReason rejected_reason = RejectReason::none;
    double weight_after = 1.0;
};

// Monochromatic edges marked "flip"; indices into DualGraph::edges(), ascending.
struct FlipLabelling {
    std::vector<std::uint32_t> flagged;
};

struct BoundaryComponent {
    std::vector<UnitId> vertices;
    District district = 0;
    std::vector<District> neighbor_districts;  // ascending
};

struct FlipMove {
    std::size_t component;  // index into the component list
    District target;
};
using FlipSet = std::vector<FlipMove>;

// Flags each monochromatic edge independently with probability lambda.
// Skips between flags are drawn geometrically, so cost is O(lambda |E|).
FlipLabelling label_flip_edges(const DualGraph& graph, const Districting& plan, double lambda,
                               RandomStream& rng);

// Connected components of (V, flagged) that contain a boundary vertex.
// Vertices within a component ascending; components ordered by first vertex.
std::vector<BoundaryComponent> boundary_components(const DualGraph& graph, const Districting& plan,
                                                   const FlipLabelling& labelling);

// Chooses pairwise non-adjacent components per `selection` and draws each
// chosen component's target uniformly from its neighbor districts.
FlipSet select_flip_set(const DualGraph& graph, std::span<const BoundaryComponent> components,
                        RandomStream& rng, const FlipSelection& selection = {});

Districting apply_flip_set(const DualGraph& graph, Districting plan,
                           std::span<const BoundaryComponent> components, const FlipSet& flips);

// Scratch-owning implementation of the component proposal. One per chain.
class FlipProposer {
public:
    explicit FlipProposer(const DualGraph& graph);

    void label(const Districting& plan, double lambda, RandomStream& rng);
    void find_components(const Districting& plan);
    void select(RandomStream& rng, const FlipSelection& selection = {});

    const FlipLabelling& labelling() const noexcept { return labelling_; }
    FlipLabelling& labelling() noexcept { return labelling_; }
    std::span<const BoundaryComponent> components() const noexcept { return {components_.data(), n_components_}; }
    const FlipSet& flips() const noexcept { return flips_; }

    // Loads an externally built component list (used by the free functions).
    void set_components(std::span<const BoundaryComponent> components);

private:
    UnitId find(UnitId v);
    void join(UnitId a, UnitId b);
    void touch(UnitId v);
    std::uint32_t next_generation();
    bool adjacent_to_chosen(const BoundaryComponent& comp, std::uint32_t gen) const;
    void choose(std::uint32_t idx, std::uint32_t gen, RandomStream& rng);

    const DualGraph* graph_;
    FlipLabelling labelling_;
    std::vector<BoundaryComponent> components_;
    std::size_t n_components_ = 0;
    FlipSet flips_;

    std::vector<std::uint32_t> stamp_;
    std::uint32_t generation_ = 0;
    std::vector<UnitId> parent_;
    std::vector<UnitId> touched_;
    std::vector<std::uint32_t> root_stamp_;
    std::vector<std::uint32_t> root_component_;
    std::vector<std::uint32_t> order_;
};

// Holds the proposal scratch for one chain and performs Metropolis-filtered
// steps in place. Rejected proposals leave the plan bit-identical.
//
// The tolerance gate rejects a proposal outside the step's tolerance unless
// the held plan is itself further out; a plan stranded by a tightening
// schedule can then work its way back in.
class Sampler {
public:
    Sampler(const DualGraph& graph, ChainParams params, ChainKind kind = ChainKind::flip);

    StepRecord step(Districting& plan, const Constraints& constraints, RandomStream& rng);

    const ChainParams& params() const noexcept { return params_; }
    ChainKind kind() const noexcept { return kind_; }
    std::uint64_t steps_taken() const noexcept { return steps_; }

private:
    StepRecord flip_step(Districting& plan, const Constraints& c, RandomStream& rng);
    StepRecord single_vertex_step(Districting& plan, const Constraints& c, RandomStream& rng);
    void undo(Districting& plan);
    StepRecord finish(Districting& plan, const Constraints& c, RandomStream& rng, double log_w_old,
                      double log_proposal_ratio);

    const DualGraph* graph_;
    ChainParams params_;
    ChainKind kind_;
    FlipProposer proposer_;
    ConnectivityScratch scratch_;
    std::vector<std::pair<UnitId, District>> undo_;
    std::vector<District> lost_;
    std::vector<UnitId> targets_;
    std::uint64_t steps_ = 0;
    std::int64_t deviation_before_ = 0;
};

// One flip-algorithm proposal through the validity, tolerance and Metropolis
// gates. A rejected proposal returns the plan unchanged.
std::pair<Districting, StepRecord> propose_and_filter(const DualGraph& graph, Districting plan,
                                                      const ChainParams& params,
                                                      const Constraints& constraints, RandomStream& rng);

// Single boundary-vertex recolouring through the same gates. Throws
// NoBoundary when the plan has no cut edges.
std::pair<Districting, StepRecord> single_vertex_chain_step(const DualGraph& graph, Districting plan,
                                                            const ChainParams& params, RandomStream& rng);

using StepObserver = std::function<void(const Districting&, const StepRecord&)>;

struct ChainRun {
    Districting plan;
    std::vector<StepRecord> trace;
};

// Steps until n_accepted_target proposals have been accepted. Throws
// StallDetected after params.stall_cap consecutive rejections.
ChainRun run_chain(const DualGraph& graph, Districting initial, const ChainParams& params,
                   std::uint64_t n_accepted_target, RandomStream& rng, ChainKind kind = ChainKind::flip,
                   const StepObserver& observer = {});

}  // namespace redistmc
