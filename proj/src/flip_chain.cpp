#include "redistmc/flip_chain.hpp"

#include <algorithm>
#include <cmath>

#include "redistmc/error.hpp"

namespace redistmc {

FlipProposer::FlipProposer(const DualGraph& graph)
    : graph_(&graph),
      stamp_(graph.size(), 0),
      parent_(graph.size(), 0),
      root_stamp_(graph.size(), 0),
      root_component_(graph.size(), 0) {}

std::uint32_t FlipProposer::next_generation() {
    if (++generation_ == 0) {
        std::fill(stamp_.begin(), stamp_.end(), 0);
        std::fill(root_stamp_.begin(), root_stamp_.end(), 0);
        generation_ = 1;
    }
    return generation_;
}

void FlipProposer::touch(UnitId v) {
    if (stamp_[v] != generation_) {
        stamp_[v] = generation_;
        parent_[v] = v;
        touched_.push_back(v);
    }
}

UnitId FlipProposer::find(UnitId v) {
    if (stamp_[v] != generation_) return v;
    while (parent_[v] != v) {
        parent_[v] = parent_[parent_[v]];
        v = parent_[v];
    }
    return v;
}

void FlipProposer::join(UnitId a, UnitId b) {
    touch(a);
    touch(b);
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (a > b) std::swap(a, b);
    parent_[b] = a;
}

void FlipProposer::label(const Districting& plan, double lambda, RandomStream& rng) {
    labelling_.flagged.clear();
    if (lambda <= 0.0) return;
    const auto edges = graph_->edges();
    const std::size_t m = edges.size();
    const double log_keep = std::log1p(-lambda);
    std::size_t i = 0;
    while (i < m) {
        // failures before the next success of a Bernoulli(lambda) sequence
        const double skip = std::floor(std::log1p(-rng.uniform()) / log_keep);
        if (skip >= static_cast<double>(m - i)) break;
        i += static_cast<std::size_t>(skip);
        const Edge& e = edges[i];
        if (plan.label(e.u) == plan.label(e.v)) labelling_.flagged.push_back(static_cast<std::uint32_t>(i));
        ++i;
    }
}

void FlipProposer::find_components(const Districting& plan) {
    const std::uint32_t gen = next_generation();
    touched_.clear();
    const auto edges = graph_->edges();
    for (std::uint32_t idx : labelling_.flagged) join(edges[idx].u, edges[idx].v);

    n_components_ = 0;
    auto component_of_root = [&](UnitId root) -> BoundaryComponent* {
        if (root_stamp_[root] != gen) return nullptr;
        return &components_[root_component_[root]];
    };

    for (UnitId b : plan.boundary()) {
        const UnitId root = find(b);
        BoundaryComponent* comp = component_of_root(root);
        if (comp == nullptr) {
            if (n_components_ == components_.size()) components_.emplace_back();
            root_stamp_[root] = gen;
            root_component_[root] = static_cast<std::uint32_t>(n_components_);
            comp = &components_[n_components_++];
            comp->vertices.clear();
            comp->neighbor_districts.clear();
            comp->district = plan.label(b);
        }
        comp->vertices.push_back(b);
        for (UnitId u : graph_->neighbors(b)) {
            const District lu = plan.label(u);
            if (lu != comp->district &&
                std::find(comp->neighbor_districts.begin(), comp->neighbor_districts.end(), lu) ==
                    comp->neighbor_districts.end())
                comp->neighbor_districts.push_back(lu);
        }
    }
    // interior vertices joined to the boundary through flagged edges
    for (UnitId t : touched_) {
        if (plan.is_boundary(t)) continue;
        if (BoundaryComponent* comp = component_of_root(find(t))) comp->vertices.push_back(t);
    }
    for (std::size_t c = 0; c < n_components_; ++c)
        std::sort(components_[c].neighbor_districts.begin(), components_[c].neighbor_districts.end());
}

void FlipProposer::set_components(std::span<const BoundaryComponent> components) {
    components_.assign(components.begin(), components.end());
    n_components_ = components_.size();
}

namespace {

// Knuth's product-of-uniforms sampler; no draw at all when mean is 0.
std::uint64_t poisson(double mean, RandomStream& rng) {
    if (mean <= 0.0) return 0;
    const double limit = std::exp(-mean);
    std::uint64_t k = 0;
    double p = rng.uniform();
    while (p > limit) {
        ++k;
        p *= rng.uniform();
    }
    return k;
}

}  // namespace

bool FlipProposer::adjacent_to_chosen(const BoundaryComponent& comp, std::uint32_t gen) const {
    for (UnitId v : comp.vertices)
        for (UnitId u : graph_->neighbors(v))
            if (stamp_[u] == gen) return true;
    return false;
}

void FlipProposer::choose(std::uint32_t idx, std::uint32_t gen, RandomStream& rng) {
    const BoundaryComponent& comp = components_[idx];
    for (UnitId v : comp.vertices) stamp_[v] = gen;
    const auto& nd = comp.neighbor_districts;
    const District target = nd.size() == 1 ? nd.front() : nd[rng.below(nd.size())];
    flips_.push_back({idx, target});
}

void FlipProposer::select(RandomStream& rng, const FlipSelection& selection) {
    flips_.clear();
    const std::size_t k = n_components_;
    order_.resize(k);
    for (std::size_t i = 0; i < k; ++i) order_[i] = static_cast<std::uint32_t>(i);
    const std::uint32_t gen = next_generation();

    if (selection.rule == FlipSelection::Rule::coin) {
        for (std::size_t i = k; i > 1; --i) std::swap(order_[i - 1], order_[rng.below(i)]);
        for (std::uint32_t idx : order_) {
            if (!rng.bernoulli(0.5)) continue;
            if (!adjacent_to_chosen(components_[idx], gen)) choose(idx, gen, rng);
        }
        return;
    }

    // Shuffle lazily: position i is drawn only when it is visited.
    const std::uint64_t wanted = 1 + poisson(selection.extra_mean, rng);
    for (std::size_t i = 0; i < k && flips_.size() < wanted; ++i) {
        if (k - i > 1) std::swap(order_[i], order_[i + rng.below(k - i)]);
        if (!adjacent_to_chosen(components_[order_[i]], gen)) choose(order_[i], gen, rng);
    }
}

FlipLabelling label_flip_edges(const DualGraph& graph, const Districting& plan, double lambda,
                               RandomStream& rng) {
    FlipProposer proposer(graph);
    proposer.label(plan, lambda, rng);
    return proposer.labelling();
}

std::vector<BoundaryComponent> boundary_components(const DualGraph& graph, const Districting& plan,
                                                   const FlipLabelling& labelling) {
    for (std::uint32_t idx : labelling.flagged) {
        const Edge& e = graph.edges()[idx];
        if (plan.label(e.u) != plan.label(e.v))
            throw Error(ErrorKind::InvalidArgument, "flip labelling flags a cut edge");
    }
    FlipProposer proposer(graph);
    proposer.labelling() = labelling;
    proposer.find_components(plan);
    std::vector<BoundaryComponent> out(proposer.components().begin(), proposer.components().end());
    for (auto& c : out) std::sort(c.vertices.begin(), c.vertices.end());
    std::sort(out.begin(), out.end(),
              [](const BoundaryComponent& a, const BoundaryComponent& b) { return a.vertices.front() < b.vertices.front(); });
    return out;
}

FlipSet select_flip_set(const DualGraph& graph, std::span<const BoundaryComponent> components,
                        RandomStream& rng, const FlipSelection& selection) {
    FlipProposer proposer(graph);
    proposer.set_components(components);
    proposer.select(rng, selection);
    return proposer.flips();
}

Districting apply_flip_set(const DualGraph& graph, Districting plan,
                           std::span<const BoundaryComponent> components, const FlipSet& flips) {
    for (const FlipMove& move : flips)
        for (UnitId v : components[move.component].vertices) plan.flip(graph, v, move.target);
    return plan;
}

Sampler::Sampler(const DualGraph& graph, ChainParams params, ChainKind kind)
    : graph_(&graph), params_(params), kind_(kind), proposer_(graph), scratch_(graph.size()) {
    params_.validate();
}

StepRecord Sampler::step(Districting& plan, const Constraints& constraints, RandomStream& rng) {
    StepRecord rec = kind_ == ChainKind::flip ? flip_step(plan, constraints, rng)
                                              : single_vertex_step(plan, constraints, rng);
    rec.step_index = steps_++;
    return rec;
}

void Sampler::undo(Districting& plan) {
    for (auto it = undo_.rbegin(); it != undo_.rend(); ++it) plan.flip(*graph_, it->first, it->second);
    undo_.clear();
}

StepRecord Sampler::finish(Districting& plan, const Constraints& c, RandomStream& rng, double log_w_old,
                           double log_proposal_ratio) {
    StepRecord rec;
    // A held plan left outside a tightened tolerance may still move, but
    // never further out.
    const std::int64_t dev = scaled_pop_deviation(*graph_, plan);
    if (static_cast<double>(dev) > c.pop_tolerance * static_cast<double>(graph_->total_population()) &&
        dev > deviation_before_) {
        undo(plan);
        rec.rejected_reason = RejectReason::tolerance;
        rec.weight_after = std::exp(log_w_old);
        return rec;
    }
    const double log_w_new = log_weight(*graph_, plan, c.beta_pop, c.beta_comp);
    const double log_ratio = log_w_new - log_w_old + log_proposal_ratio;
    // Ratio >= 1 accepts without consuming a draw.
    if (log_ratio >= 0.0 || rng.uniform() < std::exp(log_ratio)) {
        undo_.clear();
        rec.accepted = true;
        rec.weight_after = std::exp(log_w_new);
    } else {
        undo(plan);
        rec.rejected_reason = RejectReason::metropolis;
        rec.weight_after = std::exp(log_w_old);
    }
    return rec;
}

StepRecord Sampler::flip_step(Districting& plan, const Constraints& c, RandomStream& rng) {
    const double log_w_old = log_weight(*graph_, plan, c.beta_pop, c.beta_comp);
    deviation_before_ = scaled_pop_deviation(*graph_, plan);
    proposer_.label(plan, params_.lambda, rng);
    proposer_.find_components(plan);
    proposer_.select(rng, params_.flip_selection);

    undo_.clear();
    lost_.clear();
    const auto comps = proposer_.components();
    for (const FlipMove& move : proposer_.flips()) {
        const BoundaryComponent& comp = comps[move.component];
        if (std::find(lost_.begin(), lost_.end(), comp.district) == lost_.end()) lost_.push_back(comp.district);
        for (UnitId v : comp.vertices) {
            undo_.emplace_back(v, comp.district);
            plan.flip(*graph_, v, move.target);
        }
    }

    // A district that only gained vertices stays connected: each added
    // component touches it through a vertex that no chosen component holds.
    for (District d : lost_) {
        bool ok = plan.district_size(d) > 0;
        if (ok) {
            UnitId start = static_cast<UnitId>(graph_->size());
            for (const auto& [v, old] : undo_) {
                if (old != d) continue;
                for (UnitId u : graph_->neighbors(v)) {
                    if (plan.label(u) == d) {
                        start = u;
                        break;
                    }
                }
                if (start != graph_->size()) break;
            }
            ok = start != graph_->size() && scratch_.district_connected(*graph_, plan, start);
        }
        if (!ok) {
            undo(plan);
            StepRecord rec;
            rec.rejected_reason = RejectReason::invalid_contiguity;
            rec.weight_after = std::exp(log_w_old);
            return rec;
        }
    }
    return finish(plan, c, rng, log_w_old, 0.0);
}

StepRecord Sampler::single_vertex_step(Districting& plan, const Constraints& c, RandomStream& rng) {
    const auto boundary = plan.boundary();
    if (boundary.empty()) throw Error(ErrorKind::NoBoundary, "plan has no cut edges to walk across");
    const double log_w_old = log_weight(*graph_, plan, c.beta_pop, c.beta_comp);
    deviation_before_ = scaled_pop_deviation(*graph_, plan);

    const double boundary_before = static_cast<double>(boundary.size());
    const UnitId v = boundary[rng.below(boundary.size())];
    const District from = plan.label(v);
    const std::uint32_t cut_before = plan.cut_degree(v);
    std::uint64_t pick = rng.below(cut_before);
    District to = from;
    std::uint32_t to_count = 0;
    std::uint32_t from_count = 0;
    targets_.clear();
    for (UnitId u : graph_->neighbors(v)) {
        const District lu = plan.label(u);
        if (lu == from) {
            ++from_count;
            targets_.push_back(u);
        } else if (pick-- == 0) {
            to = lu;
        }
    }
    for (UnitId u : graph_->neighbors(v))
        if (plan.label(u) == to) ++to_count;

    StepRecord rejected;
    rejected.rejected_reason = RejectReason::invalid_contiguity;
    rejected.weight_after = std::exp(log_w_old);
    // Sole member: the move would empty its district. No same-district
    // neighbor in a larger district means the plan was already split.
    if (plan.district_size(from) == 1 || from_count == 0) return rejected;

    undo_.clear();
    undo_.emplace_back(v, from);
    plan.flip(*graph_, v, to);
    if (from_count >= 2) {
        const UnitId start = targets_.front();
        if (!scratch_.reaches_all(*graph_, plan, start, std::span<const UnitId>(targets_).subspan(1))) {
            undo(plan);
            return rejected;
        }
    }

    double log_q = 0.0;
    if (params_.hastings_correction) {
        // q(σ→σ') = to_count / (|∂σ| cut(v)),  q(σ'→σ) = from_count / (|∂σ'| cut'(v))
        const double forward = to_count / (boundary_before * cut_before);
        const double reverse =
            from_count / (static_cast<double>(plan.boundary().size()) * plan.cut_degree(v));
        log_q = std::log(reverse / forward);
    }
    return finish(plan, c, rng, log_w_old, log_q);
}

std::pair<Districting, StepRecord> propose_and_filter(const DualGraph& graph, Districting plan,
                                                      const ChainParams& params,
                                                      const Constraints& constraints, RandomStream& rng) {
    Sampler sampler(graph, params, ChainKind::flip);
    StepRecord rec = sampler.step(plan, constraints, rng);
    return {std::move(plan), rec};
}

std::pair<Districting, StepRecord> single_vertex_chain_step(const DualGraph& graph, Districting plan,
                                                            const ChainParams& params, RandomStream& rng) {
    Sampler sampler(graph, params, ChainKind::single_vertex);
    StepRecord rec = sampler.step(plan, Constraints::from(params), rng);
    return {std::move(plan), rec};
}

ChainRun run_chain(const DualGraph& graph, Districting initial, const ChainParams& params,
                   std::uint64_t n_accepted_target, RandomStream& rng, ChainKind kind,
                   const StepObserver& observer) {
    Sampler sampler(graph, params, kind);
    const Constraints constraints = Constraints::from(params);
    ChainRun run{std::move(initial), {}};
    std::uint64_t accepted = 0;
    std::uint64_t since_accept = 0;
    while (accepted < n_accepted_target) {
        const StepRecord rec = sampler.step(run.plan, constraints, rng);
        run.trace.push_back(rec);
        if (observer) observer(run.plan, rec);
        if (rec.accepted) {
            ++accepted;
            since_accept = 0;
        } else if (++since_accept >= params.stall_cap) {
            throw Error(ErrorKind::StallDetected,
                        "chain stalled: " + std::to_string(since_accept) + " consecutive rejections after " +
                            std::to_string(accepted) + " accepted steps");
        }
    }
    return run;
}

}  // namespace redistmc
