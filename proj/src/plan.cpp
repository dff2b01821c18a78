#include "redistmc/plan.hpp"

#include <algorithm>

#include "redistmc/error.hpp"

namespace redistmc {

namespace {

void check_label(District d, int n) {
    if (d < 0 || d >= n)
        throw Error(ErrorKind::UnknownDistrict,
                    "district label " + std::to_string(d) + " outside 0.." + std::to_string(n - 1));
}

}  // namespace

Districting::Districting(const DualGraph& graph, std::vector<District> assignment, int n_districts)
    : n_districts_(n_districts), assignment_(std::move(assignment)) {
    if (n_districts_ < 1) throw Error(ErrorKind::InvalidArgument, "a plan needs at least one district");
    if (assignment_.size() != graph.size())
        throw Error(ErrorKind::InvalidArgument, "assignment does not cover every unit");
    const auto n = static_cast<std::size_t>(n_districts_);
    district_pops_.assign(n, 0);
    district_sizes_.assign(n, 0);
    cut_degree_.assign(graph.size(), 0);
    boundary_pos_.assign(graph.size(), -1);
    for (UnitId v = 0; v < graph.size(); ++v) {
        check_label(assignment_[v], n_districts_);
        district_pops_[static_cast<std::size_t>(assignment_[v])] += graph.population(v);
        ++district_sizes_[static_cast<std::size_t>(assignment_[v])];
    }
    for (const Edge& e : graph.edges()) {
        if (assignment_[e.u] != assignment_[e.v]) {
            ++cut_edge_count_;
            ++cut_degree_[e.u];
            ++cut_degree_[e.v];
        }
    }
    for (UnitId v = 0; v < graph.size(); ++v)
        if (cut_degree_[v] > 0) add_boundary(v);
}

void Districting::add_boundary(UnitId v) {
    boundary_pos_[v] = static_cast<std::int32_t>(boundary_.size());
    boundary_.push_back(v);
}

void Districting::remove_boundary(UnitId v) {
    const auto pos = static_cast<std::size_t>(boundary_pos_[v]);
    const UnitId last = boundary_.back();
    boundary_[pos] = last;
    boundary_pos_[last] = static_cast<std::int32_t>(pos);
    boundary_.pop_back();
    boundary_pos_[v] = -1;
}

void Districting::flip(const DualGraph& graph, UnitId v, District to) {
    check_label(to, n_districts_);
    const District from = assignment_[v];
    if (from == to) return;

    for (UnitId u : graph.neighbors(v)) {
        const District lu = assignment_[u];
        if (lu == from) {
            // previously uncut, now cut
            ++cut_edge_count_;
            ++cut_degree_[v];
            if (cut_degree_[u]++ == 0) add_boundary(u);
        } else if (lu == to) {
            --cut_edge_count_;
            --cut_degree_[v];
            if (--cut_degree_[u] == 0) remove_boundary(u);
        }
    }
    const bool was_boundary = boundary_pos_[v] >= 0;
    if (cut_degree_[v] > 0 && !was_boundary) add_boundary(v);
    if (cut_degree_[v] == 0 && was_boundary) remove_boundary(v);

    const std::int64_t pop = graph.population(v);
    district_pops_[static_cast<std::size_t>(from)] -= pop;
    district_pops_[static_cast<std::size_t>(to)] += pop;
    --district_sizes_[static_cast<std::size_t>(from)];
    ++district_sizes_[static_cast<std::size_t>(to)];
    assignment_[v] = to;
}

bool operator==(const Districting& a, const Districting& b) {
    if (a.n_districts_ != b.n_districts_ || a.assignment_ != b.assignment_ ||
        a.district_pops_ != b.district_pops_ || a.district_sizes_ != b.district_sizes_ ||
        a.cut_edge_count_ != b.cut_edge_count_ || a.cut_degree_ != b.cut_degree_)
        return false;
    auto ba = a.boundary_;
    auto bb = b.boundary_;
    std::sort(ba.begin(), ba.end());
    std::sort(bb.begin(), bb.end());
    return ba == bb;
}

std::vector<Edge> cut_edges(const DualGraph& graph, const Districting& plan) {
    std::vector<Edge> out;
    out.reserve(plan.cut_edge_count());
    for (const Edge& e : graph.edges())
        if (plan.label(e.u) != plan.label(e.v)) out.push_back(e);
    return out;
}

bool is_valid(const DualGraph& graph, const Districting& plan) {
    const auto n = static_cast<std::size_t>(plan.n_districts());
    std::vector<UnitId> start(n, static_cast<UnitId>(graph.size()));
    for (UnitId v = 0; v < graph.size(); ++v) {
        auto& s = start[static_cast<std::size_t>(plan.label(v))];
        if (s == graph.size()) s = v;
    }
    ConnectivityScratch scratch(graph.size());
    for (std::size_t d = 0; d < n; ++d) {
        if (start[d] == graph.size()) return false;
        if (!scratch.district_connected(graph, plan, start[d])) return false;
    }
    return true;
}

std::vector<std::vector<UnitId>> district_components(const DualGraph& graph, const Districting& plan) {
    if (!is_valid(graph, plan))
        throw Error(ErrorKind::InvalidPlan, "plan has an empty or disconnected district");
    std::vector<std::vector<UnitId>> out(static_cast<std::size_t>(plan.n_districts()));
    for (UnitId v = 0; v < graph.size(); ++v) out[static_cast<std::size_t>(plan.label(v))].push_back(v);
    return out;
}

std::int64_t district_population(const DualGraph& graph, const Districting& plan, District district) {
    check_label(district, plan.n_districts());
    std::int64_t total = 0;
    for (UnitId v = 0; v < graph.size(); ++v)
        if (plan.label(v) == district) total += graph.population(v);
    return total;
}

Districting flip_vertex(const DualGraph& graph, Districting plan, UnitId v, District new_label) {
    plan.flip(graph, v, new_label);
    return plan;
}

std::uint32_t ConnectivityScratch::next_generation() {
    if (++generation_ == 0) {
        std::fill(stamp_.begin(), stamp_.end(), 0);
        generation_ = 1;
    }
    return generation_;
}

std::size_t ConnectivityScratch::reach(const DualGraph& graph, const Districting& plan, UnitId start) {
    if (stamp_.size() < graph.size()) stamp_.resize(graph.size(), 0);
    const std::uint32_t gen = next_generation();
    const District d = plan.label(start);
    queue_.clear();
    queue_.push_back(start);
    stamp_[start] = gen;
    for (std::size_t head = 0; head < queue_.size(); ++head) {
        for (UnitId u : graph.neighbors(queue_[head])) {
            if (stamp_[u] != gen && plan.label(u) == d) {
                stamp_[u] = gen;
                queue_.push_back(u);
            }
        }
    }
    return queue_.size();
}

bool ConnectivityScratch::reaches_all(const DualGraph& graph, const Districting& plan, UnitId start,
                                      std::span<const UnitId> targets) {
    if (stamp_.size() < graph.size()) stamp_.resize(graph.size(), 0);
    const std::uint32_t gen = next_generation();
    const District d = plan.label(start);
    // Targets get their own stamp so hits can be counted without a set.
    const std::uint32_t target_gen = next_generation();
    std::size_t remaining = 0;
    for (UnitId t : targets) {
        if (t != start && stamp_[t] != target_gen) {
            stamp_[t] = target_gen;
            ++remaining;
        }
    }
    if (remaining == 0) return true;
    queue_.clear();
    queue_.push_back(start);
    stamp_[start] = gen;
    for (std::size_t head = 0; head < queue_.size(); ++head) {
        for (UnitId u : graph.neighbors(queue_[head])) {
            if (stamp_[u] == gen || plan.label(u) != d) continue;
            if (stamp_[u] == target_gen && --remaining == 0) return true;
            stamp_[u] = gen;
            queue_.push_back(u);
        }
    }
    return false;
}

}  // namespace redistmc
