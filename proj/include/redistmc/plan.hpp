#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "redistmc/graph.hpp"

namespace redistmc {

using District = std::int32_t;

// An n-coloring of a DualGraph with incrementally maintained caches:
// per-district population and size, cut-edge count, per-vertex cut degree
// and the set of boundary vertices (cut degree > 0).
//
// A Districting does not own its graph; every mutating call takes the graph it
// was built against.
class Districting {
public:
    Districting() = default;

    // Throws UnknownDistrict for labels outside 0..n_districts-1 and
    // InvalidArgument when the assignment does not cover the graph.
    Districting(const DualGraph& graph, std::vector<District> assignment, int n_districts);

    int n_districts() const noexcept { return n_districts_; }
    std::size_t size() const noexcept { return assignment_.size(); }

    District label(UnitId v) const noexcept { return assignment_[v]; }
    std::span<const District> assignment() const noexcept { return assignment_; }

    std::int64_t district_population(District d) const noexcept { return district_pops_[static_cast<std::size_t>(d)]; }
    std::span<const std::int64_t> district_populations() const noexcept { return district_pops_; }
    std::size_t district_size(District d) const noexcept { return district_sizes_[static_cast<std::size_t>(d)]; }

    std::size_t cut_edge_count() const noexcept { return cut_edge_count_; }
    std::uint32_t cut_degree(UnitId v) const noexcept { return cut_degree_[v]; }
    bool is_boundary(UnitId v) const noexcept { return cut_degree_[v] > 0; }
    // Unordered; the order is a deterministic function of the flip history.
    std::span<const UnitId> boundary() const noexcept { return boundary_; }

    // Relabels v, updating every cache in O(deg(v)). The result may be
    // invalid. Throws UnknownDistrict.
    void flip(const DualGraph& graph, UnitId v, District to);

    // Equal assignments and caches; boundary compared as a set.
    friend bool operator==(const Districting& a, const Districting& b);

private:
    void add_boundary(UnitId v);
    void remove_boundary(UnitId v);

    int n_districts_ = 0;
    std::vector<District> assignment_;
    std::vector<std::int64_t> district_pops_;
    std::vector<std::size_t> district_sizes_;
    std::size_t cut_edge_count_ = 0;
    std::vector<std::uint32_t> cut_degree_;
    std::vector<UnitId> boundary_;
    std::vector<std::int32_t> boundary_pos_;  // -1 when not on the boundary
};

std::vector<Edge> cut_edges(const DualGraph& graph, const Districting& plan);

// Every district nonempty and inducing a connected subgraph.
bool is_valid(const DualGraph& graph, const Districting& plan);

// Component i holds the vertices labelled i, ascending. Throws InvalidPlan.
std::vector<std::vector<UnitId>> district_components(const DualGraph& graph, const Districting& plan);

// Sum over the district's vertices; throws UnknownDistrict.
std::int64_t district_population(const DualGraph& graph, const Districting& plan, District district);

Districting flip_vertex(const DualGraph& graph, Districting plan, UnitId v, District new_label);

// Reusable BFS scratch for district connectivity checks. Marks are
// generation-stamped so a check never clears the whole array.
class ConnectivityScratch {
public:
    explicit ConnectivityScratch(std::size_t n = 0) : stamp_(n, 0) {}

    // Number of vertices labelled `district` reachable from `start` (which
    // must carry that label) through same-label edges.
    std::size_t reach(const DualGraph& graph, const Districting& plan, UnitId start);

    // True if, starting from `start`, every vertex in `targets` is reached
    // through vertices labelled like `start`. Stops as soon as all are found.
    bool reaches_all(const DualGraph& graph, const Districting& plan, UnitId start,
                     std::span<const UnitId> targets);

    // Whether the district is nonempty and connected. `start` must be a
    // vertex in it.
    bool district_connected(const DualGraph& graph, const Districting& plan, UnitId start) {
        return reach(graph, plan, start) == plan.district_size(plan.label(start));
    }

private:
    std::uint32_t next_generation();

    std::vector<std::uint32_t> stamp_;
    std::uint32_t generation_ = 0;
    std::vector<UnitId> queue_;
};

}  // namespace redistmc
