#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace redistmc {

// Dense vertex index assigned at ingest, 0..|V|-1.
using UnitId = std::uint32_t;

struct Edge {
    UnitId u;  // u < v
    UnitId v;

    friend bool operator==(const Edge&, const Edge&) = default;
};

struct Votes {
    std::int64_t dem = 0;
    std::int64_t rep = 0;
};

// Immutable dual graph of geographic units. Adjacency is stored in CSR form
// with each neighbor list sorted; edges() holds every undirected edge once,
// ordered lexicographically by (u, v).
class DualGraph {
public:
    DualGraph() = default;

    // Throws InvalidArgument on self-loops, duplicate or out-of-range
    // neighbors and mismatched sizes; AsymmetricAdjacency when u lists v but
    // not vice versa; DisconnectedGraph when the graph is not connected.
    DualGraph(const std::vector<std::vector<UnitId>>& adjacency,
              std::vector<std::int64_t> populations,
              std::vector<Votes> votes = {},
              std::vector<std::string> names = {});

    std::size_t size() const noexcept { return populations_.size(); }
    std::size_t edge_count() const noexcept { return edges_.size(); }

    std::span<const UnitId> neighbors(UnitId v) const noexcept {
        return {neighbors_.data() + offsets_[v], neighbors_.data() + offsets_[v + 1]};
    }
    std::size_t degree(UnitId v) const noexcept { return offsets_[v + 1] - offsets_[v]; }

    std::span<const Edge> edges() const noexcept { return edges_; }

    std::int64_t population(UnitId v) const noexcept { return populations_[v]; }
    std::span<const std::int64_t> populations() const noexcept { return populations_; }
    std::int64_t total_population() const noexcept { return total_population_; }

    const Votes& votes(UnitId v) const noexcept { return votes_[v]; }
    std::span<const Votes> all_votes() const noexcept { return votes_; }

    const std::string& name(UnitId v) const { return names_[v]; }
    std::span<const std::string> names() const noexcept { return names_; }
    std::optional<UnitId> find(std::string_view name) const;

    std::vector<std::vector<UnitId>> adjacency_lists() const;

private:
    std::vector<std::size_t> offsets_{0};
    std::vector<UnitId> neighbors_;
    std::vector<Edge> edges_;
    std::vector<std::int64_t> populations_;
    std::vector<Votes> votes_;
    std::vector<std::string> names_;
    std::unordered_map<std::string, UnitId> index_;
    std::int64_t total_population_ = 0;
};

// rows x cols rook-adjacent lattice; vertex r*cols + c. Unit populations and
// zero votes unless given.
DualGraph make_grid(std::size_t rows, std::size_t cols,
                    std::vector<std::int64_t> populations = {},
                    std::vector<Votes> votes = {});

// v0 - v1 - ... - v(n-1)
DualGraph make_path(std::size_t n, std::vector<std::int64_t> populations = {},
                    std::vector<Votes> votes = {});

}  // namespace redistmc
