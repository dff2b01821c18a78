#include "redistmc/graph.hpp"

#include <algorithm>
#include <numeric>

#include "redistmc/error.hpp"

namespace redistmc {

DualGraph::DualGraph(const std::vector<std::vector<UnitId>>& adjacency,
                     std::vector<std::int64_t> populations,
                     std::vector<Votes> votes,
                     std::vector<std::string> names)
    : populations_(std::move(populations)),
      votes_(std::move(votes)),
      names_(std::move(names)) {
    const std::size_t n = adjacency.size();
    if (n == 0) throw Error(ErrorKind::DegenerateGraph, "graph has no vertices");
    if (populations_.size() != n)
        throw Error(ErrorKind::InvalidArgument, "population vector size does not match vertex count");
    if (votes_.empty()) votes_.resize(n);
    if (votes_.size() != n)
        throw Error(ErrorKind::InvalidArgument, "vote vector size does not match vertex count");
    if (names_.empty()) {
        names_.reserve(n);
        for (std::size_t v = 0; v < n; ++v) names_.push_back(std::to_string(v));
    }
    if (names_.size() != n)
        throw Error(ErrorKind::InvalidArgument, "name vector size does not match vertex count");

    for (std::size_t v = 0; v < n; ++v) {
        if (populations_[v] < 0)
            throw Error(ErrorKind::InvalidArgument, "negative population at unit " + names_[v]);
        if (votes_[v].dem < 0 || votes_[v].rep < 0)
            throw Error(ErrorKind::InvalidArgument, "negative vote count at unit " + names_[v]);
        if (!index_.emplace(names_[v], static_cast<UnitId>(v)).second)
            throw Error(ErrorKind::InvalidArgument, "duplicate unit name " + names_[v]);
    }
    total_population_ = std::accumulate(populations_.begin(), populations_.end(), std::int64_t{0});

    offsets_.assign(n + 1, 0);
    for (std::size_t v = 0; v < n; ++v) offsets_[v + 1] = offsets_[v] + adjacency[v].size();
    neighbors_.resize(offsets_[n]);
    for (std::size_t v = 0; v < n; ++v) {
        auto out = neighbors_.begin() + static_cast<std::ptrdiff_t>(offsets_[v]);
        std::copy(adjacency[v].begin(), adjacency[v].end(), out);
        std::sort(out, out + static_cast<std::ptrdiff_t>(adjacency[v].size()));
        for (std::size_t i = 0; i < adjacency[v].size(); ++i) {
            const UnitId u = out[static_cast<std::ptrdiff_t>(i)];
            if (u >= n)
                throw Error(ErrorKind::InvalidArgument, "neighbor index out of range at unit " + names_[v]);
            if (u == v) throw Error(ErrorKind::InvalidArgument, "self-loop at unit " + names_[v]);
            if (i > 0 && out[static_cast<std::ptrdiff_t>(i - 1)] == u)
                throw Error(ErrorKind::InvalidArgument, "duplicate edge at unit " + names_[v]);
        }
    }

    for (UnitId v = 0; v < n; ++v) {
        for (UnitId u : neighbors(v)) {
            auto nu = neighbors(u);
            if (!std::binary_search(nu.begin(), nu.end(), v))
                throw Error(ErrorKind::AsymmetricAdjacency,
                            "unit " + names_[v] + " lists " + names_[u] + " but not the reverse");
            if (v < u) edges_.push_back({v, u});
        }
    }

    std::vector<char> seen(n, 0);
    std::vector<UnitId> stack{0};
    seen[0] = 1;
    std::size_t reached = 1;
    while (!stack.empty()) {
        const UnitId v = stack.back();
        stack.pop_back();
        for (UnitId u : neighbors(v)) {
            if (!seen[u]) {
                seen[u] = 1;
                ++reached;
                stack.push_back(u);
            }
        }
    }
    if (reached != n)
        throw Error(ErrorKind::DisconnectedGraph,
                    "graph is disconnected: " + std::to_string(reached) + " of " +
                        std::to_string(n) + " units reachable from " + names_[0]);
}

std::optional<UnitId> DualGraph::find(std::string_view name) const {
    auto it = index_.find(std::string(name));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

std::vector<std::vector<UnitId>> DualGraph::adjacency_lists() const {
    std::vector<std::vector<UnitId>> out(size());
    for (UnitId v = 0; v < size(); ++v) {
        auto nb = neighbors(v);
        out[v].assign(nb.begin(), nb.end());
    }
    return out;
}

DualGraph make_grid(std::size_t rows, std::size_t cols,
                    std::vector<std::int64_t> populations,
                    std::vector<Votes> votes) {
    const std::size_t n = rows * cols;
    std::vector<std::vector<UnitId>> adj(n);
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            const auto v = static_cast<UnitId>(r * cols + c);
            if (c + 1 < cols) {
                adj[v].push_back(v + 1);
                adj[v + 1].push_back(v);
            }
            if (r + 1 < rows) {
                adj[v].push_back(static_cast<UnitId>(v + cols));
                adj[v + cols].push_back(v);
            }
        }
    }
    if (populations.empty()) populations.assign(n, 1);
    return DualGraph(adj, std::move(populations), std::move(votes));
}

DualGraph make_path(std::size_t n, std::vector<std::int64_t> populations,
                    std::vector<Votes> votes) {
    return make_grid(1, n, std::move(populations), std::move(votes));
}

}  // namespace redistmc
