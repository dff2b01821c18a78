#pragma once

// Test-only helpers: a scripted random stream for forcing branches and
// brute-force oracles that never touch the incremental caches.

#include <cmath>
#include <cstdint>
#include <deque>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "redistmc/error.hpp"
#include "redistmc/graph.hpp"
#include "redistmc/plan.hpp"
#include "redistmc/rng.hpp"

namespace testing {

using namespace redistmc;

class ScriptedStream final : public RandomStream {
public:
    ScriptedStream(std::deque<double> uniforms, std::deque<std::uint64_t> belows = {})
        : uniforms_(std::move(uniforms)), belows_(std::move(belows)) {}

    double uniform() override {
        if (uniforms_.empty()) throw std::logic_error("scripted stream: no uniform draws left");
        double u = uniforms_.front();
        uniforms_.pop_front();
        return u;
    }
    std::uint64_t below(std::uint64_t n) override {
        if (belows_.empty()) throw std::logic_error("scripted stream: no integer draws left");
        std::uint64_t x = belows_.front();
        belows_.pop_front();
        if (x >= n) throw std::logic_error("scripted stream: integer draw out of range");
        return x;
    }
    bool exhausted() const { return uniforms_.empty() && belows_.empty(); }

private:
    std::deque<double> uniforms_;
    std::deque<std::uint64_t> belows_;
};

// Kind of the redistmc::Error thrown by f, or nullopt if none.
template <class F>
std::optional<ErrorKind> thrown_kind(F&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    return std::nullopt;
}

inline std::size_t recount_cut(const DualGraph& g, const std::vector<District>& a) {
    std::size_t cut = 0;
    for (const Edge& e : g.edges()) cut += a[e.u] != a[e.v];
    return cut;
}

inline std::vector<std::int64_t> recount_pops(const DualGraph& g, const std::vector<District>& a, int n) {
    std::vector<std::int64_t> pops(static_cast<std::size_t>(n), 0);
    for (UnitId v = 0; v < g.size(); ++v) pops[static_cast<std::size_t>(a[v])] += g.population(v);
    return pops;
}

// Connected components of (V, E \ S) by union-find over uncut edges.
inline std::size_t components_after_cut(const DualGraph& g, const std::vector<District>& a) {
    std::vector<UnitId> parent(g.size());
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](UnitId x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    std::size_t comps = g.size();
    for (const Edge& e : g.edges()) {
        if (a[e.u] != a[e.v]) continue;
        UnitId ru = find(e.u), rv = find(e.v);
        if (ru != rv) {
            parent[ru] = rv;
            --comps;
        }
    }
    return comps;
}

// Valid per the cut formulation: every label used and exactly n components.
inline bool oracle_valid(const DualGraph& g, const std::vector<District>& a, int n) {
    std::vector<char> used(static_cast<std::size_t>(n), 0);
    for (District d : a) used[static_cast<std::size_t>(d)] = 1;
    for (char u : used)
        if (!u) return false;
    return components_after_cut(g, a) == static_cast<std::size_t>(n);
}

inline bool oracle_within_tolerance(const DualGraph& g, const std::vector<District>& a, int n, double tol) {
    const double ideal = static_cast<double>(g.total_population()) / n;
    for (std::int64_t p : recount_pops(g, a, n))
        if (std::abs(static_cast<double>(p) - ideal) > tol * ideal + 1e-12) return false;
    return true;
}

inline double oracle_log_weight(const DualGraph& g, const std::vector<District>& a, int n, double beta_pop,
                                double beta_comp) {
    const double ideal = static_cast<double>(g.total_population()) / n;
    double pop_eq = 0.0;
    for (std::int64_t p : recount_pops(g, a, n)) pop_eq += std::abs(static_cast<double>(p) - ideal);
    const double comp = static_cast<double>(recount_cut(g, a)) / static_cast<double>(g.edge_count());
    return -(beta_pop * pop_eq + beta_comp * comp);
}

// Every labelled n-colouring of g that is valid and within tolerance, by
// exhaustive enumeration of n^|V| assignments.
inline std::vector<std::vector<District>> enumerate_plans(const DualGraph& g, int n, double tol) {
    std::vector<std::vector<District>> out;
    std::vector<District> a(g.size(), 0);
    while (true) {
        if (oracle_valid(g, a, n) && oracle_within_tolerance(g, a, n, tol)) out.push_back(a);
        std::size_t i = 0;
        while (i < a.size() && a[i] == n - 1) a[i++] = 0;
        if (i == a.size()) break;
        ++a[i];
    }
    return out;
}

// Base-n index of an assignment, for histogramming.
inline std::uint64_t plan_code(std::span<const District> a, int n) {
    std::uint64_t code = 0;
    for (auto it = a.rbegin(); it != a.rend(); ++it) code = code * static_cast<std::uint64_t>(n) + static_cast<std::uint64_t>(*it);
    return code;
}

}  // namespace testing
