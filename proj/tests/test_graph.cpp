#include <doctest.h>

#include <algorithm>

#include "redistmc/error.hpp"
#include "redistmc/graph.hpp"
#include "redistmc/plan.hpp"
#include "redistmc/rng.hpp"
#include "support.hpp"

using namespace redistmc;

namespace {

constexpr District A = 0, B = 1, C = 2;

// 0 1
// 2 3
DualGraph grid2x2(std::vector<std::int64_t> pops = {}) { return make_grid(2, 2, std::move(pops)); }

}  // namespace

TEST_CASE("dual graph construction") {
    const DualGraph g = grid2x2();
    CHECK(g.size() == 4);
    const std::vector<Edge> expected{{0, 1}, {0, 2}, {1, 3}, {2, 3}};
    CHECK(std::vector<Edge>(g.edges().begin(), g.edges().end()) == expected);
    std::size_t degree_sum = 0;
    for (UnitId v = 0; v < g.size(); ++v) degree_sum += g.degree(v);
    CHECK(g.edge_count() == degree_sum / 2);

    SUBCASE("asymmetric adjacency is rejected") {
        std::vector<std::vector<UnitId>> adj{{1}, {}};
        try {
            DualGraph bad(adj, {1, 1});
            FAIL("expected AsymmetricAdjacency");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::AsymmetricAdjacency);
        }
    }
    SUBCASE("disconnected graph is rejected") {
        std::vector<std::vector<UnitId>> adj{{1}, {0}, {}};
        try {
            DualGraph bad(adj, {1, 1, 1});
            FAIL("expected DisconnectedGraph");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::DisconnectedGraph);
        }
    }
    SUBCASE("self loops and duplicates are rejected") {
        CHECK_THROWS_AS(DualGraph({{0}}, {1}), Error);
        CHECK_THROWS_AS(DualGraph({{1, 1}, {0, 0}}, {1, 1}), Error);
    }
    SUBCASE("names resolve to dense ids") {
        DualGraph named({{1}, {0}}, {3, 4}, {}, {"north", "south"});
        CHECK(named.find("south") == UnitId{1});
        CHECK_FALSE(named.find("east").has_value());
        CHECK(named.total_population() == 7);
    }
}

TEST_CASE("cut_edges") {
    const DualGraph path = make_path(4);
    CHECK(cut_edges(path, Districting(path, {A, A, B, B}, 2)) == std::vector<Edge>{{1, 2}});
    CHECK(cut_edges(path, Districting(path, {A, A, A, A}, 1)).empty());

    const DualGraph g = grid2x2();
    const Districting cols(g, {A, B, A, B}, 2);
    CHECK(cut_edges(g, cols) == std::vector<Edge>{{0, 1}, {2, 3}});
    CHECK(cols.cut_edge_count() == 2);
}

TEST_CASE("is_valid") {
    const DualGraph path = make_path(4);
    CHECK(is_valid(path, Districting(path, {A, A, B, B}, 2)));
    CHECK_FALSE(is_valid(path, Districting(path, {A, B, A, B}, 2)));
    CHECK(is_valid(path, Districting(path, {A, A, A, A}, 1)));
    // label 2 unused: an empty district is invalid
    CHECK_FALSE(is_valid(path, Districting(path, {A, A, B, B}, 3)));
}

TEST_CASE("district_components") {
    const DualGraph path = make_path(4);
    using Sets = std::vector<std::vector<UnitId>>;
    CHECK(district_components(path, Districting(path, {A, A, B, B}, 2)) == Sets{{0, 1}, {2, 3}});
    CHECK(district_components(path, Districting(path, {A, A, A, A}, 1)) == Sets{{0, 1, 2, 3}});
    const DualGraph g = grid2x2();
    CHECK(district_components(g, Districting(g, {A, A, B, B}, 2)) == Sets{{0, 1}, {2, 3}});
    try {
        district_components(path, Districting(path, {A, B, A, B}, 2));
        FAIL("expected InvalidPlan");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::InvalidPlan);
    }
}

TEST_CASE("district_population") {
    const DualGraph path = make_path(4, {2, 1, 1, 2});
    const Districting plan(path, {A, A, B, B}, 2);
    CHECK(district_population(path, plan, A) == 3);
    CHECK(plan.district_population(A) == 3);

    const DualGraph empty = make_path(4, {0, 0, 0, 0});
    CHECK(district_population(empty, Districting(empty, {A, A, B, B}, 2), B) == 0);

    const DualGraph single = make_path(3, {7, 1, 1});
    CHECK(district_population(single, Districting(single, {A, B, B}, 2), A) == 7);

    try {
        district_population(path, plan, C);
        FAIL("expected UnknownDistrict");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::UnknownDistrict);
    }
}

TEST_CASE("flip_vertex") {
    const DualGraph path = make_path(4);
    const Districting plan(path, {A, A, B, B}, 2);

    const Districting moved = flip_vertex(path, plan, 1, B);
    CHECK(std::vector<District>(moved.assignment().begin(), moved.assignment().end()) ==
          std::vector<District>{A, B, B, B});
    CHECK(moved.cut_edge_count() == 1);
    CHECK(cut_edges(path, moved) == std::vector<Edge>{{0, 1}});

    CHECK(flip_vertex(path, plan, 2, B) == plan);

    const DualGraph g = grid2x2();
    const Districting rows = flip_vertex(g, Districting(g, {A, A, B, B}, 2), 3, A);
    CHECK(rows.cut_edge_count() == 2);

    CHECK_THROWS_AS(flip_vertex(path, plan, 0, 5), Error);
}

TEST_CASE("incremental caches match recounts over random flip sequences") {
    SeededStream rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t rows = 2 + rng.below(5), cols = 2 + rng.below(5);
        std::vector<std::int64_t> pops(rows * cols);
        for (auto& p : pops) p = static_cast<std::int64_t>(rng.below(50));
        const DualGraph g = make_grid(rows, cols, pops);
        const int n = 2 + static_cast<int>(rng.below(3));
        std::vector<District> a(g.size());
        for (auto& d : a) d = static_cast<District>(rng.below(static_cast<std::uint64_t>(n)));
        Districting plan(g, a, n);
        for (int step = 0; step < 300; ++step) {
            const auto v = static_cast<UnitId>(rng.below(g.size()));
            const auto to = static_cast<District>(rng.below(static_cast<std::uint64_t>(n)));
            const Districting before = plan;
            const District from = plan.label(v);
            plan.flip(g, v, to);
            a[v] = to;
            REQUIRE(plan.cut_edge_count() == testing::recount_cut(g, a));
            const auto pops_now = testing::recount_pops(g, a, n);
            REQUIRE(std::vector<std::int64_t>(plan.district_populations().begin(), plan.district_populations().end()) ==
                    pops_now);
            for (UnitId u = 0; u < g.size(); ++u) {
                std::uint32_t cd = 0;
                for (UnitId w : g.neighbors(u)) cd += a[w] != a[u];
                REQUIRE(plan.cut_degree(u) == cd);
                REQUIRE(plan.is_boundary(u) == (cd > 0));
            }
            REQUIRE(plan.boundary().size() ==
                    static_cast<std::size_t>(std::count_if(a.begin(), a.end(), [&, u = UnitId{0}](District) mutable {
                        return plan.cut_degree(u++) > 0;
                    })));
            if (step % 3 == 0) {
                Districting reverted = plan;
                reverted.flip(g, v, from);
                REQUIRE(reverted == before);
            }
        }
    }
}

TEST_CASE("is_valid agrees with the component count of (V, E minus cut)") {
    SeededStream rng(11);
    for (int trial = 0; trial < 2000; ++trial) {
        const std::size_t rows = 1 + rng.below(4), cols = 2 + rng.below(4);
        const DualGraph g = make_grid(rows, cols);
        const int n = 1 + static_cast<int>(rng.below(4));
        std::vector<District> a(g.size());
        for (auto& d : a) d = static_cast<District>(rng.below(static_cast<std::uint64_t>(n)));
        REQUIRE(is_valid(g, Districting(g, a, n)) == testing::oracle_valid(g, a, n));
    }
}
