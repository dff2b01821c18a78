#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "redistmc/error.hpp"
#include "redistmc/flip_chain.hpp"
#include "support.hpp"

using namespace redistmc;
using testing::ScriptedStream;
using testing::thrown_kind;

namespace {
constexpr District A = 0, B = 1, C = 2;

// Uniform draw large enough that the geometric skip runs past every edge.
constexpr double kNoMoreFlags = 0.9999999;

std::vector<District> labels(const Districting& p) { return {p.assignment().begin(), p.assignment().end()}; }

}  // namespace

TEST_CASE("label_flip_edges") {
    const DualGraph path = make_path(4);
    const Districting plan(path, {A, A, B, B}, 2);
    SeededStream rng(1);

    CHECK(label_flip_edges(path, plan, 0.0, rng).flagged.empty());

    // lambda near 1 flags every monochromatic edge and never a cut edge
    const auto all = label_flip_edges(path, plan, 1.0 - 1e-12, rng);
    CHECK(all.flagged == std::vector<std::uint32_t>{0, 2});

    // first draw lands the first success on edge 0, second runs off the end
    ScriptedStream forced({0.0, kNoMoreFlags});
    CHECK(label_flip_edges(path, plan, 0.05, forced).flagged == std::vector<std::uint32_t>{0});
    CHECK(forced.exhausted());

    // flagging frequency matches lambda
    const DualGraph g = make_grid(10, 10);
    const Districting mono(g, std::vector<District>(100, A), 1);
    std::size_t flagged = 0;
    const int reps = 2000;
    for (int i = 0; i < reps; ++i) flagged += label_flip_edges(g, mono, 0.2, rng).flagged.size();
    const double rate = static_cast<double>(flagged) / (reps * g.edge_count());
    CHECK(rate == doctest::Approx(0.2).epsilon(0.02));
}

TEST_CASE("boundary_components") {
    const DualGraph path = make_path(4);
    const Districting plan(path, {A, A, B, B}, 2);

    auto comps = boundary_components(path, plan, {});
    REQUIRE(comps.size() == 2);
    CHECK(comps[0].vertices == std::vector<UnitId>{1});
    CHECK(comps[0].district == A);
    CHECK(comps[0].neighbor_districts == std::vector<District>{B});
    CHECK(comps[1].vertices == std::vector<UnitId>{2});

    comps = boundary_components(path, plan, FlipLabelling{{0}});
    REQUIRE(comps.size() == 2);
    CHECK(comps[0].vertices == std::vector<UnitId>{0, 1});
    CHECK(comps[1].vertices == std::vector<UnitId>{2});

    const Districting mono(path, {A, A, A, A}, 1);
    CHECK(boundary_components(path, mono, FlipLabelling{{0, 1}}).empty());

    CHECK(thrown_kind([&] { boundary_components(path, plan, FlipLabelling{{1}}); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("boundary component invariants on random labellings") {
    SeededStream rng(5);
    const DualGraph g = make_grid(6, 6);
    std::vector<District> a(36);
    for (UnitId v = 0; v < 36; ++v) a[v] = static_cast<District>((v % 6) / 2);
    const Districting plan(g, a, 3);
    for (int trial = 0; trial < 200; ++trial) {
        const auto lab = label_flip_edges(g, plan, 0.4, rng);
        const auto comps = boundary_components(g, plan, lab);
        std::vector<int> seen(36, 0);
        for (const auto& c : comps) {
            REQUIRE_FALSE(c.neighbor_districts.empty());
            bool touches = false;
            for (UnitId v : c.vertices) {
                REQUIRE(plan.label(v) == c.district);
                touches |= plan.is_boundary(v);
                ++seen[v];
            }
            REQUIRE(touches);
        }
        // every boundary vertex in exactly one component
        for (UnitId v = 0; v < 36; ++v)
            if (plan.is_boundary(v)) REQUIRE(seen[v] == 1);
        for (int s : seen) REQUIRE(s <= 1);
    }
}

TEST_CASE("select_flip_set with the coin rule") {
    const DualGraph path = make_path(4);
    const Districting plan(path, {A, A, B, B}, 2);
    const std::vector<BoundaryComponent> single{{{1}, A, {B}}};
    FlipSelection coin;
    coin.rule = FlipSelection::Rule::coin;

    ScriptedStream include({0.25});
    auto f = select_flip_set(path, single, include, coin);
    REQUIRE(f.size() == 1);
    CHECK(f[0].component == 0);
    CHECK(f[0].target == B);
    CHECK(include.exhausted());

    ScriptedStream exclude({0.75});
    CHECK(select_flip_set(path, single, exclude, coin).empty());

    const DualGraph star({{1, 2}, {0}, {0}}, {1, 1, 1});
    const std::vector<BoundaryComponent> two_way{{{0}, A, {B, C}}};
    ScriptedStream pick({0.0}, {1});
    f = select_flip_set(star, two_way, pick, coin);
    REQUIRE(f.size() == 1);
    CHECK(f[0].target == C);

    // {v1} and {v2} are adjacent: both coins land heads, only one survives
    const auto comps = boundary_components(path, plan, {});
    SeededStream rng(9);
    for (int i = 0; i < 200; ++i) CHECK(select_flip_set(path, comps, rng, coin).size() <= 1);
    ScriptedStream both({0.0, 0.0}, {0});
    CHECK(select_flip_set(path, comps, both, coin).size() == 1);
}

TEST_CASE("select_flip_set with the count rule") {
    const DualGraph path = make_path(4);
    const Districting plan(path, {A, A, B, B}, 2);
    const std::vector<BoundaryComponent> single{{{1}, A, {B}}};

    // one component, always taken, no draws at all
    ScriptedStream none({}, {});
    auto f = select_flip_set(path, single, none);
    REQUIRE(f.size() == 1);
    CHECK(f[0].target == B);

    const DualGraph star({{1, 2}, {0}, {0}}, {1, 1, 1});
    const std::vector<BoundaryComponent> two_way{{{0}, A, {B, C}}};
    ScriptedStream pick({}, {1});
    CHECK(select_flip_set(star, two_way, pick).at(0).target == C);

    // the lazy shuffle picks the second component first
    const auto comps = boundary_components(path, plan, {});
    ScriptedStream second({}, {1});
    f = select_flip_set(path, comps, second);
    REQUIRE(f.size() == 1);
    CHECK(f[0].component == 1);
    CHECK(f[0].target == A);

    // extra components arrive at rate extra_mean and are never adjacent
    const DualGraph g = make_grid(8, 8);
    std::vector<District> a(64);
    for (UnitId v = 0; v < 64; ++v) a[v] = static_cast<District>((v % 8) / 2);
    const Districting stripes(g, a, 4);
    const auto many = boundary_components(g, stripes, {});
    FlipSelection extra;
    extra.extra_mean = 2.0;
    SeededStream rng(3);
    double total = 0.0;
    const int reps = 4000;
    for (int i = 0; i < reps; ++i) {
        const FlipSet s = select_flip_set(g, many, rng, extra);
        total += static_cast<double>(s.size());
        for (std::size_t x = 0; x < s.size(); ++x)
            for (std::size_t y = x + 1; y < s.size(); ++y)
                for (UnitId u : many[s[x].component].vertices)
                    for (UnitId w : g.neighbors(u))
                        REQUIRE(std::find(many[s[y].component].vertices.begin(), many[s[y].component].vertices.end(),
                                          w) == many[s[y].component].vertices.end());
    }
    // adjacency skips pull the mean a little under 3
    CHECK(total / reps == doctest::Approx(3.0).epsilon(0.08));
}

TEST_CASE("apply_flip_set") {
    const DualGraph path = make_path(4);
    const Districting plan(path, {A, A, B, B}, 2);
    const auto comps = boundary_components(path, plan, {});
    CHECK(apply_flip_set(path, plan, comps, {}) == plan);
    CHECK(labels(apply_flip_set(path, plan, comps, {{0, B}})) == std::vector<District>{A, B, B, B});

    const DualGraph g = make_grid(2, 2);
    const Districting rows(g, {A, A, B, B}, 2);
    const auto gc = boundary_components(g, rows, {});
    REQUIRE(gc.size() == 4);
    const Districting out = apply_flip_set(g, rows, gc, {{2, A}});
    CHECK(labels(out) == std::vector<District>{A, A, A, B});
    CHECK(out.cut_edge_count() == 2);
    CHECK(out.district_population(A) == 3);
}

TEST_CASE("propose_and_filter") {
    const DualGraph path = make_path(4);
    const Districting plan(path, {A, A, B, B}, 2);
    ChainParams params;
    params.beta_pop = std::log(2.0) / 2.0;  // pop_eq 0 -> 2 halves the weight

    const Constraints c = Constraints::from(params);
    // no flags; pick component {v1} -> B; then the Metropolis draw
    auto script = [](double u) { return ScriptedStream({kNoMoreFlags, u}, {0}); };

    ScriptedStream accept = script(0.4);
    auto [next, rec] = propose_and_filter(path, plan, params, c, accept);
    CHECK(rec.accepted);
    CHECK(rec.rejected_reason == RejectReason::none);
    CHECK(rec.weight_after == doctest::Approx(0.5));
    CHECK(labels(next) == std::vector<District>{A, B, B, B});
    CHECK(accept.exhausted());

    ScriptedStream reject = script(0.6);
    auto [held, rec2] = propose_and_filter(path, plan, params, c, reject);
    CHECK_FALSE(rec2.accepted);
    CHECK(rec2.rejected_reason == RejectReason::metropolis);
    CHECK(held == plan);

    SUBCASE("uniform weights accept every valid proposal") {
        const DualGraph g = make_grid(4, 4);
        std::vector<District> a(16);
        for (UnitId v = 0; v < 16; ++v) a[v] = v % 4 < 2 ? A : B;
        Districting p(g, a, 2);
        SeededStream rng(21);
        ChainParams flat;
        flat.lambda = 0.2;
        for (int i = 0; i < 500; ++i) {
            auto [q, r] = propose_and_filter(g, p, flat, Constraints::from(flat), rng);
            CHECK((r.accepted || r.rejected_reason == RejectReason::invalid_contiguity));
            if (r.rejected_reason == RejectReason::invalid_contiguity) CHECK(q == p);
            p = std::move(q);
        }
    }
}

TEST_CASE("flip proposal that splits a district is rejected") {
    // 0 - 1 - 2 with A = {0, 1}, B = {2}; plus a pendant making 1 a cut vertex
    //      |
    //      3 (A)
    const DualGraph g({{1}, {0, 2, 3}, {1}, {1}}, {1, 1, 1, 1});
    const Districting plan(g, {A, A, B, A}, 2);
    // components {1} and {2}; script: no flags, pick {1} -> B
    ScriptedStream s({kNoMoreFlags}, {0});
    ChainParams params;
    auto [next, rec] = propose_and_filter(g, plan, params, Constraints::from(params), s);
    CHECK_FALSE(rec.accepted);
    CHECK(rec.rejected_reason == RejectReason::invalid_contiguity);
    CHECK(next == plan);
}

TEST_CASE("single_vertex_chain_step") {
    const DualGraph path = make_path(4);
    const Districting plan(path, {A, A, B, B}, 2);
    ChainParams params;

    ScriptedStream forced({}, {0, 0});  // boundary vertex v1, its only cut edge
    auto [next, rec] = single_vertex_chain_step(path, plan, params, forced);
    CHECK(rec.accepted);
    CHECK(labels(next) == std::vector<District>{A, B, B, B});

    SUBCASE("forced Metropolis draws") {
        params.beta_pop = std::log(2.0) / 2.0;
        for (bool hastings : {true, false}) {
            params.hastings_correction = hastings;
            ScriptedStream lo({0.4}, {0, 0}), hi({0.6}, {0, 0});
            CHECK(single_vertex_chain_step(path, plan, params, lo).second.accepted);
            const auto [held, r] = single_vertex_chain_step(path, plan, params, hi);
            CHECK(r.rejected_reason == RejectReason::metropolis);
            CHECK(held == plan);
        }
    }

    const Districting mono(path, {A, A, A, A}, 1);
    ScriptedStream unused({}, {});
    CHECK(thrown_kind([&] { single_vertex_chain_step(path, mono, params, unused); }) == ErrorKind::NoBoundary);

    // v3 is the sole member of B
    const Districting singleton(path, {A, A, A, B}, 2);
    ScriptedStream pick_v3({}, {1, 0});
    REQUIRE(singleton.boundary()[1] == 3);
    auto [held, r] = single_vertex_chain_step(path, singleton, params, pick_v3);
    CHECK(r.rejected_reason == RejectReason::invalid_contiguity);
    CHECK(held == singleton);
}

TEST_CASE("run_chain") {
    const DualGraph g = make_grid(4, 4);
    std::vector<District> a(16);
    for (UnitId v = 0; v < 16; ++v) a[v] = v < 8 ? A : B;
    const Districting initial(g, a, 2);
    ChainParams params;
    SeededStream rng(17);

    const auto none = run_chain(g, initial, params, 0, rng);
    CHECK(none.plan == initial);
    CHECK(none.trace.empty());

    const auto run = run_chain(g, initial, params, 100, rng);
    std::size_t accepted = 0, valid_proposals = 0;
    for (const auto& r : run.trace) {
        accepted += r.accepted;
        valid_proposals += r.rejected_reason != RejectReason::invalid_contiguity;
    }
    CHECK(accepted == 100);
    CHECK(valid_proposals == 100);
    CHECK(run.trace.back().accepted);
    for (std::size_t i = 0; i < run.trace.size(); ++i) CHECK(run.trace[i].step_index == i);

    // the proposal ratio can still refuse a valid single-vertex move
    const auto walk = run_chain(g, initial, params, 100, rng, ChainKind::single_vertex);
    for (const auto& r : walk.trace) CHECK(r.rejected_reason != RejectReason::tolerance);
    CHECK(std::count_if(walk.trace.begin(), walk.trace.end(), [](const StepRecord& r) { return r.accepted; }) == 100);

    SUBCASE("stall detection") {
        ChainParams stuck;
        stuck.pop_tolerance = 0.0;  // 8/8 is the only admissible split, and every move breaks it
        stuck.stall_cap = 50;
        CHECK(thrown_kind([&] { run_chain(g, initial, stuck, 10, rng, ChainKind::single_vertex); }) ==
              ErrorKind::StallDetected);
    }
}

TEST_CASE("a plan outside the tolerance may move but never further out") {
    const DualGraph path = make_path(6, {1, 1, 1, 1, 1, 1});
    const Districting far(path, {A, B, B, B, B, B}, 2);  // 1 vs 5, ideal 3
    ChainParams params;
    params.hastings_correction = false;
    Constraints tight{0.0, 0.0, 0.0};
    auto position = [](const Districting& p, UnitId v) {
        const auto b = p.boundary();
        return static_cast<std::uint64_t>(std::find(b.begin(), b.end(), v) - b.begin());
    };
    // v1 joins A: 2 vs 4 is closer, accepted although still outside
    ScriptedStream closer({}, {position(far, 1), 0});
    Sampler sampler(path, params, ChainKind::single_vertex);
    Districting plan = far;
    CHECK(sampler.step(plan, tight, closer).accepted);
    CHECK(plan.district_population(A) == 2);
    // v1 returning to B would widen the gap again
    ScriptedStream back({}, {position(plan, 1), 0});
    const StepRecord r = sampler.step(plan, tight, back);
    CHECK(r.rejected_reason == RejectReason::tolerance);
    CHECK(plan.district_population(A) == 2);
}

TEST_CASE("chain closure and cache coherence over long runs") {
    const DualGraph g = make_grid(6, 6);
    std::vector<District> a(36);
    for (UnitId v = 0; v < 36; ++v) a[v] = static_cast<District>((v % 6) / 2);
    ChainParams params;
    params.n_districts = 3;
    params.pop_tolerance = 0.25;
    params.beta_comp = 0.5;
    params.lambda = 0.1;
    for (ChainKind kind : {ChainKind::flip, ChainKind::single_vertex}) {
        SeededStream rng(kind == ChainKind::flip ? 1 : 2);
        std::size_t violations = 0, checked = 0;
        run_chain(g, Districting(g, a, 3), params, 3000, rng, kind, [&](const Districting& p, const StepRecord&) {
            ++checked;
            const std::vector<District> now(p.assignment().begin(), p.assignment().end());
            if (!testing::oracle_valid(g, now, 3) || !testing::oracle_within_tolerance(g, now, 3, 0.25) ||
                p.cut_edge_count() != testing::recount_cut(g, now) ||
                std::vector<std::int64_t>(p.district_populations().begin(), p.district_populations().end()) !=
                    testing::recount_pops(g, now, 3))
                ++violations;
        });
        CHECK(checked >= 3000);
        CHECK(violations == 0);
    }
}

TEST_CASE("identical seeds give identical traces") {
    const DualGraph g = make_grid(5, 5);
    std::vector<District> a(25);
    for (UnitId v = 0; v < 25; ++v) a[v] = v % 5 < 2 ? A : B;
    ChainParams params;
    params.beta_comp = 1.0;
    params.pop_tolerance = 0.3;
    for (ChainKind kind : {ChainKind::flip, ChainKind::single_vertex}) {
        SeededStream r1(99), r2(99);
        const auto x = run_chain(g, Districting(g, a, 2), params, 500, r1, kind);
        const auto y = run_chain(g, Districting(g, a, 2), params, 500, r2, kind);
        CHECK(x.plan == y.plan);
        REQUIRE(x.trace.size() == y.trace.size());
        for (std::size_t i = 0; i < x.trace.size(); ++i) {
            CHECK(x.trace[i].rejected_reason == y.trace[i].rejected_reason);
            CHECK(x.trace[i].weight_after == y.trace[i].weight_after);
        }
    }
}

// Reversibility support: for every accepted flip transition σ→σ' on a small
// instance, build a labelling and flip set that map σ' back to σ.
TEST_CASE("accepted flip transitions can be reversed") {
    const DualGraph g = make_grid(4, 4);
    std::vector<District> a(16);
    for (UnitId v = 0; v < 16; ++v) a[v] = v % 4 < 2 ? A : B;
    Districting plan(g, a, 2);
    ChainParams params;
    params.lambda = 0.3;
    Sampler sampler(g, params);
    SeededStream rng(4);
    int reversed = 0;
    for (int step = 0; step < 400; ++step) {
        const Districting before = plan;
        const StepRecord rec = sampler.step(plan, Constraints::from(params), rng);
        if (!rec.accepted || plan == before) continue;

        // changed vertices, grouped by connectivity among same (old, new) pairs
        std::vector<UnitId> changed;
        for (UnitId v = 0; v < 16; ++v)
            if (plan.label(v) != before.label(v)) changed.push_back(v);
        FlipLabelling lab;
        const auto edges = g.edges();
        for (std::uint32_t i = 0; i < edges.size(); ++i) {
            const Edge& e = edges[i];
            if (plan.label(e.u) != before.label(e.u) && plan.label(e.v) != before.label(e.v) &&
                plan.label(e.u) == plan.label(e.v) && before.label(e.u) == before.label(e.v))
                lab.flagged.push_back(i);
        }
        const auto comps = boundary_components(g, plan, lab);
        FlipSet reverse;
        std::vector<int> covered(16, 0);
        for (std::size_t c = 0; c < comps.size(); ++c) {
            const UnitId v0 = comps[c].vertices.front();
            if (plan.label(v0) == before.label(v0)) continue;
            const District back = before.label(v0);
            REQUIRE(std::binary_search(comps[c].neighbor_districts.begin(), comps[c].neighbor_districts.end(), back));
            reverse.push_back({c, back});
            for (UnitId v : comps[c].vertices) {
                REQUIRE(plan.label(v) != before.label(v));
                ++covered[v];
            }
        }
        for (UnitId v : changed) REQUIRE(covered[v] == 1);
        // chosen components pairwise non-adjacent
        for (std::size_t i = 0; i < reverse.size(); ++i)
            for (std::size_t j = i + 1; j < reverse.size(); ++j)
                for (UnitId u : comps[reverse[i].component].vertices)
                    for (UnitId w : g.neighbors(u))
                        REQUIRE_FALSE(std::binary_search(comps[reverse[j].component].vertices.begin(),
                                                         comps[reverse[j].component].vertices.end(), w));
        CHECK(apply_flip_set(g, plan, comps, reverse) == before);
        ++reversed;
    }
    CHECK(reversed > 50);
}

// Exact stationary law of the single-vertex chain on a small enumerable instance.
TEST_CASE("single-vertex chain samples the weighted distribution") {
    const DualGraph g = make_grid(2, 3, {1, 2, 1, 1, 1, 2});
    const int n = 2;
    const auto omega = testing::enumerate_plans(g, n, 1.0);
    REQUIRE(omega.size() > 5);
    ChainParams params;
    params.beta_pop = 0.5;
    params.beta_comp = 1.0;
    params.n_districts = n;

    std::map<std::uint64_t, double> truth;
    double z = 0.0;
    for (const auto& a : omega) z += std::exp(testing::oracle_log_weight(g, a, n, 0.5, 1.0));
    for (const auto& a : omega)
        truth[testing::plan_code(a, n)] = std::exp(testing::oracle_log_weight(g, a, n, 0.5, 1.0)) / z;

    Districting plan(g, omega.front(), n);
    Sampler sampler(g, params, ChainKind::single_vertex);
    SeededStream rng(12345);
    std::map<std::uint64_t, double> visits;
    const int steps = 200000;
    for (int i = 0; i < steps; ++i) {
        sampler.step(plan, Constraints::from(params), rng);
        visits[testing::plan_code(plan.assignment(), n)] += 1.0 / steps;
    }
    double tv = 0.0;
    for (const auto& [code, p] : truth) tv += std::abs(p - (visits.count(code) ? visits[code] : 0.0));
    for (const auto& [code, p] : visits) {
        CHECK(truth.count(code) == 1);
        (void)p;
    }
    CHECK(tv / 2 < 0.02);
}
