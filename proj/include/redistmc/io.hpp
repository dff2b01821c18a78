#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "redistmc/analysis.hpp"
#include "redistmc/annealing.hpp"
#include "redistmc/diagnostics.hpp"
#include "redistmc/graph.hpp"
#include "redistmc/metrics.hpp"
#include "redistmc/plan.hpp"

namespace redistmc {

inline constexpr int kFormatVersion = 1;

// ---------------------------------------------------------------------------
// Unit graphs

using Ring = std::vector<std::array<double, 2>>;  // lon/lat pairs
using UnitGeometry = std::vector<Ring>;           // one or more rings per unit

struct LoadOptions {
    bool strict_adjacency = false;  // asymmetric adjacency is fatal instead of repaired
    bool derive_adjacency = false;  // replace declared adjacency with geometry-derived rook adjacency
};

struct LoadedGraph {
    DualGraph graph;
    std::vector<UnitGeometry> geometry;  // empty when the file carries none
    std::vector<std::string> warnings;
};

// Parses a unit-graph document:
//   {"format_version": 1,
//    "units": [{"id": "...", "pop": 0, "dem": 0, "rep": 0, "adj": ["..."],
//               "geometry": [[[lon, lat], ...], ...]}, ...]}
// Adjacency is derived from geometry when requested or when no unit has
// an "adj" field. Throws ParseError, DanglingReference, AsymmetricAdjacency
// (strict only), DisconnectedGraph, DegenerateGeometry.
LoadedGraph unit_graph_from_json(const nlohmann::json& doc, const LoadOptions& options = {});
LoadedGraph load_unit_graph(const std::filesystem::path& path, const LoadOptions& options = {});

nlohmann::json unit_graph_to_json(const DualGraph& graph, const std::vector<UnitGeometry>& geometry = {});
void save_unit_graph(const std::filesystem::path& path, const DualGraph& graph,
                     const std::vector<UnitGeometry>& geometry = {});

// Rook adjacency: two units are adjacent iff their rings share at least one
// segment after quantizing coordinates to 1e-7. Throws DegenerateGeometry
// for rings with fewer than three distinct points or non-finite coordinates.
std::vector<std::vector<UnitId>> derive_adjacency(const std::vector<UnitGeometry>& geometry);

// ---------------------------------------------------------------------------
// Plans

// {"format_version": 1, "metadata": {"n_districts": n, "label": "..."},
//  "assignment": {"unit-id": district, ...}}
nlohmann::json plan_to_json(const DualGraph& graph, const Districting& plan, const std::string& label = "");
Districting plan_from_json(const DualGraph& graph, const nlohmann::json& doc);
void save_plan(const std::filesystem::path& path, const DualGraph& graph, const Districting& plan,
               const std::string& label = "");
Districting load_plan(const std::filesystem::path& path, const DualGraph& graph);

// ---------------------------------------------------------------------------
// Run configuration

struct RunConfig {
    std::string chain = "flip";  // flip | single-vertex | anneal
    ChainParams params;
    AnnealSchedule schedule;
    std::uint64_t n_sims = 3000;  // accepted steps per plan for flip / single-vertex chains
    std::size_t n_plans = 50;
    std::size_t n_chains = 0;  // concurrent workers; 0 = hardware concurrency
    std::uint64_t seed = 0;
    std::string output_dir = "out";
    TraceStatistic statistic = TraceStatistic::cut_edges;

    ChainKind kind() const;  // kernel used by the chain / annealer
    void validate() const;
};

RunConfig run_config_from_json(const nlohmann::json& doc);
nlohmann::json run_config_to_json(const RunConfig& config);
RunConfig load_run_config(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Ensembles (JSON lines: one header record, then one record per plan)

std::string ensemble_to_jsonl(const DualGraph& graph, const Ensemble& ensemble);
void save_ensemble(const std::filesystem::path& path, const DualGraph& graph, const Ensemble& ensemble);

// Recomputes scores and tallies for every ceil(1/check_fraction)-th plan,
// starting with the first. Throws ParseError or CoherenceError.
Ensemble ensemble_from_jsonl(const std::string& text, const DualGraph& graph, double check_fraction = 0.05);
Ensemble load_ensemble(const std::filesystem::path& path, const DualGraph& graph, double check_fraction = 0.05);

// ---------------------------------------------------------------------------
// Chain traces (JSON lines: {"chain": i, "statistic": "...", "series": [...], "outcomes": "aacm..."})

std::string traces_to_jsonl(const std::vector<ChainTrace>& traces, TraceStatistic statistic);
void save_traces(const std::filesystem::path& path, const std::vector<ChainTrace>& traces, TraceStatistic statistic);
std::vector<ChainTrace> load_traces(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& contents);

}  // namespace redistmc
