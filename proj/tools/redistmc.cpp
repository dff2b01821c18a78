// redistmc command-line driver: ingest, seed, run, diagnose, analyze.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "redistmc/analysis.hpp"
#include "redistmc/diagnostics.hpp"
#include "redistmc/error.hpp"
#include "redistmc/io.hpp"
#include "redistmc/runner.hpp"
#include "redistmc/seed.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace redistmc;

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitNotConverged = 2;

void report_error(std::string_view kind, const std::string& message) {
    std::cerr << json{{"error", kind}, {"message", message}}.dump() << '\n';
}

LoadedGraph load_graph(const std::string& path, bool strict) {
    LoadOptions opts;
    opts.strict_adjacency = strict;
    LoadedGraph loaded = load_unit_graph(path, opts);
    for (const auto& w : loaded.warnings) std::cerr << json{{"warning", w}}.dump() << '\n';
    return loaded;
}

json summary_json(const AcceptanceSummary& s) {
    return {{"proposals", s.proposals},
            {"accepted", s.accepted},
            {"rate", s.rate},
            {"rejected",
             {{"invalid_contiguity", s.invalid_contiguity}, {"tolerance", s.tolerance}, {"metropolis", s.metropolis}}}};
}

AcceptanceSummary merge(const std::vector<AcceptanceSummary>& parts) {
    AcceptanceSummary total;
    for (const auto& s : parts) {
        total.proposals += s.proposals;
        total.accepted += s.accepted;
        total.invalid_contiguity += s.invalid_contiguity;
        total.tolerance += s.tolerance;
        total.metropolis += s.metropolis;
    }
    total.rate = total.proposals ? static_cast<double>(total.accepted) / static_cast<double>(total.proposals) : 0.0;
    return total;
}

Districting initial_plan(const DualGraph& graph, const RunConfig& config, const std::string& init_path) {
    if (!init_path.empty()) return load_plan(init_path, graph);
    SeededStream rng(derive_seed(config.seed, UINT64_MAX));
    const double tol = config.chain == "anneal" ? config.schedule.pop_tol_start : config.params.pop_tolerance;
    return seed_plan(graph, config.params.n_districts, tol, rng);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Metropolis flip-chain districting sampler with simulated annealing"};
    app.require_subcommand(1);

    std::string graph_path, out_path, config_path, init_path, enacted_path, ensemble_path;
    bool strict = false;
    std::optional<std::uint64_t> seed_override;
    std::optional<std::size_t> chains_override;

    // ingest
    auto* ingest = app.add_subcommand("ingest", "Validate a unit-graph file and write its normalized form");
    bool derive = false;
    ingest->add_option("input", graph_path, "Unit-graph JSON")->required()->check(CLI::ExistingFile);
    ingest->add_option("--out", out_path, "Normalized unit-graph output");
    ingest->add_flag("--derive-adjacency", derive, "Rebuild adjacency from unit geometry (rook rule)");
    ingest->add_flag("--strict-adjacency", strict, "Fail on asymmetric adjacency instead of repairing it");

    // seed
    auto* seed = app.add_subcommand("seed", "Build an initial plan by balanced region growing");
    int n_districts = 2;
    double tolerance = 0.1;
    seed->add_option("--graph", graph_path, "Unit-graph JSON")->required()->check(CLI::ExistingFile);
    seed->add_option("--districts", n_districts, "Number of districts")->required();
    seed->add_option("--tolerance", tolerance, "Population tolerance")->check(CLI::Range(0.0, 1.0));
    seed->add_option("--seed", seed_override, "Random seed");
    seed->add_option("--out", out_path, "Plan output file")->required();
    seed->add_flag("--strict-adjacency", strict);

    // run
    auto* run = app.add_subcommand("run", "Sample an ensemble from a run configuration");
    run->add_option("--config", config_path, "Run configuration JSON")->required()->check(CLI::ExistingFile);
    run->add_option("--graph", graph_path, "Unit-graph JSON")->required()->check(CLI::ExistingFile);
    run->add_option("--init", init_path, "Initial plan (default: seeded plan)")->check(CLI::ExistingFile);
    run->add_option("--seed", seed_override, "Override the configured seed");
    run->add_option("--chains", chains_override, "Concurrent chains");
    run->add_option("--out", out_path, "Output directory (default: config output_dir)");
    run->add_flag("--strict-adjacency", strict);

    // diagnose
    auto* diagnose = app.add_subcommand("diagnose", "Gelman-Rubin and acceptance report over chain traces");
    std::vector<std::string> trace_files;
    double discard = 0.5;
    double threshold = 1.1;
    bool search = false;
    std::vector<std::uint64_t> grid;
    diagnose->add_option("traces", trace_files, "Trace JSON-lines files")->check(CLI::ExistingFile);
    diagnose->add_option("--discard", discard, "Burn-in fraction dropped from each chain")->check(CLI::Range(0.0, 0.999));
    diagnose->add_option("--threshold", threshold, "R-hat convergence threshold");
    diagnose->add_option("--out", out_path, "Report output file (default: stdout)");
    diagnose->add_flag("--search", search, "Run the minimum-steps search instead of reading traces");
    diagnose->add_option("--config", config_path, "Run configuration (search mode)")->check(CLI::ExistingFile);
    diagnose->add_option("--graph", graph_path, "Unit-graph JSON (search mode)")->check(CLI::ExistingFile);
    diagnose->add_option("--init", init_path, "Initial plan (search mode)")->check(CLI::ExistingFile);
    diagnose->add_option("--grid", grid, "Ascending accepted-step counts (search mode)")->delimiter(',');
    diagnose->add_option("--chains", chains_override, "Chains per grid point (search mode, default 10)");
    diagnose->add_option("--seed", seed_override, "Override the configured seed (search mode)");
    diagnose->add_flag("--strict-adjacency", strict);

    // analyze
    auto* analyze = app.add_subcommand("analyze", "Seats-won distribution, fitted probabilities, enacted comparison");
    std::optional<int> enacted_seats;
    analyze->add_option("--graph", graph_path, "Unit-graph JSON")->required()->check(CLI::ExistingFile);
    analyze->add_option("--ensemble", ensemble_path, "Ensemble JSON-lines")->required()->check(CLI::ExistingFile);
    analyze->add_option("--enacted", enacted_path, "Enacted plan file")->check(CLI::ExistingFile);
    analyze->add_option("--enacted-seats", enacted_seats, "Enacted Democratic seat count");
    analyze->add_option("--out", out_path, "Output directory")->required();
    analyze->add_flag("--strict-adjacency", strict);

    CLI11_PARSE(app, argc, argv);

    try {
        if (ingest->parsed()) {
            LoadOptions opts{strict, derive};
            LoadedGraph loaded = load_unit_graph(graph_path, opts);
            for (const auto& w : loaded.warnings) std::cerr << json{{"warning", w}}.dump() << '\n';
            if (!out_path.empty()) save_unit_graph(out_path, loaded.graph, loaded.geometry);
            std::cout << json{{"units", loaded.graph.size()},
                              {"edges", loaded.graph.edge_count()},
                              {"population", loaded.graph.total_population()},
                              {"warnings", loaded.warnings.size()}}
                             .dump()
                      << '\n';
            return 0;
        }

        if (seed->parsed()) {
            LoadedGraph loaded = load_graph(graph_path, strict);
            SeededStream rng(seed_override.value_or(0));
            Districting plan = seed_plan(loaded.graph, n_districts, tolerance, rng);
            save_plan(out_path, loaded.graph, plan, "seed");
            std::cout << json{{"districts", n_districts}, {"populations", plan.district_populations()}}.dump() << '\n';
            return 0;
        }

        if (run->parsed()) {
            RunConfig config = load_run_config(config_path);
            if (seed_override) config.seed = *seed_override;
            if (chains_override) config.n_chains = *chains_override;
            const fs::path out_dir = out_path.empty() ? fs::path(config.output_dir) : fs::path(out_path);
            LoadedGraph loaded = load_graph(graph_path, strict);
            const Districting init = initial_plan(loaded.graph, config, init_path);
            RunResult result = run_ensemble(loaded.graph, init, config);
            fs::create_directories(out_dir);
            save_ensemble(out_dir / "ensemble.jsonl", loaded.graph, result.ensemble);
            save_traces(out_dir / "traces.jsonl", result.traces, config.statistic);
            json summary = {{"config", run_config_to_json(config)},
                            {"plans", result.ensemble.plans.size()},
                            {"acceptance", summary_json(merge(result.acceptance))}};
            write_file(out_dir / "run.json", summary.dump(1) + "\n");
            std::cout << summary["acceptance"].dump() << '\n';
            return 0;
        }

        if (diagnose->parsed()) {
            json report;
            bool converged = false;
            if (search) {
                if (config_path.empty() || graph_path.empty() || grid.empty())
                    throw Error(ErrorKind::InvalidArgument, "--search needs --config, --graph and --grid");
                RunConfig config = load_run_config(config_path);
                if (seed_override) config.seed = *seed_override;
                LoadedGraph loaded = load_graph(graph_path, strict);
                const Districting init = initial_plan(loaded.graph, config, init_path);
                SearchOptions opts{config.kind(), config.statistic, discard, config.n_chains};
                try {
                    MinStepsResult res = min_steps_search(loaded.graph, init, config.params, chains_override.value_or(10),
                                                          threshold, grid, config.seed, opts);
                    report = {{"steps", res.steps}, {"profile", res.profile}};
                    converged = true;
                } catch (const NotConvergedError& e) {
                    report = {{"steps", nullptr}, {"profile", e.profile()}};
                }
            } else {
                if (trace_files.empty()) throw Error(ErrorKind::InvalidArgument, "no trace files given");
                std::vector<ChainTrace> traces;
                for (const auto& f : trace_files) {
                    auto part = load_traces(f);
                    traces.insert(traces.end(), part.begin(), part.end());
                }
                const double rhat = gelman_rubin(std::span<const ChainTrace>(traces), discard);
                json per_chain = json::array();
                std::vector<AcceptanceSummary> parts;
                for (const auto& t : traces) {
                    parts.push_back(acceptance_summary(t));
                    per_chain.push_back(summary_json(parts.back()));
                }
                report = {{"chains", traces.size()},
                          {"r_hat", rhat},
                          {"acceptance", summary_json(merge(parts))},
                          {"per_chain", per_chain}};
                converged = rhat < threshold;
            }
            report["format_version"] = kFormatVersion;
            report["threshold"] = threshold;
            report["discard_fraction"] = discard;
            report["converged"] = converged;
            if (out_path.empty()) std::cout << report.dump(1) << '\n';
            else write_file(out_path, report.dump(1) + "\n");
            if (!converged) {
                report_error("NotConverged", "R-hat did not fall below " + std::to_string(threshold));
                return kExitNotConverged;
            }
            return 0;
        }

        if (analyze->parsed()) {
            LoadedGraph loaded = load_graph(graph_path, strict);
            const Ensemble ens = load_ensemble(ensemble_path, loaded.graph);
            const OutcomeDistribution dist = outcome_distribution(ens);
            std::optional<int> enacted = enacted_seats;
            if (!enacted_path.empty()) enacted = seats_won(loaded.graph, load_plan(enacted_path, loaded.graph)).dem_seats;

            const fs::path out_dir(out_path);
            write_file(out_dir / "histogram.csv", histogram_csv(dist, enacted));
            write_file(out_dir / "histogram.svg", histogram_svg(dist, enacted));

            json counts = json::object();
            for (const auto& [k, c] : dist.counts) counts[std::to_string(k)] = c;
            json report = {{"format_version", kFormatVersion},
                           {"n_plans", dist.n_plans},
                           {"mean", dist.mean},
                           {"stddev", dist.stddev},
                           {"counts", counts}};
            std::size_t tied = 0;
            for (const auto& p : ens.plans) tied += p.ties > 0;
            report["plans_with_ties"] = tied;
            if (dist.stddev > 0.0) {
                int lo = dist.counts.begin()->first, hi = dist.counts.rbegin()->first;
                if (enacted) {
                    lo = std::min(lo, *enacted);
                    hi = std::max(hi, *enacted);
                }
                json probs = json::object();
                for (int k = lo; k <= hi; ++k) probs[std::to_string(k)] = outcome_probability(dist, k);
                report["probabilities"] = probs;
                if (enacted) {
                    const EnactedComparison cmp = enacted_comparison(dist, *enacted);
                    report["enacted"] = {{"seats", *enacted},
                                         {"z_score", cmp.z_score},
                                         {"probability", cmp.probability},
                                         {"sigma_distance", cmp.sigma_distance}};
                }
            } else {
                report["probabilities"] = nullptr;
                report["warning"] = "DegenerateSpread: every plan gives the same outcome";
            }
            write_file(out_dir / "report.json", report.dump(1) + "\n");
            std::cout << report.dump() << '\n';
            return 0;
        }
    } catch (const Error& e) {
        report_error(to_string(e.kind()), e.what());
        const bool convergence = e.kind() == ErrorKind::NotConverged || e.kind() == ErrorKind::StallDetected;
        return convergence ? kExitNotConverged : kExitValidation;
    } catch (const std::exception& e) {
        report_error("Internal", e.what());
        return kExitValidation;
    }
    return 0;
}
