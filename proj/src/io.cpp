#include "redistmc/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <tuple>

#include "redistmc/error.hpp"

namespace redistmc {

using nlohmann::json;

namespace {

[[noreturn]] void parse_error(const std::string& what) { throw Error(ErrorKind::ParseError, what); }

void check_version(const json& doc, const char* what) {
    if (!doc.is_object()) parse_error(std::string(what) + ": document is not a JSON object");
    if (doc.contains("format_version")) {
        if (!doc["format_version"].is_number_integer() || doc["format_version"].get<int>() != kFormatVersion)
            parse_error(std::string(what) + ": unsupported format_version");
    }
}

std::int64_t nonnegative_int(const json& unit, const char* key, bool required, const std::string& id) {
    if (!unit.contains(key)) {
        if (required) parse_error("unit " + id + " is missing \"" + key + "\"");
        return 0;
    }
    const json& v = unit[key];
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0)
        parse_error("unit " + id + ": \"" + key + "\" must be a nonnegative integer");
    return v.get<std::int64_t>();
}

UnitGeometry parse_geometry(const json& g, const std::string& id) {
    if (!g.is_array()) parse_error("unit " + id + ": geometry must be an array of rings");
    UnitGeometry rings;
    for (const json& ring : g) {
        if (!ring.is_array()) parse_error("unit " + id + ": each ring must be an array of points");
        Ring r;
        for (const json& p : ring) {
            if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number())
                parse_error("unit " + id + ": points must be [lon, lat] pairs");
            r.push_back({p[0].get<double>(), p[1].get<double>()});
        }
        rings.push_back(std::move(r));
    }
    return rings;
}

using QPoint = std::pair<std::int64_t, std::int64_t>;

QPoint quantize(const std::array<double, 2>& p) {
    if (!std::isfinite(p[0]) || !std::isfinite(p[1]))
        throw Error(ErrorKind::DegenerateGeometry, "non-finite coordinate");
    return {std::llround(p[0] * 1e7), std::llround(p[1] * 1e7)};
}

}  // namespace

std::vector<std::vector<UnitId>> derive_adjacency(const std::vector<UnitGeometry>& geometry) {
    std::map<std::pair<QPoint, QPoint>, std::vector<UnitId>> segments;
    for (UnitId unit = 0; unit < geometry.size(); ++unit) {
        if (geometry[unit].empty())
            throw Error(ErrorKind::DegenerateGeometry, "unit " + std::to_string(unit) + " has no rings");
        for (const Ring& ring : geometry[unit]) {
            std::vector<QPoint> pts;
            for (const auto& p : ring) {
                const QPoint q = quantize(p);
                if (pts.empty() || pts.back() != q) pts.push_back(q);
            }
            while (pts.size() > 1 && pts.front() == pts.back()) pts.pop_back();
            std::vector<QPoint> distinct = pts;
            std::sort(distinct.begin(), distinct.end());
            distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
            if (distinct.size() < 3)
                throw Error(ErrorKind::DegenerateGeometry,
                            "unit " + std::to_string(unit) + " has a ring with fewer than three distinct points");
            for (std::size_t i = 0; i < pts.size(); ++i) {
                QPoint a = pts[i];
                QPoint b = pts[(i + 1) % pts.size()];
                if (b < a) std::swap(a, b);
                auto& owners = segments[{a, b}];
                if (owners.empty() || owners.back() != unit) owners.push_back(unit);
            }
        }
    }
    std::vector<std::vector<UnitId>> adj(geometry.size());
    for (const auto& [seg, owners] : segments) {
        for (std::size_t i = 0; i < owners.size(); ++i) {
            for (std::size_t j = i + 1; j < owners.size(); ++j) {
                adj[owners[i]].push_back(owners[j]);
                adj[owners[j]].push_back(owners[i]);
            }
        }
    }
    for (auto& list : adj) {
        std::sort(list.begin(), list.end());
        list.erase(std::unique(list.begin(), list.end()), list.end());
    }
    return adj;
}

LoadedGraph unit_graph_from_json(const json& doc, const LoadOptions& options) {
    check_version(doc, "unit graph");
    if (!doc.contains("units") || !doc["units"].is_array()) parse_error("unit graph: missing \"units\" array");
    const json& units = doc["units"];
    const std::size_t n = units.size();
    if (n == 0) parse_error("unit graph: no units");

    LoadedGraph out;
    std::vector<std::string> names;
    std::vector<std::int64_t> pops;
    std::vector<Votes> votes;
    std::map<std::string, UnitId> index;
    bool any_adj = false;
    bool all_geometry = true;
    std::size_t zero_vote_units = 0;
    for (const json& unit : units) {
        if (!unit.is_object() || !unit.contains("id") || !unit["id"].is_string())
            parse_error("unit graph: every unit needs a string \"id\"");
        const std::string id = unit["id"].get<std::string>();
        if (!index.emplace(id, static_cast<UnitId>(names.size())).second) parse_error("duplicate unit id " + id);
        names.push_back(id);
        pops.push_back(nonnegative_int(unit, "pop", true, id));
        votes.push_back({nonnegative_int(unit, "dem", false, id), nonnegative_int(unit, "rep", false, id)});
        if (votes.back().dem + votes.back().rep == 0) ++zero_vote_units;
        any_adj = any_adj || unit.contains("adj");
        if (unit.contains("geometry")) out.geometry.push_back(parse_geometry(unit["geometry"], id));
        else all_geometry = false;
    }
    if (!all_geometry) out.geometry.clear();
    if (zero_vote_units > 0)
        out.warnings.push_back(std::to_string(zero_vote_units) + " unit(s) have no recorded votes");

    std::vector<std::vector<UnitId>> adj(n);
    if (options.derive_adjacency || (!any_adj && all_geometry)) {
        if (!all_geometry) parse_error("adjacency derivation requested but not every unit has geometry");
        adj = derive_adjacency(out.geometry);
    } else {
        for (UnitId v = 0; v < n; ++v) {
            const json& unit = units[v];
            if (!unit.contains("adj")) continue;
            if (!unit["adj"].is_array()) parse_error("unit " + names[v] + ": \"adj\" must be an array");
            for (const json& ref : unit["adj"]) {
                if (!ref.is_string()) parse_error("unit " + names[v] + ": adjacency entries must be unit ids");
                auto it = index.find(ref.get<std::string>());
                if (it == index.end())
                    throw Error(ErrorKind::DanglingReference,
                                "unit " + names[v] + " lists unknown neighbor " + ref.get<std::string>());
                if (it->second == v) {
                    if (options.strict_adjacency)
                        throw Error(ErrorKind::AsymmetricAdjacency, "unit " + names[v] + " lists itself");
                    out.warnings.push_back("dropped self-adjacency of unit " + names[v]);
                    continue;
                }
                adj[v].push_back(it->second);
            }
            std::sort(adj[v].begin(), adj[v].end());
            adj[v].erase(std::unique(adj[v].begin(), adj[v].end()), adj[v].end());
        }
        std::vector<std::pair<UnitId, UnitId>> missing;
        for (UnitId v = 0; v < n; ++v)
            for (UnitId u : adj[v])
                if (!std::binary_search(adj[u].begin(), adj[u].end(), v)) missing.emplace_back(u, v);
        if (!missing.empty()) {
            if (options.strict_adjacency)
                throw Error(ErrorKind::AsymmetricAdjacency,
                            "unit " + names[missing.front().second] + " lists " + names[missing.front().first] +
                                " but not the reverse");
            for (const auto& [u, v] : missing) {
                adj[u].push_back(v);
                out.warnings.push_back("symmetrized adjacency " + names[u] + " -> " + names[v]);
            }
            for (auto& list : adj) std::sort(list.begin(), list.end());
        }
    }
    out.graph = DualGraph(adj, std::move(pops), std::move(votes), std::move(names));
    return out;
}

LoadedGraph load_unit_graph(const std::filesystem::path& path, const LoadOptions& options) {
    json doc;
    try {
        doc = json::parse(read_file(path));
    } catch (const json::exception& e) {
        parse_error(path.string() + ": " + e.what());
    }
    return unit_graph_from_json(doc, options);
}

json unit_graph_to_json(const DualGraph& graph, const std::vector<UnitGeometry>& geometry) {
    json units = json::array();
    for (UnitId v = 0; v < graph.size(); ++v) {
        json unit = {{"id", graph.name(v)},
                     {"pop", graph.population(v)},
                     {"dem", graph.votes(v).dem},
                     {"rep", graph.votes(v).rep}};
        json adj = json::array();
        for (UnitId u : graph.neighbors(v)) adj.push_back(graph.name(u));
        unit["adj"] = std::move(adj);
        if (!geometry.empty()) {
            json rings = json::array();
            for (const Ring& ring : geometry[v]) {
                json r = json::array();
                for (const auto& p : ring) r.push_back({p[0], p[1]});
                rings.push_back(std::move(r));
            }
            unit["geometry"] = std::move(rings);
        }
        units.push_back(std::move(unit));
    }
    return {{"format_version", kFormatVersion}, {"units", std::move(units)}};
}

void save_unit_graph(const std::filesystem::path& path, const DualGraph& graph,
                     const std::vector<UnitGeometry>& geometry) {
    write_file(path, unit_graph_to_json(graph, geometry).dump(1) + "\n");
}

json plan_to_json(const DualGraph& graph, const Districting& plan, const std::string& label) {
    json assignment = json::object();
    for (UnitId v = 0; v < graph.size(); ++v) assignment[graph.name(v)] = plan.label(v);
    return {{"format_version", kFormatVersion},
            {"metadata", {{"n_districts", plan.n_districts()}, {"label", label}}},
            {"assignment", std::move(assignment)}};
}

namespace {

std::vector<District> assignment_from_json(const DualGraph& graph, const json& assignment) {
    if (!assignment.is_object()) parse_error("plan: \"assignment\" must map unit ids to districts");
    std::vector<District> labels(graph.size(), -1);
    for (const auto& [id, value] : assignment.items()) {
        const auto v = graph.find(id);
        if (!v) throw Error(ErrorKind::DanglingReference, "plan assigns unknown unit " + id);
        if (!value.is_number_integer()) parse_error("plan: district for unit " + id + " is not an integer");
        labels[*v] = value.get<District>();
    }
    for (UnitId v = 0; v < graph.size(); ++v)
        if (labels[v] < 0 && !assignment.contains(graph.name(v)))
            parse_error("plan does not assign unit " + graph.name(v));
    return labels;
}

int n_districts_from(const json& doc) {
    const json* meta = doc.contains("metadata") ? &doc["metadata"] : &doc;
    if (!meta->contains("n_districts") || !(*meta)["n_districts"].is_number_integer())
        parse_error("plan: metadata.n_districts missing");
    return (*meta)["n_districts"].get<int>();
}

}  // namespace

Districting plan_from_json(const DualGraph& graph, const json& doc) {
    check_version(doc, "plan");
    if (!doc.contains("assignment")) parse_error("plan: missing \"assignment\"");
    const int n = n_districts_from(doc);
    Districting plan(graph, assignment_from_json(graph, doc["assignment"]), n);
    for (District d = 0; d < n; ++d)
        if (plan.district_size(d) == 0)
            throw Error(ErrorKind::InvalidPlan, "plan leaves district " + std::to_string(d) + " empty");
    return plan;
}

void save_plan(const std::filesystem::path& path, const DualGraph& graph, const Districting& plan,
               const std::string& label) {
    write_file(path, plan_to_json(graph, plan, label).dump(1) + "\n");
}

Districting load_plan(const std::filesystem::path& path, const DualGraph& graph) {
    json doc;
    try {
        doc = json::parse(read_file(path));
    } catch (const json::exception& e) {
        parse_error(path.string() + ": " + e.what());
    }
    return plan_from_json(graph, doc);
}

// ---------------------------------------------------------------------------

namespace {

json params_to_json(const ChainParams& p) {
    return {{"beta_pop", p.beta_pop},         {"beta_comp", p.beta_comp},
            {"pop_tolerance", p.pop_tolerance}, {"lambda", p.lambda},
            {"n_districts", p.n_districts},   {"rng_seed", p.rng_seed},
            {"hastings_correction", p.hastings_correction}, {"stall_cap", p.stall_cap},
            {"flip_selection", p.flip_selection.rule == FlipSelection::Rule::coin ? "coin" : "count"},
            {"flip_extra_mean", p.flip_selection.extra_mean}};
}

json schedule_to_json(const AnnealSchedule& s) {
    return {{"hot_steps", s.hot_steps},
            {"steps_per_delta", s.steps_per_delta},
            {"cold_steps", s.cold_steps},
            {"pop_tol_start", s.pop_tol_start},
            {"pop_tol_target", s.pop_tol_target},
            {"pop_tol_delta", s.pop_tol_delta},
            {"comp_weight_start", s.comp_weight_start},
            {"comp_weight_target", s.comp_weight_target},
            {"comp_weight_delta", s.comp_weight_delta}};
}

template <typename T>
void read_field(const json& obj, const char* key, T& out) {
    if (!obj.contains(key)) return;
    try {
        out = obj[key].get<T>();
    } catch (const json::exception&) {
        parse_error(std::string("field \"") + key + "\" has the wrong type");
    }
}

ChainParams params_from_json(const json& j) {
    if (!j.is_object()) parse_error("\"params\" must be an object");
    ChainParams p;
    read_field(j, "beta_pop", p.beta_pop);
    read_field(j, "beta_comp", p.beta_comp);
    read_field(j, "pop_tolerance", p.pop_tolerance);
    read_field(j, "lambda", p.lambda);
    read_field(j, "n_districts", p.n_districts);
    read_field(j, "rng_seed", p.rng_seed);
    read_field(j, "hastings_correction", p.hastings_correction);
    read_field(j, "stall_cap", p.stall_cap);
    std::string rule = "count";
    read_field(j, "flip_selection", rule);
    if (rule == "coin")
        p.flip_selection.rule = FlipSelection::Rule::coin;
    else if (rule != "count")
        throw Error(ErrorKind::InvalidArgument, "flip_selection must be \"count\" or \"coin\"");
    read_field(j, "flip_extra_mean", p.flip_selection.extra_mean);
    return p;
}

AnnealSchedule schedule_from_json(const json& j) {
    if (!j.is_object()) parse_error("\"schedule\" must be an object");
    AnnealSchedule s;
    read_field(j, "hot_steps", s.hot_steps);
    read_field(j, "steps_per_delta", s.steps_per_delta);
    read_field(j, "cold_steps", s.cold_steps);
    read_field(j, "pop_tol_start", s.pop_tol_start);
    read_field(j, "pop_tol_target", s.pop_tol_target);
    read_field(j, "pop_tol_delta", s.pop_tol_delta);
    read_field(j, "comp_weight_start", s.comp_weight_start);
    read_field(j, "comp_weight_target", s.comp_weight_target);
    read_field(j, "comp_weight_delta", s.comp_weight_delta);
    return s;
}

}  // namespace

ChainKind RunConfig::kind() const { return chain == "single-vertex" ? ChainKind::single_vertex : ChainKind::flip; }

void RunConfig::validate() const {
    if (chain != "flip" && chain != "single-vertex" && chain != "anneal")
        throw Error(ErrorKind::InvalidArgument, "chain must be flip, single-vertex or anneal");
    params.validate();
    if (chain == "anneal") schedule.validate();
    if (n_plans == 0) throw Error(ErrorKind::InvalidArgument, "n_plans must be positive");
}

RunConfig run_config_from_json(const json& doc) {
    check_version(doc, "run config");
    RunConfig c;
    read_field(doc, "chain", c.chain);
    if (doc.contains("params")) c.params = params_from_json(doc["params"]);
    if (doc.contains("schedule")) c.schedule = schedule_from_json(doc["schedule"]);
    read_field(doc, "n_sims", c.n_sims);
    read_field(doc, "n_plans", c.n_plans);
    read_field(doc, "n_chains", c.n_chains);
    read_field(doc, "seed", c.seed);
    read_field(doc, "output_dir", c.output_dir);
    if (doc.contains("statistic")) {
        std::string s;
        read_field(doc, "statistic", s);
        c.statistic = trace_statistic_from_string(s);
    }
    c.validate();
    return c;
}

json run_config_to_json(const RunConfig& c) {
    return {{"format_version", kFormatVersion},
            {"chain", c.chain},
            {"params", params_to_json(c.params)},
            {"schedule", schedule_to_json(c.schedule)},
            {"n_sims", c.n_sims},
            {"n_plans", c.n_plans},
            {"n_chains", c.n_chains},
            {"seed", c.seed},
            {"output_dir", c.output_dir},
            {"statistic", to_string(c.statistic)}};
}

RunConfig load_run_config(const std::filesystem::path& path) {
    json doc;
    try {
        doc = json::parse(read_file(path));
    } catch (const json::exception& e) {
        parse_error(path.string() + ": " + e.what());
    }
    return run_config_from_json(doc);
}

// ---------------------------------------------------------------------------

std::string ensemble_to_jsonl(const DualGraph& graph, const Ensemble& ensemble) {
    const Provenance& p = ensemble.provenance;
    json prov = {{"seed", p.seed},
                 {"chain", p.chain},
                 {"params", params_to_json(p.params)},
                 {"steps_per_plan", p.steps_per_plan}};
    prov["schedule"] = p.schedule ? schedule_to_json(*p.schedule) : json(nullptr);
    std::string out = json{{"format_version", kFormatVersion},
                           {"record", "header"},
                           {"n_districts", ensemble.n_districts},
                           {"n_plans", ensemble.plans.size()},
                           {"provenance", std::move(prov)}}
                          .dump();
    out += '\n';
    for (std::size_t i = 0; i < ensemble.plans.size(); ++i) {
        const EnsemblePlan& plan = ensemble.plans[i];
        json assignment = json::object();
        for (UnitId v = 0; v < graph.size(); ++v) assignment[graph.name(v)] = plan.assignment[v];
        out += json{{"record", "plan"},
                    {"index", i},
                    {"metadata", {{"n_districts", ensemble.n_districts}, {"label", "plan-" + std::to_string(i)}}},
                    {"assignment", std::move(assignment)},
                    {"pop_eq", plan.pop_eq},
                    {"comp", plan.comp},
                    {"seats", plan.seats},
                    {"ties", plan.ties}}
                   .dump();
        out += '\n';
    }
    return out;
}

void save_ensemble(const std::filesystem::path& path, const DualGraph& graph, const Ensemble& ensemble) {
    write_file(path, ensemble_to_jsonl(graph, ensemble));
}

Ensemble ensemble_from_jsonl(const std::string& text, const DualGraph& graph, double check_fraction) {
    std::istringstream in(text);
    std::string line;
    Ensemble ens;
    bool header = false;
    std::size_t declared = 0;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json rec;
        try {
            rec = json::parse(line);
        } catch (const json::exception& e) {
            parse_error("ensemble line " + std::to_string(line_no) + ": " + e.what());
        }
        try {
            if (!header) {
                check_version(rec, "ensemble");
                if (rec.value("record", "") != "header") parse_error("ensemble: first record must be the header");
                ens.n_districts = rec.at("n_districts").get<int>();
                declared = rec.at("n_plans").get<std::size_t>();
                const json& prov = rec.at("provenance");
                ens.provenance.seed = prov.at("seed").get<std::uint64_t>();
                ens.provenance.chain = prov.at("chain").get<std::string>();
                ens.provenance.params = params_from_json(prov.at("params"));
                ens.provenance.steps_per_plan = prov.at("steps_per_plan").get<std::uint64_t>();
                if (!prov.at("schedule").is_null()) ens.provenance.schedule = schedule_from_json(prov["schedule"]);
                header = true;
                continue;
            }
            if (rec.value("record", "") != "plan") parse_error("ensemble line " + std::to_string(line_no) + " is not a plan record");
            EnsemblePlan plan;
            plan.assignment = assignment_from_json(graph, rec.at("assignment"));
            plan.pop_eq = rec.at("pop_eq").get<double>();
            plan.comp = rec.at("comp").get<double>();
            plan.seats = rec.at("seats").get<int>();
            plan.ties = rec.at("ties").get<int>();
            ens.plans.push_back(std::move(plan));
        } catch (const json::exception& e) {
            parse_error("ensemble line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    if (!header) parse_error("ensemble: missing header record");
    if (declared != ens.plans.size())
        parse_error("ensemble header declares " + std::to_string(declared) + " plans but file holds " +
                    std::to_string(ens.plans.size()));

    if (check_fraction > 0.0 && !ens.plans.empty()) {
        const auto stride = static_cast<std::size_t>(std::ceil(1.0 / std::min(1.0, check_fraction)));
        for (std::size_t i = 0; i < ens.plans.size(); i += stride) {
            const EnsemblePlan& stored = ens.plans[i];
            const Districting plan(graph, stored.assignment, ens.n_districts);
            if (!is_valid(graph, plan))
                throw Error(ErrorKind::CoherenceError, "ensemble plan " + std::to_string(i) + " is not a valid plan");
            const EnsemblePlan fresh = score_plan(graph, plan);
            auto close = [](double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(b)); };
            if (fresh.seats != stored.seats || fresh.ties != stored.ties || !close(stored.pop_eq, fresh.pop_eq) ||
                !close(stored.comp, fresh.comp))
                throw Error(ErrorKind::CoherenceError,
                            "ensemble plan " + std::to_string(i) + ": stored scores disagree with recomputation");
        }
    }
    return ens;
}

Ensemble load_ensemble(const std::filesystem::path& path, const DualGraph& graph, double check_fraction) {
    return ensemble_from_jsonl(read_file(path), graph, check_fraction);
}

// ---------------------------------------------------------------------------

std::string traces_to_jsonl(const std::vector<ChainTrace>& traces, TraceStatistic statistic) {
    std::string out;
    for (std::size_t i = 0; i < traces.size(); ++i) {
        std::string codes;
        codes.reserve(traces[i].outcomes.size());
        for (RejectReason r : traces[i].outcomes) codes.push_back(outcome_code(r));
        out += json{{"format_version", kFormatVersion},
                    {"chain", i},
                    {"statistic", to_string(statistic)},
                    {"series", traces[i].series},
                    {"outcomes", codes}}
                   .dump();
        out += '\n';
    }
    return out;
}

void save_traces(const std::filesystem::path& path, const std::vector<ChainTrace>& traces, TraceStatistic statistic) {
    write_file(path, traces_to_jsonl(traces, statistic));
}

std::vector<ChainTrace> load_traces(const std::filesystem::path& path) {
    std::istringstream in(read_file(path));
    std::string line;
    std::vector<ChainTrace> traces;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        try {
            const json rec = json::parse(line);
            check_version(rec, "trace");
            ChainTrace t;
            t.series = rec.at("series").get<std::vector<double>>();
            for (char c : rec.value("outcomes", std::string())) t.outcomes.push_back(outcome_from_code(c));
            traces.push_back(std::move(t));
        } catch (const json::exception& e) {
            parse_error(path.string() + ": " + e.what());
        }
    }
    return traces;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::ParseError, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::InvalidArgument, "cannot write " + path.string());
    out << contents;
    if (!out) throw Error(ErrorKind::InvalidArgument, "write failed for " + path.string());
}

}  // namespace redistmc
