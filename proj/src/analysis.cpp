#include "redistmc/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

#include <boost/math/special_functions/gamma.hpp>

#include "redistmc/error.hpp"

namespace redistmc {

SeatTally seats_won(const DualGraph& graph, const Districting& plan) {
    const auto n = static_cast<std::size_t>(plan.n_districts());
    std::vector<std::int64_t> dem(n, 0), rep(n, 0);
    for (UnitId v = 0; v < graph.size(); ++v) {
        const auto d = static_cast<std::size_t>(plan.label(v));
        dem[d] += graph.votes(v).dem;
        rep[d] += graph.votes(v).rep;
    }
    SeatTally tally;
    for (std::size_t d = 0; d < n; ++d) {
        if (dem[d] > rep[d]) ++tally.dem_seats;
        else if (dem[d] == rep[d]) ++tally.ties;
    }
    return tally;
}

EnsemblePlan score_plan(const DualGraph& graph, const Districting& plan) {
    const SeatTally tally = seats_won(graph, plan);
    EnsemblePlan out;
    out.assignment.assign(plan.assignment().begin(), plan.assignment().end());
    out.pop_eq = pop_equality(graph, plan);
    out.comp = graph.edge_count() > 0 ? compactness(graph, plan) : 0.0;
    out.seats = tally.dem_seats;
    out.ties = tally.ties;
    return out;
}

OutcomeDistribution outcome_distribution(std::span<const int> seats) {
    if (seats.size() < 2)
        throw Error(ErrorKind::InsufficientPlans, "an outcome distribution needs at least two plans");
    OutcomeDistribution dist;
    dist.n_plans = seats.size();
    double sum = 0.0;
    for (int s : seats) {
        ++dist.counts[s];
        sum += s;
    }
    dist.mean = sum / static_cast<double>(seats.size());
    double ss = 0.0;
    for (int s : seats) ss += (s - dist.mean) * (s - dist.mean);
    dist.stddev = std::sqrt(ss / static_cast<double>(seats.size() - 1));
    return dist;
}

OutcomeDistribution outcome_distribution(const Ensemble& ensemble) {
    std::vector<int> seats;
    seats.reserve(ensemble.plans.size());
    for (const auto& p : ensemble.plans) seats.push_back(p.seats);
    return outcome_distribution(seats);
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

namespace {

void require_spread(const OutcomeDistribution& dist) {
    if (!(dist.stddev > 0.0))
        throw Error(ErrorKind::DegenerateSpread, "all plans share one outcome; no spread to fit");
}

double normal_density(const OutcomeDistribution& dist, double x) {
    const double z = (x - dist.mean) / dist.stddev;
    return std::exp(-0.5 * z * z) / (dist.stddev * std::sqrt(2.0 * std::numbers::pi));
}

std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", x);
    return buf;
}

}  // namespace

double outcome_probability(const OutcomeDistribution& dist, int k) {
    require_spread(dist);
    const double hi = (k + 0.5 - dist.mean) / dist.stddev;
    const double lo = (k - 0.5 - dist.mean) / dist.stddev;
    // Difference of upper tails keeps precision far right of the mean.
    if (lo > 0.0) return normal_cdf(-lo) - normal_cdf(-hi);
    return normal_cdf(hi) - normal_cdf(lo);
}

EnactedComparison enacted_comparison(const OutcomeDistribution& dist, int enacted_seats) {
    require_spread(dist);
    const double z = (enacted_seats - dist.mean) / dist.stddev;
    return {z, outcome_probability(dist, enacted_seats), std::abs(z)};
}

std::string histogram_csv(const OutcomeDistribution& dist, std::optional<int> enacted) {
    std::ostringstream out;
    out << "seats,count,fitted_density,probability,marker\n";
    if (dist.n_plans == 0 || dist.counts.empty()) return out.str();
    int lo = dist.counts.begin()->first;
    int hi = dist.counts.rbegin()->first;
    if (enacted) {
        lo = std::min(lo, *enacted);
        hi = std::max(hi, *enacted);
    }
    const bool fitted = dist.stddev > 0.0;
    auto row = [&](int k, const char* marker) {
        auto it = dist.counts.find(k);
        out << k << ',' << (it == dist.counts.end() ? 0 : it->second) << ',';
        if (fitted) out << fmt(normal_density(dist, k)) << ',' << fmt(outcome_probability(dist, k));
        else out << ',';
        out << ',' << marker << '\n';
    };
    for (int k = lo; k <= hi; ++k) row(k, "");
    if (enacted) row(*enacted, "enacted");
    return out.str();
}

std::string histogram_svg(const OutcomeDistribution& dist, std::optional<int> enacted) {
    constexpr double width = 640, height = 360, margin = 40;
    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height << "\">\n";
    if (dist.counts.empty()) {
        out << "</svg>\n";
        return out.str();
    }
    int lo = dist.counts.begin()->first;
    int hi = dist.counts.rbegin()->first;
    if (enacted) {
        lo = std::min(lo, *enacted);
        hi = std::max(hi, *enacted);
    }
    const double bins = hi - lo + 1;
    const double bar_w = (width - 2 * margin) / bins;
    std::size_t max_count = 0;
    for (const auto& [k, c] : dist.counts) max_count = std::max(max_count, c);
    const double n = static_cast<double>(dist.n_plans);
    const double max_frac = std::max(static_cast<double>(max_count) / n,
                                     dist.stddev > 0 ? normal_density(dist, dist.mean) : 0.0);
    const double scale = (height - 2 * margin) / max_frac;
    auto x_of = [&](double k) { return margin + (k - lo + 0.5) * bar_w; };
    auto y_of = [&](double frac) { return height - margin - frac * scale; };

    out << "<line x1=\"" << margin << "\" y1=\"" << height - margin << "\" x2=\"" << width - margin
        << "\" y2=\"" << height - margin << "\" stroke=\"black\"/>\n";
    for (int k = lo; k <= hi; ++k) {
        auto it = dist.counts.find(k);
        const double frac = it == dist.counts.end() ? 0.0 : static_cast<double>(it->second) / n;
        out << "<rect x=\"" << fmt(x_of(k) - 0.45 * bar_w) << "\" y=\"" << fmt(y_of(frac)) << "\" width=\""
            << fmt(0.9 * bar_w) << "\" height=\"" << fmt(frac * scale) << "\" fill=\"steelblue\"/>\n";
        out << "<text x=\"" << fmt(x_of(k)) << "\" y=\"" << height - margin + 16
            << "\" text-anchor=\"middle\" font-size=\"12\">" << k << "</text>\n";
    }
    if (dist.stddev > 0) {
        out << "<polyline fill=\"none\" stroke=\"black\" points=\"";
        for (int i = 0; i <= 200; ++i) {
            const double k = lo - 0.5 + bins * i / 200.0;
            out << fmt(x_of(k)) << ',' << fmt(y_of(normal_density(dist, k))) << ' ';
        }
        out << "\"/>\n";
    }
    if (enacted) {
        out << "<line x1=\"" << fmt(x_of(*enacted)) << "\" y1=\"" << margin << "\" x2=\"" << fmt(x_of(*enacted))
            << "\" y2=\"" << height - margin << "\" stroke=\"red\" stroke-width=\"2\"/>\n";
    }
    out << "</svg>\n";
    return out.str();
}

HomogeneityTest chi_squared_homogeneity(const OutcomeDistribution& a, const OutcomeDistribution& b,
                                        double min_expected) {
    std::map<int, std::pair<double, double>> table;
    for (const auto& [k, c] : a.counts) table[k].first += static_cast<double>(c);
    for (const auto& [k, c] : b.counts) table[k].second += static_cast<double>(c);
    const double na = static_cast<double>(a.n_plans);
    const double nb = static_cast<double>(b.n_plans);
    if (na == 0 || nb == 0) throw Error(ErrorKind::InsufficientPlans, "both samples must be nonempty");
    const double total = na + nb;
    // A pooled column is kept once its smaller expected count reaches the floor.
    const double column_floor = min_expected * total / std::min(na, nb);

    std::vector<std::pair<double, double>> pooled;
    std::pair<double, double> acc{0, 0};
    for (const auto& [k, cell] : table) {
        acc.first += cell.first;
        acc.second += cell.second;
        if (acc.first + acc.second >= column_floor) {
            pooled.push_back(acc);
            acc = {0, 0};
        }
    }
    if (acc.first + acc.second > 0) {
        if (pooled.empty()) pooled.push_back(acc);
        else {
            pooled.back().first += acc.first;
            pooled.back().second += acc.second;
        }
    }

    HomogeneityTest result;
    result.degrees_of_freedom = static_cast<int>(pooled.size()) - 1;
    if (result.degrees_of_freedom < 1) return result;
    for (const auto& [ca, cb] : pooled) {
        const double col = ca + cb;
        const double ea = col * na / total;
        const double eb = col * nb / total;
        result.statistic += (ca - ea) * (ca - ea) / ea + (cb - eb) * (cb - eb) / eb;
    }
    result.p_value = boost::math::gamma_q(result.degrees_of_freedom / 2.0, result.statistic / 2.0);
    return result;
}

}  // namespace redistmc
