// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "../../tools/cli/commands.hpp"

#include <fspr/degree_classes.hpp>
#include <fspr/exact_fspr.hpp>
#include <fspr/gmres.hpp>
#include <fspr/meanfield.hpp>
#include <fspr/metrics.hpp>
#include <fspr/pagerank.hpp>
#include <fspr/synth.hpp>

#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace fspr;

namespace {

using Clock = std::chrono::steady_clock;

double elapsed(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
    bool pass = true;
    std::string detail;
};

std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", x);
    return buf;
}

// Every score vector produced anywhere in the suite, for the sum check.
std::vector<std::pair<std::string, double>> g_sums;

void record_sum(const std::string &what, std::span<const double> p) {
    g_sums.emplace_back(what, oracle::sum(p));
}

SynthSpec heavy_tail(std::size_t n, std::uint64_t seed, std::size_t k_min = 3,
                     std::size_t k_max = 1000) {
    SynthSpec s;
    s.node_count = n;
    s.phi = 0.3;
    s.in_degree_law = PowerLawDegrees{2.5, k_min, k_max};
    s.out_degree_law = PoissonDegrees{8.0};
    s.seed = seed;
    return s;
}

// Graphs shared by several criteria.
struct Corpus {
    std::vector<SynthGraph> small;   // N = 500, for the exact solver
    std::vector<SynthGraph> large;   // N = 20000
};

Corpus &corpus() {
    static Corpus c = [] {
        Corpus out;
        for (std::uint64_t seed = 1; seed <= 5; ++seed)
            out.small.push_back(generate(heavy_tail(500, seed, 3, 100)));
        for (std::uint64_t seed = 1; seed <= 3; ++seed)
            out.large.push_back(generate(heavy_tail(20000, seed)));
        return out;
    }();
    return c;
}

Outcome criterion1() {
    const auto start = Clock::now();
    std::mt19937_64 rng(2024);
    double worst_gmres = 0.0, worst_power = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = std::uniform_int_distribution<std::size_t>(20, 200)(rng);
        const std::size_t m = n * std::uniform_int_distribution<std::size_t>(1, 6)(rng);
        const auto edges = oracle::random_edges(n, m, rng());
        BuildOptions opts;
        opts.node_count = n;
        const auto g = build_graph(edges, opts);
        const auto jump = trial % 2 == 0 ? uniform_distribution(n)
                                         : oracle::random_distribution(n, rng());
        const auto dense = oracle::dense_pagerank(n, edges, kDefaultTeleport, jump);
        const auto gm = gmres_solve(g, {}, jump);
        const auto pw = pagerank_power(g, {}, jump);
        record_sum("c1 gmres", gm.scores);
        record_sum("c1 power", pw.scores);
        worst_gmres = std::max(worst_gmres, oracle::max_abs_diff(gm.scores, dense));
        worst_power = std::max({worst_power, oracle::max_abs_diff(pw.scores, dense),
                                oracle::max_abs_diff(pw.scores, gm.scores)});
    }
    const double t = elapsed(start);
    Outcome o;
    o.pass = worst_gmres <= 1e-8 && worst_power <= 1e-8 && t < 10.0;
    o.detail = "20 graphs, gmres vs dense " + fmt(worst_gmres) + ", power vs both " +
               fmt(worst_power) + ", " + fmt(t) + " s";
    return o;
}

Outcome criterion2() {
    const auto start = Clock::now();
    std::vector<std::pair<DirectedGraph, GroupAssignment>> graphs;
    for (std::size_t i = 0; i < 3; ++i) {
        const std::size_t n = 100 + 200 * i;
        BuildOptions opts;
        opts.node_count = n;
        auto g = build_graph(oracle::random_edges(n, 4 * n, 40 + i), opts);
        GroupAssignment groups(g, oracle::random_labels(n, 0.3, 50 + i));
        graphs.emplace_back(std::move(g), std::move(groups));
    }
    for (const auto &s : corpus().small)
        graphs.emplace_back(s.graph, s.groups);

    double worst_mass = 0.0, worst_drop = 0.0;
    std::mt19937_64 rng(7);
    std::normal_distribution<double> noise(0.0, 1.0);
    std::uniform_real_distribution<double> exponent(-6.0, -1.0);
    for (const auto &[g, groups] : graphs) {
        const auto q = build_resolvent(g, {});
        const auto r = exact_fspr(q, groups, {});
        record_sum("c2 exact", r.scores);
        worst_mass = std::max(worst_mass, std::abs(protected_mass(r.scores, groups) - groups.phi()));
        const FairJumpProblem problem(q, groups, groups.phi());
        const double base = problem.objective(r.jump);
        for (int trial = 0; trial < 1000; ++trial) {
            const double scale = std::pow(10.0, exponent(rng));
            std::vector<double> y(r.jump);
            for (auto &x : y)
                x += scale * noise(rng);
            worst_drop = std::min(worst_drop, problem.objective(problem.project(y)) - base);
        }
    }
    const double t = elapsed(start);
    Outcome o;
    o.pass = worst_mass <= 1e-6 && worst_drop >= -1e-9 && t < 60.0;
    o.detail = std::to_string(graphs.size()) + " graphs (N <= 500), mass error " +
               fmt(worst_mass) + ", worst objective change " + fmt(worst_drop) +
               " over 1000 perturbations each, " + fmt(t) + " s";
    return o;
}

Outcome criterion3() {
    double min_tau = 1.0, min_top50 = 1.0, min_top200 = 1.0, worst_mass = 0.0;
    for (const auto &s : corpus().small) {
        const auto exact = exact_fspr(s.graph, s.groups, {});
        const auto fair = fair_gmres(s.graph, s.groups, {});
        record_sum("c3 gmres", fair.scores);
        min_tau = std::min(min_tau, kendall_tau(exact.scores, fair.scores));
        min_top50 = std::min(min_top50, topk_overlap(exact.scores, fair.scores, 50));
        min_top200 = std::min(min_top200, topk_overlap(exact.scores, fair.scores, 200));
        worst_mass = std::max(worst_mass, std::abs(protected_mass(fair.scores, s.groups) -
                                                   protected_mass(exact.scores, s.groups)));
    }
    Outcome o;
    o.pass = min_tau >= 0.93 && min_top50 >= 0.9 && worst_mass <= 1e-6;
    o.detail = "5 graphs N=500, min tau " + fmt(min_tau) + ", min top-50 " + fmt(min_top50) +
               " (top-200 " + fmt(min_top200) + "), mass deviation " + fmt(worst_mass);
    return o;
}

Outcome criterion4() {
    const auto start = Clock::now();
    double min_pearson = 1.0, worst_loss = 0.0;
    for (const auto &s : corpus().large) {
        const auto fair = fair_gmres(s.graph, s.groups, {});
        const auto mf = meanfield_closed_form(s.graph, s.groups);
        record_sum("c4 gmres", fair.scores);
        record_sum("c4 meanfield", mf.per_node);
        min_pearson = std::min(min_pearson, pearson(fair.scores, mf.per_node));
        worst_loss = std::max(worst_loss, utility_loss(mf.per_node, fair.scores));
    }
    const double t = elapsed(start);
    Outcome o;
    o.pass = min_pearson >= 0.90 && worst_loss <= 1e-4 && t < 120.0;
    o.detail = "3 graphs N=20000, min pearson " + fmt(min_pearson) + ", max utility loss " +
               fmt(worst_loss) + ", " + fmt(t) + " s";
    return o;
}

Outcome criterion5() {
    std::vector<std::pair<DirectedGraph, GroupAssignment>> graphs;
    for (const auto &s : corpus().small)
        graphs.emplace_back(s.graph, s.groups);
    for (const auto &s : corpus().large)
        graphs.emplace_back(s.graph, s.groups);
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const std::size_t n = 50 * seed;
        BuildOptions opts;
        opts.node_count = n;
        auto g = build_graph(oracle::random_edges(n, 3 * n, seed, false), opts);
        GroupAssignment groups(g, oracle::random_labels(n, 0.05 * static_cast<double>(seed), seed));
        graphs.emplace_back(std::move(g), std::move(groups));
    }

    double worst = 0.0;
    for (const auto &[g, groups] : graphs) {
        const double phi = groups.phi();
        const auto mf = meanfield_closed_form(g, groups);
        record_sum("c5 meanfield", mf.per_node);
        double d_p = 0.0;
        for (std::size_t u = 0; u < g.node_count(); ++u)
            if (groups.is_protected(static_cast<NodeId>(u)))
                d_p += static_cast<double>(g.in_degree(static_cast<NodeId>(u)));
        const double predicted =
            (1.0 - kDefaultTeleport) * std::abs(d_p / static_cast<double>(g.edge_count()) - phi);
        worst = std::max(worst, std::abs(fairness_gap(mf.unnormalized, groups, phi) - predicted));
    }
    Outcome o;
    o.pass = worst <= 1e-12;
    o.detail = std::to_string(graphs.size()) + " graphs, max |gap - (1-nu)|D_P/M - phi|| " +
               fmt(worst);
    return o;
}

Outcome criterion6() {
    Outcome o;
    const double nu = kDefaultTeleport;

    // Regular single-group graphs.
    double worst_regular = 0.0;
    for (std::size_t k : {2, 5, 10, 20}) {
        SynthSpec spec;
        spec.node_count = 2000;
        spec.phi = 0.0;
        spec.in_degree_law = RegularDegrees{k};
        spec.out_degree_law = RegularDegrees{k};
        spec.seed = k;
        const auto s = generate(spec);
        const auto part = partition_degree_classes(s.graph, s.groups);
        const auto fl = meanfield_variance(part, {});
        for (double cv : fl.cv)
            worst_regular = std::max(worst_regular,
                                     std::abs(cv - (1.0 - nu) / std::sqrt(static_cast<double>(k))));
    }

    // Heavy-tail graph: empirical class CV of the fair scores.
    const auto &s = corpus().large.front();
    const auto fair = fair_gmres(s.graph, s.groups, {});
    const auto part = partition_degree_classes(s.graph, s.groups);
    const auto fl = meanfield_variance(part, {});
    std::vector<double> empirical(part.class_count(), std::nan(""));
    for (std::size_t c = 0; c < part.class_count(); ++c) {
        const auto members = part.members(c);
        if (members.size() < 2)
            continue;
        double mean = 0.0;
        for (auto u : members)
            mean += fair.scores[u];
        mean /= static_cast<double>(members.size());
        double var = 0.0;
        for (auto u : members)
            var += (fair.scores[u] - mean) * (fair.scores[u] - mean);
        var /= static_cast<double>(members.size());
        empirical[c] = std::sqrt(var) / mean;
    }

    const std::size_t n = s.graph.node_count();
    std::vector<NodeId> order(n);
    std::iota(order.begin(), order.end(), NodeId{0});
    std::stable_sort(order.begin(), order.end(), [&](NodeId a, NodeId b) {
        return s.graph.in_degree(a) < s.graph.in_degree(b);
    });
    auto decile_cv = [&](std::size_t d) {
        double total = 0.0;
        std::size_t count = 0;
        for (std::size_t i = d * n / 10; i < (d + 1) * n / 10; ++i) {
            const double cv = empirical[part.class_of(order[i])];
            if (!std::isnan(cv)) {
                total += cv;
                ++count;
            }
        }
        return total / static_cast<double>(count);
    };
    const double bottom = decile_cv(0), top = decile_cv(9);

    const double mean_in = static_cast<double>(s.graph.edge_count()) / static_cast<double>(n);
    std::size_t checked = 0;
    double worst_ratio = 1.0;
    for (std::size_t c = 0; c < part.class_count(); ++c) {
        if (part.class_size(c) < 30 || static_cast<double>(part.key(c).k_in) < mean_in)
            continue;
        const double ratio = fl.cv[c] / empirical[c];
        worst_ratio = std::max({worst_ratio, ratio, 1.0 / ratio});
        ++checked;
    }

    o.pass = worst_regular <= 1e-12 && top < bottom && checked > 0 && worst_ratio <= 3.0;
    o.detail = "regular cv error " + fmt(worst_regular) + ", decile cv " + fmt(bottom) + " -> " +
               fmt(top) + ", " + std::to_string(checked) + " classes, worst factor " +
               fmt(worst_ratio);
    return o;
}

template <typename Fn>
double min_time(std::size_t repeats, Fn fn) {
    double best = 1e300;
    for (std::size_t r = 0; r < repeats; ++r) {
        const auto start = Clock::now();
        fn();
        best = std::min(best, elapsed(start));
    }
    return best;
}

Outcome criterion7() {
    // Mean in-degree of the power law, to size N for a given edge count.
    const PowerLawDegrees law{2.5, 3, 1000};
    double z = 0.0, first = 0.0;
    for (std::size_t k = law.k_min; k <= law.k_max; ++k) {
        const double w = std::pow(static_cast<double>(k), -law.exponent);
        z += w;
        first += w * static_cast<double>(k);
    }
    const double mean_degree = first / z;

    std::vector<double> mf_times;
    std::vector<std::size_t> sizes;
    double gmres_time = 0.0;
    for (int step = 0; step < 4; ++step) {
        const double target_edges = 1.25e5 * std::pow(2.0, step);
        auto spec = heavy_tail(static_cast<std::size_t>(target_edges / mean_degree), 70 + step);
        const auto s = generate(spec);
        const auto edges = s.graph.edges();
        std::vector<double> scores;
        mf_times.push_back(min_time(25, [&] {
            scores = meanfield_from_edges(edges, s.groups.labels(), {});
        }));
        record_sum("c7 meanfield", scores);
        sizes.push_back(edges.size());
        if (step == 3) {
            gmres_time = min_time(3, [&] {
                const auto r = fair_gmres(s.graph, s.groups, {});
                record_sum("c7 gmres", r.scores);
            });
        }
    }
    Outcome o;
    std::string ratios;
    for (std::size_t i = 1; i < mf_times.size(); ++i) {
        const double ratio = mf_times[i] / mf_times[i - 1];
        o.pass = o.pass && ratio >= 1.5 && ratio <= 3.0;
        ratios += (i > 1 ? "/" : "") + fmt(ratio);
    }
    o.pass = o.pass && mf_times.back() <= 0.1 * gmres_time;
    o.detail = "M=" + std::to_string(sizes.back()) + ": meanfield " + fmt(mf_times.back()) +
               " s vs gmres " + fmt(gmres_time) + " s, doubling ratios " + ratios +
               " from M=" + std::to_string(sizes.front());
    return o;
}

std::string slurp(const fs::path &path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Report files carry a wall time; everything else must match byte for byte.
std::string without_wall_time(const std::string &text) {
    std::stringstream in(text);
    std::string out, line;
    while (std::getline(in, line))
        if (line.find("wall_time_seconds") == std::string::npos)
            out += line + '\n';
    return out;
}

Outcome criterion8() {
    Outcome o;
    const auto root = fs::temp_directory_path() / "fspr_acceptance";
    fs::remove_all(root);
    const std::string synth = "n=400,phi=0.3,in=powerlaw:2.5:3:100,out=poisson:8,seed=17";
    std::size_t files = 0, mismatches = 0;
    auto run = [&](std::vector<std::string> args) {
        args.insert(args.begin(), "fspr");
        std::ostringstream out, err;
        if (cli::run(args, out, err) != 0) {
            o.pass = false;
            o.detail += " [" + err.str() + "]";
        }
    };
    for (const std::string fmt_name : {"csv", "json"}) {
        const std::string ext = "." + fmt_name;
        for (const std::string method : {"exact", "gmres", "meanfield", "meanfield-iterative"}) {
            for (const std::string rep : {"a", "b"})
                run({"rank", "--synth", synth, "--method", method, "--format", fmt_name, "--out",
                     (root / rep / method).string()});
            for (const std::string stem : {"scores", "report", "residuals"}) {
                const auto a = root / "a" / method / (stem + ext);
                const auto b = root / "b" / method / (stem + ext);
                if (!fs::exists(a))
                    continue;
                ++files;
                if (without_wall_time(slurp(a)) != without_wall_time(slurp(b)))
                    ++mismatches;
            }
            record_sum("c8 " + method + " " + fmt_name,
                       read_score_file(root / "a" / method / ("scores" + ext)).scores);
        }
        for (const std::string rep : {"a", "b"}) {
            run({"compare", "--baseline", (root / "a/exact/scores" ).string() + ext, "--approx",
                 (root / "a/meanfield/scores").string() + ext, "--format", fmt_name, "--out",
                 (root / rep / "compare").string()});
            run({"synth", "--synth", synth, "--format", fmt_name, "--out",
                 (root / rep / "synth").string()});
        }
        for (const auto &entry : fs::directory_iterator(root / "a" / "compare")) {
            ++files;
            if (slurp(entry.path()) != slurp(root / "b" / "compare" / entry.path().filename()))
                ++mismatches;
        }
        for (const auto &entry : fs::directory_iterator(root / "a" / "synth")) {
            ++files;
            if (slurp(entry.path()) != slurp(root / "b" / "synth" / entry.path().filename()))
                ++mismatches;
        }
    }
    fs::remove_all(root);

    double worst = 0.0;
    std::string worst_name;
    for (const auto &[name, total] : g_sums)
        if (std::abs(total - 1.0) >= worst) {
            worst = std::abs(total - 1.0);
            worst_name = name;
        }
    o.pass = o.pass && worst <= 1e-10 && mismatches == 0 && files > 0;
    o.detail = std::to_string(g_sums.size()) + " score vectors, max |sum - 1| " + fmt(worst) +
               " (" + worst_name + "), " + std::to_string(files) + " files compared, " +
               std::to_string(mismatches) + " differ" + o.detail;
    return o;
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"oracle equivalence of the linear solvers", criterion1},
        {"exact constrained solution", criterion2},
        {"gmres against exact", criterion3},
        {"mean-field accuracy", criterion4},
        {"analytic fairness gap", criterion5},
        {"fluctuation theory", criterion6},
        {"mean-field scaling", criterion7},
        {"normalization and determinism", criterion8},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception &e) {
            o.pass = false;
            o.detail = std::string("threw: ") + e.what();
        }
        failures += o.pass ? 0 : 1;
        std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << i + 1 << " ("
                  << criteria[i].first << "): " << o.detail << std::endl;
    }
    return failures == 0 ? 0 : 1;
}
