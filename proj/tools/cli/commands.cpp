#include "cli/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>
#include <tuple>

#include <CLI11.hpp>

#include <fspr/degree_classes.hpp>
#include <fspr/errors.hpp>
#include <fspr/exact_fspr.hpp>
#include <fspr/gmres.hpp>
#include <fspr/meanfield.hpp>
#include <fspr/metrics.hpp>
#include <fspr/pagerank.hpp>
#include <fspr/synth.hpp>

namespace fspr::cli {

namespace {

using Clock = std::chrono::steady_clock;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

FairnessSpec fairness_of(const SolveOptions &solve) {
    FairnessSpec spec;
    spec.nu = solve.nu;
    spec.target_protected_mass = solve.target;
    spec.validate();
    return spec;
}

std::filesystem::path output_path(const OutputOptions &output, const std::string &stem) {
    return output.dir / (stem + extension(output.format));
}

std::ofstream open_output(const std::filesystem::path &path) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error("cannot write " + path.string());
    return out;
}

template <typename Writer>
std::filesystem::path emit(const std::filesystem::path &path, Writer writer) {
    auto out = open_output(path);
    writer(out);
    if (!out)
        throw Error("write failed for " + path.string());
    return path;
}

// Metric value, or NaN when the input makes it undefined.
template <typename Fn>
double or_nan(Fn fn) {
    try {
        return fn();
    } catch (const DegenerateInput &) {
        return kNaN;
    }
}

const char *trim_side(const SynthLog &log) {
    if (log.stubs_trimmed == 0)
        return "none";
    return log.trimmed_in_side ? "in" : "out";
}

void add_synth_meta(Record &meta, const SynthSpec &spec, const SynthLog &log) {
    meta.add("synth", describe(spec));
    meta.add("stubs_trimmed", static_cast<std::int64_t>(log.stubs_trimmed));
    meta.add("trimmed_side", std::string(trim_side(log)));
    meta.add("rewires", static_cast<std::int64_t>(log.rewires));
}

SynthSpec synth_spec_of(const InputOptions &input) {
    auto spec = parse_synth_spec(input.synth);
    if (input.seed)
        spec.seed = *input.seed;
    return spec;
}

LabeledGraph from_synth(SynthGraph synth) {
    std::vector<std::int64_t> ids(synth.graph.node_count());
    std::iota(ids.begin(), ids.end(), std::int64_t{0});
    return {std::move(synth.graph), std::move(synth.groups), std::move(ids)};
}

double closed_form_at(double k, Group group, double nu, double target, double d_protected,
                      double d_unprotected) {
    const double m = d_protected + d_unprotected;
    const double d_c = group == Group::Protected ? d_protected : d_unprotected;
    const double share = group == Group::Protected ? target : 1.0 - target;
    if (m == 0.0 || d_c == 0.0)
        return kNaN;
    return nu * share * k / d_c + (1.0 - nu) * k / m;
}

struct Aligned {
    std::vector<std::size_t> k_in;
    std::vector<std::size_t> k_out;
    std::vector<Group> groups;
    std::vector<double> baseline;
    std::vector<double> approx;
};

std::vector<std::size_t> order_by_id(const ScoreTable &t) {
    std::vector<std::size_t> order(t.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return t.node_ids[a] < t.node_ids[b]; });
    return order;
}

Aligned align(const ScoreTable &baseline, const ScoreTable &approx) {
    if (baseline.size() != approx.size())
        throw NodeSetMismatch("score files hold " + std::to_string(baseline.size()) + " and " +
                              std::to_string(approx.size()) + " nodes");
    const auto ob = order_by_id(baseline);
    const auto oa = order_by_id(approx);
    Aligned a;
    for (std::size_t i = 0; i < ob.size(); ++i) {
        const auto b = ob[i], x = oa[i];
        if (baseline.node_ids[b] != approx.node_ids[x])
            throw NodeSetMismatch("node sets differ near id " +
                                  std::to_string(baseline.node_ids[b]));
        if (i > 0 && baseline.node_ids[b] == baseline.node_ids[ob[i - 1]])
            throw NodeSetMismatch("node id " + std::to_string(baseline.node_ids[b]) +
                                  " appears twice");
        if (baseline.k_in[b] != approx.k_in[x] || baseline.k_out[b] != approx.k_out[x] ||
            baseline.groups[b] != approx.groups[x])
            throw NodeSetMismatch("score files disagree on degrees or group of node " +
                                  std::to_string(baseline.node_ids[b]));
        a.k_in.push_back(baseline.k_in[b]);
        a.k_out.push_back(baseline.k_out[b]);
        a.groups.push_back(baseline.groups[b]);
        a.baseline.push_back(baseline.scores[b]);
        a.approx.push_back(approx.scores[x]);
    }
    return a;
}

std::int64_t as_int(std::size_t v) { return static_cast<std::int64_t>(v); }
std::int64_t as_int(Group g) { return static_cast<std::int64_t>(g); }

// Binned Pearson between score and in-degree: over bin centers and bin means.
double binned_indegree_pearson(std::span<const double> scores, std::span<const std::size_t> k_in,
                               double factor) {
    const auto bins = log_binned_curve(scores, k_in, factor);
    std::vector<double> centers, means;
    for (const auto &b : bins) {
        centers.push_back(b.center);
        means.push_back(b.mean);
    }
    return or_nan([&] { return pearson(centers, means); });
}

std::vector<std::string> split_list(const std::string &text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty())
            out.push_back(item);
    return out;
}

}  // namespace

int exit_code_for(const std::exception &e) {
    if (dynamic_cast<const ParseError *>(&e) || dynamic_cast<const DuplicateEdge *>(&e))
        return kExitParse;
    if (dynamic_cast<const Infeasible *>(&e))
        return kExitInfeasible;
    if (dynamic_cast<const GraphTooLargeForDense *>(&e))
        return kExitDenseCap;
    if (dynamic_cast<const NoConvergence *>(&e))
        return kExitNoConvergence;
    return kExitFailure;
}

LabeledGraph load_input(const InputOptions &input, Record *meta) {
    const bool from_files = !input.edges_path.empty() || !input.labels_path.empty();
    const bool synthetic = !input.synth.empty();
    if (from_files == synthetic)
        throw ParseError("give either --edges and --labels, or --synth");
    if (synthetic) {
        const auto spec = synth_spec_of(input);
        auto synth = generate(spec);
        if (meta)
            add_synth_meta(*meta, spec, synth.log);
        return from_synth(std::move(synth));
    }
    if (input.edges_path.empty() || input.labels_path.empty())
        throw ParseError("--edges and --labels must be given together");
    return load_labeled_graph(input.edges_path, input.labels_path, input.dedup);
}

RankRun rank_graph(const LabeledGraph &input, const SolveOptions &solve) {
    const auto spec = fairness_of(solve);
    const auto &g = input.graph;
    const auto &groups = input.groups;
    RankRun run;

    if (solve.method == "exact") {
        ExactOptions opts;
        opts.dense_cap = solve.dense_cap;
        if (solve.tol)
            opts.kkt_tol = *solve.tol;
        auto result = exact_fspr(g, groups, spec, opts);
        run.scores = std::move(result.scores);
        run.report = std::move(result.report);
        run.extras.add("objective", result.objective);
    } else if (solve.method == "gmres") {
        KrylovConfig cfg;
        cfg.restart_dim = solve.restart;
        if (solve.tol)
            cfg.tol = *solve.tol;
        auto result = fair_gmres(g, groups, spec, cfg);
        run.scores = std::move(result.scores);
        run.report = std::move(result.report);
        run.extras.add("theta", result.theta);
    } else if (solve.method == "meanfield") {
        const auto start = Clock::now();
        const auto k_in = g.in_degrees();
        run.scores = meanfield_scores_from_degrees(k_in, groups.labels(), spec);
        run.report.wall_time_seconds = seconds_since(start);
        const auto analytic = meanfield_group_mass(g, groups, spec);
        run.extras.add("analytic_protected_mass", analytic.protected_mass);
        run.extras.add("analytic_fairness_gap", analytic.fairness_gap);
    } else if (solve.method == "meanfield-iterative") {
        MeanFieldOptions opts;
        if (solve.tol)
            opts.tol = *solve.tol;
        const auto start = Clock::now();
        const auto part = partition_degree_classes(g, groups);
        const auto jump = estimate_jump(g, groups, spec, opts);
        const auto classes = meanfield_iterate(part, jump, spec, opts);
        run.scores = broadcast_class_values(part, classes.normalized);
        run.report.wall_time_seconds = seconds_since(start);
        run.report.outer_iterations = classes.iterations;
        run.report.final_residual = classes.residual;
        run.extras.add("degree_classes", as_int(part.class_count()));
    } else {
        throw ParseError("unknown method '" + solve.method + "'");
    }
    run.report.achieved_protected_mass = protected_mass(run.scores, groups);
    return run;
}

std::vector<std::filesystem::path> cmd_rank(const InputOptions &input, const SolveOptions &solve,
                                            const OutputOptions &output) {
    Record meta;
    const auto graph = load_input(input, &meta);
    const auto spec = fairness_of(solve);
    auto run = rank_graph(graph, solve);
    require_distribution(run.scores);
    const double target = spec.target(graph.groups);

    Record report;
    report.add("method", solve.method);
    report.add("nodes", as_int(graph.graph.node_count()));
    report.add("edges", as_int(graph.graph.edge_count()));
    report.add("nu", spec.nu);
    report.add("target", target);
    report.add("outer_iterations", as_int(run.report.outer_iterations));
    report.add("inner_iterations_total", as_int(run.report.inner_iterations_total));
    report.add("matvec_count", as_int(run.report.matvec_count));
    report.add("final_residual", run.report.final_residual);
    report.add("achieved_protected_mass", run.report.achieved_protected_mass);
    report.add("fairness_gap", std::abs(run.report.achieved_protected_mass - target));
    report.add("score_sum", std::accumulate(run.scores.begin(), run.scores.end(), 0.0));
    for (auto &field : run.extras.fields)
        report.fields.push_back(std::move(field));
    for (auto &field : meta.fields)
        report.fields.push_back(std::move(field));
    report.add("wall_time_seconds", run.report.wall_time_seconds);

    std::filesystem::create_directories(output.dir);
    std::vector<std::filesystem::path> written;
    const auto history = run.report.residual_history;
    const auto table = to_table(make_score_table(graph, std::move(run.scores)));
    written.push_back(emit(output_path(output, "scores"),
                           [&](std::ostream &o) { write_table(o, table, output.format); }));
    written.push_back(emit(output_path(output, "report"),
                           [&](std::ostream &o) { write_record(o, report, output.format); }));
    if (!history.empty()) {
        Table residuals;
        residuals.columns = {"step", "residual"};
        for (std::size_t i = 0; i < history.size(); ++i)
            residuals.rows.push_back({as_int(i + 1), history[i]});
        written.push_back(emit(output_path(output, "residuals"), [&](std::ostream &o) {
            write_table(o, residuals, output.format);
        }));
    }
    return written;
}

CompareOutputs compare_tables(
    const ScoreTable &baseline, const ScoreTable &approx, const CompareOptions &opts,
    const std::optional<std::vector<std::pair<std::int64_t, Group>>> &labels) {
    if (baseline.size() == 0)
        throw EmptyGraph();
    auto a = align(baseline, approx);
    const std::size_t n = a.k_in.size();

    if (labels) {
        std::map<std::int64_t, Group> by_id(labels->begin(), labels->end());
        const auto order = order_by_id(baseline);
        for (std::size_t i = 0; i < n; ++i) {
            const auto id = baseline.node_ids[order[i]];
            const auto it = by_id.find(id);
            if (it == by_id.end())
                throw ParseError("node " + std::to_string(id) + " has no group label");
            a.groups[i] = it->second;
        }
    }

    const auto empty = build_graph({}, BuildOptions{n, false});
    const GroupAssignment groups(empty, a.groups);
    const double target = opts.target.value_or(groups.phi());
    const double nu = opts.nu;

    double d_group[2] = {0.0, 0.0};
    double moment = 0.0;
    std::size_t moment_nodes = 0;
    double k_sum = 0.0;
    for (std::size_t u = 0; u < n; ++u) {
        d_group[static_cast<std::size_t>(a.groups[u])] += static_cast<double>(a.k_in[u]);
        k_sum += static_cast<double>(a.k_in[u]);
        if (a.k_out[u] > 0) {
            moment += static_cast<double>(a.k_in[u]) * static_cast<double>(a.k_in[u]) /
                      static_cast<double>(a.k_out[u]);
            ++moment_nodes;
        }
    }
    const double mean_k = k_sum / static_cast<double>(n);
    const double m2 = moment_nodes ? moment / static_cast<double>(moment_nodes) : kNaN;
    const auto closed = [&](double k, Group g) {
        return closed_form_at(k, g, nu, target, d_group[1], d_group[0]);
    };
    const auto predicted_cv = [&](double k) {
        return k > 0.0 ? (1.0 - nu) * std::sqrt(m2 / (mean_k * k)) : kNaN;
    };

    CompareOutputs out;
    auto &rec = out.comparison;
    rec.add("nodes", as_int(n));
    rec.add("nu", nu);
    rec.add("target", target);
    rec.add("baseline_protected_mass", protected_mass(a.baseline, groups));
    rec.add("approx_protected_mass", protected_mass(a.approx, groups));
    rec.add("utility_loss", utility_loss(a.approx, a.baseline));
    rec.add("fairness_gap", fairness_gap(a.approx, groups, target));
    rec.add("pearson", or_nan([&] { return pearson(a.baseline, a.approx); }));
    rec.add("kendall_tau", or_nan([&] { return kendall_tau(a.baseline, a.approx); }));
    rec.add("l1_distance", lp_distance(a.baseline, a.approx, 1));
    rec.add("l2_distance", lp_distance(a.baseline, a.approx, 2));
    rec.add("protected_mass_delta",
            std::abs(protected_mass(a.approx, groups) - protected_mass(a.baseline, groups)));
    for (std::size_t k : opts.topk) {
        const std::size_t clipped = std::min(k, n);
        if (clipped > 0)
            rec.add("top" + std::to_string(clipped) + "_overlap",
                    topk_overlap(a.baseline, a.approx, clipped));
    }
    std::vector<double> k_real(a.k_in.begin(), a.k_in.end());
    rec.add("baseline_indegree_pearson_nodes",
            or_nan([&] { return pearson(k_real, a.baseline); }));
    rec.add("baseline_indegree_pearson_binned",
            binned_indegree_pearson(a.baseline, a.k_in, opts.bin_factor));
    rec.add("approx_indegree_pearson_nodes", or_nan([&] { return pearson(k_real, a.approx); }));
    rec.add("approx_indegree_pearson_binned",
            binned_indegree_pearson(a.approx, a.k_in, opts.bin_factor));

    // Per exact degree class.
    struct Sum {
        std::size_t size = 0;
        double baseline = 0.0;
        double approx = 0.0;
    };
    std::map<std::tuple<std::size_t, std::size_t, Group>, Sum> classes;
    for (std::size_t u = 0; u < n; ++u) {
        auto &s = classes[{a.k_in[u], a.k_out[u], a.groups[u]}];
        ++s.size;
        s.baseline += a.baseline[u];
        s.approx += a.approx[u];
    }
    out.class_means.columns = {"k_in",          "k_out",       "group",           "size",
                               "baseline_mean", "approx_mean", "closed_form_mean"};
    for (const auto &[key, s] : classes) {
        const auto &[k_in, k_out, g] = key;
        const double size = static_cast<double>(s.size);
        out.class_means.rows.push_back({as_int(k_in), as_int(k_out), as_int(g), as_int(s.size),
                                        s.baseline / size, s.approx / size,
                                        closed(static_cast<double>(k_in), g)});
    }

    // Node-level CV of the baseline within each (k_in, group) bucket.
    std::map<std::pair<std::size_t, Group>, std::vector<double>> buckets;
    for (std::size_t u = 0; u < n; ++u)
        buckets[{a.k_in[u], a.groups[u]}].push_back(a.baseline[u]);
    std::map<std::pair<std::size_t, Group>, double> bucket_cv;
    for (const auto &[key, vals] : buckets) {
        if (vals.size() < 2)
            continue;
        const double mean =
            std::accumulate(vals.begin(), vals.end(), 0.0) / static_cast<double>(vals.size());
        if (!(mean > 0.0))
            continue;
        double var = 0.0;
        for (double v : vals)
            var += (v - mean) * (v - mean);
        bucket_cv[key] = std::sqrt(var / static_cast<double>(vals.size())) / mean;
    }

    out.degree_curve.columns = {"group",         "bin_lower",     "bin_upper",
                                "bin_center",    "count",         "baseline_mean",
                                "baseline_std",  "approx_mean",   "approx_std",
                                "closed_form"};
    out.cv_curve.columns = {"group",      "bin_lower", "bin_upper",   "bin_center",
                            "count",      "empirical_cv", "empirical_cv_std", "predicted_cv"};
    for (Group g : {Group::Unprotected, Group::Protected}) {
        std::vector<double> base, approx_vals;
        std::vector<std::size_t> keys;
        std::vector<double> cvs;
        std::vector<std::size_t> cv_keys;
        for (std::size_t u = 0; u < n; ++u) {
            if (a.groups[u] != g)
                continue;
            base.push_back(a.baseline[u]);
            approx_vals.push_back(a.approx[u]);
            keys.push_back(a.k_in[u]);
            const auto it = bucket_cv.find({a.k_in[u], g});
            if (it != bucket_cv.end()) {
                cvs.push_back(it->second);
                cv_keys.push_back(a.k_in[u]);
            }
        }
        if (keys.empty())
            continue;
        const auto base_bins = log_binned_curve(base, keys, opts.bin_factor);
        const auto approx_bins = log_binned_curve(approx_vals, keys, opts.bin_factor);
        for (std::size_t b = 0; b < base_bins.size(); ++b) {
            const auto &bin = base_bins[b];
            out.degree_curve.rows.push_back(
                {as_int(g), bin.lower, bin.upper, bin.center, as_int(bin.count), bin.mean,
                 bin.std_dev, approx_bins[b].mean, approx_bins[b].std_dev,
                 closed(bin.center, g)});
        }
        if (cv_keys.empty())
            continue;
        for (const auto &bin : log_binned_curve(cvs, cv_keys, opts.bin_factor))
            out.cv_curve.rows.push_back({as_int(g), bin.lower, bin.upper, bin.center,
                                         as_int(bin.count), bin.mean, bin.std_dev,
                                         predicted_cv(bin.center)});
    }
    return out;
}

std::vector<std::filesystem::path> cmd_compare(const std::filesystem::path &baseline,
                                               const std::filesystem::path &approx,
                                               const std::optional<std::filesystem::path> &labels,
                                               const CompareOptions &opts,
                                               const OutputOptions &output) {
    std::optional<std::vector<std::pair<std::int64_t, Group>>> label_list;
    if (labels) {
        std::ifstream in(*labels);
        if (!in)
            throw ParseError("cannot open " + labels->string());
        label_list = read_labels(in);
    }
    const auto result =
        compare_tables(read_score_file(baseline), read_score_file(approx), opts, label_list);

    std::filesystem::create_directories(output.dir);
    std::vector<std::filesystem::path> written;
    written.push_back(emit(output_path(output, "comparison"), [&](std::ostream &o) {
        write_record(o, result.comparison, output.format);
    }));
    const std::pair<const char *, const Table *> tables[] = {
        {"class_means", &result.class_means},
        {"degree_curve", &result.degree_curve},
        {"cv_curve", &result.cv_curve},
    };
    for (const auto &[stem, table] : tables)
        written.push_back(emit(output_path(output, stem),
                               [&](std::ostream &o) { write_table(o, *table, output.format); }));
    return written;
}

Table bench_table(const BenchOptions &opts) {
    if (opts.repeats == 0)
        throw ParseError("--repeats must be at least 1");
    for (const auto &m : opts.methods)
        if (m != "exact" && m != "gmres" && m != "meanfield" && m != "meanfield-iterative")
            throw ParseError("unknown method '" + m + "'");

    Table table;
    table.columns = {"graph",           "nodes",        "edges",
                     "method",          "status",       "wall_time_seconds",
                     "matvec_count",    "protected_mass", "detail"};
    for (const auto &text : opts.synth) {
        const auto spec = parse_synth_spec(text);
        const auto graph = from_synth(generate(spec));
        const auto edges = graph.graph.edges();
        const auto labels = graph.groups.labels();
        const auto nodes = as_int(graph.graph.node_count());
        const auto edge_count = as_int(graph.graph.edge_count());
        const auto fairness = fairness_of(opts.solve);

        for (const auto &method : opts.methods) {
            std::vector<Cell> row{describe(spec), nodes, edge_count, method};
            if (method == "exact" && graph.graph.node_count() > opts.solve.dense_cap) {
                row.insert(row.end(), {std::string("CAP"), kNaN, std::int64_t{0}, kNaN,
                                       std::string("above dense cap of ") +
                                           std::to_string(opts.solve.dense_cap)});
                table.rows.push_back(std::move(row));
                continue;
            }
            try {
                double best = std::numeric_limits<double>::infinity();
                std::vector<double> scores;
                std::size_t matvecs = 0;
                for (std::size_t r = 0; r < opts.repeats; ++r) {
                    if (method == "meanfield") {
                        // Timed from the edge list: degree count plus score emission.
                        const auto start = Clock::now();
                        scores = meanfield_from_edges(edges, labels, fairness);
                        best = std::min(best, seconds_since(start));
                    } else {
                        auto solve = opts.solve;
                        solve.method = method;
                        auto run = rank_graph(graph, solve);
                        best = std::min(best, run.report.wall_time_seconds);
                        matvecs = run.report.matvec_count;
                        scores = std::move(run.scores);
                    }
                }
                row.insert(row.end(), {std::string("ok"), best, as_int(matvecs),
                                       protected_mass(scores, graph.groups), std::string()});
            } catch (const std::exception &e) {
                row.resize(4);
                row.insert(row.end(), {std::string("error"), kNaN, std::int64_t{0}, kNaN,
                                       std::string(e.what())});
            }
            table.rows.push_back(std::move(row));
        }
    }
    return table;
}

std::vector<std::filesystem::path> cmd_synth(const InputOptions &input,
                                             const OutputOptions &output) {
    if (input.synth.empty())
        throw ParseError("synth needs --synth SPEC");
    const auto spec = synth_spec_of(input);
    const auto synth = generate(spec);
    const auto moments = degree_moments(synth.graph);

    Record meta;
    add_synth_meta(meta, spec, synth.log);
    meta.add("nodes", as_int(synth.graph.node_count()));
    meta.add("edges", as_int(synth.graph.edge_count()));
    meta.add("protected_nodes", as_int(synth.groups.protected_count()));
    meta.add("mean_in_degree", moments.mean_in_degree);
    meta.add("in_degree_moment", moments.in_degree_moment);
    meta.add("max_in_degree", as_int(moments.max_in_degree));
    meta.add("max_out_degree", as_int(moments.max_out_degree));

    std::filesystem::create_directories(output.dir);
    std::vector<std::filesystem::path> written;
    written.push_back(emit(output.dir / "edges.tsv",
                           [&](std::ostream &o) { write_edge_list(o, synth.graph); }));
    written.push_back(emit(output.dir / "labels.tsv",
                           [&](std::ostream &o) { write_labels(o, synth.groups); }));
    written.push_back(emit(output_path(output, "synth"),
                           [&](std::ostream &o) { write_record(o, meta, output.format); }));
    return written;
}

int run(int argc, const char *const *argv, std::ostream &out, std::ostream &err) {
    CLI::App app{"Fairness-sensitive PageRank solvers and evaluation tools", "fspr"};
    app.require_subcommand(1);

    InputOptions input;
    SolveOptions solve;
    std::string out_dir = ".";
    std::string format = "csv";
    const std::vector<std::string> methods{"exact", "gmres", "meanfield", "meanfield-iterative"};

    const auto add_input = [&](CLI::App *cmd) {
        auto *edges = cmd->add_option("--edges", input.edges_path, "Edge list, one 'src<TAB>dst' per line");
        auto *labels = cmd->add_option("--labels", input.labels_path, "Labels, one 'id<TAB>{0|1}' per line");
        auto *synth = cmd->add_option("--synth", input.synth,
                                      "Synthetic graph, e.g. n=1000,phi=0.3,in=powerlaw:2.5:3:100,out=poisson:8");
        edges->needs(labels);
        labels->needs(edges);
        synth->excludes(edges)->excludes(labels);
        cmd->add_option("--seed", input.seed, "Seed override for --synth");
        cmd->add_flag("--dedup", input.dedup, "Drop repeated edges instead of failing");
    };
    const auto add_solve = [&](CLI::App *cmd) {
        cmd->add_option("--nu", solve.nu, "Teleport probability")->capture_default_str();
        cmd->add_option("--target", solve.target, "Target protected mass (default: protected fraction)");
        cmd->add_option("--tol", solve.tol, "Solver tolerance");
        cmd->add_option("--restart", solve.restart, "GMRES restart dimension")->capture_default_str();
        cmd->add_option("--dense-cap", solve.dense_cap, "Node limit for the exact method")
            ->capture_default_str();
    };
    const auto add_output = [&](CLI::App *cmd) {
        cmd->add_option("--out", out_dir, "Output directory")->capture_default_str();
        cmd->add_option("--format", format, "csv or json")
            ->check(CLI::IsMember({"csv", "json"}))
            ->capture_default_str();
    };

    auto *rank = app.add_subcommand("rank", "Rank the nodes of one graph");
    add_input(rank);
    add_solve(rank);
    add_output(rank);
    rank->add_option("--method", solve.method, "exact, gmres, meanfield or meanfield-iterative")
        ->check(CLI::IsMember(methods))
        ->capture_default_str();

    CompareOptions compare_opts;
    std::string baseline_path, approx_path, compare_labels;
    auto *compare = app.add_subcommand("compare", "Compare two score files");
    compare->add_option("--baseline", baseline_path, "Reference score file")->required();
    compare->add_option("--approx", approx_path, "Approximate score file")->required();
    compare->add_option("--labels", compare_labels, "Label file overriding the group column");
    compare->add_option("--topk", compare_opts.topk, "Top-k sizes")->delimiter(',');
    compare->add_option("--nu", compare_opts.nu, "Teleport probability for the overlays")
        ->capture_default_str();
    compare->add_option("--target", compare_opts.target, "Target protected mass");
    compare->add_option("--bin-factor", compare_opts.bin_factor, "Log-bin growth factor")
        ->capture_default_str();
    add_output(compare);

    BenchOptions bench_opts;
    std::string bench_methods = "exact,gmres,meanfield";
    auto *bench = app.add_subcommand("bench", "Time the methods on synthetic graphs");
    bench->add_option("--synth", bench_opts.synth, "Synthetic graph spec (repeatable)")->required();
    bench->add_option("--methods", bench_methods, "Comma-separated methods")->capture_default_str();
    bench->add_option("--repeats", bench_opts.repeats, "Runs per timing; the minimum is kept")
        ->capture_default_str();
    add_solve(bench);
    add_output(bench);

    auto *synth = app.add_subcommand("synth", "Write a synthetic graph as edge and label files");
    synth->add_option("--synth", input.synth, "Synthetic graph spec")->required();
    synth->add_option("--seed", input.seed, "Seed override");
    add_output(synth);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitParse;
    }

    try {
        OutputOptions output{out_dir, parse_output_format(format)};
        std::vector<std::filesystem::path> written;
        if (*rank) {
            written = cmd_rank(input, solve, output);
        } else if (*compare) {
            std::optional<std::filesystem::path> labels;
            if (!compare_labels.empty())
                labels = compare_labels;
            written = cmd_compare(baseline_path, approx_path, labels, compare_opts, output);
        } else if (*bench) {
            bench_opts.methods = split_list(bench_methods);
            bench_opts.solve = solve;
            const auto table = bench_table(bench_opts);
            std::filesystem::create_directories(output.dir);
            written.push_back(emit(output_path(output, "bench"),
                                   [&](std::ostream &o) { write_table(o, table, output.format); }));
        } else if (*synth) {
            written = cmd_synth(input, output);
        }
        for (const auto &path : written)
            out << "wrote " << path.string() << '\n';
        return kExitOk;
    } catch (const std::exception &e) {
        err << "error: " << e.what() << '\n';
        return exit_code_for(e);
    }
}

int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
    std::vector<const char *> argv;
    argv.reserve(args.size());
    for (const auto &a : args)
        argv.push_back(a.c_str());
    return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace fspr::cli
