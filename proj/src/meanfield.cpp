#include <fspr/meanfield.hpp>

#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include <fspr/errors.hpp>

namespace fspr {

namespace {

struct GroupTotals {
    std::size_t count[2] = {0, 0};
    std::size_t in_degree[2] = {0, 0};
};

GroupTotals tally(std::span<const std::size_t> in_degrees, std::span<const Group> labels) {
    GroupTotals t;
    for (std::size_t u = 0; u < labels.size(); ++u) {
        const auto c = static_cast<std::size_t>(labels[u]);
        ++t.count[c];
        t.in_degree[c] += in_degrees[u];
    }
    return t;
}

// Per-node jump weight is coeff[group] * k_in + flat[group].
struct JumpRule {
    double coeff[2] = {0.0, 0.0};
    double flat[2] = {0.0, 0.0};
};

JumpRule jump_rule(const GroupTotals &t, double target, const MeanFieldOptions &opts) {
    JumpRule rule;
    const double share[2] = {1.0 - target, target};
    const char *name[2] = {"unprotected", "protected"};
    for (std::size_t c = 0; c < 2; ++c) {
        if (share[c] == 0.0)
            continue;
        if (t.count[c] == 0)
            throw DegenerateGroup(std::string(name[c]) +
                                  " group is empty but its target mass is " +
                                  std::to_string(share[c]));
        if (t.in_degree[c] > 0) {
            rule.coeff[c] = share[c] / static_cast<double>(t.in_degree[c]);
        } else if (opts.uniform_fallback) {
            rule.flat[c] = share[c] / static_cast<double>(t.count[c]);
        } else {
            throw DegenerateGroup(std::string(name[c]) +
                                  " group has zero total in-degree; its jump mass is undefined");
        }
    }
    return rule;
}

void check_sizes(std::span<const std::size_t> in_degrees, std::span<const Group> labels) {
    if (in_degrees.size() != labels.size())
        throw DimensionMismatch(labels.size(), in_degrees.size());
    if (labels.empty())
        throw EmptyGraph();
}

}  // namespace

JumpEstimate estimate_jump(const DirectedGraph &g, const GroupAssignment &groups,
                           const FairnessSpec &spec, const MeanFieldOptions &opts) {
    spec.validate();
    const auto k_in = g.in_degrees();
    const auto labels = groups.labels();
    const auto rule = jump_rule(tally(k_in, labels), spec.target(groups), opts);
    JumpEstimate out;
    out.values.resize(k_in.size());
    for (std::size_t u = 0; u < k_in.size(); ++u) {
        const auto c = static_cast<std::size_t>(labels[u]);
        out.values[u] = rule.coeff[c] * static_cast<double>(k_in[u]) + rule.flat[c];
    }
    return out;
}

std::vector<double> meanfield_scores_from_degrees(std::span<const std::size_t> in_degrees,
                                                  std::span<const Group> labels,
                                                  const FairnessSpec &spec,
                                                  const MeanFieldOptions &opts, bool normalize) {
    spec.validate();
    check_sizes(in_degrees, labels);
    const auto totals = tally(in_degrees, labels);
    const std::size_t m = totals.in_degree[0] + totals.in_degree[1];
    if (m == 0)
        throw DegenerateInput("mean-field scores need at least one edge");

    const double n = static_cast<double>(labels.size());
    const double target = spec.target_protected_mass.value_or(
        static_cast<double>(totals.count[1]) / n);
    const auto rule = jump_rule(totals, target, opts);
    const double nu = spec.nu;
    const double walk = (1.0 - nu) / static_cast<double>(m);

    // Scores are affine in k_in per group; fold constants once.
    double slope[2];
    double offset[2];
    for (std::size_t c = 0; c < 2; ++c) {
        slope[c] = nu * rule.coeff[c] + walk;
        offset[c] = nu * rule.flat[c];
    }
    std::vector<double> p(labels.size());
    for (std::size_t u = 0; u < p.size(); ++u) {
        const auto c = static_cast<std::size_t>(labels[u]);
        p[u] = slope[c] * static_cast<double>(in_degrees[u]) + offset[c];
    }
    if (normalize) {
        const double sum = std::accumulate(p.begin(), p.end(), 0.0);
        for (double &v : p)
            v /= sum;
    }
    return p;
}

std::vector<double> meanfield_from_edges(std::span<const Edge> edges,
                                         std::span<const Group> labels,
                                         const FairnessSpec &spec, const MeanFieldOptions &opts) {
    std::vector<std::size_t> k_in(labels.size(), 0);
    for (const auto &e : edges) {
        if (e.target >= k_in.size() || e.source >= k_in.size())
            throw Error("edge endpoint outside the labeled node range");
        ++k_in[e.target];
    }
    return meanfield_scores_from_degrees(k_in, labels, spec, opts, true);
}

MeanFieldScores meanfield_closed_form(const DirectedGraph &g, const GroupAssignment &groups,
                                      const FairnessSpec &spec, const MeanFieldOptions &opts) {
    return meanfield_closed_form(g, groups, partition_degree_classes(g, groups), spec, opts);
}

MeanFieldScores meanfield_closed_form(const DirectedGraph &g, const GroupAssignment &groups,
                                      const DegreeClassPartition &part, const FairnessSpec &spec,
                                      const MeanFieldOptions &opts) {
    const auto k_in = g.in_degrees();
    FairnessSpec resolved = spec;
    resolved.target_protected_mass = spec.target(groups);

    MeanFieldScores out;
    out.unnormalized = meanfield_scores_from_degrees(k_in, groups.labels(), resolved, opts, false);
    out.per_node = out.unnormalized;
    const double sum = std::accumulate(out.per_node.begin(), out.per_node.end(), 0.0);
    for (double &v : out.per_node)
        v /= sum;

    out.per_class_mean = class_average(out.per_node, part);
    auto fluct = meanfield_variance(part, resolved, opts);
    out.variance_per_class = std::move(fluct.variance);
    out.cv_per_class = std::move(fluct.cv);
    return out;
}

GroupMass meanfield_group_mass(const DirectedGraph &g, const GroupAssignment &groups,
                               const FairnessSpec &spec) {
    spec.validate();
    if (g.edge_count() == 0)
        throw DegenerateInput("mean-field scores need at least one edge");
    const double target = spec.target(groups);
    const double share = static_cast<double>(groups.d_protected()) /
                         static_cast<double>(g.edge_count());
    const double mass = spec.nu * target + (1.0 - spec.nu) * share;
    return {mass, std::abs(mass - target)};
}

ClassMeanField meanfield_iterate(const DegreeClassPartition &part, const JumpEstimate &jump,
                                 const FairnessSpec &spec, const MeanFieldOptions &opts) {
    spec.validate();
    const std::size_t classes = part.class_count();
    const double nu = spec.nu;
    // Members of a class share k_in and group, hence the same jump weight.
    const auto class_jump = class_average(jump.values, part);

    std::vector<double> size(classes);
    std::vector<double> inv_out(classes);
    for (std::size_t c = 0; c < classes; ++c) {
        size[c] = static_cast<double>(part.class_size(c));
        const auto k_out = part.key(c).k_out;
        inv_out[c] = k_out == 0 ? 0.0 : 1.0 / static_cast<double>(k_out);
    }

    ClassMeanField out;
    std::vector<double> prev(classes, 1.0 / static_cast<double>(part.node_count()));
    std::vector<double> next(classes);
    for (;;) {
        double change = 0.0;
        for (std::size_t c = 0; c < classes; ++c) {
            double inflow = 0.0;
            for (const auto &f : part.inflows(c))
                inflow += static_cast<double>(f.edges) * inv_out[f.source_class] *
                          prev[f.source_class];
            next[c] = nu * class_jump[c] + (1.0 - nu) * inflow / size[c];
            change += size[c] * std::abs(next[c] - prev[c]);
        }
        prev.swap(next);
        ++out.iterations;
        out.residual = change;
        if (change <= opts.tol)
            break;
        if (out.iterations >= opts.max_iters)
            throw NoConvergence("mean-field recursion", out.iterations, change);
    }

    out.raw = prev;
    double total = 0.0;
    for (std::size_t c = 0; c < classes; ++c)
        total += size[c] * prev[c];
    out.normalized = prev;
    for (double &v : out.normalized)
        v /= total;
    return out;
}

std::vector<double> broadcast_class_values(const DegreeClassPartition &part,
                                           std::span<const double> class_values) {
    if (class_values.size() != part.class_count())
        throw DimensionMismatch(part.class_count(), class_values.size());
    std::vector<double> p(part.node_count());
    for (std::size_t u = 0; u < p.size(); ++u)
        p[u] = class_values[part.class_of(static_cast<NodeId>(u))];
    return p;
}

ClassFluctuations meanfield_variance(const DegreeClassPartition &part, const FairnessSpec &spec,
                                     const MeanFieldOptions &opts) {
    spec.validate();
    const double n = static_cast<double>(part.node_count());
    double in_total = 0.0;
    double moment_sum = 0.0;
    double moment_nodes = 0.0;
    for (std::size_t c = 0; c < part.class_count(); ++c) {
        const auto &key = part.key(c);
        const double members = static_cast<double>(part.class_size(c));
        const double k_in = static_cast<double>(key.k_in);
        in_total += members * k_in;
        double k_out = static_cast<double>(key.k_out);
        if (key.k_out == 0) {
            if (opts.exclude_dangling_from_moment)
                continue;
            k_out = n;
        }
        moment_sum += members * k_in * k_in / k_out;
        moment_nodes += members;
    }
    if (moment_nodes == 0.0 || in_total == 0.0)
        throw EmptyMoment();

    ClassFluctuations out;
    out.mean_in_degree = in_total / n;
    out.in_degree_moment = moment_sum / moment_nodes;
    const double walk = 1.0 - spec.nu;
    const double mean_k = out.mean_in_degree;
    const double scale = std::pow(walk, 4) / (n * n * mean_k * mean_k * mean_k) *
                         out.in_degree_moment;
    out.variance.resize(part.class_count());
    out.cv.resize(part.class_count());
    for (std::size_t c = 0; c < part.class_count(); ++c) {
        const double k_in = static_cast<double>(part.key(c).k_in);
        out.variance[c] = scale * k_in;
        out.cv[c] = k_in == 0.0 ? std::numeric_limits<double>::quiet_NaN()
                                : walk * std::sqrt(out.in_degree_moment / (mean_k * k_in));
    }
    return out;
}

std::vector<double> meanfield_variance_iterate(const DegreeClassPartition &part,
                                               std::span<const double> class_means,
                                               const FairnessSpec &spec,
                                               const MeanFieldOptions &opts) {
    spec.validate();
    const std::size_t classes = part.class_count();
    if (class_means.size() != classes)
        throw DimensionMismatch(classes, class_means.size());
    const double walk2 = (1.0 - spec.nu) * (1.0 - spec.nu);

    std::vector<double> inv_out(classes);
    for (std::size_t c = 0; c < classes; ++c) {
        const auto k_out = part.key(c).k_out;
        inv_out[c] = k_out == 0 ? 0.0 : 1.0 / static_cast<double>(k_out);
    }

    // The subtracted square does not depend on the variances; compute it once.
    std::vector<double> fixed(classes, 0.0);
    for (std::size_t c = 0; c < classes; ++c) {
        const double members = static_cast<double>(part.class_size(c));
        const double k_in = static_cast<double>(part.key(c).k_in);
        if (k_in == 0.0)
            continue;
        double first = 0.0;
        double squares = 0.0;
        for (const auto &f : part.inflows(c)) {
            const double e = static_cast<double>(f.edges);
            const double w = inv_out[f.source_class];
            first += e * w * class_means[f.source_class];
            squares += e * w * w * class_means[f.source_class] * class_means[f.source_class];
        }
        fixed[c] = squares / members - first * first / (k_in * members * members);
    }

    // Variances are measured against the squared means, so a zero fixed
    // point still has a scale to converge against.
    double floor = 0.0;
    for (std::size_t c = 0; c < classes; ++c)
        floor += static_cast<double>(part.class_size(c)) * class_means[c] * class_means[c];

    std::vector<double> prev(classes, 0.0);
    std::vector<double> next(classes);
    for (std::size_t it = 0;; ++it) {
        double change = 0.0;
        double scale = 0.0;
        for (std::size_t c = 0; c < classes; ++c) {
            const double members = static_cast<double>(part.class_size(c));
            double carried = 0.0;
            for (const auto &f : part.inflows(c)) {
                const double w = inv_out[f.source_class];
                carried += static_cast<double>(f.edges) * w * w * prev[f.source_class];
            }
            next[c] = walk2 * (carried / members + fixed[c]);
            change += members * std::abs(next[c] - prev[c]);
            scale += members * next[c];
        }
        prev.swap(next);
        if (change <= opts.tol * std::max(scale, floor))
            break;
        if (it + 1 >= opts.max_iters)
            throw NoConvergence("variance recursion", it + 1, change);
    }
    return prev;
}

}  // namespace fspr
