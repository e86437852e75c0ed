#include <fspr/pagerank.hpp>

#include <chrono>
#include <cmath>
#include <numeric>

#include <fspr/errors.hpp>

namespace fspr {

void FairnessSpec::validate() const {
    if (!(nu > 0.0 && nu <= 1.0))
        throw Error("teleport probability nu must lie in (0, 1], got " + std::to_string(nu));
    if (target_protected_mass &&
        !(*target_protected_mass >= 0.0 && *target_protected_mass <= 1.0))
        throw Error("target protected mass must lie in [0, 1], got " +
                    std::to_string(*target_protected_mass));
}

std::vector<double> uniform_distribution(std::size_t n) {
    return std::vector<double>(n, 1.0 / static_cast<double>(n));
}

bool is_distribution(std::span<const double> x, double tol) {
    double sum = 0.0;
    for (double v : x) {
        if (!(v >= 0.0))
            return false;
        sum += v;
    }
    return std::abs(sum - 1.0) <= tol;
}

void require_distribution(std::span<const double> x, double tol) {
    if (!is_distribution(x, tol))
        throw Error("vector is not a probability distribution");
}

TransitionOperator::TransitionOperator(const DirectedGraph &g)
    : graph_(&g), inv_out_degree_(g.node_count(), 0.0) {
    for (std::size_t u = 0; u < g.node_count(); ++u) {
        const auto d = g.out_degree(static_cast<NodeId>(u));
        if (d == 0)
            dangling_.push_back(static_cast<NodeId>(u));
        else
            inv_out_degree_[u] = 1.0 / static_cast<double>(d);
    }
}

void TransitionOperator::apply(std::span<const double> x, std::span<double> y) const {
    const std::size_t n = size();
    if (x.size() != n)
        throw DimensionMismatch(n, x.size());
    if (y.size() != n)
        throw DimensionMismatch(n, y.size());

    double dangling_mass = 0.0;
    for (NodeId u : dangling_)
        dangling_mass += x[u];
    const double patch = dangling_mass / static_cast<double>(n);

    const auto offsets = graph_->in_offsets();
    const auto sources = graph_->in_sources();
    for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t k = offsets[i]; k < offsets[i + 1]; ++k) {
            const NodeId j = sources[k];
            acc += x[j] * inv_out_degree_[j];
        }
        y[i] = acc + patch;
    }
}

std::vector<double> transition_apply(const DirectedGraph &g, std::span<const double> x) {
    std::vector<double> y(g.node_count());
    TransitionOperator(g).apply(x, y);
    return y;
}

RankResult pagerank_power(const DirectedGraph &g, const FairnessSpec &spec,
                          std::span<const double> jump, double tol, std::size_t max_iters) {
    const auto start = std::chrono::steady_clock::now();
    spec.validate();
    const std::size_t n = g.node_count();
    if (jump.size() != n)
        throw DimensionMismatch(n, jump.size());
    require_distribution(jump, 1e-9);

    const TransitionOperator op(g);
    const double nu = spec.nu;
    std::vector<double> p(jump.begin(), jump.end());
    std::vector<double> next(n);

    RankResult result;
    auto &report = result.report;
    for (;;) {
        op.apply(p, next);
        ++report.matvec_count;
        double residual = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            next[i] = nu * jump[i] + (1.0 - nu) * next[i];
            residual += std::abs(next[i] - p[i]);
        }
        report.residual_history.push_back(residual);
        report.final_residual = residual;
        if (residual <= tol) {
            // `p` satisfies the tolerance; `next` is one contraction closer.
            p.swap(next);
            break;
        }
        if (report.inner_iterations_total == max_iters)
            throw NoConvergence("power iteration", max_iters, residual,
                                std::move(report.residual_history));
        p.swap(next);
        ++report.inner_iterations_total;
    }

    const double sum = std::accumulate(p.begin(), p.end(), 0.0);
    for (double &v : p)
        v /= sum;
    report.outer_iterations = 1;
    result.scores = std::move(p);
    report.wall_time_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

}  // namespace fspr
