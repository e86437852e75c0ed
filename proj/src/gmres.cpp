#include <fspr/gmres.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include <fspr/errors.hpp>

namespace fspr {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        s += a[i] * b[i];
    return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

// y <- x - (1 - nu) P^T x
class FairPageRankSystem {
public:
    FairPageRankSystem(const DirectedGraph &g, double nu) : op_(g), walk_(1.0 - nu) {}

    void apply(std::span<const double> x, std::span<double> y) {
        op_.apply(x, y);
        ++matvecs_;
        for (std::size_t i = 0; i < x.size(); ++i)
            y[i] = x[i] - walk_ * y[i];
    }

    std::size_t matvecs() const { return matvecs_; }

private:
    TransitionOperator op_;
    double walk_;
    std::size_t matvecs_ = 0;
};

}  // namespace

void KrylovConfig::validate() const {
    if (restart_dim < 1)
        throw Error("restart dimension must be at least 1");
    if (!(tol > 0.0))
        throw Error("GMRES tolerance must be positive");
    if (!(fairness_tol > 0.0))
        throw Error("fairness tolerance must be positive");
}

RankResult gmres_solve(const DirectedGraph &g, const FairnessSpec &spec,
                       std::span<const double> jump, const KrylovConfig &cfg) {
    const auto start = std::chrono::steady_clock::now();
    spec.validate();
    cfg.validate();
    const std::size_t n = g.node_count();
    if (jump.size() != n)
        throw DimensionMismatch(n, jump.size());
    require_distribution(jump, 1e-9);

    FairPageRankSystem system(g, spec.nu);
    const std::size_t m = cfg.restart_dim;

    std::vector<double> b(n);
    for (std::size_t i = 0; i < n; ++i)
        b[i] = spec.nu * jump[i];
    const double b_norm = norm2(b);

    std::vector<double> x(jump.begin(), jump.end());
    std::vector<double> r(n);
    std::vector<std::vector<double>> basis(m + 1, std::vector<double>(n));
    // Column-major upper Hessenberg, h[j] holds column j with j + 2 entries.
    std::vector<std::vector<double>> h(m, std::vector<double>(m + 1));
    std::vector<double> cs(m), sn(m), rhs(m + 1), coeffs(m), second_pass(m + 1);

    RankResult result;
    auto &report = result.report;
    double relative = 0.0;

    for (std::size_t cycle = 0;; ++cycle) {
        system.apply(x, r);
        for (std::size_t i = 0; i < n; ++i)
            r[i] = b[i] - r[i];
        const double beta = norm2(r);
        relative = beta / b_norm;
        if (relative <= cfg.tol)
            break;
        if (cycle == cfg.max_outer)
            throw NoConvergence("GMRES", report.inner_iterations_total, relative,
                                std::move(report.residual_history));
        ++report.outer_iterations;

        for (std::size_t i = 0; i < n; ++i)
            basis[0][i] = r[i] / beta;
        std::fill(rhs.begin(), rhs.end(), 0.0);
        rhs[0] = beta;

        std::size_t k = 0;
        while (k < m) {
            const std::size_t j = k;
            auto &w = basis[j + 1];
            system.apply(basis[j], w);
            ++report.inner_iterations_total;
            const double w_initial = norm2(w);

            // Modified Gram-Schmidt.
            for (std::size_t i = 0; i <= j; ++i) {
                const double hij = dot(w, basis[i]);
                h[j][i] = hij;
                for (std::size_t t = 0; t < n; ++t)
                    w[t] -= hij * basis[i][t];
            }
            double w_norm = norm2(w);
            // Second pass only when the first one left measurable overlap.
            double overlap = 0.0;
            for (std::size_t i = 0; i <= j; ++i) {
                second_pass[i] = dot(w, basis[i]);
                overlap = std::max(overlap, std::abs(second_pass[i]));
            }
            if (w_norm > 0.0 && overlap > cfg.reorth_threshold * w_norm) {
                for (std::size_t i = 0; i <= j; ++i) {
                    h[j][i] += second_pass[i];
                    for (std::size_t t = 0; t < n; ++t)
                        w[t] -= second_pass[i] * basis[i][t];
                }
                w_norm = norm2(w);
            }
            h[j][j + 1] = w_norm;

            // Apply accumulated rotations, then annihilate the subdiagonal.
            for (std::size_t i = 0; i < j; ++i) {
                const double a = h[j][i];
                const double c = h[j][i + 1];
                h[j][i] = cs[i] * a + sn[i] * c;
                h[j][i + 1] = -sn[i] * a + cs[i] * c;
            }
            const double denom = std::hypot(h[j][j], h[j][j + 1]);
            cs[j] = denom == 0.0 ? 1.0 : h[j][j] / denom;
            sn[j] = denom == 0.0 ? 0.0 : h[j][j + 1] / denom;
            h[j][j] = denom;
            h[j][j + 1] = 0.0;
            rhs[j + 1] = -sn[j] * rhs[j];
            rhs[j] = cs[j] * rhs[j];

            ++k;
            const double estimate = std::abs(rhs[j + 1]) / b_norm;
            report.residual_history.push_back(estimate);
            const bool happy_breakdown = w_norm <= 1e-14 * std::max(w_initial, 1e-300);
            if (happy_breakdown || estimate <= cfg.tol)
                break;
            for (std::size_t t = 0; t < n; ++t)
                w[t] /= w_norm;
        }

        // Back substitution on the k x k triangle, then update the iterate.
        for (std::size_t ii = k; ii-- > 0;) {
            double s = rhs[ii];
            for (std::size_t jj = ii + 1; jj < k; ++jj)
                s -= h[jj][ii] * coeffs[jj];
            coeffs[ii] = h[ii][ii] == 0.0 ? 0.0 : s / h[ii][ii];
        }
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t t = 0; t < n; ++t)
                x[t] += coeffs[i] * basis[i][t];
    }

    report.final_residual = relative;
    report.matvec_count = system.matvecs();
    const double sum = std::accumulate(x.begin(), x.end(), 0.0);
    for (double &v : x)
        v /= sum;
    result.scores = std::move(x);
    report.wall_time_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

std::vector<double> group_jump(const GroupAssignment &groups, double theta) {
    const std::size_t n = groups.size();
    const std::size_t n_p = groups.protected_count();
    const std::size_t n_u = groups.unprotected_count();
    if (n_p == 0)
        theta = 0.0;
    else if (n_u == 0)
        theta = 1.0;
    const double per_p = n_p == 0 ? 0.0 : theta / static_cast<double>(n_p);
    const double per_u = n_u == 0 ? 0.0 : (1.0 - theta) / static_cast<double>(n_u);
    std::vector<double> v(n);
    for (std::size_t u = 0; u < n; ++u)
        v[u] = groups.is_protected(static_cast<NodeId>(u)) ? per_p : per_u;
    return v;
}

FairRankResult fair_gmres(const DirectedGraph &g, const GroupAssignment &groups,
                          const FairnessSpec &spec, const KrylovConfig &cfg) {
    const auto start = std::chrono::steady_clock::now();
    spec.validate();
    cfg.validate();
    if (groups.size() != g.node_count())
        throw DimensionMismatch(g.node_count(), groups.size());
    const double target = spec.target(groups);

    FairRankResult out;
    auto &report = out.report;
    double achieved = 0.0;
    auto solve_at = [&](double theta) {
        auto jump = group_jump(groups, theta);
        auto solved = gmres_solve(g, spec, jump, cfg);
        ++report.outer_iterations;
        report.inner_iterations_total += solved.report.inner_iterations_total;
        report.matvec_count += solved.report.matvec_count;
        report.final_residual = solved.report.final_residual;
        report.residual_history = std::move(solved.report.residual_history);
        achieved = protected_mass(solved.scores, groups);
        out.scores = std::move(solved.scores);
        out.jump = std::move(jump);
        out.theta = theta;
        return achieved;
    };

    if (groups.protected_count() == 0 || groups.unprotected_count() == 0) {
        // One group only: every theta yields the same jump and the same mass.
        const double mass = solve_at(groups.protected_count() == 0 ? 0.0 : 1.0);
        if (std::abs(mass - target) > cfg.fairness_tol)
            throw Infeasible(target, mass, mass);
    } else {
        const double m0 = solve_at(0.0);
        const double m1 = solve_at(1.0);
        const double lo = std::min(m0, m1);
        const double hi = std::max(m0, m1);
        if (target < lo - cfg.fairness_tol || target > hi + cfg.fairness_tol)
            throw Infeasible(target, lo, hi);
        const double slope = m1 - m0;
        const double theta = slope == 0.0 ? 0.5 : std::clamp((target - m0) / slope, 0.0, 1.0);
        double mass = solve_at(theta);

        if (std::abs(mass - target) > cfg.fairness_tol && slope != 0.0) {
            double a = 0.0;
            double b = 1.0;
            for (int it = 0; it < 200 && std::abs(mass - target) > cfg.fairness_tol; ++it) {
                const double mid = 0.5 * (a + b);
                mass = solve_at(mid);
                // Mass moves with sign(slope) as theta grows.
                if ((mass < target) == (slope > 0.0))
                    a = mid;
                else
                    b = mid;
            }
        }
        if (std::abs(mass - target) > cfg.fairness_tol)
            throw NoConvergence("fairness loop", report.outer_iterations,
                                std::abs(mass - target));
    }

    report.achieved_protected_mass = achieved;
    report.wall_time_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
}

}  // namespace fspr
