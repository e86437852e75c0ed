#include <fspr/exact_fspr.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

#include <fspr/errors.hpp>

namespace fspr {

namespace {

using Eigen::Map;
using Eigen::VectorXd;

Map<const VectorXd> as_eigen(std::span<const double> x) {
    return {x.data(), static_cast<Eigen::Index>(x.size())};
}
Map<VectorXd> as_eigen(std::span<double> x) {
    return {x.data(), static_cast<Eigen::Index>(x.size())};
}

// Projection onto {v >= 0, sum v = 1}: v = max(u - lambda, 0) with lambda from the sorted prefix.
void project_unit_simplex(std::span<const double> u, std::span<double> out,
                          std::vector<double> &scratch) {
    scratch.assign(u.begin(), u.end());
    std::sort(scratch.begin(), scratch.end(), std::greater<>());
    double prefix = 0.0;
    double lambda = 0.0;
    for (std::size_t j = 0; j < scratch.size(); ++j) {
        prefix += scratch[j];
        const double candidate = (prefix - 1.0) / static_cast<double>(j + 1);
        if (scratch[j] - candidate > 0.0)
            lambda = candidate;
    }
    for (std::size_t i = 0; i < u.size(); ++i)
        out[i] = std::max(u[i] - lambda, 0.0);
}

double dot(std::span<const double> a, std::span<const double> b) {
    return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

// Largest eigenvalue of Q Q^T by power iteration; only used to size the gradient step.
double spectral_norm_squared(const Eigen::MatrixXd &q) {
    VectorXd x = VectorXd::Constant(q.rows(), 1.0 / std::sqrt(static_cast<double>(q.rows())));
    double estimate = 0.0;
    for (int it = 0; it < 500; ++it) {
        VectorXd y = q * (q.transpose() * x);
        const double norm = y.norm();
        if (norm == 0.0)
            return 0.0;
        x = y / norm;
        if (std::abs(norm - estimate) <= 1e-12 * norm) {
            estimate = norm;
            break;
        }
        estimate = norm;
    }
    return estimate;
}

}  // namespace

std::vector<double> DenseResolvent::scores_for(std::span<const double> jump) const {
    if (jump.size() != size())
        throw DimensionMismatch(size(), jump.size());
    std::vector<double> p(size());
    as_eigen(std::span<double>(p)) = q.transpose() * as_eigen(jump);
    return p;
}

DenseResolvent build_resolvent(const DirectedGraph &g, const FairnessSpec &spec,
                               std::size_t dense_cap) {
    spec.validate();
    const std::size_t n = g.node_count();
    if (n > dense_cap)
        throw GraphTooLargeForDense(n, dense_cap);

    const auto dim = static_cast<Eigen::Index>(n);
    const double walk = 1.0 - spec.nu;
    Eigen::MatrixXd a = Eigen::MatrixXd::Identity(dim, dim);
    for (std::size_t u = 0; u < n; ++u) {
        const auto row = static_cast<Eigen::Index>(u);
        const auto succ = g.out_neighbors(static_cast<NodeId>(u));
        if (succ.empty()) {
            a.row(row).array() -= walk / static_cast<double>(n);
            continue;
        }
        const double w = walk / static_cast<double>(succ.size());
        for (NodeId t : succ)
            a(row, static_cast<Eigen::Index>(t)) -= w;
    }

    Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
    if (!(lu.rcond() > std::numeric_limits<double>::epsilon()))
        throw SingularSystem("resolvent system is numerically singular");
    DenseResolvent out;
    out.q = lu.solve(Eigen::MatrixXd::Identity(dim, dim) * spec.nu);
    return out;
}

std::pair<double, double> achievable_mass_range(const DenseResolvent &q,
                                                const GroupAssignment &groups) {
    if (groups.size() != q.size())
        throw DimensionMismatch(q.size(), groups.size());
    VectorXd f(q.q.cols());
    for (Eigen::Index i = 0; i < f.size(); ++i)
        f(i) = groups.is_protected(static_cast<NodeId>(i)) ? 1.0 : 0.0;
    const VectorXd row_mass = q.q * f;
    return {row_mass.minCoeff(), row_mass.maxCoeff()};
}

FairJumpProblem::FairJumpProblem(const DenseResolvent &q, const GroupAssignment &groups,
                                 double target, bool allow_negative_jump)
    : q_(&q), target_(target), allow_negative_(allow_negative_jump) {
    const std::size_t n = q.size();
    if (groups.size() != n)
        throw DimensionMismatch(n, groups.size());

    reference_ = q.scores_for(uniform_distribution(n));
    std::tie(min_mass_, max_mass_) = achievable_mass_range(q, groups);
    mass_of_row_.resize(n);
    VectorXd f(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i)
        f(static_cast<Eigen::Index>(i)) = groups.is_protected(static_cast<NodeId>(i)) ? 1.0 : 0.0;
    as_eigen(std::span<double>(mass_of_row_)) = q.q * f;

    constexpr double slack = 1e-12;
    const bool constant_rows = max_mass_ - min_mass_ <= slack;
    if (constant_rows || !allow_negative_) {
        if (target_ < min_mass_ - slack || target_ > max_mass_ + slack)
            throw Infeasible(target_, min_mass_, max_mass_);
        target_ = std::clamp(target_, min_mass_, max_mass_);
    }
}

double FairJumpProblem::objective(std::span<const double> v) const {
    if (v.size() != size())
        throw DimensionMismatch(size(), v.size());
    const VectorXd r = q_->q.transpose() * as_eigen(v) - as_eigen(std::span(reference_));
    return r.squaredNorm();
}

void FairJumpProblem::gradient(std::span<const double> v, std::span<double> grad) const {
    const VectorXd r = q_->q.transpose() * as_eigen(v) - as_eigen(std::span(reference_));
    as_eigen(grad) = 2.0 * (q_->q * r);
}

std::vector<double> FairJumpProblem::project(std::span<const double> y) const {
    if (y.size() != size())
        throw DimensionMismatch(size(), y.size());
    return allow_negative_ ? project_affine(y) : project_simplex_slice(y);
}

std::vector<double> FairJumpProblem::project_affine(std::span<const double> y) const {
    // v = y - lambda * 1 - mu * a with the two equality constraints solved exactly.
    const auto n = static_cast<double>(size());
    const std::span<const double> a = mass_of_row_;
    const double sum_a = std::accumulate(a.begin(), a.end(), 0.0);
    const double aa = dot(a, a);
    const double sum_y = std::accumulate(y.begin(), y.end(), 0.0);
    const double ay = dot(a, y);
    const double det = n * aa - sum_a * sum_a;

    double lambda = 0.0;
    double mu = 0.0;
    if (max_mass_ - min_mass_ <= 1e-12 || std::abs(det) <= 1e-14 * n * aa) {
        lambda = (sum_y - 1.0) / n;
    } else {
        const double r1 = sum_y - 1.0;
        const double r2 = ay - target_;
        lambda = (aa * r1 - sum_a * r2) / det;
        mu = (n * r2 - sum_a * r1) / det;
    }
    std::vector<double> v(size());
    for (std::size_t i = 0; i < v.size(); ++i)
        v[i] = y[i] - lambda - mu * a[i];
    return v;
}

std::vector<double> FairJumpProblem::project_simplex_slice(std::span<const double> y) const {
    // KKT: v(mu) = simplex projection of (y - mu * a). The protected mass a^T v(mu)
    // is nonincreasing in mu, so the fairness multiplier is a scalar root.
    const std::size_t n = size();
    std::vector<double> v(n);
    std::vector<double> shifted(n);
    std::vector<double> scratch;
    const std::span<const double> a = mass_of_row_;

    if (max_mass_ - min_mass_ <= 1e-12) {
        project_unit_simplex(y, v, scratch);
        return v;
    }

    auto excess = [&](double mu) {
        for (std::size_t i = 0; i < n; ++i)
            shifted[i] = y[i] - mu * a[i];
        project_unit_simplex(shifted, v, scratch);
        return dot(a, v) - target_;
    };

    double lo = -1.0;
    double hi = 1.0;
    double h_lo = excess(lo);
    for (int k = 0; h_lo < 0.0 && k < 1000; ++k)
        h_lo = excess(lo *= 2.0);
    double h_hi = excess(hi);
    for (int k = 0; h_hi > 0.0 && k < 1000; ++k)
        h_hi = excess(hi *= 2.0);
    if (h_lo < 0.0 || h_hi > 0.0)
        throw Infeasible(target_, min_mass_, max_mass_);
    if (h_lo == 0.0) {
        excess(lo);
        return v;
    }
    if (h_hi == 0.0) {
        excess(hi);
        return v;
    }

    // Illinois false position; h is piecewise linear so this terminates quickly.
    int side = 0;
    double mu = lo;
    double h = h_lo;
    for (int it = 0; it < 400; ++it) {
        mu = (lo * h_hi - hi * h_lo) / (h_hi - h_lo);
        if (!(mu > lo && mu < hi))
            mu = 0.5 * (lo + hi);
        h = excess(mu);
        if (std::abs(h) <= 1e-15 || hi - lo <= 1e-16 * std::max(1.0, std::abs(mu)))
            break;
        if (h > 0.0) {
            lo = mu;
            h_lo = h;
            if (side == 1)
                h_hi *= 0.5;
            side = 1;
        } else {
            hi = mu;
            h_hi = h;
            if (side == -1)
                h_lo *= 0.5;
            side = -1;
        }
    }
    excess(mu);
    return v;
}

ExactResult exact_fspr(const DirectedGraph &g, const GroupAssignment &groups,
                       const FairnessSpec &spec, const ExactOptions &options) {
    const auto start = std::chrono::steady_clock::now();
    const auto q = build_resolvent(g, spec, options.dense_cap);
    auto result = exact_fspr(q, groups, spec, options);
    result.report.wall_time_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

ExactResult exact_fspr(const DenseResolvent &q, const GroupAssignment &groups,
                       const FairnessSpec &spec, const ExactOptions &options) {
    const auto start = std::chrono::steady_clock::now();
    spec.validate();
    const std::size_t n = q.size();
    const FairJumpProblem problem(q, groups, spec.target(groups), options.allow_negative_jump);

    const double lipschitz = 2.0 * spectral_norm_squared(q.q) * 1.01;
    const double step = lipschitz > 0.0 ? 1.0 / lipschitz : 1.0;

    std::vector<double> x = problem.project(uniform_distribution(n));
    std::vector<double> y = x;
    std::vector<double> grad(n);
    std::vector<double> trial(n);
    double momentum = 1.0;

    ExactResult result;
    auto &report = result.report;
    auto fixed_point_residual = [&](std::span<const double> point) {
        problem.gradient(point, grad);
        for (std::size_t i = 0; i < n; ++i)
            trial[i] = point[i] - step * grad[i];
        return max_abs_diff(point, problem.project(trial));
    };

    double residual = fixed_point_residual(x);
    std::size_t it = 0;
    while (residual > options.kkt_tol) {
        if (it == options.max_iters)
            throw NoConvergence("exact FSPR projected gradient", it, residual,
                                std::move(report.residual_history));
        ++it;
        problem.gradient(y, grad);
        for (std::size_t i = 0; i < n; ++i)
            trial[i] = y[i] - step * grad[i];
        std::vector<double> next = problem.project(trial);

        // Adaptive restart: drop momentum once it points against the descent step.
        double alignment = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            alignment += (y[i] - next[i]) * (next[i] - x[i]);
        if (alignment > 0.0) {
            momentum = 1.0;
            y = next;
        } else {
            const double momentum_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum));
            const double beta = (momentum - 1.0) / momentum_next;
            for (std::size_t i = 0; i < n; ++i)
                y[i] = next[i] + beta * (next[i] - x[i]);
            momentum = momentum_next;
        }
        const double step_size = max_abs_diff(next, x);
        x = std::move(next);
        report.residual_history.push_back(step_size);
        if (step_size <= options.kkt_tol)
            residual = fixed_point_residual(x);
    }

    result.jump = std::move(x);
    result.scores = q.scores_for(result.jump);
    result.objective = problem.objective(result.jump);
    report.outer_iterations = it;
    report.final_residual = residual;
    report.achieved_protected_mass = protected_mass(result.scores, groups);
    report.wall_time_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

}  // namespace fspr
