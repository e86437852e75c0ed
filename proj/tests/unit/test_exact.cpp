#include <doctest.h>

#include <limits>

#include <fspr/errors.hpp>
#include <fspr/exact_fspr.hpp>
#include <fspr/metrics.hpp>

#include "oracles.hpp"

using namespace fspr;

namespace {

struct Fixture {
    std::vector<Edge> edges;
    DirectedGraph graph;
    GroupAssignment groups;
};

Fixture random_fixture(std::size_t n, std::size_t m, std::uint64_t seed, double phi = 0.4) {
    auto edges = oracle::random_edges(n, m, seed);
    BuildOptions opts;
    opts.node_count = n;
    auto g = build_graph(edges, opts);
    GroupAssignment groups(g, oracle::random_labels(n, phi, seed + 7));
    return {std::move(edges), std::move(g), std::move(groups)};
}

double objective_of(const Eigen::MatrixXd &q, const Eigen::VectorXd &ref, const Eigen::VectorXd &v) {
    return (q.transpose() * v - ref).squaredNorm();
}

/// Global minimizer by enumerating supports: on each support solve the
/// equality-constrained problem through its KKT system and keep the best
/// candidate that is nonnegative and feasible.
Eigen::VectorXd active_set_oracle(const Eigen::MatrixXd &q, const Eigen::VectorXd &f, double target) {
    const Eigen::Index n = q.rows();
    const Eigen::VectorXd ref = q.transpose() * Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
    const Eigen::MatrixXd h = q * q.transpose();
    const Eigen::VectorXd lin = q * ref;
    const Eigen::VectorXd a = q * f;

    Eigen::VectorXd best;
    double best_obj = std::numeric_limits<double>::infinity();
    for (unsigned mask = 1; mask < (1u << n); ++mask) {
        std::vector<Eigen::Index> s;
        for (Eigen::Index i = 0; i < n; ++i)
            if (mask & (1u << i))
                s.push_back(i);
        const Eigen::Index k = static_cast<Eigen::Index>(s.size());
        Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(k + 2, k + 2);
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(k + 2);
        for (Eigen::Index i = 0; i < k; ++i) {
            for (Eigen::Index j = 0; j < k; ++j)
                kkt(i, j) = 2.0 * h(s[i], s[j]);
            kkt(i, k) = kkt(k, i) = 1.0;
            kkt(i, k + 1) = kkt(k + 1, i) = a(s[i]);
            rhs(i) = 2.0 * lin(s[i]);
        }
        rhs(k) = 1.0;
        rhs(k + 1) = target;
        const Eigen::VectorXd sol = kkt.completeOrthogonalDecomposition().solve(rhs);
        if ((kkt * sol - rhs).norm() > 1e-9)
            continue;
        Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
        bool nonnegative = true;
        for (Eigen::Index i = 0; i < k; ++i) {
            v(s[i]) = sol(i);
            nonnegative = nonnegative && sol(i) >= -1e-12;
        }
        if (!nonnegative)
            continue;
        const double obj = objective_of(q, ref, v);
        if (obj < best_obj) {
            best_obj = obj;
            best = v;
        }
    }
    return best;
}

Eigen::VectorXd indicator(const GroupAssignment &groups) {
    Eigen::VectorXd f(static_cast<Eigen::Index>(groups.size()));
    for (std::size_t i = 0; i < groups.size(); ++i)
        f(static_cast<Eigen::Index>(i)) = groups.is_protected(static_cast<NodeId>(i)) ? 1.0 : 0.0;
    return f;
}

bool feasible(std::span<const double> v, std::span<const double> row_mass, double target, double tol) {
    double total = 0.0, mass = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (v[i] < -tol)
            return false;
        total += v[i];
        mass += v[i] * row_mass[i];
    }
    return std::abs(total - 1.0) <= tol && std::abs(mass - target) <= tol;
}

}  // namespace

TEST_CASE("two-cycle with one node per group is already fair") {
    const std::vector<Edge> e{{0, 1}, {1, 0}};
    const auto g = build_graph(e);
    const GroupAssignment groups(g, {Group::Protected, Group::Unprotected});
    FairnessSpec spec;
    spec.target_protected_mass = 0.5;
    const auto r = exact_fspr(g, groups, spec);
    CHECK(r.jump[0] == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(r.jump[1] == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(r.scores[0] == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(r.objective <= 1e-18);
}

TEST_CASE("target equal to the unconstrained mass keeps PageRank") {
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
        const auto fx = random_fixture(40, 120, seed);
        const auto pr = pagerank_power(fx.graph, {}, uniform_distribution(40), 1e-14);
        FairnessSpec spec;
        spec.target_protected_mass = protected_mass(pr.scores, fx.groups);
        const auto r = exact_fspr(fx.graph, fx.groups, spec);
        CHECK(utility_loss(r.scores, pr.scores) <= 1e-9);
        CHECK(r.objective <= 1e-16);
        CHECK(oracle::max_abs_diff(r.jump, uniform_distribution(40)) <= 1e-6);
    }
}

TEST_CASE("six-node problems match the support-enumeration oracle") {
    std::size_t solved = 0;
    for (std::uint64_t seed = 1; solved < 8; ++seed) {
        REQUIRE(seed < 200);
        auto edges = oracle::random_edges(6, 10, seed);
        BuildOptions opts;
        opts.node_count = 6;
        const auto g = build_graph(edges, opts);
        const GroupAssignment groups(g, {Group::Protected, Group::Unprotected, Group::Protected,
                                         Group::Unprotected, Group::Protected, Group::Unprotected});
        const Eigen::MatrixXd q = oracle::dense_resolvent(6, edges, 0.15);
        const Eigen::VectorXd f = indicator(groups);
        const Eigen::VectorXd row_mass = q * f;
        // Only graphs where a jump can reach the target.
        if (row_mass.minCoeff() > 0.45 || row_mass.maxCoeff() < 0.55)
            continue;
        ++solved;

        const auto r = exact_fspr(g, groups, {});
        const Eigen::VectorXd best = active_set_oracle(q, f, 0.5);
        REQUIRE(best.size() == 6);
        const auto best_v = oracle::as_vector(best);
        CHECK(oracle::max_abs_diff(r.jump, best_v) <= 1e-4);
        const Eigen::VectorXd best_scores = q.transpose() * best;
        CHECK(oracle::max_abs_diff(r.scores, oracle::as_vector(best_scores)) <= 1e-4);
        const Eigen::VectorXd ref = q.transpose() * Eigen::VectorXd::Constant(6, 1.0 / 6.0);
        CHECK(r.objective <= objective_of(q, ref, best) + 1e-12);
        CHECK(std::abs(protected_mass(r.scores, groups) - 0.5) <= 1e-6);
    }
}

TEST_CASE("achievable range examples") {
    const std::vector<Edge> e{{0, 1}, {1, 0}, {1, 2}};
    const auto g = build_graph(e);
    const GroupAssignment all(g, std::vector<Group>(3, Group::Protected));
    const auto [lo, hi] = achievable_mass_range(build_resolvent(g, {}), all);
    CHECK(lo == doctest::Approx(1.0));
    CHECK(hi == doctest::Approx(1.0));

    const std::vector<Edge> cyc{{0, 1}, {1, 0}};
    const auto two = build_graph(cyc);
    const GroupAssignment split(two, {Group::Protected, Group::Unprotected});
    const auto [lo2, hi2] = achievable_mass_range(build_resolvent(two, {}), split);
    CHECK(lo2 <= 0.5);
    CHECK(hi2 >= 0.5);
}

TEST_CASE("achievable range matches a column scan") {
    const auto fx = random_fixture(20, 50, 12);
    const Eigen::MatrixXd q = oracle::dense_resolvent(20, fx.edges, 0.15);
    const Eigen::VectorXd f = indicator(fx.groups);
    // Column i of Q^T is row i of Q: the scores of a walker that always restarts at i.
    double lo = 1.0, hi = 0.0;
    for (Eigen::Index i = 0; i < 20; ++i) {
        const double mass = q.row(i).dot(f);
        lo = std::min(lo, mass);
        hi = std::max(hi, mass);
    }
    const auto [got_lo, got_hi] = achievable_mass_range(build_resolvent(fx.graph, {}), fx.groups);
    CHECK(got_lo == doctest::Approx(lo).epsilon(1e-12));
    CHECK(got_hi == doctest::Approx(hi).epsilon(1e-12));
}

TEST_CASE("infeasible targets are reported") {
    const auto fx = random_fixture(20, 50, 13);
    const auto q = build_resolvent(fx.graph, {});
    const auto [lo, hi] = achievable_mass_range(q, fx.groups);
    FairnessSpec spec;
    spec.target_protected_mass = std::min(1.0, hi + 0.01);
    if (hi + 0.01 <= 1.0)
        CHECK_THROWS_AS(exact_fspr(q, fx.groups, spec), Infeasible);
    spec.target_protected_mass = std::max(0.0, lo - 0.01);
    if (lo - 0.01 >= 0.0)
        CHECK_THROWS_AS(exact_fspr(q, fx.groups, spec), Infeasible);
    try {
        spec.target_protected_mass = 0.0;
        exact_fspr(q, fx.groups, spec);
        FAIL("expected Infeasible");
    } catch (const Infeasible &e) {
        CHECK(e.min_mass == doctest::Approx(lo));
        CHECK(e.max_mass == doctest::Approx(hi));
    }
}

TEST_CASE("projection lands on the feasible set and is a projection") {
    const auto fx = random_fixture(30, 90, 17);
    const auto q = build_resolvent(fx.graph, {});
    const FairJumpProblem problem(q, fx.groups, fx.groups.phi());
    std::mt19937_64 rng(5);
    std::normal_distribution<double> noise(0.0, 0.2);
    std::vector<std::vector<double>> points;
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> y(30);
        for (auto &x : y)
            x = noise(rng);
        const auto p = problem.project(y);
        CHECK(feasible(p, problem.row_masses(), problem.target(), 1e-10));
        const auto again = problem.project(p);
        CHECK(oracle::max_abs_diff(again, p) <= 1e-10);
        points.push_back(p);

        // Obtuse-angle criterion against other feasible points.
        for (const auto &z : points) {
            double inner = 0.0;
            for (std::size_t i = 0; i < 30; ++i)
                inner += (y[i] - p[i]) * (z[i] - p[i]);
            CHECK(inner <= 1e-10);
        }
    }
}

TEST_CASE("objective and gradient agree with finite differences") {
    const auto fx = random_fixture(15, 40, 23);
    const auto q = build_resolvent(fx.graph, {});
    const FairJumpProblem problem(q, fx.groups, fx.groups.phi());
    const auto v = oracle::random_distribution(15, 3);
    std::vector<double> grad(15);
    problem.gradient(v, grad);
    for (std::size_t i = 0; i < 15; ++i) {
        auto plus = v, minus = v;
        plus[i] += 1e-6;
        minus[i] -= 1e-6;
        const double fd = (problem.objective(plus) - problem.objective(minus)) / 2e-6;
        CHECK(grad[i] == doctest::Approx(fd).epsilon(1e-5).scale(1e-8));
    }
}

TEST_CASE("random feasible perturbations never improve the solution") {
    const auto fx = random_fixture(60, 200, 29);
    const auto q = build_resolvent(fx.graph, {});
    const auto r = exact_fspr(q, fx.groups, {});
    CHECK(std::abs(protected_mass(r.scores, fx.groups) - fx.groups.phi()) <= 1e-6);
    const FairJumpProblem problem(q, fx.groups, fx.groups.phi());
    const double base = problem.objective(r.jump);
    CHECK(base == doctest::Approx(r.objective).epsilon(1e-9));

    std::mt19937_64 rng(99);
    std::normal_distribution<double> noise(0.0, 1.0);
    std::uniform_real_distribution<double> scale_draw(-6.0, -1.0);
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        const double scale = std::pow(10.0, scale_draw(rng));
        std::vector<double> y(r.jump);
        for (auto &x : y)
            x += scale * noise(rng);
        const auto candidate = problem.project(y);
        worst = std::min(worst, problem.objective(candidate) - base);
    }
    CHECK(worst >= -1e-9);
}

TEST_CASE("relaxed sign constraint matches the equality-constrained KKT solution") {
    const auto fx = random_fixture(25, 70, 31);
    const Eigen::MatrixXd q = oracle::dense_resolvent(25, fx.edges, 0.15);
    const Eigen::VectorXd f = indicator(fx.groups);
    const Eigen::VectorXd ref = q.transpose() * Eigen::VectorXd::Constant(25, 1.0 / 25.0);
    const double target = 0.5;

    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(27, 27);
    kkt.topLeftCorner(25, 25) = 2.0 * q * q.transpose();
    kkt.block(0, 25, 25, 1).setOnes();
    kkt.block(25, 0, 1, 25).setOnes();
    const Eigen::VectorXd a = q * f;
    kkt.block(0, 26, 25, 1) = a;
    kkt.block(26, 0, 1, 25) = a.transpose();
    Eigen::VectorXd rhs(27);
    rhs.head(25) = 2.0 * q * ref;
    rhs(25) = 1.0;
    rhs(26) = target;
    const Eigen::VectorXd sol = kkt.fullPivLu().solve(rhs);

    FairnessSpec spec;
    spec.target_protected_mass = target;
    ExactOptions opts;
    opts.allow_negative_jump = true;
    const auto r = exact_fspr(fx.graph, fx.groups, spec, opts);
    const Eigen::VectorXd v = sol.head(25);
    CHECK(r.objective == doctest::Approx(objective_of(q, ref, v)).epsilon(1e-6).scale(1e-14));
    CHECK(oracle::max_abs_diff(r.scores, oracle::as_vector(Eigen::VectorXd(q.transpose() * v))) <= 1e-8);
}

TEST_CASE("both entry points agree and honour the dense cap") {
    const auto fx = random_fixture(30, 80, 37);
    const auto a = exact_fspr(fx.graph, fx.groups, {});
    const auto b = exact_fspr(build_resolvent(fx.graph, {}), fx.groups, {});
    CHECK(a.jump == b.jump);
    CHECK(is_distribution(a.jump));
    CHECK(is_distribution(a.scores));
    ExactOptions opts;
    opts.dense_cap = 10;
    CHECK_THROWS_AS(exact_fspr(fx.graph, fx.groups, {}, opts), GraphTooLargeForDense);
}
