#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <fspr/graph.hpp>
#include <fspr/groups.hpp>
#include <fspr/pagerank.hpp>
#include <fspr/solver_report.hpp>

namespace fspr {

struct KrylovConfig {
    /// Krylov basis size before a restart.
    std::size_t restart_dim = 50;
    /// Relative residual target ||b - A x|| / ||b||.
    double tol = 1e-10;
    /// Restart cycles before giving up.
    std::size_t max_outer = 1000;
    /// Allowed |achieved - target| protected mass in the fairness loop.
    double fairness_tol = 1e-8;
    /// Loss-of-orthogonality level that triggers a second Gram-Schmidt pass.
    double reorth_threshold = 1e-8;

    void validate() const;
};

/**
 * Restarted GMRES on (I - (1 - nu) P^T) x = nu * jump. The operator is applied
 * through the sparse graph with the dangling rows folded in as a rank-one
 * term; nothing dense is formed. The solution is normalized to sum 1.
 *
 * Report fields: inner_iterations_total counts Arnoldi steps (one matvec
 * each), outer_iterations counts restart cycles, residual_history holds the
 * Givens-estimated relative residual after every Arnoldi step.
 */
RankResult gmres_solve(const DirectedGraph &g, const FairnessSpec &spec,
                       std::span<const double> jump, const KrylovConfig &cfg = {});

/// Jump distribution theta * uniform(protected) + (1 - theta) * uniform(unprotected).
/// An empty group contributes nothing and the other group takes the full mass.
std::vector<double> group_jump(const GroupAssignment &groups, double theta);

struct FairRankResult {
    std::vector<double> scores;
    std::vector<double> jump;
    double theta = 0.0;
    SolverReport report;
};

/**
 * Tunes theta in group_jump so the protected mass hits the target. Scores are
 * linear in the jump vector, so the protected mass is affine in theta: two
 * solves at theta = 0 and 1 give theta* directly and a third solve confirms
 * it. Bisection takes over if round-off leaves the confirmation outside
 * fairness_tol.
 */
FairRankResult fair_gmres(const DirectedGraph &g, const GroupAssignment &groups,
                          const FairnessSpec &spec, const KrylovConfig &cfg = {});

}  // namespace fspr
