#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include <fspr/graph.hpp>
#include <fspr/groups.hpp>
#include <fspr/pagerank.hpp>

namespace fspr {

inline constexpr std::size_t kDefaultDenseCap = 5000;

/**
 * Dense PageRank operator Q = nu [I - (1 - nu) P]^-1, where P is the
 * row-stochastic transition matrix with dangling rows set to 1/N. Scores for
 * a jump distribution v are Q^T v, so each row of Q is the score vector of
 * a walk that always restarts at that node.
 */
struct DenseResolvent {
    Eigen::MatrixXd q;

    std::size_t size() const { return static_cast<std::size_t>(q.rows()); }
    std::vector<double> scores_for(std::span<const double> jump) const;
};

/// Throws GraphTooLargeForDense above `dense_cap` nodes.
DenseResolvent build_resolvent(const DirectedGraph &g, const FairnessSpec &spec,
                               std::size_t dense_cap = kDefaultDenseCap);

/// Smallest and largest protected mass reachable by any jump distribution;
/// both are attained at simplex vertices, i.e. over the rows of Q.
std::pair<double, double> achievable_mass_range(const DenseResolvent &q,
                                                const GroupAssignment &groups);

struct ExactOptions {
    std::size_t dense_cap = kDefaultDenseCap;
    /// Drop v >= 0 and keep only the two equality constraints.
    bool allow_negative_jump = false;
    /// Bound on the projected-gradient fixed-point residual, in jump units.
    double kkt_tol = 1e-10;
    std::size_t max_iters = 100000;
};

/**
 * The fairness-constrained jump problem
 *
 *   minimize   || Q^T v - p_pr ||_2^2
 *   subject to sum(v) = 1,  (Q f)^T v = target,  v >= 0 (unless relaxed)
 *
 * where p_pr is the uniform-jump PageRank and f the protected indicator.
 * Exposed so callers can evaluate and project candidate jump vectors.
 */
class FairJumpProblem {
public:
    FairJumpProblem(const DenseResolvent &q, const GroupAssignment &groups, double target,
                    bool allow_negative_jump = false);

    std::size_t size() const { return mass_of_row_.size(); }
    double target() const { return target_; }
    std::span<const double> reference_scores() const { return reference_; }
    /// Protected mass contributed by a unit jump onto each node (Q f).
    std::span<const double> row_masses() const { return mass_of_row_; }

    double objective(std::span<const double> v) const;
    void gradient(std::span<const double> v, std::span<double> grad) const;

    /// Euclidean projection onto the feasible set. Throws Infeasible when the
    /// set is empty.
    std::vector<double> project(std::span<const double> y) const;

private:
    std::vector<double> project_simplex_slice(std::span<const double> y) const;
    std::vector<double> project_affine(std::span<const double> y) const;

    const DenseResolvent *q_;
    std::vector<double> reference_;
    std::vector<double> mass_of_row_;
    double target_;
    bool allow_negative_;
    double min_mass_;
    double max_mass_;
};

struct ExactResult {
    std::vector<double> scores;
    std::vector<double> jump;
    double objective = 0.0;
    SolverReport report;
};

/// Solves the constrained problem by accelerated projected gradient.
ExactResult exact_fspr(const DirectedGraph &g, const GroupAssignment &groups,
                       const FairnessSpec &spec, const ExactOptions &options = {});

/// Same, reusing an already built resolvent.
ExactResult exact_fspr(const DenseResolvent &q, const GroupAssignment &groups,
                       const FairnessSpec &spec, const ExactOptions &options = {});

}  // namespace fspr
