#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <fspr/graph.hpp>
#include <fspr/groups.hpp>
#include <fspr/solver_report.hpp>

namespace fspr {

inline constexpr double kDefaultTeleport = 0.15;

/// Teleport probability and the protected-mass target for a fair ranking.
struct FairnessSpec {
    double nu = kDefaultTeleport;
    /// Unset means "the protected node fraction phi".
    std::optional<double> target_protected_mass;

    /// Throws Error unless 0 < nu <= 1 and, when set, 0 <= target <= 1.
    void validate() const;

    double target(const GroupAssignment &groups) const {
        return target_protected_mass.value_or(groups.phi());
    }
};

/// Scores plus solver diagnostics.
struct RankResult {
    std::vector<double> scores;
    SolverReport report;
};

std::vector<double> uniform_distribution(std::size_t n);

/// Throws Error unless x is nonnegative and sums to 1 within tol.
void require_distribution(std::span<const double> x, double tol = 1e-10);

/// True when every entry is >= 0 and the entries sum to 1 within tol.
bool is_distribution(std::span<const double> x, double tol = 1e-10);

/**
 * Random-walk step with the dangling patch applied as a rank-one term:
 *   y(i) = sum_{j -> i} x(j) / k_out(j) + (1/N) * sum_{j dangling} x(j).
 * This is P^T x for the row-stochastic P whose zero rows are replaced by 1/N.
 */
class TransitionOperator {
public:
    explicit TransitionOperator(const DirectedGraph &g);

    std::size_t size() const { return inv_out_degree_.size(); }

    /// y must not alias x.
    void apply(std::span<const double> x, std::span<double> y) const;

private:
    const DirectedGraph *graph_;
    std::vector<double> inv_out_degree_;  // 0 for dangling nodes
    std::vector<NodeId> dangling_;
};

std::vector<double> transition_apply(const DirectedGraph &g, std::span<const double> x);

/**
 * Power iteration for p = nu * jump + (1 - nu) * P^T p. Stops once the L1
 * residual of the current iterate is at most tol; the returned vector is
 * renormalized to sum 1. Throws NoConvergence after max_iters.
 */
RankResult pagerank_power(const DirectedGraph &g, const FairnessSpec &spec,
                          std::span<const double> jump, double tol = 1e-12,
                          std::size_t max_iters = 100000);

}  // namespace fspr
