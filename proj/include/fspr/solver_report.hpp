#pragma once

#include <cstddef>
#include <vector>

namespace fspr {

/// Diagnostics returned alongside the scores of every solver run.
struct SolverReport {
    std::size_t outer_iterations = 0;
    std::size_t inner_iterations_total = 0;
    /// Sparse matrix-vector products, including one residual evaluation per restart.
    std::size_t matvec_count = 0;
    double final_residual = 0.0;
    double achieved_protected_mass = 0.0;
    double wall_time_seconds = 0.0;
    std::vector<double> residual_history;
};

}  // namespace fspr
