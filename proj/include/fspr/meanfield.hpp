#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <fspr/degree_classes.hpp>
#include <fspr/graph.hpp>
#include <fspr/groups.hpp>
#include <fspr/pagerank.hpp>

namespace fspr {

struct MeanFieldOptions {
    /// When a nonempty group has zero total in-degree, spread its jump mass
    /// uniformly over its members instead of throwing DegenerateGroup.
    bool uniform_fallback = false;
    /// Nodes with k_out = 0 are left out of <k_in^2 / k_out>. When false they
    /// enter with their patched effective out-degree N.
    bool exclude_dangling_from_moment = true;
    /// L1 stopping rule for the class-level recursion.
    double tol = 1e-12;
    std::size_t max_iters = 200;
};

/**
 * Degree-proportional jump vector: node u in group C gets
 *   phi_C * k_in(u) / D_C,
 * where phi_P is the target protected mass (phi_U = 1 - phi_P) and D_C the
 * total in-degree of the group. Each group's entries sum to phi_C exactly.
 */
struct JumpEstimate {
    std::vector<double> values;
};

JumpEstimate estimate_jump(const DirectedGraph &g, const GroupAssignment &groups,
                           const FairnessSpec &spec = {}, const MeanFieldOptions &opts = {});

/**
 * Closed-form mean-field scores computed from in-degrees and labels only:
 *   p(u) = nu * phi_C k_in(u) / D_C + (1 - nu) * k_in(u) / M.
 * The unnormalized vector already sums to 1 up to round-off; `normalize`
 * rescales it anyway. Linear in N.
 */
std::vector<double> meanfield_scores_from_degrees(std::span<const std::size_t> in_degrees,
                                                  std::span<const Group> labels,
                                                  const FairnessSpec &spec,
                                                  const MeanFieldOptions &opts = {},
                                                  bool normalize = true);

/// Full pipeline straight from an edge list: one pass to count in-degrees,
/// one pass over the nodes to emit scores. labels.size() fixes N.
std::vector<double> meanfield_from_edges(std::span<const Edge> edges,
                                         std::span<const Group> labels,
                                         const FairnessSpec &spec,
                                         const MeanFieldOptions &opts = {});

struct MeanFieldScores {
    /// Node scores renormalized to sum 1.
    std::vector<double> per_node;
    /// Node scores straight from the closed form.
    std::vector<double> unnormalized;
    /// Per degree-class values, indexed like the partition's classes.
    std::vector<double> per_class_mean;
    std::vector<double> variance_per_class;
    /// sigma / mean; NaN for classes with k_in = 0.
    std::vector<double> cv_per_class;
};

MeanFieldScores meanfield_closed_form(const DirectedGraph &g, const GroupAssignment &groups,
                                      const FairnessSpec &spec = {},
                                      const MeanFieldOptions &opts = {});

/// Same, with a precomputed partition for the per-class fields.
MeanFieldScores meanfield_closed_form(const DirectedGraph &g, const GroupAssignment &groups,
                                      const DegreeClassPartition &part,
                                      const FairnessSpec &spec = {},
                                      const MeanFieldOptions &opts = {});

struct GroupMass {
    double protected_mass;
    double fairness_gap;
};

/// Analytic protected mass nu * t + (1 - nu) * D_P / M of the closed form and
/// its distance to the target t.
GroupMass meanfield_group_mass(const DirectedGraph &g, const GroupAssignment &groups,
                               const FairnessSpec &spec = {});

struct ClassMeanField {
    /// Fixed point of the class recursion.
    std::vector<double> raw;
    /// raw rescaled so that sum_k size_k * mean_k = 1.
    std::vector<double> normalized;
    std::size_t iterations = 0;
    double residual = 0.0;
};

/**
 * Iterates the class-level recursion on empirical edge counts
 *   p_n(k) = nu v_k + (1 - nu) / |k| * sum_{k'} E(k' -> k) / k'_out * p_{n-1}(k')
 * from p_0 = 1/N until the size-weighted L1 change is at most opts.tol.
 * Throws NoConvergence after opts.max_iters.
 */
ClassMeanField meanfield_iterate(const DegreeClassPartition &part, const JumpEstimate &jump,
                                 const FairnessSpec &spec, const MeanFieldOptions &opts = {});

/// Node scores obtained by broadcasting normalized class means.
std::vector<double> broadcast_class_values(const DegreeClassPartition &part,
                                           std::span<const double> class_values);

struct ClassFluctuations {
    std::vector<double> variance;
    std::vector<double> cv;
    double mean_in_degree = 0.0;
    /// <k_in^2 / k_out> over the nodes selected by the options.
    double in_degree_moment = 0.0;
};

/**
 * Heavy-tail intra-class variance and coefficient of variation:
 *   sigma^2(k) = (1 - nu)^4 / (N^2 <k_in>^3) * <k_in^2/k_out> * k_in
 *   cv(k)      = (1 - nu) * sqrt(<k_in^2/k_out> / (<k_in> k_in))
 * Both depend on the class through k_in alone. Throws EmptyMoment if no
 * node qualifies for the moment.
 */
ClassFluctuations meanfield_variance(const DegreeClassPartition &part, const FairnessSpec &spec,
                                     const MeanFieldOptions &opts = {});

/**
 * Fixed point of the full class-level variance recursion on empirical edge
 * counts, given the class means it fluctuates around:
 *   s_n(k) = (1 - nu)^2 [ 1/|k| sum E(k'->k)/k'_out^2 (s_{n-1}(k') + m(k')^2)
 *                         - 1/(k_in |k|^2) (sum E(k'->k)/k'_out m(k'))^2 ]
 * A verification path for the closed form; not needed for ranking.
 */
std::vector<double> meanfield_variance_iterate(const DegreeClassPartition &part,
                                               std::span<const double> class_means,
                                               const FairnessSpec &spec,
                                               const MeanFieldOptions &opts = {});

}  // namespace fspr
