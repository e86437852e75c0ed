#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <vector>

#include <fspr/groups.hpp>

namespace fspr {

/// Mean absolute deviation (1/N) sum |approx - exact|.
double utility_loss(std::span<const double> approx, std::span<const double> exact);

/// |protected mass - target|. For scores summing to 1 this equals the
/// unprotected group's |mass - (1 - target)|.
double fairness_gap(std::span<const double> p, const GroupAssignment &groups, double target);

/// Same quantity measured on the unprotected side.
double fairness_gap_unprotected(std::span<const double> p, const GroupAssignment &groups,
                                double target);

/// Pearson correlation. Throws DegenerateInput on fewer than 2 entries or zero variance.
double pearson(std::span<const double> x, std::span<const double> y);

/// Kendall tau-b with tie correction, O(n log n). Throws DegenerateInput when
/// either side is constant.
double kendall_tau(std::span<const double> x, std::span<const double> y);

/// p = 1 or p = 2.
double lp_distance(std::span<const double> x, std::span<const double> y, int p);

/// Indices of the k largest entries; ties go to the smaller node id.
std::vector<std::size_t> top_k(std::span<const double> x, std::size_t k);

/// |topK(x) & topK(y)| / k.
double topk_overlap(std::span<const double> x, std::span<const double> y, std::size_t k);

struct CurveBin {
    /// Half-open [lower, upper); the zero bin is [0, 0] with center 0.
    double lower = 0.0;
    double upper = 0.0;
    double center = 0.0;
    double mean = 0.0;
    /// Population standard deviation over the members.
    double std_dev = 0.0;
    std::size_t count = 0;
};

/**
 * Groups values by key into logarithmic bins with edges 1, f, f^2, ...; keys
 * equal to 0 land in a separate leading bin. Empty bins are omitted and bins
 * come out in ascending key order. Bin centers are geometric means of edges.
 */
std::vector<CurveBin> log_binned_curve(std::span<const double> values,
                                       std::span<const std::size_t> keys, double factor);

struct ComparisonReport {
    double utility_loss = 0.0;
    double fairness_gap = 0.0;
    double pearson = 0.0;
    double kendall_tau = 0.0;
    double l1_distance = 0.0;
    double l2_distance = 0.0;
    /// |protected mass(approx) - protected mass(baseline)|.
    double protected_mass_delta = 0.0;
    std::map<std::size_t, double> topk_overlap;
};

/// All comparison metrics of `approx` against `baseline`. Ks above N are clipped to N.
ComparisonReport compare_scores(std::span<const double> baseline, std::span<const double> approx,
                                const GroupAssignment &groups, double target,
                                std::span<const std::size_t> ks);

}  // namespace fspr
