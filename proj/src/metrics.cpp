#include <fspr/metrics.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>

#include <fspr/errors.hpp>

namespace fspr {

namespace {

void require_same_size(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size())
        throw DimensionMismatch(x.size(), y.size());
}

// Pairs tied in consecutive runs of a sorted sequence: sum t (t - 1) / 2.
template <typename Eq>
std::uint64_t tied_pairs(std::span<const std::size_t> order, Eq equal) {
    std::uint64_t total = 0;
    std::uint64_t run = 1;
    for (std::size_t i = 1; i < order.size(); ++i) {
        if (equal(order[i - 1], order[i])) {
            ++run;
        } else {
            total += run * (run - 1) / 2;
            run = 1;
        }
    }
    return total + run * (run - 1) / 2;
}

// Stable merge sort of `order` by y, counting strict inversions.
std::uint64_t sort_counting_swaps(std::vector<std::size_t> &order, std::span<const double> y) {
    std::vector<std::size_t> buffer(order.size());
    std::uint64_t swaps = 0;
    for (std::size_t width = 1; width < order.size(); width *= 2) {
        for (std::size_t lo = 0; lo < order.size(); lo += 2 * width) {
            const std::size_t mid = std::min(lo + width, order.size());
            const std::size_t hi = std::min(lo + 2 * width, order.size());
            std::size_t i = lo, j = mid, k = lo;
            while (i < mid && j < hi) {
                if (y[order[j]] < y[order[i]]) {
                    swaps += mid - i;
                    buffer[k++] = order[j++];
                } else {
                    buffer[k++] = order[i++];
                }
            }
            while (i < mid)
                buffer[k++] = order[i++];
            while (j < hi)
                buffer[k++] = order[j++];
        }
        order.swap(buffer);
    }
    return swaps;
}

}  // namespace

double utility_loss(std::span<const double> approx, std::span<const double> exact) {
    require_same_size(approx, exact);
    if (approx.empty())
        return 0.0;
    double total = 0.0;
    for (std::size_t i = 0; i < approx.size(); ++i)
        total += std::abs(approx[i] - exact[i]);
    return total / static_cast<double>(approx.size());
}

double fairness_gap(std::span<const double> p, const GroupAssignment &groups, double target) {
    return std::abs(protected_mass(p, groups) - target);
}

double fairness_gap_unprotected(std::span<const double> p, const GroupAssignment &groups,
                                double target) {
    if (p.size() != groups.size())
        throw DimensionMismatch(groups.size(), p.size());
    double mass = 0.0;
    for (std::size_t u = 0; u < p.size(); ++u)
        if (!groups.is_protected(static_cast<NodeId>(u)))
            mass += p[u];
    return std::abs(mass - (1.0 - target));
}

double pearson(std::span<const double> x, std::span<const double> y) {
    require_same_size(x, y);
    if (x.size() < 2)
        throw DegenerateInput("correlation needs at least two points");
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0)
        throw DegenerateInput("correlation undefined for a constant vector");
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double kendall_tau(std::span<const double> x, std::span<const double> y) {
    require_same_size(x, y);
    const std::size_t n = x.size();
    if (n < 2)
        throw DegenerateInput("rank correlation needs at least two points");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return x[a] < x[b] || (x[a] == x[b] && y[a] < y[b]);
    });

    const std::uint64_t total = static_cast<std::uint64_t>(n) * (n - 1) / 2;
    const std::uint64_t x_ties = tied_pairs(order, [&](auto a, auto b) { return x[a] == x[b]; });
    const std::uint64_t joint_ties =
        tied_pairs(order, [&](auto a, auto b) { return x[a] == x[b] && y[a] == y[b]; });
    const std::uint64_t swaps = sort_counting_swaps(order, y);
    const std::uint64_t y_ties = tied_pairs(order, [&](auto a, auto b) { return y[a] == y[b]; });

    if (x_ties == total || y_ties == total)
        throw DegenerateInput("rank correlation undefined for a constant vector");
    // concordant - discordant = total - x_ties - y_ties + joint_ties - 2 * swaps
    const double numerator = static_cast<double>(total) - static_cast<double>(x_ties) -
                             static_cast<double>(y_ties) + static_cast<double>(joint_ties) -
                             2.0 * static_cast<double>(swaps);
    const double denominator = std::sqrt(static_cast<double>(total - x_ties)) *
                               std::sqrt(static_cast<double>(total - y_ties));
    return std::clamp(numerator / denominator, -1.0, 1.0);
}

double lp_distance(std::span<const double> x, std::span<const double> y, int p) {
    require_same_size(x, y);
    double total = 0.0;
    if (p == 1) {
        for (std::size_t i = 0; i < x.size(); ++i)
            total += std::abs(x[i] - y[i]);
        return total;
    }
    if (p == 2) {
        for (std::size_t i = 0; i < x.size(); ++i)
            total += (x[i] - y[i]) * (x[i] - y[i]);
        return std::sqrt(total);
    }
    throw Error("lp_distance supports p = 1 or p = 2");
}

std::vector<std::size_t> top_k(std::span<const double> x, std::size_t k) {
    k = std::min(k, x.size());
    std::vector<std::size_t> order(x.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    const auto before = [&](std::size_t a, std::size_t b) {
        return x[a] > x[b] || (x[a] == x[b] && a < b);
    };
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                      before);
    order.resize(k);
    return order;
}

double topk_overlap(std::span<const double> x, std::span<const double> y, std::size_t k) {
    require_same_size(x, y);
    if (k == 0 || k > x.size())
        throw Error("top-k overlap needs 1 <= k <= N");
    auto a = top_k(x, k);
    auto b = top_k(y, k);
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::vector<std::size_t> common;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(common));
    return static_cast<double>(common.size()) / static_cast<double>(k);
}

std::vector<CurveBin> log_binned_curve(std::span<const double> values,
                                       std::span<const std::size_t> keys, double factor) {
    if (values.size() != keys.size())
        throw DimensionMismatch(values.size(), keys.size());
    if (!(factor > 1.0))
        throw Error("log-bin factor must exceed 1");

    // Bin index -1 is the zero bin; others satisfy factor^i <= k < factor^(i+1).
    const double log_f = std::log(factor);
    std::vector<long> bin_of(keys.size());
    for (std::size_t i = 0; i < keys.size(); ++i) {
        if (keys[i] == 0) {
            bin_of[i] = -1;
            continue;
        }
        const double k = static_cast<double>(keys[i]);
        long b = static_cast<long>(std::floor(std::log(k) / log_f));
        while (std::pow(factor, static_cast<double>(b + 1)) <= k)
            ++b;
        while (b > 0 && std::pow(factor, static_cast<double>(b)) > k)
            --b;
        bin_of[i] = b;
    }

    std::map<long, CurveBin> bins;
    for (std::size_t i = 0; i < keys.size(); ++i) {
        auto &bin = bins[bin_of[i]];
        bin.mean += values[i];
        ++bin.count;
    }
    for (auto &[b, bin] : bins)
        bin.mean /= static_cast<double>(bin.count);
    for (std::size_t i = 0; i < keys.size(); ++i) {
        auto &bin = bins[bin_of[i]];
        const double d = values[i] - bin.mean;
        bin.std_dev += d * d;
    }

    std::vector<CurveBin> out;
    out.reserve(bins.size());
    for (auto &[b, bin] : bins) {
        bin.std_dev = std::sqrt(bin.std_dev / static_cast<double>(bin.count));
        if (b >= 0) {
            bin.lower = std::pow(factor, static_cast<double>(b));
            bin.upper = std::pow(factor, static_cast<double>(b + 1));
            bin.center = std::sqrt(bin.lower * bin.upper);
        }
        out.push_back(bin);
    }
    return out;
}

ComparisonReport compare_scores(std::span<const double> baseline, std::span<const double> approx,
                                const GroupAssignment &groups, double target,
                                std::span<const std::size_t> ks) {
    require_same_size(baseline, approx);
    ComparisonReport r;
    r.utility_loss = utility_loss(approx, baseline);
    r.fairness_gap = fairness_gap(approx, groups, target);
    r.pearson = pearson(baseline, approx);
    r.kendall_tau = kendall_tau(baseline, approx);
    r.l1_distance = lp_distance(baseline, approx, 1);
    r.l2_distance = lp_distance(baseline, approx, 2);
    r.protected_mass_delta =
        std::abs(protected_mass(approx, groups) - protected_mass(baseline, groups));
    for (std::size_t k : ks) {
        const std::size_t clipped = std::min(k, baseline.size());
        if (clipped > 0)
            r.topk_overlap[clipped] = topk_overlap(baseline, approx, clipped);
    }
    return r;
}

}  // namespace fspr
