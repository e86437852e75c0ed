#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include <fspr/errors.hpp>
#include <fspr/meanfield.hpp>
#include <fspr/metrics.hpp>
#include <fspr/synth.hpp>

#include "oracles.hpp"

using namespace fspr;

namespace {

std::vector<double> random_values(std::size_t n, std::uint64_t seed, int levels = 0) {
    std::mt19937_64 rng(seed);
    std::vector<double> v(n);
    if (levels > 0) {
        std::uniform_int_distribution<int> draw(0, levels - 1);
        for (auto &x : v)
            x = draw(rng);
    } else {
        std::normal_distribution<double> draw(0.0, 1.0);
        for (auto &x : v)
            x = draw(rng);
    }
    return v;
}

GroupAssignment groups_for(std::span<const Group> labels) {
    BuildOptions opts;
    opts.node_count = labels.size();
    const auto g = build_graph({}, opts);
    return GroupAssignment(g, {labels.begin(), labels.end()});
}

}  // namespace

TEST_CASE("utility loss examples") {
    const std::vector<double> a{0.6, 0.4}, b{0.5, 0.5};
    CHECK(utility_loss(a, a) == 0.0);
    CHECK(utility_loss(a, b) == doctest::Approx(0.1));
    CHECK_THROWS_AS(utility_loss(a, std::vector<double>{1.0}), DimensionMismatch);
}

TEST_CASE("distances are symmetric and satisfy the triangle inequality") {
    for (std::uint64_t seed = 1; seed <= 30; ++seed) {
        const auto x = random_values(50, seed), y = random_values(50, seed + 100),
                   z = random_values(50, seed + 200);
        CHECK(utility_loss(x, y) == utility_loss(y, x));
        CHECK(utility_loss(x, z) <= utility_loss(x, y) + utility_loss(y, z) + 1e-15);
        for (int p : {1, 2}) {
            CHECK(lp_distance(x, y, p) == doctest::Approx(lp_distance(y, x, p)).epsilon(1e-15));
            CHECK(lp_distance(x, z, p) <= lp_distance(x, y, p) + lp_distance(y, z, p) + 1e-12);
        }
    }
    const std::vector<double> a{0.0, 3.0}, b{4.0, 0.0};
    CHECK(lp_distance(a, b, 1) == 7.0);
    CHECK(lp_distance(a, b, 2) == 5.0);
    CHECK_THROWS_AS(lp_distance(a, b, 3), Error);
}

TEST_CASE("fairness gap examples and complementarity") {
    const std::vector<Group> labels{Group::Protected, Group::Unprotected, Group::Unprotected,
                                    Group::Unprotected};
    const auto groups = groups_for(labels);
    CHECK(fairness_gap(std::vector<double>(4, 0.25), groups, groups.phi()) == 0.0);
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto p = oracle::random_distribution(4, seed);
        CHECK(fairness_gap(p, groups, 0.3) ==
              doctest::Approx(fairness_gap_unprotected(p, groups, 0.3)).epsilon(1e-12));
    }
}

TEST_CASE("correlation examples") {
    const std::vector<double> x{1, 2, 3, 4, 5};
    std::vector<double> y;
    for (double v : x)
        y.push_back(2 * v + 1);
    CHECK(pearson(x, y) == doctest::Approx(1.0));
    CHECK(kendall_tau(x, y) == doctest::Approx(1.0));
    const std::vector<double> rev{5, 4, 3, 2, 1};
    CHECK(kendall_tau(x, rev) == doctest::Approx(-1.0));
    CHECK_THROWS_AS(pearson(x, std::vector<double>(5, 1.0)), DegenerateInput);
    CHECK_THROWS_AS(kendall_tau(std::vector<double>(5, 1.0), x), DegenerateInput);
    CHECK_THROWS_AS(pearson(std::vector<double>{1.0}, std::vector<double>{2.0}), DegenerateInput);
}

TEST_CASE("pearson matches a two-pass computation") {
    const auto x = random_values(500, 1), y = random_values(500, 2);
    CHECK(pearson(x, y) == doctest::Approx(oracle::pearson(x, y)).epsilon(1e-12));
}

TEST_CASE("kendall tau matches pairwise counting") {
    for (std::uint64_t seed = 1; seed <= 6; ++seed) {
        // Alternate continuous data with heavily tied data.
        const int levels = seed % 2 == 0 ? 7 : 0;
        const auto x = random_values(1000, seed, levels);
        auto y = random_values(1000, seed + 50, levels);
        for (std::size_t i = 0; i < y.size(); ++i)
            y[i] += 0.5 * x[i];
        CHECK(std::abs(kendall_tau(x, y) - oracle::kendall_brute(x, y)) <= 1e-12);
    }
}

TEST_CASE("kendall tau is invariant under increasing transforms") {
    const auto x = random_values(400, 3), y = random_values(400, 4, 12);
    const double base = kendall_tau(x, y);
    std::vector<double> fx, fy;
    for (double v : x)
        fx.push_back(std::exp(v));
    for (double v : y)
        fy.push_back(v * v * v + 7.0);
    CHECK(kendall_tau(fx, fy) == doctest::Approx(base).epsilon(1e-14));
}

TEST_CASE("top-k overlap") {
    const std::vector<double> x{0.1, 0.4, 0.2, 0.3};
    CHECK(topk_overlap(x, x, 2) == 1.0);
    const std::vector<double> y{0.4, 0.1, 0.3, 0.2};
    CHECK(topk_overlap(x, y, 2) == 0.0);
    CHECK(topk_overlap(x, y, 4) == 1.0);
    CHECK_THROWS_AS(topk_overlap(x, y, 5), Error);

    // Ties go to the smaller id.
    const std::vector<double> flat{0.25, 0.25, 0.25, 0.25};
    CHECK(top_k(flat, 2) == std::vector<std::size_t>{0, 1});
    CHECK(top_k(x, 3) == std::vector<std::size_t>{1, 3, 2});

    const auto a = random_values(300, 5), b = random_values(300, 6);
    const double base = topk_overlap(a, b, 50);
    std::vector<double> sa, sb;
    for (double v : a)
        sa.push_back(3.5 * v);
    for (double v : b)
        sb.push_back(3.5 * v);
    CHECK(topk_overlap(sa, sb, 50) == base);
}

TEST_CASE("log bins with factor two") {
    const std::vector<double> values{1.0, 2.0, 4.0, 6.0};
    const std::vector<std::size_t> keys{1, 2, 3, 4};
    const auto bins = log_binned_curve(values, keys, 2.0);
    REQUIRE(bins.size() == 3);
    CHECK(bins[0].lower == 1.0);
    CHECK(bins[0].upper == 2.0);
    CHECK(bins[0].count == 1);
    CHECK(bins[1].lower == 2.0);
    CHECK(bins[1].upper == 4.0);
    CHECK(bins[1].count == 2);
    CHECK(bins[1].mean == 3.0);
    CHECK(bins[1].std_dev == 1.0);
    CHECK(bins[1].center == doctest::Approx(std::sqrt(8.0)));
    CHECK(bins[2].lower == 4.0);
    CHECK(bins[2].count == 1);
}

TEST_CASE("log bins: single key and zero bin") {
    const std::vector<double> values{1, 2, 3, 4};
    const auto one = log_binned_curve(values, std::vector<std::size_t>(4, 7), 1.05);
    REQUIRE(one.size() == 1);
    CHECK(one[0].count == 4);
    CHECK(one[0].lower <= 7.0);
    CHECK(one[0].upper > 7.0);

    const auto zero = log_binned_curve(values, std::vector<std::size_t>{0, 0, 1, 5}, 2.0);
    REQUIRE(zero.size() == 3);
    CHECK(zero[0].center == 0.0);
    CHECK(zero[0].count == 2);
    CHECK(zero[0].mean == 1.5);
    CHECK_THROWS_AS(log_binned_curve(values, std::vector<std::size_t>(4, 1), 1.0), Error);
}

TEST_CASE("binned means re-aggregate to direct class means") {
    SynthSpec spec;
    spec.node_count = 3000;
    spec.in_degree_law = PowerLawDegrees{2.5, 1, 300};
    spec.seed = 9;
    const auto s = generate(spec);
    const auto mf = meanfield_closed_form(s.graph, s.groups);
    const auto keys = s.graph.in_degrees();
    const auto bins = log_binned_curve(mf.per_node, keys, 1.05);

    // Direct aggregation: each node falls in the bin whose edges bracket its key.
    std::size_t covered = 0;
    for (const auto &bin : bins) {
        double total = 0.0;
        std::size_t count = 0;
        for (std::size_t u = 0; u < keys.size(); ++u) {
            const double k = static_cast<double>(keys[u]);
            const bool inside = bin.center == 0.0 ? keys[u] == 0 : (k >= bin.lower && k < bin.upper);
            if (inside) {
                total += mf.per_node[u];
                ++count;
            }
        }
        CHECK(count == bin.count);
        CHECK(std::abs(total / static_cast<double>(count) - bin.mean) <= 1e-12);
        covered += count;
    }
    CHECK(covered == keys.size());
}

TEST_CASE("comparison report") {
    const std::vector<Group> labels{Group::Protected, Group::Unprotected, Group::Unprotected,
                                    Group::Protected};
    const auto groups = groups_for(labels);
    const std::vector<double> base{0.1, 0.2, 0.3, 0.4};
    const std::vector<std::size_t> k{2, 10};
    const auto self = compare_scores(base, base, groups, 0.5, k);
    CHECK(self.utility_loss == 0.0);
    CHECK(self.kendall_tau == doctest::Approx(1.0));
    CHECK(self.pearson == doctest::Approx(1.0));
    CHECK(self.topk_overlap.at(2) == 1.0);
    CHECK(self.topk_overlap.at(4) == 1.0);
    CHECK(self.fairness_gap == doctest::Approx(0.0));

    const std::vector<double> other{0.2, 0.1, 0.3, 0.4};
    const auto r = compare_scores(base, other, groups, 0.5, k);
    CHECK(r.utility_loss == doctest::Approx(0.05));
    CHECK(r.l1_distance == doctest::Approx(0.2));
    CHECK(r.protected_mass_delta == doctest::Approx(0.1));
    CHECK(r.fairness_gap == doctest::Approx(0.1));
}
