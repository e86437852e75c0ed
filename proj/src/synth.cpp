#include <fspr/synth.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include <fspr/errors.hpp>

namespace fspr {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::size_t law_max(const DegreeLaw &law) {
    return std::visit(overloaded{[](const PowerLawDegrees &p) { return p.k_max; },
                                 [](const PoissonDegrees &) { return std::size_t{0}; },
                                 [](const RegularDegrees &r) { return r.k; }},
                      law);
}

void validate_law(const DegreeLaw &law, std::size_t n) {
    std::visit(overloaded{
                   [&](const PowerLawDegrees &p) {
                       if (!(p.exponent > 1.0))
                           throw Error("power-law exponent must exceed 1");
                       if (p.k_min < 1 || p.k_min > p.k_max)
                           throw Error("power-law needs 1 <= k_min <= k_max");
                   },
                   [](const PoissonDegrees &p) {
                       if (!(p.mean >= 0.0))
                           throw Error("poisson mean must be nonnegative");
                   },
                   [](const RegularDegrees &) {},
               },
               law);
    if (law_max(law) >= n)
        throw InfeasibleDegreeSequence("maximum degree " + std::to_string(law_max(law)) +
                                       " must be below the node count " + std::to_string(n));
}

// Repeatedly lowers every maximum-degree node by one, in random order, until
// `excess` stubs are gone.
std::size_t trim_to_balance(std::vector<std::size_t> &degrees, std::size_t excess,
                            std::mt19937_64 &rng) {
    const std::size_t trimmed = excess;
    std::vector<std::size_t> top;
    while (excess > 0) {
        const std::size_t d = *std::max_element(degrees.begin(), degrees.end());
        if (d == 0)
            throw InfeasibleDegreeSequence("cannot balance degree sums");
        top.clear();
        for (std::size_t u = 0; u < degrees.size(); ++u)
            if (degrees[u] == d)
                top.push_back(u);
        std::shuffle(top.begin(), top.end(), rng);
        for (std::size_t u : top) {
            if (excess == 0)
                break;
            --degrees[u];
            --excess;
        }
    }
    return trimmed;
}

std::uint64_t edge_key(NodeId s, NodeId t) { return (static_cast<std::uint64_t>(s) << 32) | t; }

std::string format_number(double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

double parse_double(std::string_view s) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw ParseError("not a number: '" + std::string(s) + "'");
    return v;
}

std::uint64_t parse_unsigned(std::string_view s) {
    std::uint64_t v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw ParseError("not a nonnegative integer: '" + std::string(s) + "'");
    return v;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    for (;;) {
        const auto pos = s.find(sep, start);
        parts.push_back(s.substr(start, pos - start));
        if (pos == std::string_view::npos)
            return parts;
        start = pos + 1;
    }
}

}  // namespace

void SynthSpec::validate() const {
    if (node_count < 1)
        throw Error("synthetic graph needs at least one node");
    if (!(phi >= 0.0 && phi <= 1.0))
        throw Error("phi must lie in [0, 1]");
    validate_law(in_degree_law, node_count);
    validate_law(out_degree_law, node_count);
}

std::vector<std::size_t> sample_degrees(const DegreeLaw &law, std::size_t n,
                                        std::mt19937_64 &rng) {
    std::vector<std::size_t> out(n);
    std::visit(overloaded{
                   [&](const PowerLawDegrees &p) {
                       std::vector<double> cdf;
                       cdf.reserve(p.k_max - p.k_min + 1);
                       double total = 0.0;
                       for (std::size_t k = p.k_min; k <= p.k_max; ++k) {
                           total += std::pow(static_cast<double>(k), -p.exponent);
                           cdf.push_back(total);
                       }
                       for (double &c : cdf)
                           c /= total;
                       cdf.back() = 1.0;
                       std::uniform_real_distribution<double> unit(0.0, 1.0);
                       for (auto &d : out) {
                           const auto it = std::lower_bound(cdf.begin(), cdf.end(), unit(rng));
                           d = p.k_min + static_cast<std::size_t>(it - cdf.begin());
                       }
                   },
                   [&](const PoissonDegrees &p) {
                       std::poisson_distribution<long> dist(p.mean);
                       for (auto &d : out)
                           d = p.mean > 0.0 ? static_cast<std::size_t>(dist(rng)) : 0;
                   },
                   [&](const RegularDegrees &r) { std::fill(out.begin(), out.end(), r.k); },
               },
               law);
    return out;
}

SynthGraph generate(const SynthSpec &spec) {
    spec.validate();
    const std::size_t n = spec.node_count;
    std::mt19937_64 rng(spec.seed);

    auto in_deg = sample_degrees(spec.in_degree_law, n, rng);
    auto out_deg = sample_degrees(spec.out_degree_law, n, rng);
    for (std::size_t u = 0; u < n; ++u)
        if (in_deg[u] >= n || out_deg[u] >= n)
            throw InfeasibleDegreeSequence("sampled degree exceeds N - 1");

    SynthLog log;
    const std::size_t sum_in = std::accumulate(in_deg.begin(), in_deg.end(), std::size_t{0});
    const std::size_t sum_out = std::accumulate(out_deg.begin(), out_deg.end(), std::size_t{0});
    if (sum_in > sum_out) {
        log.stubs_trimmed = trim_to_balance(in_deg, sum_in - sum_out, rng);
        log.trimmed_in_side = true;
    } else if (sum_out > sum_in) {
        log.stubs_trimmed = trim_to_balance(out_deg, sum_out - sum_in, rng);
    }
    const std::size_t m = std::min(sum_in, sum_out);

    std::vector<NodeId> sources;
    std::vector<NodeId> targets;
    sources.reserve(m);
    targets.reserve(m);
    for (std::size_t u = 0; u < n; ++u) {
        sources.insert(sources.end(), out_deg[u], static_cast<NodeId>(u));
        targets.insert(targets.end(), in_deg[u], static_cast<NodeId>(u));
    }
    std::shuffle(targets.begin(), targets.end(), rng);

    std::unordered_map<std::uint64_t, std::uint32_t> multiplicity;
    multiplicity.reserve(m * 2);
    std::vector<std::size_t> bad;
    for (std::size_t i = 0; i < m; ++i) {
        auto &count = multiplicity[edge_key(sources[i], targets[i])];
        if (sources[i] == targets[i] || count > 0)
            bad.push_back(i);
        ++count;
    }

    // Swap targets with a random partner edge until each bad edge is simple.
    const std::size_t budget = 100 * std::max<std::size_t>(m, 1);
    std::size_t attempts = 0;
    std::uniform_int_distribution<std::size_t> pick(0, m == 0 ? 0 : m - 1);
    auto is_bad = [&](std::size_t i) {
        return sources[i] == targets[i] || multiplicity[edge_key(sources[i], targets[i])] > 1;
    };
    for (std::size_t i : bad) {
        while (is_bad(i)) {
            if (++attempts > budget)
                throw InfeasibleDegreeSequence("rewiring budget exhausted");
            const std::size_t j = pick(rng);
            if (j == i)
                continue;
            const NodeId si = sources[i], ti = targets[i];
            const NodeId sj = sources[j], tj = targets[j];
            if (si == tj || sj == ti)
                continue;
            const auto new_i = edge_key(si, tj);
            const auto new_j = edge_key(sj, ti);
            if (new_i == new_j)
                continue;
            const auto it_i = multiplicity.find(new_i);
            const auto it_j = multiplicity.find(new_j);
            if ((it_i != multiplicity.end() && it_i->second > 0) ||
                (it_j != multiplicity.end() && it_j->second > 0))
                continue;
            --multiplicity[edge_key(si, ti)];
            --multiplicity[edge_key(sj, tj)];
            ++multiplicity[new_i];
            ++multiplicity[new_j];
            targets[i] = tj;
            targets[j] = ti;
            ++log.rewires;
        }
    }

    std::vector<Edge> edges(m);
    for (std::size_t i = 0; i < m; ++i)
        edges[i] = {sources[i], targets[i]};
    BuildOptions opts;
    opts.node_count = n;
    auto graph = build_graph(edges, opts);

    const auto protected_count =
        static_cast<std::size_t>(std::floor(spec.phi * static_cast<double>(n)));
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<Group> labels(n, Group::Unprotected);
    for (std::size_t i = 0; i < protected_count; ++i)
        labels[perm[i]] = Group::Protected;

    GroupAssignment groups(graph, std::move(labels));
    return {std::move(graph), std::move(groups), log};
}

DegreeMoments degree_moments(const DirectedGraph &g) {
    DegreeMoments out;
    double in_total = 0.0;
    double moment = 0.0;
    std::size_t counted = 0;
    for (std::size_t u = 0; u < g.node_count(); ++u) {
        const auto id = static_cast<NodeId>(u);
        const auto k_in = g.in_degree(id);
        const auto k_out = g.out_degree(id);
        in_total += static_cast<double>(k_in);
        out.max_in_degree = std::max(out.max_in_degree, k_in);
        out.max_out_degree = std::max(out.max_out_degree, k_out);
        if (k_out > 0) {
            moment += static_cast<double>(k_in) * static_cast<double>(k_in) /
                      static_cast<double>(k_out);
            ++counted;
        }
    }
    out.mean_in_degree = in_total / static_cast<double>(g.node_count());
    out.in_degree_moment = counted == 0 ? 0.0 : moment / static_cast<double>(counted);
    return out;
}

std::string describe(const DegreeLaw &law) {
    return std::visit(
        overloaded{[](const PowerLawDegrees &p) {
                       return "powerlaw:" + format_number(p.exponent) + ":" +
                              std::to_string(p.k_min) + ":" + std::to_string(p.k_max);
                   },
                   [](const PoissonDegrees &p) { return "poisson:" + format_number(p.mean); },
                   [](const RegularDegrees &r) { return "regular:" + std::to_string(r.k); }},
        law);
}

DegreeLaw parse_degree_law(std::string_view text) {
    const auto parts = split(text, ':');
    const auto kind = parts.front();
    if (kind == "powerlaw" && parts.size() == 4)
        return PowerLawDegrees{parse_double(parts[1]), parse_unsigned(parts[2]),
                               parse_unsigned(parts[3])};
    if (kind == "poisson" && parts.size() == 2)
        return PoissonDegrees{parse_double(parts[1])};
    if (kind == "regular" && parts.size() == 2)
        return RegularDegrees{parse_unsigned(parts[1])};
    throw ParseError("unknown degree law '" + std::string(text) +
                     "' (expected powerlaw:A:KMIN:KMAX, poisson:MEAN or regular:K)");
}

SynthSpec parse_synth_spec(std::string_view text) {
    SynthSpec spec;
    if (text.empty())
        return spec;
    for (auto field : split(text, ',')) {
        const auto eq = field.find('=');
        if (eq == std::string_view::npos)
            throw ParseError("expected key=value in synthetic spec, got '" + std::string(field) +
                             "'");
        const auto key = field.substr(0, eq);
        const auto value = field.substr(eq + 1);
        if (key == "n")
            spec.node_count = parse_unsigned(value);
        else if (key == "phi")
            spec.phi = parse_double(value);
        else if (key == "in")
            spec.in_degree_law = parse_degree_law(value);
        else if (key == "out")
            spec.out_degree_law = parse_degree_law(value);
        else if (key == "seed")
            spec.seed = parse_unsigned(value);
        else
            throw ParseError("unknown synthetic spec key '" + std::string(key) + "'");
    }
    return spec;
}

std::string describe(const SynthSpec &spec) {
    return "n=" + std::to_string(spec.node_count) + ",phi=" + format_number(spec.phi) +
           ",in=" + describe(spec.in_degree_law) + ",out=" + describe(spec.out_degree_law) +
           ",seed=" + std::to_string(spec.seed);
}

}  // namespace fspr
