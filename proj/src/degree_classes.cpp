#include <fspr/degree_classes.hpp>

#include <algorithm>
#include <cstdint>

#include <fspr/errors.hpp>

namespace fspr {

DegreeClassPartition partition_degree_classes(const DirectedGraph &g,
                                              const GroupAssignment &groups) {
    const std::size_t n = g.node_count();
    if (groups.size() != n)
        throw DimensionMismatch(n, groups.size());

    std::vector<DegreeClassKey> node_keys(n);
    for (std::size_t u = 0; u < n; ++u) {
        const auto id = static_cast<NodeId>(u);
        node_keys[u] = {g.in_degree(id), g.out_degree(id), groups.label(id)};
    }

    DegreeClassPartition part;
    part.keys_ = node_keys;
    std::sort(part.keys_.begin(), part.keys_.end());
    part.keys_.erase(std::unique(part.keys_.begin(), part.keys_.end()), part.keys_.end());

    part.membership_.resize(n);
    part.sizes_.assign(part.keys_.size(), 0);
    for (std::size_t u = 0; u < n; ++u) {
        const auto it = std::lower_bound(part.keys_.begin(), part.keys_.end(), node_keys[u]);
        const auto c = static_cast<std::size_t>(it - part.keys_.begin());
        part.membership_[u] = c;
        ++part.sizes_[c];
    }

    // Encode (target class, source class) so a plain sort groups inflows by destination.
    std::vector<std::uint64_t> pairs;
    pairs.reserve(g.edge_count());
    for (std::size_t u = 0; u < n; ++u) {
        const std::uint64_t src = part.membership_[u];
        for (NodeId t : g.out_neighbors(static_cast<NodeId>(u)))
            pairs.push_back((static_cast<std::uint64_t>(part.membership_[t]) << 32) | src);
    }
    std::sort(pairs.begin(), pairs.end());

    part.inflow_offsets_.assign(part.keys_.size() + 1, 0);
    for (std::size_t i = 0; i < pairs.size();) {
        std::size_t j = i;
        while (j < pairs.size() && pairs[j] == pairs[i])
            ++j;
        const auto dst = static_cast<std::size_t>(pairs[i] >> 32);
        const auto src = static_cast<std::size_t>(pairs[i] & 0xffffffffu);
        part.inflows_.push_back({src, j - i});
        ++part.inflow_offsets_[dst + 1];
        i = j;
    }
    for (std::size_t c = 0; c < part.keys_.size(); ++c)
        part.inflow_offsets_[c + 1] += part.inflow_offsets_[c];
    return part;
}

std::size_t DegreeClassPartition::edge_count(std::size_t source, std::size_t target) const {
    const auto in = inflows(target);
    const auto it = std::lower_bound(in.begin(), in.end(), source,
                                     [](const ClassInflow &f, std::size_t s) {
                                         return f.source_class < s;
                                     });
    return (it != in.end() && it->source_class == source) ? it->edges : 0;
}

std::vector<NodeId> DegreeClassPartition::members(std::size_t c) const {
    std::vector<NodeId> out;
    out.reserve(sizes_[c]);
    for (std::size_t u = 0; u < membership_.size(); ++u)
        if (membership_[u] == c)
            out.push_back(static_cast<NodeId>(u));
    return out;
}

std::vector<double> class_average(std::span<const double> p, const DegreeClassPartition &part) {
    if (p.size() != part.node_count())
        throw DimensionMismatch(part.node_count(), p.size());
    std::vector<double> sums(part.class_count(), 0.0);
    for (std::size_t u = 0; u < p.size(); ++u)
        sums[part.class_of(static_cast<NodeId>(u))] += p[u];
    for (std::size_t c = 0; c < sums.size(); ++c)
        sums[c] /= static_cast<double>(part.class_size(c));
    return sums;
}

}  // namespace fspr
