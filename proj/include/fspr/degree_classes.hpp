#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <fspr/graph.hpp>
#include <fspr/groups.hpp>

namespace fspr {

/// Exact (in-degree, out-degree, group) triple shared by every member of a class.
struct DegreeClassKey {
    std::size_t k_in = 0;
    std::size_t k_out = 0;
    Group group = Group::Unprotected;

    friend bool operator==(const DegreeClassKey &, const DegreeClassKey &) = default;
    friend auto operator<=>(const DegreeClassKey &, const DegreeClassKey &) = default;
};

/// Number of edges from members of `source_class` into members of the owning class.
struct ClassInflow {
    std::size_t source_class;
    std::size_t edges;
};

/**
 * Partition of the nodes into degree-classes, ordered by key, together with
 * the class-to-class edge counts E(k' -> k). Inflows are stored per
 * destination class because the mean-field recursion pulls from predecessors.
 */
class DegreeClassPartition {
public:
    std::size_t class_count() const { return keys_.size(); }
    std::size_t node_count() const { return membership_.size(); }

    const DegreeClassKey &key(std::size_t c) const { return keys_[c]; }
    std::span<const DegreeClassKey> keys() const { return keys_; }

    std::size_t class_of(NodeId u) const { return membership_[u]; }
    std::span<const std::size_t> membership() const { return membership_; }

    std::size_t class_size(std::size_t c) const { return sizes_[c]; }
    double class_probability(std::size_t c) const {
        return static_cast<double>(sizes_[c]) / static_cast<double>(membership_.size());
    }

    /// Inflows into class c, ascending by source class.
    std::span<const ClassInflow> inflows(std::size_t c) const {
        return {inflows_.data() + inflow_offsets_[c], inflow_offsets_[c + 1] - inflow_offsets_[c]};
    }

    /// E(source -> target), zero when no such edge exists.
    std::size_t edge_count(std::size_t source, std::size_t target) const;

    /// Members of class c, ascending.
    std::vector<NodeId> members(std::size_t c) const;

private:
    friend DegreeClassPartition partition_degree_classes(const DirectedGraph &,
                                                         const GroupAssignment &);

    std::vector<DegreeClassKey> keys_;
    std::vector<std::size_t> membership_;
    std::vector<std::size_t> sizes_;
    std::vector<std::size_t> inflow_offsets_;
    std::vector<ClassInflow> inflows_;
};

DegreeClassPartition partition_degree_classes(const DirectedGraph &g,
                                              const GroupAssignment &groups);

/// Per-class mean score: (1 / (N P(k))) * sum of p over members.
std::vector<double> class_average(std::span<const double> p, const DegreeClassPartition &part);

}  // namespace fspr
