#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <fspr/graph.hpp>

namespace fspr {

enum class Group : std::uint8_t { Unprotected = 0, Protected = 1 };

/**
 * Binary group label per node plus the aggregates the rankers need:
 * the protected node fraction phi and the per-group in-degree totals.
 */
class GroupAssignment {
public:
    /// Throws DimensionMismatch unless labels.size() == g.node_count().
    GroupAssignment(const DirectedGraph &g, std::vector<Group> labels);

    std::size_t size() const { return labels_.size(); }
    Group label(NodeId u) const { return labels_[u]; }
    bool is_protected(NodeId u) const { return labels_[u] == Group::Protected; }
    std::span<const Group> labels() const { return labels_; }

    std::size_t protected_count() const { return protected_count_; }
    std::size_t unprotected_count() const { return labels_.size() - protected_count_; }

    /// Exact fraction of protected nodes.
    double phi() const {
        return static_cast<double>(protected_count_) / static_cast<double>(labels_.size());
    }

    /// Total in-degree of the protected group (D_P) and of the unprotected group (D_U).
    std::size_t d_protected() const { return d_protected_; }
    std::size_t d_unprotected() const { return d_unprotected_; }
    std::size_t d_total() const { return d_protected_ + d_unprotected_; }

private:
    std::vector<Group> labels_;
    std::size_t protected_count_ = 0;
    std::size_t d_protected_ = 0;
    std::size_t d_unprotected_ = 0;
};

/// Sum of scores over protected nodes.
double protected_mass(std::span<const double> p, const GroupAssignment &groups);

}  // namespace fspr
