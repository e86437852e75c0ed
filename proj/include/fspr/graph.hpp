#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace fspr {

using NodeId = std::uint32_t;

struct Edge {
    NodeId source;
    NodeId target;

    friend bool operator==(const Edge &, const Edge &) = default;
    friend auto operator<=>(const Edge &, const Edge &) = default;
};

struct BuildOptions {
    /// Number of nodes; defaults to 1 + the largest id seen. Lets callers keep
    /// isolated nodes that never appear in an edge.
    std::optional<std::size_t> node_count;
    /// Silently drop repeated (source, target) pairs instead of throwing DuplicateEdge.
    bool dedup = false;
};

/**
 * Immutable directed graph in compressed sparse row form, stored in both
 * directions. Adjacency lists are sorted by node id. Self-loops are allowed
 * and count towards both degrees of their node.
 */
class DirectedGraph {
public:
    std::size_t node_count() const { return out_offsets_.size() - 1; }
    std::size_t edge_count() const { return out_targets_.size(); }

    std::span<const NodeId> out_neighbors(NodeId u) const {
        return {out_targets_.data() + out_offsets_[u], out_offsets_[u + 1] - out_offsets_[u]};
    }
    std::span<const NodeId> in_neighbors(NodeId u) const {
        return {in_sources_.data() + in_offsets_[u], in_offsets_[u + 1] - in_offsets_[u]};
    }

    std::size_t out_degree(NodeId u) const { return out_offsets_[u + 1] - out_offsets_[u]; }
    std::size_t in_degree(NodeId u) const { return in_offsets_[u + 1] - in_offsets_[u]; }

    std::vector<std::size_t> in_degrees() const;
    std::vector<std::size_t> out_degrees() const;

    /// All edges in (source, target) lexicographic order.
    std::vector<Edge> edges() const;

    /// Raw CSR arrays, for kernels that stream over the whole graph.
    std::span<const std::size_t> out_offsets() const { return out_offsets_; }
    std::span<const NodeId> out_targets() const { return out_targets_; }
    std::span<const std::size_t> in_offsets() const { return in_offsets_; }
    std::span<const NodeId> in_sources() const { return in_sources_; }

private:
    friend DirectedGraph build_graph(std::span<const Edge>, const BuildOptions &);

    std::vector<std::size_t> out_offsets_{0};
    std::vector<NodeId> out_targets_;
    std::vector<std::size_t> in_offsets_{0};
    std::vector<NodeId> in_sources_;
};

/// Builds the forward and reverse CSR structure. Throws EmptyGraph when the
/// resulting node count is zero and DuplicateEdge on repeats unless dedup is set.
DirectedGraph build_graph(std::span<const Edge> edges, const BuildOptions &options = {});

/// Nodes with no outgoing edge, ascending.
std::vector<NodeId> dangling_nodes(const DirectedGraph &g);

}  // namespace fspr
