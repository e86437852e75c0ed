#include <fspr/graph.hpp>

#include <algorithm>

#include <fspr/errors.hpp>

namespace fspr {

namespace {

// Counting sort of edges by `key` into CSR arrays; `value` is the stored endpoint.
template <typename Key, typename Value>
void fill_csr(std::span<const Edge> edges, std::size_t n, Key key, Value value,
              std::vector<std::size_t> &offsets, std::vector<NodeId> &column) {
    offsets.assign(n + 1, 0);
    for (const auto &e : edges)
        ++offsets[key(e) + 1];
    for (std::size_t i = 0; i < n; ++i)
        offsets[i + 1] += offsets[i];
    column.resize(edges.size());
    std::vector<std::size_t> cursor(offsets.begin(), offsets.end() - 1);
    for (const auto &e : edges)
        column[cursor[key(e)]++] = value(e);
}

}  // namespace

DirectedGraph build_graph(std::span<const Edge> edges, const BuildOptions &options) {
    std::size_t n = 0;
    for (const auto &e : edges)
        n = std::max<std::size_t>(n, std::max(e.source, e.target) + std::size_t{1});
    if (options.node_count) {
        if (*options.node_count < n)
            throw Error("edge endpoint outside declared node count " +
                        std::to_string(*options.node_count));
        n = *options.node_count;
    }
    if (n == 0)
        throw EmptyGraph();

    DirectedGraph g;
    fill_csr(edges, n, [](const Edge &e) { return e.source; },
             [](const Edge &e) { return e.target; }, g.out_offsets_, g.out_targets_);

    // Sort each row, then detect or squeeze out repeats in one pass.
    std::size_t write = 0;
    std::size_t row_begin = 0;
    for (std::size_t u = 0; u < n; ++u) {
        const std::size_t row_end = g.out_offsets_[u + 1];
        std::sort(g.out_targets_.begin() + static_cast<std::ptrdiff_t>(row_begin),
                  g.out_targets_.begin() + static_cast<std::ptrdiff_t>(row_end));
        g.out_offsets_[u] = write;
        for (std::size_t k = row_begin; k < row_end; ++k) {
            const NodeId t = g.out_targets_[k];
            if (k > row_begin && g.out_targets_[k - 1] == t) {
                if (!options.dedup)
                    throw DuplicateEdge(u, t);
                continue;
            }
            g.out_targets_[write++] = t;
        }
        row_begin = row_end;
    }
    g.out_offsets_[n] = write;
    g.out_targets_.resize(write);

    // Reverse direction from the cleaned forward lists. Sources come out
    // sorted because forward rows are visited in ascending order.
    g.in_offsets_.assign(n + 1, 0);
    for (NodeId t : g.out_targets_)
        ++g.in_offsets_[t + 1];
    for (std::size_t i = 0; i < n; ++i)
        g.in_offsets_[i + 1] += g.in_offsets_[i];
    g.in_sources_.resize(write);
    std::vector<std::size_t> cursor(g.in_offsets_.begin(), g.in_offsets_.end() - 1);
    for (std::size_t u = 0; u < n; ++u)
        for (std::size_t k = g.out_offsets_[u]; k < g.out_offsets_[u + 1]; ++k)
            g.in_sources_[cursor[g.out_targets_[k]]++] = static_cast<NodeId>(u);
    return g;
}

std::vector<std::size_t> DirectedGraph::in_degrees() const {
    std::vector<std::size_t> d(node_count());
    for (std::size_t u = 0; u < d.size(); ++u)
        d[u] = in_offsets_[u + 1] - in_offsets_[u];
    return d;
}

std::vector<std::size_t> DirectedGraph::out_degrees() const {
    std::vector<std::size_t> d(node_count());
    for (std::size_t u = 0; u < d.size(); ++u)
        d[u] = out_offsets_[u + 1] - out_offsets_[u];
    return d;
}

std::vector<Edge> DirectedGraph::edges() const {
    std::vector<Edge> out;
    out.reserve(edge_count());
    for (std::size_t u = 0; u < node_count(); ++u)
        for (NodeId t : out_neighbors(static_cast<NodeId>(u)))
            out.push_back({static_cast<NodeId>(u), t});
    return out;
}

std::vector<NodeId> dangling_nodes(const DirectedGraph &g) {
    std::vector<NodeId> out;
    for (std::size_t u = 0; u < g.node_count(); ++u)
        if (g.out_degree(static_cast<NodeId>(u)) == 0)
            out.push_back(static_cast<NodeId>(u));
    return out;
}

}  // namespace fspr
