#include <fspr/groups.hpp>

#include <fspr/errors.hpp>

namespace fspr {

GroupAssignment::GroupAssignment(const DirectedGraph &g, std::vector<Group> labels)
    : labels_(std::move(labels)) {
    if (labels_.size() != g.node_count())
        throw DimensionMismatch(g.node_count(), labels_.size());
    for (std::size_t u = 0; u < labels_.size(); ++u) {
        const auto k_in = g.in_degree(static_cast<NodeId>(u));
        if (labels_[u] == Group::Protected) {
            ++protected_count_;
            d_protected_ += k_in;
        } else {
            d_unprotected_ += k_in;
        }
    }
}

double protected_mass(std::span<const double> p, const GroupAssignment &groups) {
    if (p.size() != groups.size())
        throw DimensionMismatch(groups.size(), p.size());
    double mass = 0.0;
    for (std::size_t u = 0; u < p.size(); ++u)
        if (groups.is_protected(static_cast<NodeId>(u)))
            mass += p[u];
    return mass;
}

}  // namespace fspr
