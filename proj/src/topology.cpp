#include "bam/topology.hpp"

#include <algorithm>
#include <numeric>
#include <set>

namespace bam {

bool NetworkGraph::has_node(const NodeId &n) const {
    return std::find(nodes_.begin(), nodes_.end(), n) != nodes_.end();
}

Units NetworkGraph::capacity(const DirectedLink &l) const {
    auto it = capacity_.find(l);
    if (it == capacity_.end())
        throw TopologyError(TopologyError::Kind::UnknownLink, "unknown link " + l.str());
    return it->second;
}

std::vector<DirectedLink> NetworkGraph::directed_links() const {
    std::vector<DirectedLink> out;
    out.reserve(capacity_.size());
    for (const auto &[link, cap] : capacity_)
        out.push_back(link);
    return out;
}

std::optional<std::size_t> NetworkGraph::index_of(const NodeId &n) const {
    auto it = std::find(nodes_.begin(), nodes_.end(), n);
    if (it == nodes_.end())
        return std::nullopt;
    return static_cast<std::size_t>(it - nodes_.begin());
}

NetworkGraph build_network(const std::vector<NodeId> &nodes, const std::vector<LinkSpec> &links) {
    using Kind = TopologyError::Kind;
    NetworkGraph g;
    std::set<NodeId> seen;
    for (const auto &n : nodes) {
        if (!seen.insert(n).second)
            throw TopologyError(Kind::DuplicateNode, "duplicate node '" + n + "'");
        g.nodes_.push_back(n);
    }
    for (const auto &l : links) {
        if (l.a == l.b)
            throw TopologyError(Kind::SelfLink, "self link on node '" + l.a + "'");
        for (const auto &end : {l.a, l.b})
            if (!seen.count(end))
                throw TopologyError(Kind::UnknownEndpoint, "link endpoint '" + end + "' is not a node");
        if (l.capacity_forward < 0 || l.capacity_reverse < 0)
            throw TopologyError(Kind::NegativeCapacity, "negative capacity on link " + l.a + "-" + l.b);
        // A repeated link declaration overrides the earlier capacities.
        g.capacity_[{l.a, l.b}] = l.capacity_forward;
        g.capacity_[{l.b, l.a}] = l.capacity_reverse;
    }
    return g;
}

ConnectivityMatrix connectivity(const NetworkGraph &graph) {
    ConnectivityMatrix m;
    m.nodes = graph.nodes();
    const auto n = m.nodes.size();
    m.entries.assign(n, std::vector<int>(n, 0));
    for (const auto &[link, cap] : graph.capacities()) {
        auto i = *graph.index_of(link.from);
        auto j = *graph.index_of(link.to);
        m.entries[i][j] = 1;
    }
    return m;
}

CapacityCheck validate_capacity(const NetworkGraph &graph, const DirectedLink &link,
                                const std::vector<Units> &constraints) {
    CapacityCheck r;
    r.capacity = graph.capacity(link);
    r.demanded = std::accumulate(constraints.begin(), constraints.end(), Units{0});
    r.ok = r.demanded <= r.capacity;
    r.deficit = r.ok ? 0 : r.demanded - r.capacity;
    return r;
}

} // namespace bam
