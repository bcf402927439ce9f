#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bam/common.hpp"

namespace bam {

using NodeId = std::string;

/// A directed node pair (i, j): requests arriving at j from i.
struct DirectedLink {
    NodeId from;
    NodeId to;

    auto operator<=>(const DirectedLink &) const = default;

    /// Renders as "a>b", the form used in scenario files.
    std::string str() const { return from + ">" + to; }
    DirectedLink reversed() const { return {to, from}; }
};

struct LinkSpec {
    NodeId a;
    NodeId b;
    Units capacity_forward = 0;
    Units capacity_reverse = 0;
};

struct ConnectivityMatrix {
    std::vector<NodeId> nodes;
    std::vector<std::vector<int>> entries;

    int at(std::size_t i, std::size_t j) const { return entries.at(i).at(j); }
};

/// Bidirectional graph with an independent capacity ceiling per direction.
/// Immutable once built.
class NetworkGraph {
public:
    const std::vector<NodeId> &nodes() const { return nodes_; }
    const std::map<DirectedLink, Units> &capacities() const { return capacity_; }

    bool has_node(const NodeId &n) const;
    bool has_link(const DirectedLink &l) const { return capacity_.count(l) != 0; }
    /// Throws TopologyError(UnknownLink).
    Units capacity(const DirectedLink &l) const;
    std::vector<DirectedLink> directed_links() const;
    std::optional<std::size_t> index_of(const NodeId &n) const;

private:
    friend NetworkGraph build_network(const std::vector<NodeId> &, const std::vector<LinkSpec> &);

    std::vector<NodeId> nodes_;
    std::map<DirectedLink, Units> capacity_;
};

NetworkGraph build_network(const std::vector<NodeId> &nodes, const std::vector<LinkSpec> &links);

ConnectivityMatrix connectivity(const NetworkGraph &graph);

struct CapacityCheck {
    bool ok = true;
    Units capacity = 0;
    Units demanded = 0;
    Units deficit = 0;
};

/// Checks that the class constraints fit under the link capacity (sum of
/// constraints <= NRC). `constraints` are the per-class R_CT values.
CapacityCheck validate_capacity(const NetworkGraph &graph, const DirectedLink &link,
                                const std::vector<Units> &constraints);

} // namespace bam
