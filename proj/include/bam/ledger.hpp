#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bam/common.hpp"
#include "bam/topology.hpp"

namespace bam {

/// One priority class on a link. Rank 0 is the highest priority; ranks must
/// strictly increase with the class index. The constraint splits into a
/// private partition (never lent) and a public one (lendable when unused).
struct ResourceClassConfig {
    ClassIndex class_index = 0;
    int priority_rank = 0;
    Units constraint = 0;
    Units private_units = 0;

    Units public_units() const { return constraint - private_units; }
    bool operator==(const ResourceClassConfig &) const = default;
};

/// Throws ConfigError if indices are not 0..n-1 in order, ranks are not
/// strictly increasing, or a partition is negative.
void validate_classes(const std::vector<ResourceClassConfig> &classes);

std::vector<Units> constraints_of(const std::vector<ResourceClassConfig> &classes);

struct Request {
    std::string id;
    ClassIndex class_index = 0;
    Units demand = 0;
    DirectedLink link;
    std::optional<Units> hold;
};

/// Units drawn from one donor's pool. Private units only ever appear when the
/// donor is the requester's own class.
struct Draw {
    ClassIndex donor = 0;
    Units private_units = 0;
    Units public_units = 0;

    Units total() const { return private_units + public_units; }
    bool operator==(const Draw &) const = default;
};

struct Grant {
    std::string request_id;
    ClassIndex class_index = 0;
    Units demand = 0;
    std::uint64_t sequence = 0;
    std::vector<Draw> breakdown;

    Units units_from(ClassIndex donor) const;
    Units total() const;
    bool operator==(const Grant &) const = default;
};

/// Per-link accounting of which class consumed units from which pool.
///
/// The usage matrices are a fold of the active grants: private_used[k] counts
/// class k's private units held by class k, public_used[k][z] counts units of
/// class z's public partition held by class-k requests. Every mutation keeps
///   attributed_used(z) <= constraint(z)   and   sum_z attributed_used(z) <= capacity.
class AllocationLedger {
public:
    AllocationLedger() = default;
    AllocationLedger(std::vector<ResourceClassConfig> classes, Units capacity);

    const std::vector<ResourceClassConfig> &classes() const { return classes_; }
    const ResourceClassConfig &config(ClassIndex k) const { return classes_.at(k); }
    std::size_t class_count() const { return classes_.size(); }
    Units capacity() const { return capacity_; }

    Units own_private_used(ClassIndex k) const { return private_used_.at(k); }
    Units own_public_used(ClassIndex k) const { return public_used_.at(k).at(k); }
    Units own_used(ClassIndex k) const { return own_private_used(k) + own_public_used(k); }
    /// Units of `donor`'s public pool held by `borrower` requests (borrower != donor).
    Units borrowed(ClassIndex borrower, ClassIndex donor) const;
    Units lent_out(ClassIndex donor) const;
    Units attributed_used(ClassIndex z) const;
    Units free_private(ClassIndex z) const;
    Units free_public(ClassIndex z) const;
    Units free_total(ClassIndex z) const { return free_private(z) + free_public(z); }
    Units total_used() const;

    const std::map<std::string, Grant> &grants() const { return grants_; }
    const Grant *find(const std::string &request_id) const;
    bool contains(const std::string &request_id) const { return grants_.count(request_id) != 0; }

    std::uint64_t next_sequence() const { return next_seq_; }

    /// Records a grant. Throws Error on duplicate id or if the draws do not fit
    /// the free partitions; the ledger is unchanged on throw.
    void commit(Grant grant);
    /// Removes a grant and returns its units to their pools. Throws UnknownRequest.
    Grant remove(const std::string &request_id);

    /// Replaces the class configuration. Each class's new private/public
    /// partitions must still cover what is currently held from them and the
    /// constraints must fit the capacity; throws ConfigError otherwise.
    void reconfigure(std::vector<ResourceClassConfig> classes);

    /// Re-folds the grants and checks every bound. Returns a description of the
    /// first violation, or nullopt when the ledger is consistent.
    std::optional<std::string> check_invariants() const;

    /// State equality; the sequence counter is not part of the state.
    bool operator==(const AllocationLedger &other) const;

private:
    std::vector<ResourceClassConfig> classes_;
    Units capacity_ = 0;
    std::vector<Units> private_used_;
    std::vector<std::vector<Units>> public_used_;
    std::map<std::string, Grant> grants_;
    std::uint64_t next_seq_ = 0;
};

} // namespace bam
