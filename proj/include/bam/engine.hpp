#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "bam/ledger.hpp"

namespace bam {

enum class PolicyKind { MAM, RDM, ATCS };

/// Order in which donor classes' public pools are tried. Only the descending
/// priority order is a supported configuration; the ascending order exists so
/// that regression tests can show the golden trace depends on it.
enum class DonorOrder { DescendingPriority, AscendingPriority };

struct Policy {
    PolicyKind kind = PolicyKind::ATCS;
    bool preemption = false;
    DonorOrder donor_order = DonorOrder::DescendingPriority;
};

std::string to_string(PolicyKind kind);
std::optional<PolicyKind> parse_policy_kind(const std::string &text);

enum class DenialReason { Insufficient, UnknownClass, Exhausted };
std::string to_string(DenialReason reason);

struct Denial {
    DenialReason reason = DenialReason::Insufficient;
    Units shortfall = 0;
};

using AdmitResult = std::variant<Grant, Denial>;

inline bool is_grant(const AdmitResult &r) { return std::holds_alternative<Grant>(r); }

/// Classes whose free public units a class-k request may draw, in draw order.
/// MAM: none. RDM: strictly higher-priority classes. ATCS: every other class.
std::vector<ClassIndex> donor_classes(const AllocationLedger &ledger, const Policy &policy, ClassIndex k);

/// Computes the grant `admit` would issue without touching the ledger.
AdmitResult plan_admission(const AllocationLedger &ledger, const Policy &policy, const Request &request);

/// Draws own private, then own public, then donors' free public units. All or
/// nothing: a request that cannot be fully satisfied is denied with the
/// shortfall and the ledger is left untouched.
AdmitResult admit(AllocationLedger &ledger, const Policy &policy, const Request &request);

/// Returns exactly the grant's units to their pools. Throws UnknownRequest.
Grant release(AllocationLedger &ledger, const std::string &request_id);

struct PreemptionReport {
    std::vector<std::string> victims;
    /// Units of the owner's pool given back by the victims.
    Units freed = 0;
    /// Everything the victims held, across all pools.
    Units released = 0;
    std::vector<Grant> revoked;
};

/// Borrowers of `owner`'s public pool in revocation order: lowest-priority
/// borrower class first, most recent grant first within a class.
std::vector<std::string> devolution_order(const AllocationLedger &ledger, ClassIndex owner);

/// Revokes whole borrower grants, in devolution_order, until at least `needed`
/// units of the owner's pool are back. nullopt (ledger unchanged) when the
/// owner has fewer than `needed` units lent out.
std::optional<PreemptionReport> devolve(AllocationLedger &ledger, ClassIndex owner, Units needed);

struct ClassSnapshot {
    Units constraint = 0;
    Units attributed_used = 0;
    Units free_private = 0;
    Units free_public = 0;

    bool operator==(const ClassSnapshot &) const = default;
};

std::vector<ClassSnapshot> snapshot(const AllocationLedger &ledger);

/// Raised when no admission path exists for a request, devolution included.
struct ExhaustionEvent {
    DirectedLink link;
    Request request;
    std::vector<ClassSnapshot> classes;
};

struct AdmissionOutcome {
    std::optional<Grant> grant;
    std::optional<PreemptionReport> preemption;
    std::optional<Denial> denial;
    std::optional<ExhaustionEvent> exhaustion;

    bool granted() const { return grant.has_value(); }
};

/// Plain admission first; on a shortfall with preemption enabled, revokes the
/// shortest prefix of the owner's devolution order that makes the request fit,
/// then admits. Denials for lack of resources carry an ExhaustionEvent.
AdmissionOutcome admit_with_devolution(AllocationLedger &ledger, const Policy &policy, const Request &request);

/// attributed_used per class.
std::vector<Units> used_matrix(const AllocationLedger &ledger);

struct UalrEntry {
    std::string request_id;
    std::vector<Draw> draws;

    bool operator==(const UalrEntry &) const = default;
};

/// Active grants grouped by requesting class, in admission order.
std::vector<std::vector<UalrEntry>> ualr(const AllocationLedger &ledger);

/// True iff admit_with_devolution would deny (probe_class, probe_demand). Pure.
bool is_exhausted(const AllocationLedger &ledger, const Policy &policy, ClassIndex probe_class, Units probe_demand);

/// "c0:10,c1:20"; a private share is shown as "c0:10(p5)".
std::string format_breakdown(const std::vector<Draw> &draws);

} // namespace bam
