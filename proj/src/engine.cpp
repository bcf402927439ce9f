#include "bam/engine.hpp"

#include <algorithm>
#include <sstream>

namespace bam {

std::string to_string(PolicyKind kind) {
    switch (kind) {
    case PolicyKind::MAM: return "mam";
    case PolicyKind::RDM: return "rdm";
    case PolicyKind::ATCS: return "atcs";
    }
    return "?";
}

std::optional<PolicyKind> parse_policy_kind(const std::string &text) {
    std::string t = text;
    std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
    if (t == "mam")
        return PolicyKind::MAM;
    if (t == "rdm")
        return PolicyKind::RDM;
    if (t == "atcs")
        return PolicyKind::ATCS;
    return std::nullopt;
}

std::string to_string(DenialReason reason) {
    switch (reason) {
    case DenialReason::Insufficient: return "insufficient";
    case DenialReason::UnknownClass: return "unknown_class";
    case DenialReason::Exhausted: return "exhausted";
    }
    return "?";
}

std::vector<ClassIndex> donor_classes(const AllocationLedger &ledger, const Policy &policy, ClassIndex k) {
    std::vector<ClassIndex> donors;
    if (policy.kind == PolicyKind::MAM)
        return donors;
    const int own_rank = ledger.config(k).priority_rank;
    for (ClassIndex z = 0; z < ledger.class_count(); ++z) {
        if (z == k)
            continue;
        if (policy.kind == PolicyKind::RDM && ledger.config(z).priority_rank >= own_rank)
            continue;
        donors.push_back(z);
    }
    // Class index order is priority order (ranks increase with the index).
    if (policy.donor_order == DonorOrder::AscendingPriority)
        std::reverse(donors.begin(), donors.end());
    return donors;
}

AdmitResult plan_admission(const AllocationLedger &ledger, const Policy &policy, const Request &request) {
    const auto k = request.class_index;
    if (k >= ledger.class_count())
        return Denial{DenialReason::UnknownClass, 0};
    if (request.demand <= 0)
        throw Error("request '" + request.id + "' has non-positive demand");

    Grant g;
    g.request_id = request.id;
    g.class_index = k;
    g.demand = request.demand;

    Units remaining = request.demand;
    Draw own{k, 0, 0};
    own.private_units = std::min(remaining, ledger.free_private(k));
    remaining -= own.private_units;
    own.public_units = std::min(remaining, ledger.free_public(k));
    remaining -= own.public_units;
    if (own.total() > 0)
        g.breakdown.push_back(own);

    for (auto z : donor_classes(ledger, policy, k)) {
        if (remaining == 0)
            break;
        const auto take = std::min(remaining, ledger.free_public(z));
        if (take > 0) {
            g.breakdown.push_back(Draw{z, 0, take});
            remaining -= take;
        }
    }
    if (remaining > 0)
        return Denial{DenialReason::Insufficient, remaining};
    return g;
}

AdmitResult admit(AllocationLedger &ledger, const Policy &policy, const Request &request) {
    auto plan = plan_admission(ledger, policy, request);
    if (auto *g = std::get_if<Grant>(&plan)) {
        ledger.commit(*g);
        return *ledger.find(g->request_id);
    }
    return plan;
}

Grant release(AllocationLedger &ledger, const std::string &request_id) { return ledger.remove(request_id); }

std::vector<std::string> devolution_order(const AllocationLedger &ledger, ClassIndex owner) {
    std::vector<const Grant *> borrowers;
    for (const auto &[id, g] : ledger.grants())
        if (g.class_index != owner && g.units_from(owner) > 0)
            borrowers.push_back(&g);
    std::sort(borrowers.begin(), borrowers.end(), [&](const Grant *a, const Grant *b) {
        const int ra = ledger.config(a->class_index).priority_rank;
        const int rb = ledger.config(b->class_index).priority_rank;
        if (ra != rb)
            return ra > rb;
        return a->sequence > b->sequence;
    });
    std::vector<std::string> ids;
    ids.reserve(borrowers.size());
    for (const auto *g : borrowers)
        ids.push_back(g->request_id);
    return ids;
}

std::optional<PreemptionReport> devolve(AllocationLedger &ledger, ClassIndex owner, Units needed) {
    if (owner >= ledger.class_count() || ledger.lent_out(owner) < needed)
        return std::nullopt;
    PreemptionReport report;
    for (const auto &id : devolution_order(ledger, owner)) {
        if (report.freed >= needed)
            break;
        auto g = ledger.remove(id);
        report.freed += g.units_from(owner);
        report.released += g.total();
        report.victims.push_back(id);
        report.revoked.push_back(std::move(g));
    }
    return report;
}

std::vector<ClassSnapshot> snapshot(const AllocationLedger &ledger) {
    std::vector<ClassSnapshot> out;
    out.reserve(ledger.class_count());
    for (ClassIndex z = 0; z < ledger.class_count(); ++z)
        out.push_back({ledger.config(z).constraint, ledger.attributed_used(z), ledger.free_private(z),
                       ledger.free_public(z)});
    return out;
}

namespace {

// Number of leading victims whose revocation lets the request fit, or 0 if
// even revoking all of them is not enough.
std::size_t victims_needed(const AllocationLedger &ledger, const Policy &policy, const Request &request,
                           const std::vector<std::string> &order, Units &freed_from_owner) {
    AllocationLedger scratch = ledger;
    freed_from_owner = 0;
    for (std::size_t i = 0; i < order.size(); ++i) {
        auto g = scratch.remove(order[i]);
        freed_from_owner += g.units_from(request.class_index);
        if (is_grant(plan_admission(scratch, policy, request)))
            return i + 1;
    }
    return 0;
}

} // namespace

AdmissionOutcome admit_with_devolution(AllocationLedger &ledger, const Policy &policy, const Request &request) {
    AdmissionOutcome out;
    auto first = admit(ledger, policy, request);
    if (auto *g = std::get_if<Grant>(&first)) {
        out.grant = std::move(*g);
        return out;
    }
    auto denial = std::get<Denial>(first);
    if (denial.reason == DenialReason::UnknownClass) {
        out.denial = denial;
        return out;
    }

    if (policy.preemption && policy.kind != PolicyKind::MAM) {
        const auto order = devolution_order(ledger, request.class_index);
        Units needed = 0;
        if (!order.empty() && victims_needed(ledger, policy, request, order, needed) > 0) {
            out.preemption = devolve(ledger, request.class_index, needed);
            auto second = admit(ledger, policy, request);
            out.grant = std::get<Grant>(std::move(second));
            return out;
        }
    }

    out.denial = Denial{DenialReason::Exhausted, denial.shortfall};
    out.exhaustion = ExhaustionEvent{request.link, request, snapshot(ledger)};
    return out;
}

std::vector<Units> used_matrix(const AllocationLedger &ledger) {
    std::vector<Units> used;
    used.reserve(ledger.class_count());
    for (ClassIndex z = 0; z < ledger.class_count(); ++z)
        used.push_back(ledger.attributed_used(z));
    return used;
}

std::vector<std::vector<UalrEntry>> ualr(const AllocationLedger &ledger) {
    std::vector<const Grant *> ordered;
    for (const auto &[id, g] : ledger.grants())
        ordered.push_back(&g);
    std::sort(ordered.begin(), ordered.end(), [](const Grant *a, const Grant *b) { return a->sequence < b->sequence; });
    std::vector<std::vector<UalrEntry>> out(ledger.class_count());
    for (const auto *g : ordered)
        out[g->class_index].push_back({g->request_id, g->breakdown});
    return out;
}

bool is_exhausted(const AllocationLedger &ledger, const Policy &policy, ClassIndex probe_class, Units probe_demand) {
    AllocationLedger scratch = ledger;
    Request probe;
    probe.id = "\x01probe";
    probe.class_index = probe_class;
    probe.demand = probe_demand;
    return !admit_with_devolution(scratch, policy, probe).granted();
}

std::string format_breakdown(const std::vector<Draw> &draws) {
    std::ostringstream os;
    bool first = true;
    for (const auto &d : draws) {
        if (!first)
            os << ',';
        first = false;
        os << 'c' << d.donor << ':' << d.total();
        if (d.private_units > 0)
            os << "(p" << d.private_units << ')';
    }
    return os.str();
}

} // namespace bam
