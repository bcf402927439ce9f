#include "bam/simulator.hpp"

#include <queue>
#include <tuple>

namespace bam {

namespace {

struct Pending {
    Units time;
    std::uint64_t seq;
    EventSpec event;
};

struct Later {
    bool operator()(const Pending &a, const Pending &b) const {
        return std::tie(a.time, a.seq) > std::tie(b.time, b.seq);
    }
};

std::string usage_of(const DirectedLink &link, const AllocationLedger &ledger) {
    std::string out = link.str() + ":";
    for (ClassIndex z = 0; z < ledger.class_count(); ++z) {
        if (z)
            out += ',';
        out += std::to_string(ledger.attributed_used(z));
    }
    return out;
}

std::string join_ids(const std::vector<std::string> &ids) {
    std::string out;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (i)
            out += ',';
        out += ids[i];
    }
    return out;
}

class Run {
public:
    Run(const Scenario &sc, Manager &manager, const RunOptions &opt)
        : manager_(manager), policy_(effective_policy(sc, opt)), check_(opt.check_invariants) {
        std::size_t max_classes = 0;
        for (const auto &[link, classes] : sc.classes) {
            ledgers_.emplace(link, AllocationLedger(classes, sc.network.capacity(link)));
            max_classes = std::max(max_classes, classes.size());
        }
        result_.metrics.per_class.resize(max_classes);

        std::vector<EventSpec> events = sc.events;
        if (sc.workload)
            events = generate_events(*sc.workload, opt.seed.value_or(sc.workload->seed));
        for (auto &ev : events)
            push(std::move(ev));
    }

    RunResult finish() {
        while (!queue_.empty()) {
            auto next = queue_.top();
            queue_.pop();
            if (next.event.kind == EventSpec::Kind::Arrive)
                arrive(next.time, next.event.request);
            else
                depart(next.time, next.event.request.id);
        }
        manager_.on_episode_end();
        return std::move(result_);
    }

private:
    void push(EventSpec ev) {
        const auto t = ev.time;
        queue_.push(Pending{t, seq_++, std::move(ev)});
    }

    void record(Units time, TraceKind kind, const Request &r, Units units, std::string breakdown,
                std::string victims, const AllocationLedger &ledger) {
        result_.trace.records.push_back(TraceRecord{time, kind, r.id, r.class_index, units, std::move(breakdown),
                                                    std::move(victims), usage_of(r.link, ledger)});
    }

    void verify(const AllocationLedger &ledger) const {
        if (!check_)
            return;
        if (auto bad = ledger.check_invariants())
            throw Error("ledger invariant violated: " + *bad);
    }

    // Logged after the revocation and before the grant that follows it.
    void note_preemption(Units time, const Request &r, const PreemptionReport &p, const AllocationLedger &ledger,
                         const std::optional<Grant> &grant) {
        result_.metrics.preemptions += p.victims.size();
        std::vector<Units> used = used_matrix(ledger);
        if (grant)
            for (const auto &d : grant->breakdown)
                used[d.donor] -= d.total();
        std::string usage = r.link.str() + ":";
        for (std::size_t z = 0; z < used.size(); ++z)
            usage += (z ? "," : "") + std::to_string(used[z]);
        result_.trace.records.push_back(
            TraceRecord{time, TraceKind::Preemption, r.id, r.class_index, p.released, "", join_ids(p.victims), usage});
    }

    void arrive(Units time, const Request &r) {
        auto &ledger = ledgers_.at(r.link);
        auto &m = result_.metrics;
        auto &cm = m.per_class.at(r.class_index);
        ++cm.arrivals;
        cm.offered += r.demand;
        record(time, TraceKind::Arrival, r, r.demand, "", "", ledger);

        auto outcome = admit_with_devolution(ledger, policy_, r);
        if (outcome.exhaustion) {
            ++m.exhaustions;
            record(time, TraceKind::Exhaustion, r, outcome.denial->shortfall, "", "", ledger);
            ++m.invocations;
            const auto action = manager_.on_exhaustion(*outcome.exhaustion, ledger);
            apply_action(ledger, action);
            record(time, TraceKind::Reconfiguration, r, action.noop ? 0 : action.delta, action.str(), "", ledger);
            verify(ledger);
            outcome = admit_with_devolution(ledger, policy_, r);
        }
        if (outcome.preemption)
            note_preemption(time, r, *outcome.preemption, ledger, outcome.grant);

        if (outcome.granted()) {
            ++cm.grants;
            cm.granted += r.demand;
            record(time, TraceKind::Grant, r, r.demand, format_breakdown(outcome.grant->breakdown), "", ledger);
            if (r.hold) {
                EventSpec dep;
                dep.time = time + *r.hold;
                dep.kind = EventSpec::Kind::Depart;
                dep.request.id = r.id;
                dep.request.link = r.link;
                push(std::move(dep));
            }
        } else {
            ++cm.denials;
            record(time, TraceKind::Denial, r, r.demand, "", "", ledger);
        }
        manager_.on_decision(r.class_index, outcome.granted());

        for (ClassIndex z = 0; z < ledger.class_count() && z < m.per_class.size(); ++z) {
            const auto c = ledger.config(z).constraint;
            m.per_class[z].utilization_sum +=
                c > 0 ? static_cast<double>(ledger.attributed_used(z)) / static_cast<double>(c) : 0.0;
            ++m.per_class[z].utilization_samples;
        }
        verify(ledger);
    }

    void depart(Units time, const std::string &id) {
        // Requests that were denied or preempted hold nothing and leave silently.
        for (auto &[link, ledger] : ledgers_) {
            if (!ledger.contains(id))
                continue;
            auto g = release(ledger, id);
            Request r;
            r.id = id;
            r.class_index = g.class_index;
            r.link = link;
            record(time, TraceKind::Departure, r, g.total(), format_breakdown(g.breakdown), "", ledger);
            verify(ledger);
            return;
        }
    }

    Manager &manager_;
    Policy policy_;
    bool check_;
    std::map<DirectedLink, AllocationLedger> ledgers_;
    std::priority_queue<Pending, std::vector<Pending>, Later> queue_;
    std::uint64_t seq_ = 0;
    RunResult result_;
};

} // namespace

Policy effective_policy(const Scenario &scenario, const RunOptions &options) {
    Policy p = scenario.policy;
    if (options.policy)
        p.kind = *options.policy;
    if (options.preemption)
        p.preemption = *options.preemption;
    if (options.donor_order)
        p.donor_order = *options.donor_order;
    return p;
}

RunResult run(const Scenario &scenario, Manager &manager, const RunOptions &options) {
    return Run(scenario, manager, options).finish();
}

} // namespace bam
