// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <random>
#include <set>
#include <string>

#include "bam/batch.hpp"
#include "oracle.hpp"

using namespace bam;

namespace {

using Clock = std::chrono::steady_clock;

struct Gate {
    int failures = 0;
    std::size_t conservation_checks = 0;
    std::vector<std::string> conservation_violations;

    void report(const std::string &name, bool ok, double seconds, const std::string &detail) {
        std::printf("%s  %-22s %8.3fs  %s\n", ok ? "PASS" : "FAIL", name.c_str(), seconds, detail.c_str());
        std::fflush(stdout);
        if (!ok)
            ++failures;
    }

    void check(const AllocationLedger &ledger, const char *where) {
        ++conservation_checks;
        if (auto err = ledger.check_invariants())
            conservation_violations.push_back(std::string(where) + ": " + *err);
        Units total = 0;
        for (std::size_t k = 0; k < ledger.class_count(); ++k) {
            total += ledger.attributed_used(k);
            if (ledger.attributed_used(k) > ledger.classes()[k].constraint)
                conservation_violations.push_back(std::string(where) + ": class over constraint");
        }
        if (total > ledger.capacity())
            conservation_violations.push_back(std::string(where) + ": link over capacity");
    }

    // Victim breakdown sums must equal what the preemption released.
    void check_preemption(const AllocationLedger &before, const AdmissionOutcome &out, const char *where) {
        if (!out.preemption)
            return;
        Units victims = 0;
        for (const auto &id : out.preemption->victims) {
            const Grant *g = before.find(id);
            if (!g) {
                conservation_violations.push_back(std::string(where) + ": unknown victim " + id);
                continue;
            }
            victims += g->total();
        }
        if (victims != out.preemption->released)
            conservation_violations.push_back(std::string(where) + ": preemption released " +
                                              std::to_string(out.preemption->released) + " but victims held " +
                                              std::to_string(victims));
    }
};

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

Scenario load(const std::string &rel) { return load_scenario(read_text_file(std::string(BAM_DATA_DIR) + rel)); }

const TraceRecord *find(const TraceLog &log, TraceKind kind, const std::string &id) {
    for (const auto &r : log.records)
        if (r.kind == kind && r.request_id == id)
            return &r;
    return nullptr;
}

std::set<std::string> ids_of(const TraceLog &log, TraceKind kind) {
    std::set<std::string> out;
    for (const auto &r : log.records)
        if (r.kind == kind)
            out.insert(r.request_id);
    return out;
}

std::string join(const std::set<std::string> &ids) {
    std::string s;
    for (const auto &id : ids)
        s += (s.empty() ? "" : ",") + id;
    return "{" + s + "}";
}

void golden_preemption(Gate &gate) {
    const auto t0 = Clock::now();
    auto sc = load("/golden/golden.scn");
    StaticManager m;
    RunOptions opt;
    opt.check_invariants = true;
    auto log = run(sc, m, opt).trace;
    const double secs = since(t0);

    std::vector<std::string> bad;
    auto expect = [&](bool ok, const std::string &what) {
        if (!ok)
            bad.push_back(what);
    };
    auto breakdown = [&](const std::string &id) {
        auto r = find(log, TraceKind::Grant, id);
        return r ? r->breakdown : std::string("<denied>");
    };
    auto g3 = find(log, TraceKind::Grant, "req3");
    expect(g3 && g3->usage == "a>b:20,30,10", "usage after req3");
    expect(breakdown("req1") == "c0:20" && breakdown("req2") == "c1:30" && breakdown("req3") == "c2:10",
           "requests 1-3 from own pools");
    expect(breakdown("req4") == "c0:10,c1:20", "req4 breakdown " + breakdown("req4"));
    expect(find(log, TraceKind::Denial, "req5") != nullptr, "req5 denied");
    auto p6 = find(log, TraceKind::Preemption, "req6");
    expect(p6 && p6->victims == "req4", "req6 revokes req4");
    expect(breakdown("req6") == "c1:20", "req6 from own pool");
    expect(breakdown("req7") == "c0:10" && breakdown("req8") == "c2:10", "requests 7 and 8 from own pools");
    auto e9 = find(log, TraceKind::Exhaustion, "req9");
    expect(find(log, TraceKind::Denial, "req9") && e9 && e9->usage == "a>b:30,50,20", "req9 exhausted at 100/100");
    auto div = verify_golden(log, parse_trace(read_text_file(BAM_DATA_DIR "/golden/golden_preempt.trace")));
    expect(!div, div ? div->describe() : "");

    std::string detail = "grants " + join(ids_of(log, TraceKind::Grant)) + ", fixture byte-identical";
    for (const auto &b : bad)
        detail += "; mismatch: " + b;
    gate.report("golden-preemption", bad.empty() && secs < 1.0, secs, detail);
}

void golden_nopreemption(Gate &gate) {
    const auto t0 = Clock::now();
    auto sc = load("/golden/golden.scn");
    StaticManager m;
    RunOptions opt;
    opt.preemption = false;
    opt.check_invariants = true;
    auto log = run(sc, m, opt).trace;
    const double secs = since(t0);

    const auto denied = ids_of(log, TraceKind::Denial);
    const bool six = denied.count("req6") > 0, seven = denied.count("req7") > 0;
    auto div = verify_golden(log, parse_trace(read_text_file(BAM_DATA_DIR "/golden/golden_nopreempt.trace")));
    std::string detail = "denied " + join(denied) + ", fixture " + (div ? "diverges" : "matches");
    if (!seven) {
        auto g = find(log, TraceKind::Grant, "req7");
        detail += "; req7 granted as " + (g ? g->breakdown : std::string("?")) +
                  " (c0 full, c2 public pool has 10 free units)";
    }
    gate.report("golden-no-preemption", six && seven && !div, secs, detail);
}

// Grants under plain admission, or with devolution when `preempt` is set.
bool grants(const AllocationLedger &ledger, PolicyKind kind, bool preempt, const Request &r) {
    AllocationLedger copy = ledger;
    return admit_with_devolution(copy, Policy{kind, preempt}, r).granted();
}

void monotonicity(Gate &gate) {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(20240601);
    std::size_t instances = 0, counterexamples = 0, next_id = 0;
    std::string first;
    while (instances < 12000) {
        const std::size_t n = 1 + rng() % 4;
        const Units cap = 4 + static_cast<Units>(rng() % 60);
        AllocationLedger ledger(oracle::random_classes(rng, n, cap), cap);
        oracle::random_walk(rng, ledger, rng() % 12, cap / 2 + 1, next_id,
                            [&](const AllocationLedger &l) { gate.check(l, "monotonicity walk"); });
        for (int probe = 0; probe < 4; ++probe) {
            Request r;
            r.id = "probe";
            r.class_index = rng() % n;
            r.demand = 1 + static_cast<Units>(rng() % static_cast<std::uint64_t>(cap));
            for (bool preempt : {false, true}) {
                const bool mam = grants(ledger, PolicyKind::MAM, false, r);
                const bool rdm = grants(ledger, PolicyKind::RDM, preempt, r);
                const bool atcs = grants(ledger, PolicyKind::ATCS, preempt, r);
                ++instances;
                if ((mam && !rdm) || (rdm && !atcs)) {
                    if (first.empty())
                        first = "class " + std::to_string(r.class_index) + " demand " + std::to_string(r.demand);
                    ++counterexamples;
                }
            }
        }
    }
    const double secs = since(t0);
    gate.report("policy-monotonicity", counterexamples == 0 && instances >= 10000 && secs < 30.0, secs,
                std::to_string(instances) + " instances, " + std::to_string(counterexamples) + " counterexamples" +
                    (first.empty() ? "" : " (first: " + first + ")"));
}

// Every class configuration with constraints summing to at most 12 and each
// private partition either empty or full; every ledger reached from it by up
// to two ATCS admissions of 2 or 5 units; every probe class and demand 1..12
// under all six policy settings.
void oracle_equivalence(Gate &gate) {
    const auto t0 = Clock::now();
    constexpr Units kCap = 12;
    std::size_t cases = 0, mismatches = 0;
    std::string first;

    auto probe_all = [&](const AllocationLedger &ledger) {
        const auto n = ledger.class_count();
        for (std::size_t k = 0; k < n; ++k)
            for (Units d = 1; d <= kCap; ++d)
                for (auto kind : {PolicyKind::MAM, PolicyKind::RDM, PolicyKind::ATCS})
                    for (bool preempt : {false, true}) {
                        if (kind == PolicyKind::MAM && preempt)
                            continue;
                        const Policy p{kind, preempt};
                        const bool path = oracle::any_admission_path(p, ledger, k, d);
                        Request r;
                        r.id = "probe";
                        r.class_index = k;
                        r.demand = d;
                        AllocationLedger copy = ledger;
                        auto out = admit_with_devolution(copy, p, r);
                        gate.check(copy, "oracle admit");
                        gate.check_preemption(ledger, out, "oracle admit");
                        const bool exhausted = is_exhausted(ledger, p, k, d);
                        cases += 2;
                        if (out.granted() != path || exhausted == path) {
                            ++mismatches;
                            if (first.empty())
                                first = std::string(to_string(kind)) + (preempt ? "+pre" : "") + " class " +
                                        std::to_string(k) + " demand " + std::to_string(d);
                        }
                    }
    };

    for (std::size_t n = 1; n <= 3; ++n) {
        std::vector<Units> c(n, 0);
        std::function<void(std::size_t, Units)> constraints = [&](std::size_t i, Units left) {
            if (i == n) {
                for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
                    std::vector<ResourceClassConfig> cfg(n);
                    for (std::size_t k = 0; k < n; ++k) {
                        cfg[k].class_index = k;
                        cfg[k].priority_rank = static_cast<int>(k);
                        cfg[k].constraint = c[k];
                        cfg[k].private_units = (mask >> k) & 1 ? c[k] : 0;
                    }
                    if (mask != 0 && std::all_of(cfg.begin(), cfg.end(), [](auto &x) { return x.constraint == 0; }))
                        continue;
                    AllocationLedger base(cfg, kCap);
                    std::set<std::string> seen;
                    std::function<void(const AllocationLedger &, int)> walk = [&](const AllocationLedger &l,
                                                                                 int depth) {
                        std::string key;
                        for (std::size_t k = 0; k < n; ++k)
                            for (std::size_t z = 0; z < n; ++z)
                                key += std::to_string(k == z ? l.own_used(k) : l.borrowed(k, z)) + ",";
                        for (const auto &[id, g] : l.grants())
                            key += format_breakdown(g.breakdown) + ";";
                        if (!seen.insert(key).second)
                            return;
                        probe_all(l);
                        if (depth == 2)
                            return;
                        for (std::size_t k = 0; k < n; ++k)
                            for (Units d : {2, 5}) {
                                AllocationLedger next = l;
                                Request r;
                                r.id = "s" + std::to_string(depth) + "_" + std::to_string(k) + "_" + std::to_string(d);
                                r.class_index = k;
                                r.demand = d;
                                if (is_grant(admit(next, Policy{PolicyKind::ATCS, false}, r))) {
                                    gate.check(next, "oracle setup");
                                    walk(next, depth + 1);
                                }
                            }
                    };
                    walk(base, 0);
                }
                return;
            }
            for (Units x = 0; x <= left; ++x) {
                c[i] = x;
                constraints(i + 1, left - x);
            }
        };
        constraints(0, kCap);
    }
    const double secs = since(t0);
    gate.report("oracle-equivalence", mismatches == 0 && secs < 60.0, secs,
                std::to_string(cases) + " decisions, " + std::to_string(mismatches) + " mismatches" +
                    (first.empty() ? "" : " (first: " + first + ")"));
}

void conservation(Gate &gate) {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(77);
    std::size_t next_id = 0;
    for (int i = 0; i < 2000; ++i) {
        const std::size_t n = 1 + rng() % 4;
        const Units cap = 1 + static_cast<Units>(rng() % 80);
        AllocationLedger ledger(oracle::random_classes(rng, n, cap), cap);
        for (int s = 0; s < 30; ++s) {
            Request r;
            r.id = "c" + std::to_string(next_id++);
            r.class_index = rng() % n;
            r.demand = 1 + static_cast<Units>(rng() % static_cast<std::uint64_t>(cap));
            const Policy p{static_cast<PolicyKind>(rng() % 3), rng() % 2 == 0};
            const AllocationLedger before = ledger;
            auto out = admit_with_devolution(ledger, p, r);
            gate.check(ledger, "conservation admit");
            gate.check_preemption(before, out, "conservation admit");
            if (!ledger.grants().empty() && rng() % 3 == 0) {
                auto it = ledger.grants().begin();
                std::advance(it, static_cast<long>(rng() % ledger.grants().size()));
                release(ledger, it->first);
                gate.check(ledger, "conservation release");
            }
            if (rng() % 5 == 0) {
                auto snaps = snapshot(ledger);
                auto legal = legal_actions(snaps, 1 + static_cast<Units>(rng() % 5));
                apply_action(ledger, legal[rng() % legal.size()]);
                gate.check(ledger, "conservation transfer");
            }
        }
    }
    // Whole simulations with every manager kind and policy, invariants checked per event.
    auto drift = load("/scenarios/drift.scn");
    auto golden = load("/golden/golden.scn");
    std::size_t sim_errors = 0;
    for (auto *sc : {&drift, &golden})
        for (auto kind : {PolicyKind::MAM, PolicyKind::RDM, PolicyKind::ATCS})
            for (bool preempt : {false, true}) {
                RandomManager m(sc->manager, 3);
                RunOptions opt;
                opt.policy = kind;
                opt.preemption = preempt && kind != PolicyKind::MAM;
                opt.check_invariants = true;
                try {
                    run(*sc, m, opt);
                } catch (const std::exception &e) {
                    ++sim_errors;
                    gate.conservation_violations.push_back(std::string("simulation: ") + e.what());
                }
            }
    const double secs = since(t0);
    const auto &v = gate.conservation_violations;
    gate.report("conservation", v.empty(), secs,
                std::to_string(gate.conservation_checks) + " ledger checks across all suites, " +
                    std::to_string(v.size()) + " violations" + (v.empty() ? "" : " (first: " + v.front() + ")"));
}

void offload(Gate &gate) {
    const auto t0 = Clock::now();
    auto golden = load("/golden/golden.scn");
    QTable table;
    QManager agent(table, golden.manager, 3, true);
    auto r = run(golden, agent, RunOptions{});
    const std::size_t exhaustion_records = ids_of(r.trace, TraceKind::Exhaustion).size();
    const std::uint64_t bound = state_space_size(3, golden.manager.buckets);
    bool ok = agent.invocations() == 2 && r.metrics.invocations == 2 && exhaustion_records == 2 &&
              r.metrics.total().arrivals == 9 && r.metrics.offload_ratio() >= 7.0 / 9.0 - 1e-12 &&
              agent.visited().size() <= bound;
    std::string detail = std::to_string(agent.invocations()) + "/" + std::to_string(r.metrics.total().arrivals) +
                         " invocations, offload " + std::to_string(r.metrics.offload_ratio());

    // Visited states stay within the bound however many requests arrive.
    auto drift = load("/scenarios/drift.scn");
    QTable big;
    std::size_t total_arrivals = 0, total_exhaustions = 0;
    auto mc = drift.manager;
    QManager heavy(big, mc, 3, true);
    for (std::size_t arrivals : {200u, 2000u, 20000u}) {
        drift.workload->arrivals = arrivals;
        auto res = run(drift, heavy, RunOptions{});
        total_arrivals += res.metrics.total().arrivals;
        total_exhaustions += res.metrics.exhaustions;
    }
    const std::uint64_t drift_bound = state_space_size(3, drift.manager.buckets);
    ok = ok && heavy.visited().size() <= drift_bound && heavy.invocations() == total_exhaustions;
    detail += "; " + std::to_string(total_arrivals) + " drift arrivals visited " +
              std::to_string(heavy.visited().size()) + " of " + std::to_string(drift_bound) + " states, " +
              std::to_string(heavy.invocations()) + " invocations = " + std::to_string(total_exhaustions) +
              " exhaustions";
    gate.report("offload", ok, since(t0), detail);
}

void q_learning(Gate &gate) {
    const auto t0 = Clock::now();
    ManagerState s{{0, 0}, {0, 0}, 0}, s2{{1, 1}, {0, 0}, 1};
    const auto a = ManagerAction::transfer(0, 1, 10), b = ManagerAction::transfer(1, 0, 10);

    QTable q1;
    update(q1, s, a, 5.0, s2, {ManagerAction{}, b}, QParams{1.0, 0.0, 0.0});
    const bool collapse = q1.value(s, a) == 5.0;

    QTable q2;
    q2.set(s, a, 2.0);
    q2.set(s2, b, 4.0);
    update(q2, s, a, 1.0, s2, {ManagerAction{}, b}, QParams{0.5, 0.9, 0.0});
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9f", q2.value(s, a));
    const bool arithmetic = std::string(buf) == "3.300000000" && std::fabs(q2.value(s, a) - 3.3) < 1e-12;

    auto drift = load("/scenarios/drift.scn");
    TrainConfig tc;
    tc.manager = drift.manager;
    tc.episodes = 30;
    tc.seed = 4;
    auto trained = train(drift, tc);
    bool replay = true;
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        GreedyManager m1(trained.table, drift.manager, 3), m2(trained.table, drift.manager, 3);
        RunOptions opt;
        opt.seed = seed;
        replay = replay && run(drift, m1, opt).trace.to_text() == run(drift, m2, opt).trace.to_text();
    }
    gate.report("q-learning", collapse && arithmetic && replay, since(t0),
                std::string("collapse ") + (collapse ? "5" : "wrong") + ", bellman " + buf + ", greedy replay " +
                    (replay ? "identical" : "differs"));
}

double tail_mean(const std::vector<double> &curve, std::size_t count) {
    return std::accumulate(curve.end() - static_cast<long>(count), curve.end(), 0.0) / static_cast<double>(count);
}

void learning(Gate &gate) {
    const auto t0 = Clock::now();
    auto drift = load("/scenarios/drift.scn");
    std::vector<TrainConfig> configs;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        TrainConfig tc;
        tc.manager = drift.manager;
        tc.episodes = 500;
        tc.seed = seed;
        tc.epsilon_final = 0.0;
        configs.push_back(tc);
    }
    auto trained = train_batch_parallel(drift, configs);
    int wins = 0;
    std::string detail;
    for (std::size_t i = 0; i < configs.size(); ++i) {
        const auto seed = configs[i].seed;
        StaticManager st;
        auto mc = drift.manager;
        mc.seed = seed;
        RandomManager rnd(mc, 3);
        const double rl = tail_mean(trained[i].curve, 10);
        const double stat = tail_mean(evaluate_curve(drift, st, 500, seed), 10);
        const double rand = tail_mean(evaluate_curve(drift, rnd, 500, seed), 10);
        const bool win = rl <= stat && rl <= rand;
        wins += win;
        char buf[96];
        std::snprintf(buf, sizeof buf, "%sseed %llu rl %.3f static %.3f random %.3f", i ? "; " : "",
                      static_cast<unsigned long long>(seed), rl, stat, rand);
        detail += buf;
    }
    const double secs = since(t0);
    gate.report("learning-improvement", wins >= 4 && secs < 300.0, secs,
                std::to_string(wins) + "/5 seeds win (" + detail + ")");
}

} // namespace

int main() {
    Gate gate;
    golden_preemption(gate);
    golden_nopreemption(gate);
    monotonicity(gate);
    oracle_equivalence(gate);
    offload(gate);
    q_learning(gate);
    learning(gate);
    conservation(gate);
    std::printf("%d criteria failed\n", gate.failures);
    return gate.failures == 0 ? 0 : 1;
}
