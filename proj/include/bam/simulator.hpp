#pragma once

#include <cstdint>
#include <optional>

#include "bam/manager.hpp"
#include "bam/scenario.hpp"
#include "bam/trace.hpp"

namespace bam {

struct RunOptions {
    std::optional<PolicyKind> policy;
    std::optional<bool> preemption;
    std::optional<DonorOrder> donor_order;
    /// Overrides the workload seed of generator scenarios.
    std::optional<std::uint64_t> seed;
    /// Re-check ledger invariants after every event (throws Error on violation).
    bool check_invariants = false;
};

struct RunResult {
    TraceLog trace;
    Metrics metrics;
};

Policy effective_policy(const Scenario &scenario, const RunOptions &options);

/// Replays the scenario in time order (FIFO among equal times). A denial with
/// no admission path invokes the manager once, applies its action and retries
/// the request once; the retry's outcome is final.
RunResult run(const Scenario &scenario, Manager &manager, const RunOptions &options = {});

} // namespace bam
