#pragma once

#include <span>
#include <vector>

#include "bam/training.hpp"

namespace bam {

/// One independent simulation. Jobs share nothing mutable: each builds its
/// own manager (an RL manager reads `qtable` without learning).
struct RunJob {
    const Scenario *scenario = nullptr;
    RunOptions options;
    ManagerKind manager = ManagerKind::Static;
    const QTable *qtable = nullptr;
};

/// Reference implementation: jobs in order on the calling thread.
std::vector<RunResult> run_batch_serial(std::span<const RunJob> jobs);
/// Same results as run_batch_serial, jobs spread over OpenMP threads.
std::vector<RunResult> run_batch_parallel(std::span<const RunJob> jobs);

std::vector<TrainResult> train_batch_serial(const Scenario &scenario, std::span<const TrainConfig> configs);
std::vector<TrainResult> train_batch_parallel(const Scenario &scenario, std::span<const TrainConfig> configs);

} // namespace bam
