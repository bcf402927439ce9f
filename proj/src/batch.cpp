#include "bam/batch.hpp"

#include <exception>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace bam {

namespace {

RunResult run_job(const RunJob &job) {
    const auto &sc = *job.scenario;
    std::size_t classes = 0;
    for (const auto &[link, cfg] : sc.classes)
        classes = std::max(classes, cfg.size());
    auto manager = make_manager(job.manager, sc.manager, classes, job.qtable);
    return run(sc, *manager, job.options);
}

// Runs fn(i) for every index on OpenMP threads; the first exception is
// rethrown on the calling thread.
template <typename Fn> void parallel_for(std::size_t n, Fn &&fn) {
    std::exception_ptr error;
    const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic, 1)
    for (long long i = 0; i < count; ++i) {
        try {
            fn(static_cast<std::size_t>(i));
        } catch (...) {
#pragma omp critical(bam_batch_error)
            if (!error)
                error = std::current_exception();
        }
    }
    if (error)
        std::rethrow_exception(error);
}

} // namespace

std::vector<RunResult> run_batch_serial(std::span<const RunJob> jobs) {
    std::vector<RunResult> out;
    out.reserve(jobs.size());
    for (const auto &job : jobs)
        out.push_back(run_job(job));
    return out;
}

std::vector<RunResult> run_batch_parallel(std::span<const RunJob> jobs) {
    std::vector<RunResult> out(jobs.size());
    parallel_for(jobs.size(), [&](std::size_t i) { out[i] = run_job(jobs[i]); });
    return out;
}

std::vector<TrainResult> train_batch_serial(const Scenario &scenario, std::span<const TrainConfig> configs) {
    std::vector<TrainResult> out;
    out.reserve(configs.size());
    for (const auto &c : configs)
        out.push_back(train(scenario, c));
    return out;
}

std::vector<TrainResult> train_batch_parallel(const Scenario &scenario, std::span<const TrainConfig> configs) {
    std::vector<TrainResult> out(configs.size());
    parallel_for(configs.size(), [&](std::size_t i) { out[i] = train(scenario, configs[i]); });
    return out;
}

} // namespace bam
