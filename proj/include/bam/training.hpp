#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "bam/manager.hpp"
#include "bam/simulator.hpp"

namespace bam {

struct TrainConfig {
    ManagerConfig manager;
    std::size_t episodes = 1;
    std::uint64_t seed = 1;
    /// When set, epsilon decays linearly from manager.epsilon to this value
    /// over the episodes; otherwise it stays constant.
    std::optional<double> epsilon_final;
};

struct TrainResult {
    QTable table;
    /// Blocking ratio of each episode.
    std::vector<double> curve;
    std::size_t visited_states = 0;
    std::size_t invocations = 0;
};

/// Workload seed for one episode; the same schedule is used for training and
/// for baseline evaluation so curves are comparable episode by episode.
std::uint64_t episode_seed(std::uint64_t seed, std::size_t episode);

double epsilon_at(const TrainConfig &config, std::size_t episode);

/// Runs `episodes` simulations of a generator scenario with a learning
/// QManager. Deterministic for a fixed config. Throws Error if episodes == 0
/// or the scenario has no workload.
TrainResult train(const Scenario &scenario, const TrainConfig &config);

/// Per-episode blocking ratios of a fixed manager over the same seed schedule.
std::vector<double> evaluate_curve(const Scenario &scenario, Manager &manager, std::size_t episodes,
                                   std::uint64_t seed);

enum class ManagerKind { Static, Random, RL };

std::optional<ManagerKind> parse_manager_kind(const std::string &text);

/// RL managers built here evaluate a copy of `table` greedily, without learning.
std::unique_ptr<Manager> make_manager(ManagerKind kind, const ManagerConfig &config, std::size_t classes,
                                      const QTable *table);

} // namespace bam
