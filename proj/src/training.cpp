#include "bam/training.hpp"

namespace bam {

namespace {

std::size_t class_count(const Scenario &sc) {
    std::size_t n = 0;
    for (const auto &[link, classes] : sc.classes)
        n = std::max(n, classes.size());
    return n;
}

} // namespace

std::uint64_t episode_seed(std::uint64_t seed, std::size_t episode) {
    // splitmix64 finalizer
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (static_cast<std::uint64_t>(episode) + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

double epsilon_at(const TrainConfig &config, std::size_t episode) {
    if (!config.epsilon_final || config.episodes <= 1)
        return config.manager.epsilon;
    const double frac = static_cast<double>(episode) / static_cast<double>(config.episodes - 1);
    return config.manager.epsilon + (*config.epsilon_final - config.manager.epsilon) * frac;
}

TrainResult train(const Scenario &scenario, const TrainConfig &config) {
    if (config.episodes == 0)
        throw Error("training needs at least one episode");
    if (!scenario.workload)
        throw Error("training needs a scenario with a [workload] section");

    TrainResult result;
    auto mc = config.manager;
    mc.seed = config.seed;
    QManager agent(result.table, mc, class_count(scenario), true);
    result.curve.reserve(config.episodes);
    for (std::size_t ep = 0; ep < config.episodes; ++ep) {
        agent.set_epsilon(epsilon_at(config, ep));
        RunOptions opt;
        opt.seed = episode_seed(config.seed, ep);
        auto r = run(scenario, agent, opt);
        result.curve.push_back(r.metrics.blocking_ratio());
    }
    result.visited_states = agent.visited().size();
    result.invocations = agent.invocations();
    return result;
}

std::vector<double> evaluate_curve(const Scenario &scenario, Manager &manager, std::size_t episodes,
                                   std::uint64_t seed) {
    if (!scenario.workload)
        throw Error("evaluation needs a scenario with a [workload] section");
    std::vector<double> curve;
    curve.reserve(episodes);
    for (std::size_t ep = 0; ep < episodes; ++ep) {
        RunOptions opt;
        opt.seed = episode_seed(seed, ep);
        curve.push_back(run(scenario, manager, opt).metrics.blocking_ratio());
    }
    return curve;
}

std::optional<ManagerKind> parse_manager_kind(const std::string &text) {
    if (text == "static")
        return ManagerKind::Static;
    if (text == "random")
        return ManagerKind::Random;
    if (text == "rl")
        return ManagerKind::RL;
    return std::nullopt;
}

std::unique_ptr<Manager> make_manager(ManagerKind kind, const ManagerConfig &config, std::size_t classes,
                                      const QTable *table) {
    switch (kind) {
    case ManagerKind::Static: return std::make_unique<StaticManager>();
    case ManagerKind::Random: return std::make_unique<RandomManager>(config, classes);
    case ManagerKind::RL:
        if (!table)
            throw Error("rl manager needs a q-table");
        return std::make_unique<GreedyManager>(*table, config, classes);
    }
    return nullptr;
}

} // namespace bam
