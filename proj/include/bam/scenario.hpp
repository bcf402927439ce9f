#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bam/engine.hpp"
#include "bam/topology.hpp"

namespace bam {

class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string &message)
        : Error("line " + std::to_string(line) + ": " + message), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

class SemanticError : public Error {
public:
    SemanticError(std::size_t line, const std::string &message)
        : Error(line ? "line " + std::to_string(line) + ": " + message : message), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

struct EventSpec {
    enum class Kind { Arrive, Depart };

    Units time = 0;
    Kind kind = Kind::Arrive;
    Request request; // for departures only request.id is meaningful
    std::size_t line = 0;
};

struct WorkloadPhase {
    double share = 1.0;
    std::vector<double> rates; // relative per-class arrival rates
};

/// Seeded random arrivals: uniform inter-arrival gaps, demands and hold
/// times; the class mix follows the phase active at each arrival.
struct WorkloadSpec {
    std::uint64_t seed = 1;
    std::size_t arrivals = 0;
    DirectedLink link;
    Units gap_min = 1, gap_max = 1;
    Units demand_min = 1, demand_max = 1;
    Units hold_min = 1, hold_max = 1;
    std::vector<WorkloadPhase> phases;
};

struct ManagerConfig {
    double alpha = 0.1;
    double gamma = 0.9;
    double epsilon = 0.1;
    Units delta = 10;
    int buckets = 5;
    std::uint64_t seed = 1;
    /// Rewards are clipped to [-reward_clip, reward_clip].
    double reward_clip = 50.0;
};

struct Scenario {
    NetworkGraph network;
    std::map<DirectedLink, std::vector<ResourceClassConfig>> classes;
    Policy policy;
    std::vector<EventSpec> events;
    std::optional<WorkloadSpec> workload;
    ManagerConfig manager;

    const std::vector<ResourceClassConfig> &classes_for(const DirectedLink &link) const;
};

/// Parses the line-oriented scenario format and runs every semantic check.
/// Throws ParseError or SemanticError.
Scenario load_scenario(const std::string &source);
/// Throws Error when the file cannot be read.
std::string read_text_file(const std::string &path);

/// Expands a workload spec into arrival events (hold times set, departures are
/// scheduled by the simulator). Deterministic for a given seed.
std::vector<EventSpec> generate_events(const WorkloadSpec &spec, std::uint64_t seed);

} // namespace bam
