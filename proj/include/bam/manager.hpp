#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "bam/engine.hpp"
#include "bam/scenario.hpp"

namespace bam {

/// What the exhaustion-triggered manager sees: per-class utilization buckets,
/// per-class "denied since the last invocation" flags and the denied class.
struct ManagerState {
    std::vector<int> buckets;
    std::vector<int> recent_denials;
    ClassIndex denied_class = 0;

    auto operator<=>(const ManagerState &) const = default;

    /// "4,4,2|0,1,0|2"
    std::string str() const;
    static ManagerState parse(const std::string &text);
};

/// floor(used / constraint * buckets), capped at buckets-1. A class with zero
/// constraint reports the top bucket.
int utilization_bucket(Units used, Units constraint, int buckets);

/// B^n * 2^n * n.
std::uint64_t state_space_size(std::size_t classes, int buckets);

/// No-op, or move `delta` constraint units from one class to another. Units
/// keep their partition: free public units of the donor are taken first, then
/// free private ones, and the recipient gains the same split.
struct ManagerAction {
    bool noop = true;
    ClassIndex from = 0;
    ClassIndex to = 0;
    Units delta = 0;

    auto operator<=>(const ManagerAction &) const = default;

    /// Position in the canonical order: no-op is 0, then transfers by (from, to).
    std::size_t ordinal(std::size_t classes) const;
    /// "noop" or "c1>c0:10"
    std::string str() const;
    static ManagerAction parse(const std::string &text);
    static ManagerAction transfer(ClassIndex from, ClassIndex to, Units delta) { return {false, from, to, delta}; }
};

ManagerState observe(const ExhaustionEvent &event, const std::vector<int> &recent_denials, int buckets);

/// No-op plus every transfer whose donor has at least `delta` unclaimed units,
/// in canonical order.
std::vector<ManagerAction> legal_actions(const std::vector<ClassSnapshot> &classes, Units delta);

/// Applies a legal action to the ledger's configuration; the sum of
/// constraints is preserved. Throws ConfigError when the action is illegal.
void apply_action(AllocationLedger &ledger, const ManagerAction &action);

struct QParams {
    double alpha = 0.1;
    double gamma = 0.9;
    double epsilon = 0.1;
};

/// Tabular action values; missing entries read as zero.
class QTable {
public:
    double value(const ManagerState &s, const ManagerAction &a) const;
    void set(const ManagerState &s, const ManagerAction &a, double v);
    double max_value(const ManagerState &s, const std::vector<ManagerAction> &legal) const;
    std::size_t size() const { return values_.size(); }
    const std::map<std::pair<ManagerState, ManagerAction>, double> &entries() const { return values_; }

    /// One line per non-zero entry, "<state> <action> <value>" with 9 decimals,
    /// sorted by (state, action ordinal).
    std::string to_text(std::size_t classes) const;
    static QTable parse(const std::string &text);

private:
    std::map<std::pair<ManagerState, ManagerAction>, double> values_;
};

/// Epsilon-greedy. Consumes one uniform draw for the exploration coin and, when
/// exploring, one more for the action index. Greedy ties go to the first
/// action in `legal`.
ManagerAction select_action(const QTable &q, const ManagerState &s, const std::vector<ManagerAction> &legal,
                            double epsilon, std::mt19937_64 &rng);

/// Q(s,a) += alpha * (reward + gamma * max_{a' in legal_next} Q(s',a') - Q(s,a)).
/// An empty legal_next marks a terminal transition.
void update(QTable &q, const ManagerState &s, const ManagerAction &a, double reward, const ManagerState &s_next,
            const std::vector<ManagerAction> &legal_next, const QParams &params);

/// Hook invoked by the simulator. on_exhaustion is only called for denials
/// with no admission path; on_decision sees every final admission outcome.
class Manager {
public:
    virtual ~Manager() = default;
    virtual std::string name() const = 0;
    virtual ManagerAction on_exhaustion(const ExhaustionEvent &event, const AllocationLedger &ledger) = 0;
    virtual void on_decision(ClassIndex /*class_index*/, bool /*granted*/) {}
    virtual void on_episode_end() {}
};

/// Keeps the configuration as loaded.
class StaticManager final : public Manager {
public:
    std::string name() const override { return "static"; }
    ManagerAction on_exhaustion(const ExhaustionEvent &, const AllocationLedger &) override { return {}; }
};

/// Tabular Q-learning manager. With learning off and epsilon 0 it is a pure
/// function of the observed state.
class QManager : public Manager {
public:
    QManager(QTable &table, const ManagerConfig &config, std::size_t classes, bool learning);

    std::string name() const override { return "rl"; }
    ManagerAction on_exhaustion(const ExhaustionEvent &event, const AllocationLedger &ledger) override;
    void on_decision(ClassIndex class_index, bool granted) override;
    void on_episode_end() override;

    void set_epsilon(double epsilon) { params_.epsilon = epsilon; }
    void set_learning(bool on) { learning_ = on; }
    const std::set<ManagerState> &visited() const { return visited_; }
    std::size_t invocations() const { return invocations_; }

private:
    double clipped(double reward) const;

    QTable &table_;
    QParams params_;
    Units delta_;
    int buckets_;
    double reward_clip_;
    bool learning_;
    std::mt19937_64 rng_;

    std::vector<int> recent_denials_;
    bool pending_ = false;
    ManagerState last_state_;
    ManagerAction last_action_;
    double reward_ = 0;
    std::set<ManagerState> visited_;
    std::size_t invocations_ = 0;
};

/// Uniform over legal actions. Runs the exploration path of QManager, so a
/// QManager at epsilon 1 with the same seed picks identical actions.
class RandomManager final : public Manager {
public:
    RandomManager(const ManagerConfig &config, std::size_t classes);

    std::string name() const override { return "random"; }
    ManagerAction on_exhaustion(const ExhaustionEvent &event, const AllocationLedger &ledger) override {
        return inner_.on_exhaustion(event, ledger);
    }
    void on_decision(ClassIndex class_index, bool granted) override { inner_.on_decision(class_index, granted); }
    void on_episode_end() override { inner_.on_episode_end(); }

private:
    QTable empty_;
    QManager inner_;
};

/// Frozen greedy evaluation of a trained table (epsilon 0, no learning).
class GreedyManager final : public Manager {
public:
    GreedyManager(QTable table, const ManagerConfig &config, std::size_t classes);

    std::string name() const override { return "rl"; }
    ManagerAction on_exhaustion(const ExhaustionEvent &event, const AllocationLedger &ledger) override {
        return inner_.on_exhaustion(event, ledger);
    }
    void on_decision(ClassIndex class_index, bool granted) override { inner_.on_decision(class_index, granted); }
    void on_episode_end() override { inner_.on_episode_end(); }
    const std::set<ManagerState> &visited() const { return inner_.visited(); }

private:
    QTable table_;
    QManager inner_;
};

} // namespace bam
