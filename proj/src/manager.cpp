#include "bam/manager.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>

namespace bam {

namespace {

std::string join(const std::vector<int> &v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i)
            out += ',';
        out += std::to_string(v[i]);
    }
    return out;
}

std::vector<int> parse_ints(const std::string &text) {
    std::vector<int> out;
    std::istringstream is(text);
    for (std::string tok; std::getline(is, tok, ',');) {
        char *end = nullptr;
        long v = std::strtol(tok.c_str(), &end, 10);
        if (tok.empty() || *end != '\0')
            throw Error("bad integer list '" + text + "'");
        out.push_back(static_cast<int>(v));
    }
    return out;
}

} // namespace

std::string ManagerState::str() const {
    return join(buckets) + "|" + join(recent_denials) + "|" + std::to_string(denied_class);
}

ManagerState ManagerState::parse(const std::string &text) {
    auto a = text.find('|');
    auto b = a == std::string::npos ? a : text.find('|', a + 1);
    if (b == std::string::npos)
        throw Error("bad manager state '" + text + "'");
    ManagerState s;
    s.buckets = parse_ints(text.substr(0, a));
    s.recent_denials = parse_ints(text.substr(a + 1, b - a - 1));
    auto k = parse_ints(text.substr(b + 1));
    if (k.size() != 1 || k[0] < 0 || s.buckets.size() != s.recent_denials.size())
        throw Error("bad manager state '" + text + "'");
    s.denied_class = static_cast<ClassIndex>(k[0]);
    return s;
}

int utilization_bucket(Units used, Units constraint, int buckets) {
    if (constraint <= 0)
        return buckets - 1;
    const auto b = static_cast<int>((used * buckets) / constraint);
    return std::clamp(b, 0, buckets - 1);
}

std::uint64_t state_space_size(std::size_t classes, int buckets) {
    std::uint64_t size = classes;
    for (std::size_t i = 0; i < classes; ++i)
        size *= static_cast<std::uint64_t>(buckets) * 2u;
    return size;
}

std::size_t ManagerAction::ordinal(std::size_t classes) const {
    if (noop)
        return 0;
    // Transfers (from, to) with from != to, row-major.
    return 1 + from * (classes - 1) + (to < from ? to : to - 1);
}

std::string ManagerAction::str() const {
    if (noop)
        return "noop";
    return "c" + std::to_string(from) + ">c" + std::to_string(to) + ":" + std::to_string(delta);
}

ManagerAction ManagerAction::parse(const std::string &text) {
    if (text == "noop")
        return {};
    unsigned long from = 0, to = 0;
    long long delta = 0;
    int consumed = 0;
    if (std::sscanf(text.c_str(), "c%lu>c%lu:%lld%n", &from, &to, &delta, &consumed) != 3 ||
        static_cast<std::size_t>(consumed) != text.size() || from == to || delta <= 0)
        throw Error("bad manager action '" + text + "'");
    return transfer(from, to, delta);
}

ManagerState observe(const ExhaustionEvent &event, const std::vector<int> &recent_denials, int buckets) {
    ManagerState s;
    for (const auto &c : event.classes)
        s.buckets.push_back(utilization_bucket(c.attributed_used, c.constraint, buckets));
    s.recent_denials = recent_denials;
    s.recent_denials.resize(event.classes.size(), 0);
    s.denied_class = event.request.class_index;
    return s;
}

std::vector<ManagerAction> legal_actions(const std::vector<ClassSnapshot> &classes, Units delta) {
    std::vector<ManagerAction> out{ManagerAction{}};
    for (ClassIndex from = 0; from < classes.size(); ++from) {
        if (classes[from].constraint - classes[from].attributed_used < delta)
            continue;
        for (ClassIndex to = 0; to < classes.size(); ++to)
            if (to != from)
                out.push_back(ManagerAction::transfer(from, to, delta));
    }
    return out;
}

void apply_action(AllocationLedger &ledger, const ManagerAction &action) {
    if (action.noop)
        return;
    const auto n = ledger.class_count();
    if (action.from >= n || action.to >= n || action.from == action.to || action.delta <= 0)
        throw ConfigError("illegal manager action " + action.str());
    if (ledger.free_total(action.from) < action.delta)
        throw ConfigError("donor class " + std::to_string(action.from) + " lacks " + std::to_string(action.delta) +
                          " free units");
    const auto take_public = std::min(action.delta, ledger.free_public(action.from));
    const auto take_private = action.delta - take_public;

    auto classes = ledger.classes();
    classes[action.from].constraint -= action.delta;
    classes[action.from].private_units -= take_private;
    classes[action.to].constraint += action.delta;
    classes[action.to].private_units += take_private;
    ledger.reconfigure(std::move(classes));
}

double QTable::value(const ManagerState &s, const ManagerAction &a) const {
    auto it = values_.find({s, a});
    return it == values_.end() ? 0.0 : it->second;
}

void QTable::set(const ManagerState &s, const ManagerAction &a, double v) { values_[{s, a}] = v; }

double QTable::max_value(const ManagerState &s, const std::vector<ManagerAction> &legal) const {
    if (legal.empty())
        return 0.0;
    double best = value(s, legal.front());
    for (const auto &a : legal)
        best = std::max(best, value(s, a));
    return best;
}

std::string QTable::to_text(std::size_t classes) const {
    std::vector<std::tuple<const ManagerState *, std::size_t, const ManagerAction *, double>> rows;
    for (const auto &[key, v] : values_)
        if (v != 0.0)
            rows.emplace_back(&key.first, key.second.ordinal(classes), &key.second, v);
    std::sort(rows.begin(), rows.end(), [](const auto &a, const auto &b) {
        if (*std::get<0>(a) != *std::get<0>(b))
            return *std::get<0>(a) < *std::get<0>(b);
        return std::get<1>(a) < std::get<1>(b);
    });
    std::string out;
    char buf[64];
    for (const auto &[s, ord, a, v] : rows) {
        std::snprintf(buf, sizeof buf, "%.9f", v);
        out += s->str() + " " + a->str() + " " + buf + "\n";
    }
    return out;
}

QTable QTable::parse(const std::string &text) {
    QTable q;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#')
            continue;
        std::istringstream ls(line);
        std::string state, action, value;
        if (!(ls >> state >> action >> value))
            throw Error("bad qtable line '" + line + "'");
        char *end = nullptr;
        double v = std::strtod(value.c_str(), &end);
        if (*end != '\0')
            throw Error("bad qtable value '" + value + "'");
        q.set(ManagerState::parse(state), ManagerAction::parse(action), v);
    }
    return q;
}

ManagerAction select_action(const QTable &q, const ManagerState &s, const std::vector<ManagerAction> &legal,
                            double epsilon, std::mt19937_64 &rng) {
    if (legal.empty())
        throw Error("select_action needs at least one legal action");
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    if (coin(rng) < epsilon) {
        std::uniform_int_distribution<std::size_t> pick(0, legal.size() - 1);
        return legal[pick(rng)];
    }
    const ManagerAction *best = &legal.front();
    double best_value = q.value(s, *best);
    for (const auto &a : legal) {
        const double v = q.value(s, a);
        if (v > best_value) {
            best = &a;
            best_value = v;
        }
    }
    return *best;
}

void update(QTable &q, const ManagerState &s, const ManagerAction &a, double reward, const ManagerState &s_next,
            const std::vector<ManagerAction> &legal_next, const QParams &params) {
    const double current = q.value(s, a);
    const double target = reward + params.gamma * q.max_value(s_next, legal_next);
    q.set(s, a, current + params.alpha * (target - current));
}

QManager::QManager(QTable &table, const ManagerConfig &config, std::size_t classes, bool learning)
    : table_(table), params_{config.alpha, config.gamma, config.epsilon}, delta_(config.delta),
      buckets_(config.buckets), reward_clip_(config.reward_clip), learning_(learning), rng_(config.seed),
      recent_denials_(classes, 0) {}

double QManager::clipped(double reward) const { return std::clamp(reward, -reward_clip_, reward_clip_); }

ManagerAction QManager::on_exhaustion(const ExhaustionEvent &event, const AllocationLedger &) {
    const auto state = observe(event, recent_denials_, buckets_);
    const auto legal = legal_actions(event.classes, delta_);
    if (learning_ && pending_)
        update(table_, last_state_, last_action_, clipped(reward_), state, legal, params_);
    const auto action = select_action(table_, state, legal, params_.epsilon, rng_);

    visited_.insert(state);
    ++invocations_;
    pending_ = true;
    last_state_ = state;
    last_action_ = action;
    reward_ = 0;
    std::fill(recent_denials_.begin(), recent_denials_.end(), 0);
    return action;
}

void QManager::on_decision(ClassIndex class_index, bool granted) {
    if (pending_)
        reward_ += granted ? 1.0 : -1.0;
    if (!granted && class_index < recent_denials_.size())
        recent_denials_[class_index] = 1;
}

void QManager::on_episode_end() {
    if (learning_ && pending_)
        update(table_, last_state_, last_action_, clipped(reward_), last_state_, {}, params_);
    pending_ = false;
    reward_ = 0;
    std::fill(recent_denials_.begin(), recent_denials_.end(), 0);
}

RandomManager::RandomManager(const ManagerConfig &config, std::size_t classes)
    : inner_(empty_, [&] {
          auto c = config;
          c.epsilon = 1.0;
          return c;
      }(), classes, false) {}

GreedyManager::GreedyManager(QTable table, const ManagerConfig &config, std::size_t classes)
    : table_(std::move(table)), inner_(table_, [&] {
          auto c = config;
          c.epsilon = 0.0;
          return c;
      }(), classes, false) {}

} // namespace bam
