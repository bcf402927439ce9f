#include "bam/scenario.hpp"

#include <charconv>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

namespace bam {

namespace {

enum class Section { None, Network, Classes, Policy, Manager, Events, Workload };

std::vector<std::string> split_ws(const std::string &line) {
    std::istringstream is(line);
    std::vector<std::string> out;
    for (std::string tok; is >> tok;)
        out.push_back(tok);
    return out;
}

std::vector<std::string> split(const std::string &text, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : text) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

struct Parser {
    std::size_t line = 0;

    [[noreturn]] void fail(const std::string &msg) const { throw ParseError(line, msg); }

    Units integer(const std::string &text, const std::string &what) const {
        Units v = 0;
        auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
        if (ec != std::errc{} || ptr != text.data() + text.size())
            fail("expected integer for " + what + ", got '" + text + "'");
        return v;
    }

    double real(const std::string &text, const std::string &what) const {
        try {
            std::size_t used = 0;
            double v = std::stod(text, &used);
            if (used == text.size())
                return v;
        } catch (const std::exception &) {
        }
        fail("expected number for " + what + ", got '" + text + "'");
    }

    std::pair<Units, Units> range(const std::string &text, const std::string &what) const {
        auto pos = text.find("..");
        if (pos == std::string::npos) {
            auto v = integer(text, what);
            return {v, v};
        }
        auto lo = integer(text.substr(0, pos), what);
        auto hi = integer(text.substr(pos + 2), what);
        if (lo > hi)
            fail("empty range for " + what);
        return {lo, hi};
    }

    DirectedLink link(const std::string &text) const {
        auto pos = text.find('>');
        if (pos == std::string::npos || pos == 0 || pos + 1 == text.size())
            fail("expected link as 'a>b', got '" + text + "'");
        return {text.substr(0, pos), text.substr(pos + 1)};
    }

    std::map<std::string, std::string> keyvals(const std::vector<std::string> &toks, std::size_t from) const {
        std::map<std::string, std::string> kv;
        for (std::size_t i = from; i < toks.size(); ++i) {
            auto eq = toks[i].find('=');
            if (eq == std::string::npos || eq == 0)
                fail("expected key=value, got '" + toks[i] + "'");
            if (!kv.emplace(toks[i].substr(0, eq), toks[i].substr(eq + 1)).second)
                fail("repeated key '" + toks[i].substr(0, eq) + "'");
        }
        return kv;
    }

    std::string take(std::map<std::string, std::string> &kv, const std::string &key) const {
        auto it = kv.find(key);
        if (it == kv.end())
            fail("missing '" + key + "'");
        auto v = it->second;
        kv.erase(it);
        return v;
    }

    void no_leftovers(const std::map<std::string, std::string> &kv) const {
        if (!kv.empty())
            fail("unknown key '" + kv.begin()->first + "'");
    }
};

struct ClassLine {
    ResourceClassConfig config;
    std::optional<DirectedLink> link;
    std::size_t line = 0;
};

} // namespace

const std::vector<ResourceClassConfig> &Scenario::classes_for(const DirectedLink &link) const {
    auto it = classes.find(link);
    if (it == classes.end())
        throw TopologyError(TopologyError::Kind::UnknownLink, "unknown link " + link.str());
    return it->second;
}

std::string read_text_file(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error("cannot open '" + path + "'");
    std::ostringstream os;
    os << in.rdbuf();
    if (in.bad())
        throw Error("cannot read '" + path + "'");
    return os.str();
}

Scenario load_scenario(const std::string &source) {
    Parser p;
    Scenario sc;
    Section section = Section::None;

    std::vector<NodeId> nodes;
    std::vector<LinkSpec> links;
    std::vector<ClassLine> class_lines;
    std::vector<std::pair<std::size_t, WorkloadPhase>> phases;
    bool have_policy = false;

    std::istringstream in(source);
    std::string raw;
    while (std::getline(in, raw)) {
        ++p.line;
        if (auto hash = raw.find('#'); hash != std::string::npos)
            raw.erase(hash);
        auto toks = split_ws(raw);
        if (toks.empty())
            continue;

        if (toks[0].front() == '[') {
            if (toks.size() != 1)
                p.fail("section header must stand alone");
            const auto &h = toks[0];
            if (h == "[network]")
                section = Section::Network;
            else if (h == "[classes]")
                section = Section::Classes;
            else if (h == "[policy]")
                section = Section::Policy;
            else if (h == "[manager]")
                section = Section::Manager;
            else if (h == "[events]")
                section = Section::Events;
            else if (h == "[workload]")
                section = Section::Workload;
            else
                p.fail("unknown section " + h);
            continue;
        }

        switch (section) {
        case Section::None:
            p.fail("content before the first section header");

        case Section::Network:
            if (toks[0] == "node") {
                if (toks.size() != 2)
                    p.fail("expected 'node <id>'");
                nodes.push_back(toks[1]);
            } else if (toks[0] == "link") {
                if (toks.size() != 4 && toks.size() != 5)
                    p.fail("expected 'link <a> <b> <capacity> [<reverse capacity>]'");
                LinkSpec l{toks[1], toks[2], p.integer(toks[3], "capacity"), 0};
                l.capacity_reverse = toks.size() == 5 ? p.integer(toks[4], "reverse capacity") : l.capacity_forward;
                links.push_back(l);
            } else {
                p.fail("unknown network statement '" + toks[0] + "'");
            }
            break;

        case Section::Classes: {
            if (toks[0] != "class" || toks.size() < 2)
                p.fail("expected 'class <k> priority <p> constraint <c> private <u> [link=a>b]'");
            ClassLine cl;
            cl.line = p.line;
            cl.config.class_index = static_cast<ClassIndex>(p.integer(toks[1], "class index"));
            cl.config.priority_rank = static_cast<int>(cl.config.class_index);
            bool have_constraint = false;
            for (std::size_t i = 2; i < toks.size(); ++i) {
                if (toks[i].rfind("link=", 0) == 0) {
                    cl.link = p.link(toks[i].substr(5));
                    continue;
                }
                if (i + 1 >= toks.size())
                    p.fail("missing value after '" + toks[i] + "'");
                const auto v = p.integer(toks[i + 1], toks[i]);
                if (toks[i] == "priority")
                    cl.config.priority_rank = static_cast<int>(v);
                else if (toks[i] == "constraint")
                    cl.config.constraint = v, have_constraint = true;
                else if (toks[i] == "private")
                    cl.config.private_units = v;
                else
                    p.fail("unknown class attribute '" + toks[i] + "'");
                ++i;
            }
            if (!have_constraint)
                p.fail("class without constraint");
            class_lines.push_back(cl);
            break;
        }

        case Section::Policy: {
            if (have_policy)
                p.fail("policy declared twice");
            auto kind = parse_policy_kind(toks[0]);
            if (!kind)
                p.fail("unknown policy '" + toks[0] + "'");
            sc.policy.kind = *kind;
            auto kv = p.keyvals(toks, 1);
            if (kv.count("preemption")) {
                auto v = p.take(kv, "preemption");
                if (v != "on" && v != "off")
                    p.fail("preemption must be on or off");
                sc.policy.preemption = v == "on";
            }
            p.no_leftovers(kv);
            have_policy = true;
            break;
        }

        case Section::Manager: {
            auto kv = p.keyvals(toks, 0);
            auto &m = sc.manager;
            if (kv.count("alpha"))
                m.alpha = p.real(p.take(kv, "alpha"), "alpha");
            if (kv.count("gamma"))
                m.gamma = p.real(p.take(kv, "gamma"), "gamma");
            if (kv.count("epsilon"))
                m.epsilon = p.real(p.take(kv, "epsilon"), "epsilon");
            if (kv.count("delta"))
                m.delta = p.integer(p.take(kv, "delta"), "delta");
            if (kv.count("buckets"))
                m.buckets = static_cast<int>(p.integer(p.take(kv, "buckets"), "buckets"));
            if (kv.count("seed"))
                m.seed = static_cast<std::uint64_t>(p.integer(p.take(kv, "seed"), "seed"));
            if (kv.count("reward_clip"))
                m.reward_clip = p.real(p.take(kv, "reward_clip"), "reward_clip");
            p.no_leftovers(kv);
            break;
        }

        case Section::Events: {
            if (toks.size() < 2 || toks[0].rfind("t=", 0) != 0)
                p.fail("expected 't=<time> arrive|depart ...'");
            EventSpec ev;
            ev.line = p.line;
            ev.time = p.integer(toks[0].substr(2), "time");
            auto kv = p.keyvals(toks, 2);
            if (toks[1] == "arrive") {
                ev.kind = EventSpec::Kind::Arrive;
                ev.request.id = p.take(kv, "id");
                ev.request.class_index = static_cast<ClassIndex>(p.integer(p.take(kv, "class"), "class"));
                ev.request.demand = p.integer(p.take(kv, "demand"), "demand");
                ev.request.link = p.link(p.take(kv, "link"));
                if (kv.count("hold"))
                    ev.request.hold = p.integer(p.take(kv, "hold"), "hold");
            } else if (toks[1] == "depart") {
                ev.kind = EventSpec::Kind::Depart;
                ev.request.id = p.take(kv, "id");
            } else {
                p.fail("unknown event '" + toks[1] + "'");
            }
            p.no_leftovers(kv);
            sc.events.push_back(ev);
            break;
        }

        case Section::Workload: {
            if (toks[0] == "phase") {
                auto kv = p.keyvals(toks, 1);
                WorkloadPhase ph;
                ph.share = kv.count("share") ? p.real(p.take(kv, "share"), "share") : 1.0;
                for (const auto &r : split(p.take(kv, "rates"), ','))
                    ph.rates.push_back(p.real(r, "rate"));
                p.no_leftovers(kv);
                phases.emplace_back(p.line, ph);
                break;
            }
            if (!sc.workload)
                sc.workload.emplace();
            auto &w = *sc.workload;
            auto kv = p.keyvals(toks, 0);
            if (kv.count("seed"))
                w.seed = static_cast<std::uint64_t>(p.integer(p.take(kv, "seed"), "seed"));
            if (kv.count("arrivals"))
                w.arrivals = static_cast<std::size_t>(p.integer(p.take(kv, "arrivals"), "arrivals"));
            if (kv.count("link"))
                w.link = p.link(p.take(kv, "link"));
            if (kv.count("gap"))
                std::tie(w.gap_min, w.gap_max) = p.range(p.take(kv, "gap"), "gap");
            if (kv.count("demand"))
                std::tie(w.demand_min, w.demand_max) = p.range(p.take(kv, "demand"), "demand");
            if (kv.count("hold"))
                std::tie(w.hold_min, w.hold_max) = p.range(p.take(kv, "hold"), "hold");
            p.no_leftovers(kv);
            break;
        }
        }
    }

    // Semantic checks. Errors from here on cite the offending line when known.
    try {
        sc.network = build_network(nodes, links);
    } catch (const TopologyError &e) {
        throw SemanticError(0, e.what());
    }

    std::vector<ResourceClassConfig> defaults;
    std::map<DirectedLink, std::vector<ResourceClassConfig>> per_link;
    for (const auto &cl : class_lines) {
        if (cl.link) {
            if (!sc.network.has_link(*cl.link))
                throw SemanticError(cl.line, "unknown link " + cl.link->str());
            per_link[*cl.link].push_back(cl.config);
        } else {
            defaults.push_back(cl.config);
        }
    }
    for (const auto &link : sc.network.directed_links()) {
        auto it = per_link.find(link);
        auto cfg = it != per_link.end() ? it->second : defaults;
        try {
            validate_classes(cfg);
        } catch (const ConfigError &e) {
            throw SemanticError(0, "link " + link.str() + ": " + e.what());
        }
        auto check = validate_capacity(sc.network, link, constraints_of(cfg));
        if (!check.ok)
            throw SemanticError(0, "link " + link.str() + ": class constraints total " +
                                       std::to_string(check.demanded) + " exceed link capacity " +
                                       std::to_string(check.capacity) + " by " + std::to_string(check.deficit));
        sc.classes.emplace(link, std::move(cfg));
    }

    if (sc.workload && !sc.events.empty())
        throw SemanticError(0, "a scenario declares either [events] or [workload], not both");

    Units last_time = 0;
    std::set<std::string> arrived;
    for (const auto &ev : sc.events) {
        if (ev.time < 0 || ev.time < last_time)
            throw SemanticError(ev.line, "event times must be non-negative and non-decreasing");
        last_time = ev.time;
        if (ev.kind == EventSpec::Kind::Depart) {
            if (!arrived.count(ev.request.id))
                throw SemanticError(ev.line, "departure of '" + ev.request.id + "' before its arrival");
            continue;
        }
        const auto &r = ev.request;
        if (!arrived.insert(r.id).second)
            throw SemanticError(ev.line, "duplicate request id '" + r.id + "'");
        if (!sc.network.has_link(r.link))
            throw SemanticError(ev.line, "unknown link " + r.link.str());
        if (r.class_index >= sc.classes_for(r.link).size())
            throw SemanticError(ev.line, "unknown class " + std::to_string(r.class_index) + " on link " + r.link.str());
        if (r.demand <= 0)
            throw SemanticError(ev.line, "demand must be positive");
        if (r.hold && *r.hold < 0)
            throw SemanticError(ev.line, "hold must be non-negative");
    }

    if (!phases.empty() && !sc.workload)
        throw SemanticError(phases.front().first, "phase outside a workload declaration");
    if (sc.workload) {
        auto &w = *sc.workload;
        if (!sc.network.has_link(w.link))
            throw SemanticError(0, "workload link " + w.link.str() + " is not in the network");
        if (w.gap_min < 0 || w.demand_min <= 0 || w.hold_min < 0)
            throw SemanticError(0, "workload gaps and holds must be >= 0 and demands > 0");
        const auto n = sc.classes_for(w.link).size();
        for (auto &[line, ph] : phases) {
            if (ph.rates.size() != n)
                throw SemanticError(line, "phase needs one rate per class (" + std::to_string(n) + ")");
            double sum = 0;
            for (double r : ph.rates) {
                if (r < 0)
                    throw SemanticError(line, "negative rate");
                sum += r;
            }
            if (sum <= 0 || ph.share <= 0)
                throw SemanticError(line, "phase needs a positive share and at least one positive rate");
            w.phases.push_back(ph);
        }
        if (w.phases.empty())
            w.phases.push_back(WorkloadPhase{1.0, std::vector<double>(n, 1.0)});
    }

    const auto &m = sc.manager;
    if (!(m.alpha > 0 && m.alpha <= 1) || !(m.gamma >= 0 && m.gamma < 1) || !(m.epsilon >= 0 && m.epsilon <= 1) ||
        m.delta <= 0 || m.buckets < 1 || m.reward_clip <= 0)
        throw SemanticError(0, "manager parameters out of range");

    return sc;
}

std::vector<EventSpec> generate_events(const WorkloadSpec &spec, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<Units> gap(spec.gap_min, spec.gap_max);
    std::uniform_int_distribution<Units> demand(spec.demand_min, spec.demand_max);
    std::uniform_int_distribution<Units> hold(spec.hold_min, spec.hold_max);

    double total_share = 0;
    for (const auto &ph : spec.phases)
        total_share += ph.share;
    std::vector<std::discrete_distribution<std::size_t>> mix;
    std::vector<double> phase_end;
    double acc = 0;
    for (const auto &ph : spec.phases) {
        mix.emplace_back(ph.rates.begin(), ph.rates.end());
        acc += ph.share / total_share;
        phase_end.push_back(acc);
    }

    std::vector<EventSpec> events;
    events.reserve(spec.arrivals);
    Units now = 0;
    std::size_t phase = 0;
    for (std::size_t i = 0; i < spec.arrivals; ++i) {
        const double position = (static_cast<double>(i) + 0.5) / static_cast<double>(spec.arrivals);
        while (phase + 1 < phase_end.size() && position > phase_end[phase])
            ++phase;
        now += gap(rng);
        EventSpec ev;
        ev.time = now;
        ev.kind = EventSpec::Kind::Arrive;
        ev.request.id = "g" + std::to_string(i + 1);
        ev.request.class_index = mix[phase](rng);
        ev.request.demand = demand(rng);
        ev.request.link = spec.link;
        ev.request.hold = hold(rng);
        events.push_back(std::move(ev));
    }
    return events;
}

} // namespace bam
