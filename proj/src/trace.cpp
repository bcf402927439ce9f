#include "bam/trace.hpp"

#include <charconv>
#include <cstdio>
#include <sstream>

#include "bam/scenario.hpp"

namespace bam {

std::string to_string(TraceKind kind) {
    switch (kind) {
    case TraceKind::Arrival: return "arrival";
    case TraceKind::Grant: return "grant";
    case TraceKind::Denial: return "denial";
    case TraceKind::Preemption: return "preemption";
    case TraceKind::Departure: return "departure";
    case TraceKind::Exhaustion: return "exhaustion";
    case TraceKind::Reconfiguration: return "reconfiguration";
    }
    return "?";
}

std::optional<TraceKind> parse_trace_kind(const std::string &text) {
    for (auto k : {TraceKind::Arrival, TraceKind::Grant, TraceKind::Denial, TraceKind::Preemption,
                   TraceKind::Departure, TraceKind::Exhaustion, TraceKind::Reconfiguration})
        if (to_string(k) == text)
            return k;
    return std::nullopt;
}

namespace {

const std::string &or_dash(const std::string &s) {
    static const std::string dash = "-";
    return s.empty() ? dash : s;
}

std::vector<std::string> fields_of(const TraceRecord &r) {
    return {std::to_string(r.time),
            to_string(r.kind),
            or_dash(r.request_id),
            r.class_index ? std::to_string(*r.class_index) : "-",
            std::to_string(r.units),
            or_dash(r.breakdown),
            or_dash(r.victims),
            or_dash(r.usage)};
}

const char *const kFieldNames[] = {"time", "kind", "request_id", "class", "units", "breakdown", "victims", "usage"};

template <typename T> bool parse_int(const std::string &s, T &out) {
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && ptr == s.data() + s.size();
}

} // namespace

std::string TraceLog::to_text() const {
    std::string out;
    for (const auto &r : records) {
        const auto f = fields_of(r);
        for (std::size_t i = 0; i < f.size(); ++i) {
            if (i)
                out += '\t';
            out += f[i];
        }
        out += '\n';
    }
    return out;
}

TraceLog parse_trace(const std::string &text) {
    TraceLog log;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty())
            continue;
        std::vector<std::string> f;
        std::string cur;
        for (char c : line) {
            if (c == '\t') {
                f.push_back(cur);
                cur.clear();
            } else {
                cur.push_back(c);
            }
        }
        f.push_back(cur);
        if (f.size() != 8)
            throw ParseError(lineno, "trace record needs 8 tab-separated fields");
        TraceRecord r;
        if (!parse_int(f[0], r.time))
            throw ParseError(lineno, "bad time");
        auto kind = parse_trace_kind(f[1]);
        if (!kind)
            throw ParseError(lineno, "bad record kind '" + f[1] + "'");
        r.kind = *kind;
        r.request_id = f[2] == "-" ? "" : f[2];
        if (f[3] != "-") {
            ClassIndex k = 0;
            if (!parse_int(f[3], k))
                throw ParseError(lineno, "bad class");
            r.class_index = k;
        }
        if (!parse_int(f[4], r.units))
            throw ParseError(lineno, "bad units");
        r.breakdown = f[5] == "-" ? "" : f[5];
        r.victims = f[6] == "-" ? "" : f[6];
        r.usage = f[7] == "-" ? "" : f[7];
        log.records.push_back(std::move(r));
    }
    return log;
}

std::string Divergence::describe() const {
    return "record " + std::to_string(record + 1) + ", field " + field + ": got '" + actual + "', expected '" +
           expected + "'";
}

std::optional<Divergence> verify_golden(const TraceLog &trace, const TraceLog &expected) {
    const auto n = std::min(trace.records.size(), expected.records.size());
    for (std::size_t i = 0; i < n; ++i) {
        const auto a = fields_of(trace.records[i]);
        const auto e = fields_of(expected.records[i]);
        for (std::size_t f = 0; f < a.size(); ++f)
            if (a[f] != e[f])
                return Divergence{i, kFieldNames[f], a[f], e[f]};
    }
    if (trace.records.size() != expected.records.size()) {
        const bool longer = trace.records.size() > expected.records.size();
        return Divergence{n, "record",
                          longer ? to_string(trace.records[n].kind) : "<end of trace>",
                          longer ? "<end of trace>" : to_string(expected.records[n].kind)};
    }
    return std::nullopt;
}

ClassMetrics Metrics::total() const {
    ClassMetrics t;
    for (const auto &c : per_class) {
        t.arrivals += c.arrivals;
        t.offered += c.offered;
        t.granted += c.granted;
        t.grants += c.grants;
        t.denials += c.denials;
        t.utilization_sum += c.utilization_sum;
        t.utilization_samples += c.utilization_samples;
    }
    return t;
}

double Metrics::offload_ratio() const {
    const auto arrivals = total().arrivals;
    if (arrivals == 0)
        return 0.0;
    return static_cast<double>(arrivals - invocations) / static_cast<double>(arrivals);
}

std::string metrics_csv_header() {
    return "label,scope,arrivals,offered,granted,grants,denials,blocking_ratio,mean_utilization,"
           "preemptions,exhaustions,invocations,offload_ratio\n";
}

namespace {

std::string row(const std::string &label, const std::string &scope, const ClassMetrics &c, std::size_t preemptions,
                std::size_t exhaustions, std::size_t invocations, double offload) {
    char buf[512];
    std::snprintf(buf, sizeof buf, "%s,%s,%zu,%lld,%lld,%zu,%zu,%.6f,%.6f,%zu,%zu,%zu,%.6f\n", label.c_str(),
                  scope.c_str(), c.arrivals, static_cast<long long>(c.offered), static_cast<long long>(c.granted),
                  c.grants, c.denials, c.blocking_ratio(), c.mean_utilization(), preemptions, exhaustions,
                  invocations, offload);
    return buf;
}

} // namespace

std::string metrics_csv_rows(const std::string &label, const Metrics &m, bool include_classes) {
    std::string out = row(label, "all", m.total(), m.preemptions, m.exhaustions, m.invocations, m.offload_ratio());
    if (include_classes)
        for (std::size_t k = 0; k < m.per_class.size(); ++k)
            out += row(label, "c" + std::to_string(k), m.per_class[k], 0, 0, 0, 0.0);
    return out;
}

} // namespace bam
