#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bam/common.hpp"

namespace bam {

enum class TraceKind { Arrival, Grant, Denial, Preemption, Departure, Exhaustion, Reconfiguration };

std::string to_string(TraceKind kind);
std::optional<TraceKind> parse_trace_kind(const std::string &text);

/// One line of a trace: tab-separated, in this field order. Empty optional
/// fields are written as "-".
struct TraceRecord {
    Units time = 0;
    TraceKind kind = TraceKind::Arrival;
    std::string request_id;
    std::optional<ClassIndex> class_index;
    Units units = 0;
    std::string breakdown; // grant draws, or the reconfiguration action
    std::string victims;   // comma-separated request ids
    std::string usage;     // "<link>:<used per class>" after the event

    bool operator==(const TraceRecord &) const = default;
};

struct TraceLog {
    std::vector<TraceRecord> records;

    std::string to_text() const;
    bool operator==(const TraceLog &) const = default;
};

/// Throws ParseError on malformed lines.
TraceLog parse_trace(const std::string &text);

struct Divergence {
    std::size_t record = 0; // 0-based
    std::string field;
    std::string actual;
    std::string expected;

    std::string describe() const;
};

/// Record-by-record comparison; reports the first differing field.
std::optional<Divergence> verify_golden(const TraceLog &trace, const TraceLog &expected);

struct ClassMetrics {
    std::size_t arrivals = 0;
    Units offered = 0;
    Units granted = 0;
    std::size_t grants = 0;
    std::size_t denials = 0;
    double utilization_sum = 0;
    std::size_t utilization_samples = 0;

    double blocking_ratio() const { return arrivals ? static_cast<double>(denials) / static_cast<double>(arrivals) : 0.0; }
    double mean_utilization() const {
        return utilization_samples ? utilization_sum / static_cast<double>(utilization_samples) : 0.0;
    }
};

struct Metrics {
    std::vector<ClassMetrics> per_class;
    std::size_t preemptions = 0; // revoked grants
    std::size_t exhaustions = 0;
    std::size_t invocations = 0;

    ClassMetrics total() const;
    double blocking_ratio() const { return total().blocking_ratio(); }
    /// Share of arrivals decided without invoking the manager.
    double offload_ratio() const;
};

/// Header row shared by every metrics CSV.
std::string metrics_csv_header();
/// One "all" row followed by one row per class.
std::string metrics_csv_rows(const std::string &label, const Metrics &m, bool include_classes = true);

} // namespace bam
