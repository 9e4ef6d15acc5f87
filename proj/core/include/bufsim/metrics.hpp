#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bufsim/queue_sim.hpp"
#include "bufsim/trace.hpp"

namespace bufsim {

/// Half-open interval [start_s, end_s) on packet arrival time.
struct MeasurementWindow {
    double start_s = 0.0;
    double end_s = 0.0;

    bool contains(double t) const noexcept { return t >= start_s && t < end_s; }
    double length() const noexcept { return end_s - start_s; }

    friend bool operator==(const MeasurementWindow&, const MeasurementWindow&) = default;
};

/// Delay statistics over delivered packets; percentiles are nearest-rank.
struct DelayStats {
    double mean_s = 0.0;
    double p50_s = 0.0;
    double p95_s = 0.0;
    double p99_s = 0.0;
    double max_s = 0.0;

    friend bool operator==(const DelayStats&, const DelayStats&) = default;
};

struct ClassStats {
    /// Empty for the all-classes aggregate.
    std::optional<TrafficClass> cls;
    std::uint64_t offered_packets = 0;
    std::uint64_t offered_bytes = 0;
    std::uint64_t delivered_packets = 0;
    std::uint64_t dropped_packets = 0;
    std::uint64_t dropped_bytes = 0;
    /// Offered inside the window but still buffered when an undrained run ended.
    std::uint64_t in_flight_packets = 0;
    double loss_rate_packets = 0.0;
    double loss_rate_bytes = 0.0;
    /// Absent when nothing in the selection was delivered.
    std::optional<DelayStats> delay;

    std::string_view name() const noexcept { return cls ? to_string(*cls) : "all"; }

    friend bool operator==(const ClassStats&, const ClassStats&) = default;
};

struct RunSummary {
    std::array<ClassStats, 4> per_class;  // indexed by TrafficClass
    ClassStats all;
    double utilization = 0.0;
    MeasurementWindow window;
    BufferPolicy policy;
    LinkConfig link;

    const ClassStats& of(TrafficClass c) const noexcept
    {
        return per_class[static_cast<std::size_t>(c)];
    }

    friend bool operator==(const RunSummary&, const RunSummary&) = default;
};

/// Nearest-rank percentile of an ascending-sorted sample, `pct` in 1..100.
double nearest_rank(const std::vector<double>& sorted, unsigned pct);

/// Aggregates the packets whose arrival falls in `window`. Utilization is the
/// share of the window during which the link was transmitting.
/// Throws ContractViolation unless 0 <= start_s < end_s.
RunSummary summarize(const SimResult& result, const MeasurementWindow& window);

struct ClassComparison {
    std::optional<TrafficClass> cls;
    double loss_delta = 0.0;  // b - a
    double loss_ratio = 1.0;  // b / a; 1 when both are zero, +inf when only a is
    std::optional<double> delay_mean_delta_s;
    std::optional<double> delay_mean_ratio;
};

struct PolicyComparison {
    std::array<ClassComparison, 4> per_class;
    ClassComparison all;
};

/// Signed differences and ratios of `b` relative to `a`. Both summaries must
/// share window and link; otherwise ContractViolation.
PolicyComparison compare_policies(const RunSummary& a, const RunSummary& b);

/// Column names of one summary CSV row, without the run-identifying prefix.
const std::vector<std::string>& summary_csv_columns();
/// One row per class plus the "all" row, each prefixed by `prefix` (which
/// should end with a comma when non-empty).
void write_summary_rows(const RunSummary& summary, std::string_view prefix, std::ostream& out);

std::string summary_to_json(const RunSummary& summary);
/// Throws ParseError on malformed JSON or missing fields.
RunSummary summary_from_json(std::string_view json);

}  // namespace bufsim
