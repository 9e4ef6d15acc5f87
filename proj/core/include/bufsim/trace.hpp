#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace bufsim {

enum class TrafficClass : std::uint8_t { Video, Control, Background, Other };

inline constexpr TrafficClass kAllTrafficClasses[] = {
    TrafficClass::Video, TrafficClass::Control, TrafficClass::Background, TrafficClass::Other};

std::string_view to_string(TrafficClass c) noexcept;
/// Accepts the lowercase names used in trace files ("video", "control", ...).
/// Throws std::invalid_argument on anything else.
TrafficClass traffic_class_from_string(std::string_view name);

using StreamId = std::uint32_t;

inline constexpr StreamId kForegroundStream = 0;
inline constexpr StreamId kBackgroundStream = 1;

struct PacketRecord {
    double arrival_s = 0.0;
    std::uint32_t size_bytes = 1;
    TrafficClass cls = TrafficClass::Other;
    StreamId stream_id = kForegroundStream;
    std::uint64_t seq = 0;

    friend bool operator==(const PacketRecord&, const PacketRecord&) = default;
};

inline constexpr std::uint32_t kMaxPacketBytes = 65535;

/// Replay order: arrival time, then stream id, then sequence number.
bool replay_before(const PacketRecord& a, const PacketRecord& b) noexcept;

/// Immutable, time-ordered packet sequence. The constructor checks every
/// record and the ordering invariants and throws ContractViolation if any
/// fails; use `Trace::from_unsorted` to sort first.
class Trace {
public:
    Trace() = default;
    Trace(std::vector<PacketRecord> records, std::string source, double duration_s);

    /// Sorts by replay order, then validates.
    static Trace from_unsorted(std::vector<PacketRecord> records, std::string source,
                               double duration_s);

    std::span<const PacketRecord> records() const noexcept { return records_; }
    std::size_t size() const noexcept { return records_.size(); }
    bool empty() const noexcept { return records_.empty(); }
    const std::string& source() const noexcept { return source_; }
    double duration_s() const noexcept { return duration_s_; }

    friend bool operator==(const Trace&, const Trace&) = default;

private:
    std::vector<PacketRecord> records_;
    std::string source_ = "synthetic";
    double duration_s_ = 0.0;
};

/// Size taxonomy: exact control and video sizes first, then a 200-byte split.
TrafficClass classify_packet(std::uint32_t size_bytes) noexcept;

inline constexpr std::uint32_t kControlSizes[] = {28, 42, 46, 52, 80};
inline constexpr std::uint32_t kVideoSizes[] = {377, 497, 617, 1081, 1201, 1320};
inline constexpr std::uint32_t kSmallPacketThreshold = 200;

/// Reads the trace CSV format. `source` is recorded as provenance.
/// Throws ParseError (with 1-based line) on malformed input or "empty trace".
Trace parse_trace(std::istream& in, std::string source = "stream");
Trace parse_trace_file(const std::string& path);

/// Writes all five columns; times with nine fractional digits.
void serialize_trace(const Trace& trace, std::ostream& out);
void write_trace_file(const Trace& trace, const std::string& path);

struct Histogram {
    std::uint32_t bin_width_bytes = 1;
    std::map<std::uint64_t, std::uint64_t> counts;
    std::uint64_t total = 0;

    /// Fraction of `total` whose bin index is in [first_bin, last_bin].
    double mass(std::uint64_t first_bin, std::uint64_t last_bin) const noexcept;
};

/// Bin index = size / width. Throws std::invalid_argument for width 0.
Histogram compute_histogram(const Trace& trace, std::uint32_t bin_width_bytes);

}  // namespace bufsim
