#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bufsim/trace.hpp"

namespace bufsim {

/// Drop-tail buffer capacity, in bytes or in packet slots.
struct BufferPolicy {
    enum class Kind : std::uint8_t { ByteLimited, PacketLimited };

    Kind kind = Kind::ByteLimited;
    std::uint64_t capacity = 1;

    static BufferPolicy bytes(std::uint64_t capacity);
    static BufferPolicy packets(std::uint64_t capacity);

    /// "byte:10000" / "pkt:27".
    std::string to_string() const;
    /// "byte" / "pkt".
    std::string_view kind_name() const noexcept;

    friend bool operator==(const BufferPolicy&, const BufferPolicy&) = default;
};

struct LinkConfig {
    std::uint64_t bandwidth_bps = 1;

    /// Transmission time of `size_bytes` on this link, in seconds.
    double service_time(std::uint32_t size_bytes) const noexcept
    {
        return 8.0 * static_cast<double>(size_bytes) / static_cast<double>(bandwidth_bps);
    }

    friend bool operator==(const LinkConfig&, const LinkConfig&) = default;
};

/// Event times closer than this are treated as simultaneous.
inline constexpr double kTimeTolerance = 1e-9;

enum class Disposition : std::uint8_t { Delivered, Dropped, InFlightAtEnd };

std::string_view to_string(Disposition d) noexcept;

struct PacketOutcome {
    PacketRecord record;
    Disposition disposition = Disposition::Dropped;
    std::optional<double> departure_s;

    double delay_s() const noexcept { return departure_s ? *departure_s - record.arrival_s : 0.0; }

    friend bool operator==(const PacketOutcome&, const PacketOutcome&) = default;
};

struct SimOptions {
    /// Transmit whatever is buffered when the input ends. When false those
    /// packets are reported InFlightAtEnd instead.
    bool drain = true;
};

struct SimResult {
    std::vector<PacketOutcome> outcomes;  // arrival order
    BufferPolicy policy;
    LinkConfig link;
    std::uint64_t max_occupancy_bytes = 0;
    std::uint64_t max_occupancy_packets = 0;
    /// Arrival time of the last input packet (0 for an empty trace).
    double end_of_input_s = 0.0;
};

/// Drop-tail admission test. The occupancy includes the packet in service.
constexpr bool admit(std::uint64_t occupancy_bytes, std::uint64_t occupancy_packets,
                     std::uint32_t size_bytes, const BufferPolicy& policy) noexcept
{
    if (policy.kind == BufferPolicy::Kind::ByteLimited) {
        return occupancy_bytes + size_bytes <= policy.capacity;
    }
    return occupancy_packets + 1 <= policy.capacity;
}

/// Event-driven simulation of one FIFO link with a drop-tail buffer.
///
/// A packet occupies the buffer from its arrival until its last bit leaves
/// the link. When a departure and an arrival coincide (within
/// kTimeTolerance) the departure is handled first. Throws ContractViolation
/// if `records` is not in replay order or the policy/link is degenerate.
SimResult simulate(std::span<const PacketRecord> records, const BufferPolicy& policy,
                   const LinkConfig& link, const SimOptions& options = {});
SimResult simulate(const Trace& trace, const BufferPolicy& policy, const LinkConfig& link,
                   const SimOptions& options = {});

/// Quadratic reference model. For each arrival it recomputes occupancy from
/// scratch as the admitted packets whose departure is strictly later, with
/// departures from the FIFO recurrence. Meant for cross-checking `simulate`
/// on traces of up to 1e5 packets.
SimResult oracle_simulate(std::span<const PacketRecord> records, const BufferPolicy& policy,
                          const LinkConfig& link, const SimOptions& options = {});
SimResult oracle_simulate(const Trace& trace, const BufferPolicy& policy, const LinkConfig& link,
                          const SimOptions& options = {});

inline constexpr std::size_t kOracleMaxPackets = 100000;

/// Per-packet CSV:
/// seq,stream_id,arrival_time,size_bytes,class,disposition,departure_time
void write_outcomes_csv(const SimResult& result, std::ostream& out);

}  // namespace bufsim
