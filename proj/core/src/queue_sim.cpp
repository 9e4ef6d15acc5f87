#include "bufsim/queue_sim.hpp"

#include <algorithm>
#include <deque>
#include <ostream>

#include "bufsim/errors.hpp"
#include "sim_checks.hpp"
#include "text.hpp"

namespace bufsim {

BufferPolicy BufferPolicy::bytes(std::uint64_t capacity)
{
    return BufferPolicy{Kind::ByteLimited, capacity};
}

BufferPolicy BufferPolicy::packets(std::uint64_t capacity)
{
    return BufferPolicy{Kind::PacketLimited, capacity};
}

std::string_view BufferPolicy::kind_name() const noexcept
{
    return kind == Kind::ByteLimited ? "byte" : "pkt";
}

std::string BufferPolicy::to_string() const
{
    return std::string(kind_name()) + ":" + std::to_string(capacity);
}

std::string_view to_string(Disposition d) noexcept
{
    switch (d) {
    case Disposition::Delivered:
        return "delivered";
    case Disposition::Dropped:
        return "dropped";
    case Disposition::InFlightAtEnd:
        return "in_flight";
    }
    return "dropped";
}

namespace detail {

void check_sim_inputs(std::span<const PacketRecord> records, const BufferPolicy& policy,
                      const LinkConfig& link)
{
    if (policy.capacity < 1) {
        throw ContractViolation("buffer capacity must be at least 1");
    }
    if (link.bandwidth_bps < 1) {
        throw ContractViolation("link bandwidth must be at least 1 bps");
    }
    for (std::size_t i = 1; i < records.size(); ++i) {
        if (replay_before(records[i], records[i - 1])) {
            throw ContractViolation("trace not in replay order at record " + std::to_string(i));
        }
    }
}

}  // namespace detail

SimResult simulate(std::span<const PacketRecord> records, const BufferPolicy& policy,
                   const LinkConfig& link, const SimOptions& options)
{
    detail::check_sim_inputs(records, policy, link);

    SimResult res;
    res.policy = policy;
    res.link = link;
    res.outcomes.resize(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        res.outcomes[i].record = records[i];
    }
    if (!records.empty()) {
        res.end_of_input_s = records.back().arrival_s;
    }

    std::deque<std::size_t> in_system;  // front is in service
    std::uint64_t occ_bytes = 0;
    std::uint64_t occ_packets = 0;
    std::optional<double> next_departure;
    double last_departure = 0.0;

    std::size_t next_arrival = 0;
    while (next_arrival < records.size() || next_departure) {
        const bool inputs_left = next_arrival < records.size();
        const bool departure_first =
            next_departure &&
            (!inputs_left || *next_departure <= records[next_arrival].arrival_s + kTimeTolerance);

        if (departure_first) {
            if (!inputs_left && !options.drain &&
                *next_departure > res.end_of_input_s + kTimeTolerance) {
                break;
            }
            const double now = *next_departure;
            const auto idx = in_system.front();
            in_system.pop_front();
            auto& out = res.outcomes[idx];
            out.disposition = Disposition::Delivered;
            out.departure_s = now;
            occ_bytes -= out.record.size_bytes;
            --occ_packets;
            last_departure = now;
            if (in_system.empty()) {
                next_departure.reset();
            } else {
                next_departure = now + link.service_time(records[in_system.front()].size_bytes);
            }
            continue;
        }

        const auto idx = next_arrival++;
        const auto& r = records[idx];
        if (!admit(occ_bytes, occ_packets, r.size_bytes, policy)) {
            res.outcomes[idx].disposition = Disposition::Dropped;
            continue;
        }
        in_system.push_back(idx);
        occ_bytes += r.size_bytes;
        ++occ_packets;
        res.max_occupancy_bytes = std::max(res.max_occupancy_bytes, occ_bytes);
        res.max_occupancy_packets = std::max(res.max_occupancy_packets, occ_packets);
        if (!next_departure) {
            // Idle server. The previous departure may trail this arrival by
            // less than the tie tolerance.
            next_departure = std::max(r.arrival_s, last_departure) + link.service_time(r.size_bytes);
        }
    }

    for (const auto idx : in_system) {
        res.outcomes[idx].disposition = Disposition::InFlightAtEnd;
    }
    return res;
}

SimResult simulate(const Trace& trace, const BufferPolicy& policy, const LinkConfig& link,
                   const SimOptions& options)
{
    return simulate(trace.records(), policy, link, options);
}

void write_outcomes_csv(const SimResult& result, std::ostream& out)
{
    out << "seq,stream_id,arrival_time,size_bytes,class,disposition,departure_time\n";
    for (const auto& o : result.outcomes) {
        const auto& r = o.record;
        out << r.seq << ',' << r.stream_id << ',' << text::fixed(r.arrival_s, 9) << ','
            << r.size_bytes << ',' << to_string(r.cls) << ',' << to_string(o.disposition) << ',';
        if (o.departure_s) {
            out << text::fixed(*o.departure_s, 9);
        }
        out << '\n';
    }
}

}  // namespace bufsim
