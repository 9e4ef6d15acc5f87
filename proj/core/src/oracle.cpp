#include <algorithm>

#include "bufsim/errors.hpp"
#include "bufsim/queue_sim.hpp"
#include "sim_checks.hpp"

namespace bufsim {

SimResult oracle_simulate(std::span<const PacketRecord> records, const BufferPolicy& policy,
                          const LinkConfig& link, const SimOptions& options)
{
    detail::check_sim_inputs(records, policy, link);
    if (records.size() > kOracleMaxPackets) {
        throw ContractViolation("oracle_simulate is limited to 100000 packets");
    }

    const auto n = records.size();
    std::vector<bool> admitted(n, false);
    std::vector<double> departure(n, 0.0);

    SimResult res;
    res.policy = policy;
    res.link = link;
    res.outcomes.resize(n);
    if (n > 0) {
        res.end_of_input_s = records.back().arrival_s;
    }

    double prev_departure = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& r = records[i];
        std::uint64_t bytes = 0;
        std::uint64_t packets = 0;
        for (std::size_t j = 0; j < i; ++j) {
            if (admitted[j] && departure[j] > r.arrival_s + kTimeTolerance) {
                bytes += records[j].size_bytes;
                ++packets;
            }
        }
        res.outcomes[i].record = r;
        if (!admit(bytes, packets, r.size_bytes, policy)) {
            res.outcomes[i].disposition = Disposition::Dropped;
            continue;
        }
        admitted[i] = true;
        departure[i] = std::max(r.arrival_s, prev_departure) + link.service_time(r.size_bytes);
        prev_departure = departure[i];
        res.max_occupancy_bytes = std::max(res.max_occupancy_bytes, bytes + r.size_bytes);
        res.max_occupancy_packets = std::max(res.max_occupancy_packets, packets + 1);
    }

    for (std::size_t i = 0; i < n; ++i) {
        if (!admitted[i]) {
            continue;
        }
        auto& out = res.outcomes[i];
        if (!options.drain && departure[i] > res.end_of_input_s + kTimeTolerance) {
            out.disposition = Disposition::InFlightAtEnd;
        } else {
            out.disposition = Disposition::Delivered;
            out.departure_s = departure[i];
        }
    }
    return res;
}

SimResult oracle_simulate(const Trace& trace, const BufferPolicy& policy, const LinkConfig& link,
                          const SimOptions& options)
{
    return oracle_simulate(trace.records(), policy, link, options);
}

}  // namespace bufsim
