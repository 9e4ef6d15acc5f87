#include <gtest/gtest.h>

#include <sstream>

#include "bufsim/errors.hpp"
#include "bufsim/queue_sim.hpp"
#include "bufsim/synth.hpp"
#include "random_traces.hpp"
#include "sim_invariants.hpp"

namespace bufsim {
namespace {

PacketRecord pkt(double t, std::uint32_t size, std::uint64_t seq, StreamId stream = 0)
{
    return {t, size, classify_packet(size), stream, seq};
}

void expect_same(const SimResult& a, const SimResult& b)
{
    ASSERT_EQ(a.outcomes.size(), b.outcomes.size());
    for (std::size_t i = 0; i < a.outcomes.size(); ++i) {
        const auto& x = a.outcomes[i];
        const auto& y = b.outcomes[i];
        ASSERT_EQ(x.disposition, y.disposition) << "packet " << i;
        ASSERT_EQ(x.departure_s.has_value(), y.departure_s.has_value()) << "packet " << i;
        if (x.departure_s) {
            ASSERT_NEAR(*x.departure_s, *y.departure_s, kTimeTolerance) << "packet " << i;
        }
    }
    EXPECT_EQ(a.max_occupancy_bytes, b.max_occupancy_bytes);
    EXPECT_EQ(a.max_occupancy_packets, b.max_occupancy_packets);
}

TEST(Admit, Examples)
{
    const auto b10k = BufferPolicy::bytes(10000);
    EXPECT_FALSE(admit(9000, 5, 1320, b10k));
    EXPECT_TRUE(admit(9000, 5, 52, b10k));
    EXPECT_TRUE(admit(8680, 5, 1320, b10k));
    const auto p27 = BufferPolicy::packets(27);
    EXPECT_TRUE(admit(0, 26, 65535, p27));
    EXPECT_FALSE(admit(0, 27, 1, p27));
    static_assert(admit(0, 0, 1, BufferPolicy{BufferPolicy::Kind::PacketLimited, 1}));
}

TEST(Policy, Names)
{
    EXPECT_EQ(BufferPolicy::bytes(10000).to_string(), "byte:10000");
    EXPECT_EQ(BufferPolicy::packets(27).to_string(), "pkt:27");
    EXPECT_EQ(BufferPolicy::packets(27).kind_name(), "pkt");
}

TEST(Simulate, SinglePacketServiceTime)
{
    const std::vector<PacketRecord> in{pkt(0.0, 1320, 0)};
    const auto r = simulate(in, BufferPolicy::bytes(10000), LinkConfig{512000});
    ASSERT_EQ(r.outcomes.size(), 1u);
    EXPECT_EQ(r.outcomes[0].disposition, Disposition::Delivered);
    EXPECT_NEAR(r.outcomes[0].delay_s(), 0.020625, 1e-15);
}

TEST(Simulate, FullBufferDropsSecond)
{
    const std::vector<PacketRecord> in{pkt(0.0, 1500, 0), pkt(0.0, 1500, 1)};
    const auto r = simulate(in, BufferPolicy::packets(1), LinkConfig{1000000});
    EXPECT_EQ(r.outcomes[0].disposition, Disposition::Delivered);
    EXPECT_EQ(r.outcomes[1].disposition, Disposition::Dropped);
    EXPECT_FALSE(r.outcomes[1].departure_s.has_value());
}

TEST(Simulate, HandScenario)
{
    const std::vector<PacketRecord> in{pkt(0.0, 1000, 0), pkt(0.001, 1000, 1),
                                       pkt(0.002, 1000, 2)};
    const auto policy = BufferPolicy::bytes(2000);
    const LinkConfig link{1000000};
    const auto r = simulate(in, policy, link);
    EXPECT_EQ(r.outcomes[0].disposition, Disposition::Delivered);
    EXPECT_EQ(r.outcomes[1].disposition, Disposition::Delivered);
    EXPECT_EQ(r.outcomes[2].disposition, Disposition::Dropped);
    EXPECT_NEAR(r.outcomes[0].delay_s(), 0.008, 1e-12);
    EXPECT_NEAR(r.outcomes[1].delay_s(), 0.015, 1e-12);
    EXPECT_EQ(r.max_occupancy_bytes, 2000u);
    EXPECT_EQ(r.max_occupancy_packets, 2u);
    EXPECT_DOUBLE_EQ(r.end_of_input_s, 0.002);
    expect_same(r, oracle_simulate(in, policy, link));
}

TEST(Simulate, DepartureBeforeArrivalAtSameInstant)
{
    // Packet 1 leaves at exactly 8 ms, when packet 3 arrives.
    const std::vector<PacketRecord> in{pkt(0.0, 1000, 0), pkt(0.001, 1000, 1),
                                       pkt(0.008, 1000, 2)};
    const auto r = simulate(in, BufferPolicy::bytes(2000), LinkConfig{1000000});
    EXPECT_EQ(r.outcomes[2].disposition, Disposition::Delivered);
    EXPECT_NEAR(*r.outcomes[2].departure_s, 0.024, 1e-12);
    // Same with the arrival a hair early, inside the tolerance.
    auto shifted = in;
    shifted[2].arrival_s = 0.008 - 0.5e-9;
    EXPECT_EQ(simulate(shifted, BufferPolicy::bytes(2000), LinkConfig{1000000})
                  .outcomes[2]
                  .disposition,
              Disposition::Delivered);
    shifted[2].arrival_s = 0.008 - 1e-6;
    EXPECT_EQ(simulate(shifted, BufferPolicy::bytes(2000), LinkConfig{1000000})
                  .outcomes[2]
                  .disposition,
              Disposition::Dropped);
}

TEST(Simulate, RejectsBadInput)
{
    const std::vector<PacketRecord> unsorted{pkt(0.5, 100, 0), pkt(0.1, 100, 1)};
    EXPECT_THROW(simulate(unsorted, BufferPolicy::bytes(1000), LinkConfig{1000}),
                 ContractViolation);
    const std::vector<PacketRecord> ok{pkt(0.0, 100, 0)};
    EXPECT_THROW(simulate(ok, BufferPolicy::bytes(0), LinkConfig{1000}), ContractViolation);
    EXPECT_THROW(simulate(ok, BufferPolicy::packets(0), LinkConfig{1000}), ContractViolation);
    EXPECT_THROW(simulate(ok, BufferPolicy::bytes(10), LinkConfig{0}), ContractViolation);
}

TEST(Simulate, EmptyInput)
{
    const std::vector<PacketRecord> none;
    for (const auto& r : {simulate(none, BufferPolicy::bytes(10), LinkConfig{1000}),
                          oracle_simulate(none, BufferPolicy::bytes(10), LinkConfig{1000})}) {
        EXPECT_TRUE(r.outcomes.empty());
        EXPECT_EQ(r.max_occupancy_bytes, 0u);
        EXPECT_EQ(r.end_of_input_s, 0.0);
    }
}

TEST(Simulate, NoDrainReportsInFlight)
{
    const std::vector<PacketRecord> in{pkt(0.0, 1000, 0), pkt(0.001, 1000, 1),
                                       pkt(0.002, 1000, 2), pkt(0.008, 52, 3)};
    const SimOptions no_drain{false};
    const auto r = simulate(in, BufferPolicy::bytes(2100), LinkConfig{1000000}, no_drain);
    // At t=0.008 packet 0 is complete; packets 1 and 3 are still buffered.
    EXPECT_EQ(r.outcomes[0].disposition, Disposition::Delivered);
    EXPECT_EQ(r.outcomes[1].disposition, Disposition::InFlightAtEnd);
    EXPECT_EQ(r.outcomes[2].disposition, Disposition::Dropped);
    EXPECT_EQ(r.outcomes[3].disposition, Disposition::InFlightAtEnd);
    EXPECT_TRUE(testing::check_invariants(r, in).empty());
    expect_same(r, oracle_simulate(in, BufferPolicy::bytes(2100), LinkConfig{1000000}, no_drain));
}

TEST(Simulate, OutcomesCsv)
{
    const std::vector<PacketRecord> in{pkt(0.0, 1000, 0), pkt(0.001, 1000, 1),
                                       pkt(0.002, 1000, 2)};
    const auto r = simulate(in, BufferPolicy::bytes(2000), LinkConfig{1000000});
    std::ostringstream out;
    write_outcomes_csv(r, out);
    EXPECT_EQ(out.str(),
              "seq,stream_id,arrival_time,size_bytes,class,disposition,departure_time\n"
              "0,0,0.000000000,1000,video,delivered,0.008000000\n"
              "1,0,0.001000000,1000,video,delivered,0.016000000\n"
              "2,0,0.002000000,1000,video,dropped,\n");
}

TEST(Oracle, RefusesHugeTraces)
{
    std::vector<PacketRecord> in(kOracleMaxPackets + 1);
    for (std::size_t i = 0; i < in.size(); ++i) {
        in[i] = pkt(static_cast<double>(i), 40, i);
    }
    EXPECT_THROW(oracle_simulate(in, BufferPolicy::bytes(100), LinkConfig{1000000}),
                 ContractViolation);
}

TEST(SimProperties, MatchesOracleOnRandomTraces)
{
    Prng p(5150);
    for (int iter = 0; iter < 300; ++iter) {
        const auto link = testing::random_link(p);
        const auto policy = testing::random_policy(p);
        const auto trace = testing::random_trace(p, 400, link.bandwidth_bps);
        const SimOptions opts{p.next_unit() < 0.8};
        const auto fast = simulate(trace, policy, link, opts);
        const auto slow = oracle_simulate(trace, policy, link, opts);
        SCOPED_TRACE(policy.to_string() + " @ " + std::to_string(link.bandwidth_bps));
        expect_same(fast, slow);
        const auto bad = testing::check_invariants(fast, trace.records());
        ASSERT_TRUE(bad.empty()) << bad.front();
    }
}

std::vector<bool> dropped_mask(const SimResult& r)
{
    std::vector<bool> out;
    for (const auto& o : r.outcomes) {
        out.push_back(o.disposition == Disposition::Dropped);
    }
    return out;
}

TEST(SimProperties, PacketLimitedDropCountFallsWhenSizesAreEqual)
{
    Prng p(8);
    for (int iter = 0; iter < 60; ++iter) {
        const auto link = testing::random_link(p);
        const auto mixed = testing::random_trace(p, 500, link.bandwidth_bps);
        std::vector<PacketRecord> recs(mixed.records().begin(), mixed.records().end());
        for (auto& r : recs) {
            r.size_bytes = 600;
        }
        std::size_t prev = SIZE_MAX;
        for (std::uint64_t cap = 1; cap <= 40; cap += 3) {
            const auto mask = dropped_mask(simulate(recs, BufferPolicy::packets(cap), link));
            const auto drops = static_cast<std::size_t>(std::count(mask.begin(), mask.end(), true));
            ASSERT_LE(drops, prev) << "capacity " << cap;
            prev = drops;
        }
    }
}

TEST(SimProperties, EqualSizesCanStillBreakDropSetNesting)
{
    // 125 B = 1 s at 1000 b/s. The extra slot admits packet 2, which delays
    // packets 4 and 5 enough that packet 6 finds two packets queued.
    std::vector<PacketRecord> in;
    std::uint64_t seq = 0;
    for (const double t : {0.0, 1.0, 1.5, 1.5, 2.5, 3.0, 3.5, 3.5}) {
        in.push_back(pkt(t, 125, seq++));
    }
    const LinkConfig link{1000};
    const auto one = dropped_mask(simulate(in, BufferPolicy::packets(1), link));
    const auto two = dropped_mask(simulate(in, BufferPolicy::packets(2), link));
    EXPECT_EQ(one, (std::vector<bool>{false, false, true, true, false, true, false, true}));
    EXPECT_EQ(two, (std::vector<bool>{false, false, false, true, false, false, true, true}));
}

TEST(SimProperties, VariableSizesCanBreakDropSetNesting)
{
    // 125 B = 1 ms at 1 Mb/s. With two slots the second packet is admitted,
    // keeps the link busy, and the fourth packet finds the buffer full.
    const std::vector<PacketRecord> in{pkt(0.002, 500, 0), pkt(0.004, 625, 1),
                                       pkt(0.007, 125, 2), pkt(0.009, 500, 3),
                                       pkt(0.009, 500, 4)};
    const LinkConfig link{1000000};
    const auto one = dropped_mask(simulate(in, BufferPolicy::packets(1), link));
    const auto two = dropped_mask(simulate(in, BufferPolicy::packets(2), link));
    EXPECT_EQ(one, (std::vector<bool>{false, true, false, false, true}));
    EXPECT_EQ(two, (std::vector<bool>{false, false, false, true, true}));
}

TEST(SimProperties, DropCountsFallWithCapacityOnOverloadedWorkload)
{
    SopcastModelParams fp;
    fp.duration_s = 120.0;
    BackgroundModelParams bp;
    bp.offered_load_bps = 1024000.0;
    bp.duration_s = 120.0;
    const auto trace = merge_traces(gen_sopcast_trace(fp), gen_background_trace(bp));
    const LinkConfig link{1024000};
    for (const auto kind : {BufferPolicy::Kind::ByteLimited, BufferPolicy::Kind::PacketLimited}) {
        const bool bytes = kind == BufferPolicy::Kind::ByteLimited;
        std::size_t prev = SIZE_MAX;
        for (const std::uint64_t cap : bytes ? std::vector<std::uint64_t>{10000, 100000, 1000000}
                                             : std::vector<std::uint64_t>{27, 270, 2700}) {
            const auto mask = dropped_mask(
                simulate(trace, bytes ? BufferPolicy::bytes(cap) : BufferPolicy::packets(cap), link));
            const auto drops = static_cast<std::size_t>(std::count(mask.begin(), mask.end(), true));
            EXPECT_LE(drops, prev) << cap;
            prev = drops;
        }
    }
}

TEST(SimProperties, UnlimitedBufferIsPureFifoRecurrence)
{
    Prng p(31);
    for (int iter = 0; iter < 40; ++iter) {
        const auto link = testing::random_link(p);
        const auto trace = testing::random_trace(p, 300, link.bandwidth_bps);
        const auto r = simulate(trace, BufferPolicy::packets(1'000'000), link);
        double prev = 0.0;
        for (const auto& o : r.outcomes) {
            ASSERT_EQ(o.disposition, Disposition::Delivered);
            const double expect =
                std::max(o.record.arrival_s, prev) + link.service_time(o.record.size_bytes);
            ASSERT_NEAR(*o.departure_s, expect, 1e-12);
            prev = *o.departure_s;
        }
    }
}

}  // namespace
}  // namespace bufsim
