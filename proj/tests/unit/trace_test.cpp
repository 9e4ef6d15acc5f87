#include <gtest/gtest.h>

#include <sstream>

#include "bufsim/errors.hpp"
#include "bufsim/prng.hpp"
#include "bufsim/synth.hpp"
#include "bufsim/trace.hpp"
#include "random_traces.hpp"

namespace bufsim {
namespace {

Trace parse(const std::string& text)
{
    std::istringstream in(text);
    return parse_trace(in, "test");
}

std::size_t parse_error_line(const std::string& text)
{
    try {
        parse(text);
    } catch (const ParseError& e) {
        return e.line();
    }
    ADD_FAILURE() << "expected a parse error for:\n" << text;
    return 0;
}

TEST(ParseTrace, SingleRow)
{
    const auto t = parse("time_s,size_bytes,class\n0.0,1320,video\n");
    ASSERT_EQ(t.size(), 1u);
    EXPECT_EQ(t.records()[0].arrival_s, 0.0);
    EXPECT_EQ(t.records()[0].size_bytes, 1320u);
    EXPECT_EQ(t.records()[0].cls, TrafficClass::Video);
    EXPECT_EQ(t.records()[0].stream_id, kForegroundStream);
    EXPECT_EQ(t.duration_s(), 0.0);
    EXPECT_EQ(t.source(), "test");
}

TEST(ParseTrace, SortsByTimeThenStream)
{
    const auto t = parse(
        "time_s,size_bytes,class,stream_id\n"
        "0.5,100,,0\n"
        "0.1,200,,1\n"
        "0.1,300,,0\n");
    ASSERT_EQ(t.size(), 3u);
    const auto r = t.records();
    EXPECT_EQ(r[0].arrival_s, 0.1);
    EXPECT_EQ(r[0].stream_id, 0u);
    EXPECT_EQ(r[0].size_bytes, 300u);
    EXPECT_EQ(r[1].arrival_s, 0.1);
    EXPECT_EQ(r[1].stream_id, 1u);
    EXPECT_EQ(r[2].arrival_s, 0.5);
    EXPECT_EQ(r[2].stream_id, 0u);
    EXPECT_EQ(t.duration_s(), 0.5);
    // seq follows replay order within each stream.
    EXPECT_EQ(r[0].seq, 0u);
    EXPECT_EQ(r[2].seq, 1u);
}

TEST(ParseTrace, RowOrderBreaksFullTies)
{
    const auto t = parse("time_s,size_bytes,class\n1.0,52,\n1.0,1320,\n1.0,80,\n");
    const auto r = t.records();
    EXPECT_EQ(r[0].size_bytes, 52u);
    EXPECT_EQ(r[1].size_bytes, 1320u);
    EXPECT_EQ(r[2].size_bytes, 80u);
}

TEST(ParseTrace, RejectsMalformedRows)
{
    EXPECT_EQ(parse_error_line("time_s,size_bytes,class\n0.0,-5,\n"), 2u);
    EXPECT_EQ(parse_error_line("time_s,size_bytes,class\n0.0,0,\n"), 2u);
    EXPECT_EQ(parse_error_line("time_s,size_bytes,class\n0.0,70000,\n"), 2u);
    EXPECT_EQ(parse_error_line("time_s,size_bytes,class\n0.1,10,\nabc,10,\n"), 3u);
    EXPECT_EQ(parse_error_line("time_s,size_bytes,class\n-0.5,10,\n"), 2u);
    EXPECT_EQ(parse_error_line("time_s,size_bytes,class\n0.5,10\n"), 2u);
    EXPECT_EQ(parse_error_line("time_s,size_bytes,class\n0.5,10,,3\n"), 2u);
    EXPECT_EQ(parse_error_line("time_s,size_bytes,class\n0.5,1.5,\n"), 2u);
    EXPECT_EQ(parse_error_line("time_s,size_bytes,class\n0.5,10,voice\n"), 2u);
    EXPECT_EQ(parse_error_line("time,size,class\n0.5,10,\n"), 1u);
    EXPECT_EQ(parse_error_line("time_s,size_bytes,class,stream_id\n0.5,10,,x\n"), 2u);
}

TEST(ParseTrace, EmptyInput)
{
    try {
        parse("");
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_STREQ(e.what(), "empty trace");
        EXPECT_EQ(e.line(), 0u);
    }
    EXPECT_THROW(parse("time_s,size_bytes,class\n"), ParseError);
}

TEST(ParseTrace, ExplicitSeqMustIncreaseWithTime)
{
    const auto ok = parse("time_s,size_bytes,class,stream_id,seq\n0.2,52,,0,7\n0.1,52,,0,3\n");
    EXPECT_EQ(ok.records()[0].seq, 3u);
    EXPECT_EQ(ok.records()[1].seq, 7u);
    // seq 9 at t=0.1 would replay after seq 3 at t=0.2.
    EXPECT_EQ(parse_error_line("time_s,size_bytes,class,stream_id,seq\n0.2,52,,0,3\n0.1,52,,0,9\n"),
              2u);
    EXPECT_EQ(parse_error_line("time_s,size_bytes,class,stream_id,seq\n0.1,52,,0,3\n0.2,52,,0,3\n"),
              3u);
}

TEST(ParseTrace, ClassColumnOverridesSizeTaxonomy)
{
    const auto t = parse("time_s,size_bytes,class\n0.0,52,video\n0.1,1320,background\n0.2,600,\n");
    EXPECT_EQ(t.records()[0].cls, TrafficClass::Video);
    EXPECT_EQ(t.records()[1].cls, TrafficClass::Background);
    EXPECT_EQ(t.records()[2].cls, TrafficClass::Video);
}

TEST(ParseTrace, MissingFileIsIoError)
{
    EXPECT_THROW(parse_trace_file("/nonexistent/trace.csv"), IoError);
}

TEST(Trace, ConstructorEnforcesInvariants)
{
    PacketRecord a{0.2, 100, TrafficClass::Control, 0, 1};
    PacketRecord b{0.1, 100, TrafficClass::Control, 0, 0};
    EXPECT_THROW(Trace({a, b}, "x", 1.0), ContractViolation);
    EXPECT_NO_THROW(Trace::from_unsorted({a, b}, "x", 1.0));
    // Sorted by time, seq would go 1 -> 0.
    std::swap(a.seq, b.seq);
    EXPECT_THROW(Trace::from_unsorted({a, b}, "x", 1.0), ContractViolation);
    b.seq = 1;
    EXPECT_THROW(Trace({b, a}, "x", 1.0), ContractViolation);  // in time order, seq 1 then 0
    EXPECT_THROW(Trace({a}, "x", 0.1), ContractViolation);      // beyond duration
    PacketRecord zero{0.0, 0, TrafficClass::Other, 0, 0};
    EXPECT_THROW(Trace({zero}, "x", 1.0), ContractViolation);
    PacketRecord neg{-1.0, 10, TrafficClass::Other, 0, 0};
    EXPECT_THROW(Trace({neg}, "x", 1.0), ContractViolation);
}

TEST(ClassifyPacket, TableSizes)
{
    for (const auto s : kControlSizes) {
        EXPECT_EQ(classify_packet(s), TrafficClass::Control) << s;
    }
    for (const auto s : kVideoSizes) {
        EXPECT_EQ(classify_packet(s), TrafficClass::Video) << s;
    }
    EXPECT_EQ(classify_packet(52), TrafficClass::Control);
    EXPECT_EQ(classify_packet(1320), TrafficClass::Video);
}

TEST(ClassifyPacket, FallbackThreshold)
{
    EXPECT_EQ(classify_packet(100), TrafficClass::Control);
    EXPECT_EQ(classify_packet(1), TrafficClass::Control);
    EXPECT_EQ(classify_packet(199), TrafficClass::Control);
    EXPECT_EQ(classify_packet(200), TrafficClass::Video);
    EXPECT_EQ(classify_packet(1500), TrafficClass::Video);
    EXPECT_EQ(classify_packet(65535), TrafficClass::Video);
}

TEST(Histogram, DirectBinning)
{
    const auto t = parse("time_s,size_bytes,class\n0,52,\n0.1,52,\n0.2,1320,\n");
    const auto h = compute_histogram(t, 100);
    EXPECT_EQ(h.total, 3u);
    ASSERT_EQ(h.counts.size(), 2u);
    EXPECT_EQ(h.counts.at(0), 2u);
    EXPECT_EQ(h.counts.at(13), 1u);
}

TEST(Histogram, EmptyTraceAndBadWidth)
{
    const Trace empty;
    const auto h = compute_histogram(empty, 100);
    EXPECT_EQ(h.total, 0u);
    EXPECT_TRUE(h.counts.empty());
    EXPECT_THROW(compute_histogram(empty, 0), std::invalid_argument);
}

TEST(Histogram, SyntheticForegroundIsBimodal)
{
    SopcastModelParams params;
    params.duration_s = 300.0;
    params.seed = 7;
    const auto trace = gen_sopcast_trace(params);
    ASSERT_GE(trace.size(), 10000u);
    const auto h = compute_histogram(trace, 100);
    const double small = h.mass(0, 1);  // sizes below 200 B
    const double video = h.mass(13, 13);
    EXPECT_GE(small, 0.55);
    EXPECT_LE(small, 0.65);
    EXPECT_GE(video, 0.35);
    EXPECT_LE(video, 0.45);
}

TEST(TraceProperties, SerializeParseRoundTrip)
{
    Prng p(2024);
    for (int iter = 0; iter < 50; ++iter) {
        auto original = testing::random_trace(p, 300, 1024000);
        if (original.empty()) {
            continue;
        }
        std::ostringstream first;
        serialize_trace(original, first);
        const auto once = parse(first.str());
        std::ostringstream second;
        serialize_trace(once, second);
        const auto twice = parse(second.str());
        // Idempotent after one normalisation pass, byte for byte.
        EXPECT_EQ(first.str(), second.str());
        ASSERT_EQ(once.size(), twice.size());
        for (std::size_t i = 0; i < once.size(); ++i) {
            EXPECT_EQ(once.records()[i], twice.records()[i]);
        }
        ASSERT_EQ(once.size(), original.size());
    }
}

TEST(TraceProperties, NanosecondTracesRoundTripExactly)
{
    SopcastModelParams params;
    params.duration_s = 20.0;
    const auto trace = gen_sopcast_trace(params);
    std::ostringstream out;
    serialize_trace(trace, out);
    const auto back = parse(out.str());
    ASSERT_EQ(back.size(), trace.size());
    for (std::size_t i = 0; i < trace.size(); ++i) {
        ASSERT_EQ(back.records()[i], trace.records()[i]) << i;
    }
}

TEST(TraceProperties, HistogramTotalsMatchLength)
{
    Prng p(99);
    for (int iter = 0; iter < 40; ++iter) {
        const auto t = testing::random_trace(p, 500, 512000);
        const auto width = static_cast<std::uint32_t>(testing::uniform_int(p, 1, 2000));
        const auto h = compute_histogram(t, width);
        std::uint64_t sum = 0;
        for (const auto& [bin, n] : h.counts) {
            sum += n;
        }
        EXPECT_EQ(h.total, t.size());
        EXPECT_EQ(sum, h.total);
    }
}

}  // namespace
}  // namespace bufsim
