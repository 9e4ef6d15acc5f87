#include "bufsim/trace.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <unordered_map>

#include "bufsim/errors.hpp"
#include "text.hpp"

namespace bufsim {

std::string_view to_string(TrafficClass c) noexcept
{
    switch (c) {
    case TrafficClass::Video:
        return "video";
    case TrafficClass::Control:
        return "control";
    case TrafficClass::Background:
        return "background";
    case TrafficClass::Other:
        return "other";
    }
    return "other";
}

TrafficClass traffic_class_from_string(std::string_view name)
{
    for (const auto c : kAllTrafficClasses) {
        if (to_string(c) == name) {
            return c;
        }
    }
    throw std::invalid_argument("unknown traffic class '" + std::string(name) + "'");
}

bool replay_before(const PacketRecord& a, const PacketRecord& b) noexcept
{
    if (a.arrival_s != b.arrival_s) {
        return a.arrival_s < b.arrival_s;
    }
    if (a.stream_id != b.stream_id) {
        return a.stream_id < b.stream_id;
    }
    return a.seq < b.seq;
}

namespace {

void check_record(const PacketRecord& r, std::size_t index)
{
    if (r.size_bytes < 1 || r.size_bytes > kMaxPacketBytes) {
        throw ContractViolation("record " + std::to_string(index) + ": size_bytes " +
                                std::to_string(r.size_bytes) + " outside 1..65535");
    }
    if (!std::isfinite(r.arrival_s) || r.arrival_s < 0.0) {
        throw ContractViolation("record " + std::to_string(index) +
                                ": arrival time must be finite and non-negative");
    }
}

}  // namespace

Trace::Trace(std::vector<PacketRecord> records, std::string source, double duration_s)
    : records_(std::move(records)), source_(std::move(source)), duration_s_(duration_s)
{
    if (!std::isfinite(duration_s_) || duration_s_ < 0.0) {
        throw ContractViolation("trace duration must be finite and non-negative");
    }
    std::unordered_map<StreamId, std::uint64_t> last_seq;
    for (std::size_t i = 0; i < records_.size(); ++i) {
        const auto& r = records_[i];
        check_record(r, i);
        if (r.arrival_s > duration_s_) {
            throw ContractViolation("record " + std::to_string(i) + " arrives after trace duration");
        }
        if (i > 0 && replay_before(r, records_[i - 1])) {
            throw ContractViolation("trace not sorted at record " + std::to_string(i));
        }
        const auto [it, inserted] = last_seq.try_emplace(r.stream_id, r.seq);
        if (!inserted) {
            if (r.seq <= it->second) {
                throw ContractViolation("seq not strictly increasing in stream " +
                                        std::to_string(r.stream_id) + " at record " +
                                        std::to_string(i));
            }
            it->second = r.seq;
        }
    }
}

Trace Trace::from_unsorted(std::vector<PacketRecord> records, std::string source,
                           double duration_s)
{
    std::stable_sort(records.begin(), records.end(), replay_before);
    return Trace(std::move(records), std::move(source), duration_s);
}

TrafficClass classify_packet(std::uint32_t size_bytes) noexcept
{
    if (std::find(std::begin(kControlSizes), std::end(kControlSizes), size_bytes) !=
        std::end(kControlSizes)) {
        return TrafficClass::Control;
    }
    if (std::find(std::begin(kVideoSizes), std::end(kVideoSizes), size_bytes) !=
        std::end(kVideoSizes)) {
        return TrafficClass::Video;
    }
    return size_bytes < kSmallPacketThreshold ? TrafficClass::Control : TrafficClass::Video;
}

namespace {

constexpr std::string_view kHeaderColumns[] = {"time_s", "size_bytes", "class", "stream_id",
                                               "seq"};

std::size_t parse_header(std::string_view line)
{
    const auto cols = text::split(text::trim(line), ',');
    if (cols.size() < 3 || cols.size() > 5) {
        throw ParseError(1, "header must be time_s,size_bytes,class[,stream_id[,seq]]");
    }
    for (std::size_t i = 0; i < cols.size(); ++i) {
        if (text::trim(cols[i]) != kHeaderColumns[i]) {
            throw ParseError(1, "unexpected header column '" + std::string(cols[i]) +
                                    "', expected '" + std::string(kHeaderColumns[i]) + "'");
        }
    }
    return cols.size();
}

struct ParsedRow {
    PacketRecord record;
    std::size_t line = 0;
};

ParsedRow parse_row(std::string_view line, std::size_t line_no, std::size_t columns,
                    std::size_t row_index)
{
    const auto cols = text::split(line, ',');
    if (cols.size() != columns) {
        throw ParseError(line_no, "expected " + std::to_string(columns) + " columns, got " +
                                      std::to_string(cols.size()));
    }
    ParsedRow row;
    row.line = line_no;
    auto& r = row.record;

    const auto t = text::to_double(cols[0]);
    if (!t) {
        throw ParseError(line_no, "time_s is not a number");
    }
    if (*t < 0.0) {
        throw ParseError(line_no, "negative time_s");
    }
    r.arrival_s = *t;

    const auto size = text::to_int(cols[1]);
    if (!size) {
        throw ParseError(line_no, "size_bytes is not an integer");
    }
    if (*size < 1 || *size > kMaxPacketBytes) {
        throw ParseError(line_no, "size_bytes must be in 1..65535");
    }
    r.size_bytes = static_cast<std::uint32_t>(*size);

    const auto cls = text::trim(cols[2]);
    if (cls.empty()) {
        r.cls = classify_packet(r.size_bytes);
    } else {
        try {
            r.cls = traffic_class_from_string(cls);
        } catch (const std::invalid_argument& e) {
            throw ParseError(line_no, e.what());
        }
    }

    r.stream_id = kForegroundStream;
    if (columns >= 4 && !text::trim(cols[3]).empty()) {
        const auto sid = text::to_uint(cols[3]);
        if (!sid || *sid > 0xFFFFFFFFu) {
            throw ParseError(line_no, "stream_id is not a 32-bit unsigned integer");
        }
        r.stream_id = static_cast<StreamId>(*sid);
    }
    r.seq = row_index;
    if (columns == 5) {
        const auto seq = text::to_uint(cols[4]);
        if (!seq) {
            throw ParseError(line_no, "seq is not an unsigned integer");
        }
        r.seq = *seq;
    }
    return row;
}

}  // namespace

Trace parse_trace(std::istream& in, std::string source)
{
    std::string line;
    std::size_t line_no = 0;
    std::size_t columns = 0;
    std::vector<ParsedRow> rows;

    while (std::getline(in, line)) {
        ++line_no;
        if (line_no == 1) {
            if (text::trim(line).empty()) {
                break;
            }
            columns = parse_header(line);
            continue;
        }
        if (text::trim(line).empty()) {
            continue;
        }
        rows.push_back(parse_row(line, line_no, columns, rows.size()));
    }
    if (rows.empty()) {
        throw ParseError(0, "empty trace");
    }

    // Without a seq column, row order breaks ties and seq is renumbered per
    // stream after sorting so that it increases with replay order.
    const bool explicit_seq = columns == 5;
    std::stable_sort(rows.begin(), rows.end(), [](const ParsedRow& a, const ParsedRow& b) {
        return replay_before(a.record, b.record);
    });

    std::unordered_map<StreamId, std::uint64_t> next_seq;
    std::vector<PacketRecord> records;
    records.reserve(rows.size());
    double duration = 0.0;
    for (const auto& row : rows) {
        auto r = row.record;
        if (explicit_seq) {
            const auto it = next_seq.find(r.stream_id);
            if (it != next_seq.end() && r.seq < it->second) {
                throw ParseError(row.line, "seq " + std::to_string(r.seq) +
                                               " duplicated or out of time order in stream " +
                                               std::to_string(r.stream_id));
            }
            next_seq[r.stream_id] = r.seq + 1;
        } else {
            r.seq = next_seq[r.stream_id]++;
        }
        duration = std::max(duration, r.arrival_s);
        records.push_back(r);
    }
    return Trace(std::move(records), std::move(source), duration);
}

Trace parse_trace_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw IoError(path, "cannot open trace file");
    }
    return parse_trace(in, path);
}

void serialize_trace(const Trace& trace, std::ostream& out)
{
    out << "time_s,size_bytes,class,stream_id,seq\n";
    for (const auto& r : trace.records()) {
        out << text::fixed(r.arrival_s, 9) << ',' << r.size_bytes << ',' << to_string(r.cls) << ','
            << r.stream_id << ',' << r.seq << '\n';
    }
}

void write_trace_file(const Trace& trace, const std::string& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError(path, "cannot open for writing");
    }
    serialize_trace(trace, out);
    out.flush();
    if (!out) {
        throw IoError(path, "write failed");
    }
}

double Histogram::mass(std::uint64_t first_bin, std::uint64_t last_bin) const noexcept
{
    if (total == 0) {
        return 0.0;
    }
    std::uint64_t n = 0;
    for (auto it = counts.lower_bound(first_bin); it != counts.end() && it->first <= last_bin;
         ++it) {
        n += it->second;
    }
    return static_cast<double>(n) / static_cast<double>(total);
}

Histogram compute_histogram(const Trace& trace, std::uint32_t bin_width_bytes)
{
    if (bin_width_bytes == 0) {
        throw std::invalid_argument("bin width must be at least 1 byte");
    }
    Histogram h;
    h.bin_width_bytes = bin_width_bytes;
    for (const auto& r : trace.records()) {
        ++h.counts[r.size_bytes / bin_width_bytes];
        ++h.total;
    }
    return h;
}

}  // namespace bufsim
