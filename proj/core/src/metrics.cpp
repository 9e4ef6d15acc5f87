#include "bufsim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "bufsim/errors.hpp"
#include "json_codec.hpp"
#include "text.hpp"

namespace bufsim {

double nearest_rank(const std::vector<double>& sorted, unsigned pct)
{
    if (sorted.empty() || pct < 1 || pct > 100) {
        throw std::invalid_argument("nearest_rank needs a non-empty sample and pct in 1..100");
    }
    const std::size_t n = sorted.size();
    const std::size_t rank = (static_cast<std::size_t>(pct) * n + 99) / 100;  // ceil(pct*n/100)
    return sorted[std::max<std::size_t>(rank, 1) - 1];
}

namespace {

struct Accumulator {
    ClassStats stats;
    std::uint64_t delivered_bytes = 0;
    std::vector<double> delays;

    void add(const PacketOutcome& o)
    {
        stats.offered_packets += 1;
        stats.offered_bytes += o.record.size_bytes;
        switch (o.disposition) {
        case Disposition::Delivered:
            stats.delivered_packets += 1;
            delivered_bytes += o.record.size_bytes;
            delays.push_back(o.delay_s());
            break;
        case Disposition::Dropped:
            stats.dropped_packets += 1;
            stats.dropped_bytes += o.record.size_bytes;
            break;
        case Disposition::InFlightAtEnd:
            stats.in_flight_packets += 1;
            break;
        }
    }

    ClassStats finish()
    {
        if (stats.offered_packets > 0) {
            stats.loss_rate_packets = static_cast<double>(stats.dropped_packets) /
                                      static_cast<double>(stats.offered_packets);
            stats.loss_rate_bytes = static_cast<double>(stats.dropped_bytes) /
                                    static_cast<double>(stats.offered_bytes);
        }
        if (!delays.empty()) {
            DelayStats d;
            double sum = 0.0;
            for (const double v : delays) {
                sum += v;
            }
            d.mean_s = sum / static_cast<double>(delays.size());
            std::sort(delays.begin(), delays.end());
            d.p50_s = nearest_rank(delays, 50);
            d.p95_s = nearest_rank(delays, 95);
            d.p99_s = nearest_rank(delays, 99);
            d.max_s = delays.back();
            stats.delay = d;
        }
        return stats;
    }
};

}  // namespace

RunSummary summarize(const SimResult& result, const MeasurementWindow& window)
{
    if (!(window.start_s >= 0.0 && window.start_s < window.end_s) ||
        !std::isfinite(window.end_s)) {
        throw ContractViolation("measurement window needs 0 <= start < end");
    }

    std::array<Accumulator, 4> per_class;
    Accumulator all;
    double busy_s = 0.0;
    for (const auto& o : result.outcomes) {
        if (o.departure_s) {
            const double end = *o.departure_s;
            const double begin = end - result.link.service_time(o.record.size_bytes);
            busy_s += std::max(0.0, std::min(end, window.end_s) - std::max(begin, window.start_s));
        }
        if (!window.contains(o.record.arrival_s)) {
            continue;
        }
        per_class[static_cast<std::size_t>(o.record.cls)].add(o);
        all.add(o);
    }

    RunSummary s;
    for (std::size_t i = 0; i < per_class.size(); ++i) {
        per_class[i].stats.cls = kAllTrafficClasses[i];
        s.per_class[i] = per_class[i].finish();
    }
    s.all = all.finish();
    s.utilization = busy_s / window.length();
    s.window = window;
    s.policy = result.policy;
    s.link = result.link;
    return s;
}

namespace {

ClassComparison compare_class(const ClassStats& a, const ClassStats& b)
{
    ClassComparison c;
    c.cls = a.cls;
    c.loss_delta = b.loss_rate_packets - a.loss_rate_packets;
    if (a.loss_rate_packets > 0.0) {
        c.loss_ratio = b.loss_rate_packets / a.loss_rate_packets;
    } else {
        c.loss_ratio = b.loss_rate_packets > 0.0 ? std::numeric_limits<double>::infinity() : 1.0;
    }
    if (a.delay && b.delay) {
        c.delay_mean_delta_s = b.delay->mean_s - a.delay->mean_s;
        if (a.delay->mean_s > 0.0) {
            c.delay_mean_ratio = b.delay->mean_s / a.delay->mean_s;
        }
    }
    return c;
}

}  // namespace

PolicyComparison compare_policies(const RunSummary& a, const RunSummary& b)
{
    if (!(a.window == b.window)) {
        throw ContractViolation("compared summaries use different measurement windows");
    }
    if (!(a.link == b.link)) {
        throw ContractViolation("compared summaries use different links");
    }
    PolicyComparison out;
    for (std::size_t i = 0; i < a.per_class.size(); ++i) {
        out.per_class[i] = compare_class(a.per_class[i], b.per_class[i]);
    }
    out.all = compare_class(a.all, b.all);
    return out;
}

const std::vector<std::string>& summary_csv_columns()
{
    static const std::vector<std::string> cols = {
        "class",          "offered_packets",   "offered_bytes",    "delivered_packets",
        "dropped_packets", "dropped_bytes",    "in_flight_packets", "loss_rate_packets",
        "loss_rate_bytes", "delay_mean_s",     "delay_p50_s",       "delay_p95_s",
        "delay_p99_s",    "delay_max_s",       "utilization",       "window_start_s",
        "window_end_s"};
    return cols;
}

namespace {

void write_row(const ClassStats& c, const RunSummary& s, std::string_view prefix, std::ostream& out)
{
    out << prefix << c.name() << ',' << c.offered_packets << ',' << c.offered_bytes << ','
        << c.delivered_packets << ',' << c.dropped_packets << ',' << c.dropped_bytes << ','
        << c.in_flight_packets << ',' << text::shortest(c.loss_rate_packets) << ','
        << text::shortest(c.loss_rate_bytes) << ',';
    if (c.delay) {
        out << text::shortest(c.delay->mean_s) << ',' << text::shortest(c.delay->p50_s) << ','
            << text::shortest(c.delay->p95_s) << ',' << text::shortest(c.delay->p99_s) << ','
            << text::shortest(c.delay->max_s) << ',';
    } else {
        out << ",,,,,";
    }
    out << text::shortest(s.utilization) << ',' << text::shortest(s.window.start_s) << ','
        << text::shortest(s.window.end_s) << '\n';
}

}  // namespace

void write_summary_rows(const RunSummary& summary, std::string_view prefix, std::ostream& out)
{
    for (const auto& c : summary.per_class) {
        write_row(c, summary, prefix, out);
    }
    write_row(summary.all, summary, prefix, out);
}

// --- JSON -------------------------------------------------------------------

void to_json(nlohmann::json& j, const BufferPolicy& p)
{
    j = nlohmann::json{{"kind", std::string(p.kind_name())}, {"capacity", p.capacity}};
}

void from_json(const nlohmann::json& j, BufferPolicy& p)
{
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "byte") {
        p.kind = BufferPolicy::Kind::ByteLimited;
    } else if (kind == "pkt") {
        p.kind = BufferPolicy::Kind::PacketLimited;
    } else {
        throw std::invalid_argument("unknown policy kind '" + kind + "'");
    }
    p.capacity = j.at("capacity").get<std::uint64_t>();
}

void to_json(nlohmann::json& j, const MeasurementWindow& w)
{
    j = nlohmann::json{{"start_s", w.start_s}, {"end_s", w.end_s}};
}

void from_json(const nlohmann::json& j, MeasurementWindow& w)
{
    w.start_s = j.at("start_s").get<double>();
    w.end_s = j.at("end_s").get<double>();
}

void to_json(nlohmann::json& j, const ClassStats& s)
{
    j = nlohmann::json{{"class", std::string(s.name())},
                       {"offered_packets", s.offered_packets},
                       {"offered_bytes", s.offered_bytes},
                       {"delivered_packets", s.delivered_packets},
                       {"dropped_packets", s.dropped_packets},
                       {"dropped_bytes", s.dropped_bytes},
                       {"in_flight_packets", s.in_flight_packets},
                       {"loss_rate_packets", s.loss_rate_packets},
                       {"loss_rate_bytes", s.loss_rate_bytes}};
    const char* keys[] = {"delay_mean_s", "delay_p50_s", "delay_p95_s", "delay_p99_s",
                          "delay_max_s"};
    if (s.delay) {
        const double vals[] = {s.delay->mean_s, s.delay->p50_s, s.delay->p95_s, s.delay->p99_s,
                               s.delay->max_s};
        for (int i = 0; i < 5; ++i) {
            j[keys[i]] = vals[i];
        }
    } else {
        for (const auto* k : keys) {
            j[k] = nullptr;
        }
    }
}

void from_json(const nlohmann::json& j, ClassStats& s)
{
    const auto name = j.at("class").get<std::string>();
    if (name == "all") {
        s.cls.reset();
    } else {
        s.cls = traffic_class_from_string(name);
    }
    s.offered_packets = j.at("offered_packets").get<std::uint64_t>();
    s.offered_bytes = j.at("offered_bytes").get<std::uint64_t>();
    s.delivered_packets = j.at("delivered_packets").get<std::uint64_t>();
    s.dropped_packets = j.at("dropped_packets").get<std::uint64_t>();
    s.dropped_bytes = j.at("dropped_bytes").get<std::uint64_t>();
    s.in_flight_packets = j.at("in_flight_packets").get<std::uint64_t>();
    s.loss_rate_packets = j.at("loss_rate_packets").get<double>();
    s.loss_rate_bytes = j.at("loss_rate_bytes").get<double>();
    if (j.at("delay_mean_s").is_null()) {
        s.delay.reset();
    } else {
        DelayStats d;
        d.mean_s = j.at("delay_mean_s").get<double>();
        d.p50_s = j.at("delay_p50_s").get<double>();
        d.p95_s = j.at("delay_p95_s").get<double>();
        d.p99_s = j.at("delay_p99_s").get<double>();
        d.max_s = j.at("delay_max_s").get<double>();
        s.delay = d;
    }
}

void to_json(nlohmann::json& j, const RunSummary& s)
{
    auto classes = nlohmann::json::array();
    for (const auto& c : s.per_class) {
        classes.push_back(c);
    }
    j = nlohmann::json{{"classes", classes},
                       {"all", s.all},
                       {"utilization", s.utilization},
                       {"window", s.window},
                       {"policy", s.policy},
                       {"bandwidth_bps", s.link.bandwidth_bps}};
}

void from_json(const nlohmann::json& j, RunSummary& s)
{
    const auto& classes = j.at("classes");
    if (!classes.is_array() || classes.size() != s.per_class.size()) {
        throw std::invalid_argument("summary needs one entry per traffic class");
    }
    for (std::size_t i = 0; i < s.per_class.size(); ++i) {
        s.per_class[i] = classes[i].get<ClassStats>();
        if (s.per_class[i].cls != kAllTrafficClasses[i]) {
            throw std::invalid_argument("summary classes out of order");
        }
    }
    s.all = j.at("all").get<ClassStats>();
    s.utilization = j.at("utilization").get<double>();
    s.window = j.at("window").get<MeasurementWindow>();
    s.policy = j.at("policy").get<BufferPolicy>();
    s.link.bandwidth_bps = j.at("bandwidth_bps").get<std::uint64_t>();
}

std::string summary_to_json(const RunSummary& summary)
{
    return nlohmann::json(summary).dump(2);
}

RunSummary summary_from_json(std::string_view json)
{
    try {
        return nlohmann::json::parse(json).get<RunSummary>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(0, std::string("summary JSON: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw ParseError(0, std::string("summary JSON: ") + e.what());
    }
}

}  // namespace bufsim
