#include "bufsim/synth.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "bufsim/prng.hpp"

namespace bufsim {

namespace {

class SizeSampler {
public:
    template <typename Range>
    explicit SizeSampler(const Range& weights)
    {
        double total = 0.0;
        for (const auto& [size, w] : weights) {
            total += w;
        }
        double acc = 0.0;
        for (const auto& [size, w] : weights) {
            acc += w;
            sizes_.push_back(size);
            cdf_.push_back(acc / total);
        }
        // Pin the top of the CDF so u < 1 always lands on a positive-weight size.
        for (auto it = cdf_.rbegin(); it != cdf_.rend(); ++it) {
            const bool last_positive = it + 1 == cdf_.rend() || *(it + 1) < *it;
            *it = 1.0;
            if (last_positive) {
                break;
            }
        }
    }

    std::uint32_t operator()(double u) const
    {
        const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
        return sizes_[static_cast<std::size_t>(it - cdf_.begin())];
    }

private:
    std::vector<std::uint32_t> sizes_;
    std::vector<double> cdf_;
};

template <typename Range>
void check_weights(const Range& weights, const char* field)
{
    if (std::empty(weights)) {
        throw std::invalid_argument(std::string(field) + " is empty");
    }
    double total = 0.0;
    for (const auto& [size, w] : weights) {
        if (size < 1 || size > kMaxPacketBytes) {
            throw std::invalid_argument(std::string(field) + ": size outside 1..65535");
        }
        if (!std::isfinite(w) || w < 0.0) {
            throw std::invalid_argument(std::string(field) + ": weights must be non-negative");
        }
        total += w;
    }
    if (!(total > 0.0)) {
        throw std::invalid_argument(std::string(field) + ": weights sum to zero");
    }
}

template <typename Range>
double weighted_mean(const Range& weights)
{
    double total = 0.0;
    double acc = 0.0;
    for (const auto& [size, w] : weights) {
        total += w;
        acc += w * static_cast<double>(size);
    }
    return acc / total;
}

void check_duration(double duration_s)
{
    if (!std::isfinite(duration_s) || duration_s <= 0.0) {
        throw std::invalid_argument("duration_s must be positive");
    }
}

// Arrival times are kept on a 1 ns grid so that a trace written with nine
// fractional digits reads back bit-identical.
double quantize_ns(double t, double duration_s)
{
    return std::min(std::nearbyint(t * 1e9) / 1e9, duration_s);
}

void poisson_stream(Prng& prng, double rate_pps, double duration_s, const SizeSampler& sizes,
                    TrafficClass cls, StreamId stream, std::vector<PacketRecord>& out)
{
    double t = 0.0;
    for (;;) {
        t += exp_interarrival(prng.next_unit(), rate_pps);
        if (t > duration_s) {
            return;
        }
        PacketRecord r;
        r.arrival_s = quantize_ns(t, duration_s);
        r.size_bytes = sizes(prng.next_unit());
        r.cls = cls;
        r.stream_id = stream;
        out.push_back(r);
    }
}

}  // namespace

void SopcastModelParams::validate() const
{
    if (!std::isfinite(video_rate_bps) || video_rate_bps <= 0.0) {
        throw std::invalid_argument("video_rate_bps must be positive");
    }
    if (!(control_fraction > 0.0 && control_fraction < 1.0)) {
        throw std::invalid_argument("control_fraction must lie in (0, 1)");
    }
    check_weights(video_size_weights, "video_size_weights");
    check_weights(control_size_weights, "control_size_weights");
    check_duration(duration_s);
}

double SopcastModelParams::mean_video_size_bytes() const
{
    return weighted_mean(video_size_weights);
}

double SopcastModelParams::mean_control_size_bytes() const
{
    return weighted_mean(control_size_weights);
}

double SopcastModelParams::video_rate_pps() const
{
    return video_rate_bps / (8.0 * mean_video_size_bytes());
}

double SopcastModelParams::control_rate_pps() const
{
    return video_rate_pps() * control_fraction / (1.0 - control_fraction);
}

double SopcastModelParams::offered_bps() const
{
    return video_rate_bps + 8.0 * control_rate_pps() * mean_control_size_bytes();
}

void BackgroundModelParams::validate() const
{
    if (!std::isfinite(offered_load_bps) || offered_load_bps < 0.0) {
        throw std::invalid_argument("offered_load_bps must be non-negative");
    }
    if (size_mix.empty()) {
        throw std::invalid_argument("size_mix is empty");
    }
    double total = 0.0;
    for (const auto& [size, p] : size_mix) {
        if (size < 1 || size > kMaxPacketBytes) {
            throw std::invalid_argument("size_mix: size outside 1..65535");
        }
        if (!std::isfinite(p) || p < 0.0) {
            throw std::invalid_argument("size_mix: probabilities must be non-negative");
        }
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-12) {
        throw std::invalid_argument("size_mix probabilities must sum to 1");
    }
    check_duration(duration_s);
}

double BackgroundModelParams::mean_size_bytes() const
{
    return weighted_mean(size_mix);
}

double BackgroundModelParams::rate_pps() const
{
    return offered_load_bps / (8.0 * mean_size_bytes());
}

double exp_interarrival(double u, double rate_per_s)
{
    if (!(rate_per_s > 0.0)) {
        throw std::invalid_argument("rate_per_s must be positive");
    }
    if (!(u >= 0.0 && u < 1.0)) {
        throw std::invalid_argument("u must lie in [0, 1)");
    }
    return -std::log1p(-u) / rate_per_s;
}

Trace gen_sopcast_trace(const SopcastModelParams& params)
{
    params.validate();

    std::vector<PacketRecord> records;
    Prng video_prng(derive_seed(params.seed, 1));
    Prng control_prng(derive_seed(params.seed, 2));
    poisson_stream(video_prng, params.video_rate_pps(), params.duration_s,
                   SizeSampler(params.video_size_weights), TrafficClass::Video, kForegroundStream,
                   records);
    const auto video_count = records.size();
    poisson_stream(control_prng, params.control_rate_pps(), params.duration_s,
                   SizeSampler(params.control_size_weights), TrafficClass::Control,
                   kForegroundStream, records);

    // Both sub-streams are already time-ordered; video wins ties.
    std::inplace_merge(records.begin(), records.begin() + static_cast<std::ptrdiff_t>(video_count),
                       records.end(), [](const PacketRecord& a, const PacketRecord& b) {
                           return a.arrival_s < b.arrival_s;
                       });
    for (std::size_t i = 0; i < records.size(); ++i) {
        records[i].seq = i;
    }
    return Trace(std::move(records), "synthetic:sopcast", params.duration_s);
}

Trace gen_background_trace(const BackgroundModelParams& params)
{
    params.validate();
    std::vector<PacketRecord> records;
    if (params.offered_load_bps > 0.0) {
        Prng prng(params.seed);
        poisson_stream(prng, params.rate_pps(), params.duration_s, SizeSampler(params.size_mix),
                       TrafficClass::Background, kBackgroundStream, records);
        for (std::size_t i = 0; i < records.size(); ++i) {
            records[i].seq = i;
        }
    }
    return Trace(std::move(records), "synthetic:background", params.duration_s);
}

Trace merge_traces(const Trace& a, const Trace& b)
{
    if (a.empty()) {
        return b;
    }
    if (b.empty()) {
        return a;
    }
    std::vector<PacketRecord> merged;
    merged.reserve(a.size() + b.size());
    const auto ra = a.records();
    const auto rb = b.records();
    // std::merge takes from the first range on equivalence.
    std::merge(ra.begin(), ra.end(), rb.begin(), rb.end(), std::back_inserter(merged),
               replay_before);
    return Trace(std::move(merged), a.source() + "+" + b.source(),
                 std::max(a.duration_s(), b.duration_s()));
}

}  // namespace bufsim
