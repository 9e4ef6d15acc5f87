#pragma once

#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "bufsim/trace.hpp"

namespace bufsim {

/// P2P-TV foreground model: a video stream of large packets plus a control
/// stream of small signalling packets, each a Poisson process.
///
/// The video packet rate is `video_rate_bps / (8 * mean video size)` and the
/// control rate is scaled so that control packets make up `control_fraction`
/// of all foreground packets. Weight maps need not be normalised; a size with
/// weight 0 never appears.
struct SopcastModelParams {
    double video_rate_bps = 348000.0;
    std::map<std::uint32_t, double> video_size_weights = {{1320, 1.0}};
    double control_fraction = 0.6;
    std::map<std::uint32_t, double> control_size_weights = {
        {28, 1.0}, {42, 1.0}, {46, 1.0}, {52, 1.0}, {80, 1.0}};
    double duration_s = 600.0;
    std::uint64_t seed = 1;

    /// Throws std::invalid_argument naming the offending field.
    void validate() const;

    double mean_video_size_bytes() const;
    double mean_control_size_bytes() const;
    double video_rate_pps() const;
    double control_rate_pps() const;
    /// Expected bit rate of video plus control.
    double offered_bps() const;
};

/// Background cross traffic with an i.i.d. packet-size mix.
struct BackgroundModelParams {
    double offered_load_bps = 0.0;
    std::vector<std::pair<std::uint32_t, double>> size_mix = {{40, 0.5}, {576, 0.1}, {1500, 0.4}};
    double duration_s = 600.0;
    std::uint64_t seed = 1;

    void validate() const;

    double mean_size_bytes() const;
    double rate_pps() const;
};

/// Inverse-CDF exponential draw: -ln(1 - u) / rate.
double exp_interarrival(double u, double rate_per_s);

/// Video and control sub-streams use derive_seed(seed, 1) and
/// derive_seed(seed, 2). All records are stream 0; seq follows replay order.
Trace gen_sopcast_trace(const SopcastModelParams& params);

/// Stream 1, class Background, seeded directly from `params.seed`.
/// Zero load yields an empty trace.
Trace gen_background_trace(const BackgroundModelParams& params);

/// Stable merge in replay order; ties on (time, stream, seq) keep `a` first.
Trace merge_traces(const Trace& a, const Trace& b);

}  // namespace bufsim
