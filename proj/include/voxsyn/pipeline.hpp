#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "voxsyn/blob_log.hpp"
#include "voxsyn/components.hpp"
#include "voxsyn/error.hpp"
#include "voxsyn/filters.hpp"
#include "voxsyn/grid.hpp"
#include "voxsyn/pairing.hpp"
#include "voxsyn/peaks.hpp"
#include "voxsyn/points.hpp"
#include "voxsyn/threshold.hpp"

namespace voxsyn {

enum class PeakMethod { peak_local_max, blob_log };

inline std::string to_string(PeakMethod m) {
    return m == PeakMethod::peak_local_max ? "peak_local_max" : "blob_log";
}

inline PeakMethod peak_method_from_string(const std::string& s) {
    if (s == "peak_local_max") return PeakMethod::peak_local_max;
    if (s == "blob_log") return PeakMethod::blob_log;
    throw validation_error("unknown peak method: " + s);
}

// Full decoding configuration. Defaults reproduce the reference pipeline:
// relative thresholding at half the volume maximum, local-maximum peaks with
// 5-voxel separation, distance filtering at 8 voxels, pairing cutoff 120.
struct DetectionConfig {
    ThresholdSpec threshold{};
    PeakMethod peak_method = PeakMethod::peak_local_max;
    PeakParams peak{};
    BlobLogParams blob{};
    FilterParams filter{};
    double pairing_max_distance = 120.0;

    void validate() const {
        threshold.validate();
        if (peak_method == PeakMethod::peak_local_max) {
            if (!(peak.min_distance >= 1.0))
                throw validation_error("config: min_distance_voxels must be >= 1");
        } else {
            blob.validate();
        }
        filter.validate();
        if (!(pairing_max_distance > 0.0))
            throw validation_error("config: pairing_max_distance_voxels must be > 0");
    }
};

struct ChannelReport {
    double tau = 0.0;
    bool tau_warning = false;
    std::int64_t mask_voxels = 0;
    std::uint32_t component_count = 0;
    std::int64_t peak_count = 0;
    std::int64_t filtered_count = 0;
};

struct DetectResult {
    PointSet pre_points;
    PointSet post_points;
    PairingResult pairing;
    ChannelReport pre_report;
    ChannelReport post_report;
};

// Extra volumes feeding relative_batch thresholding; unused by other modes.
struct BatchContext {
    std::vector<const Grid3<float>*> pre;
    std::vector<const Grid3<float>*> post;
};

namespace detail {

struct ChannelDecode {
    PointSet points;
    ChannelReport report;
};

inline ChannelDecode decode_channel(const Grid3<float>& prob, const DetectionConfig& cfg,
                                    const std::vector<const Grid3<float>*>& context,
                                    Channel channel, int threads) {
    ChannelDecode out;
    const ThresholdResult thr = threshold(prob, cfg.threshold, context, threads);
    out.report.tau = thr.tau;
    out.report.tau_warning = thr.warning;
    for (std::int64_t i = 0; i < thr.mask.size(); ++i)
        out.report.mask_voxels += thr.mask[i] ? 1 : 0;

    const ComponentLabels comps = connected_components(thr.mask, &prob);
    out.report.component_count = comps.count;

    PointSet peaks_set;
    if (cfg.peak_method == PeakMethod::peak_local_max) {
        const auto peaks = peak_local_max(prob, cfg.peak, &thr.mask, threads);
        peaks_set = peaks_to_points(peaks, channel);
    } else {
        peaks_set = blob_log(prob, cfg.blob, channel, threads);
    }
    out.report.peak_count = static_cast<std::int64_t>(peaks_set.points.size());

    out.points = filter_points(peaks_set, cfg.filter, &thr.mask);
    out.report.filtered_count = static_cast<std::int64_t>(out.points.points.size());
    return out;
}

} // namespace detail

// Complete probability-map decoding: threshold, component diagnostics, peak
// extraction, plausibility filtering, nearest-neighbour pairing. The returned
// report carries the chosen tau and the point count after every stage for
// each channel.
inline DetectResult detect(const Grid3<float>& pre_prob, const Grid3<float>& post_prob,
                           const DetectionConfig& cfg, const BatchContext& context = {},
                           int threads = 1) {
    cfg.validate();
    if (pre_prob.shape() != post_prob.shape())
        throw validation_error("detect: pre and post volumes must share a shape");

    DetectResult result;
    auto pre = detail::decode_channel(pre_prob, cfg, context.pre, Channel::pre, threads);
    auto post = detail::decode_channel(post_prob, cfg, context.post, Channel::post, threads);
    result.pre_points = std::move(pre.points);
    result.post_points = std::move(post.points);
    result.pre_report = pre.report;
    result.post_report = post.report;
    result.pairing = pair_synapses(result.pre_points, result.post_points,
                                   cfg.pairing_max_distance);
    return result;
}

} // namespace voxsyn
