#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "voxsyn/error.hpp"
#include "voxsyn/grid.hpp"
#include "voxsyn/parallel.hpp"
#include "voxsyn/points.hpp"

namespace voxsyn {

struct Peak {
    std::array<std::int64_t, 3> zyx{0, 0, 0};
    float value = 0.0f;
};

struct PeakParams {
    double min_distance = 5.0;   // voxels, Euclidean separation of accepted peaks
    float threshold_abs = 0.0f;  // minimum intensity for a candidate
};

// Local-maximum detection with minimum-separation suppression.
//
// A voxel is a candidate when its value is >= every voxel of the clipped
// Chebyshev box of radius floor(min_distance) around it (plateaus produce
// multiple candidates), its value is >= threshold_abs, and, when a mask is
// given, its mask voxel is foreground. Candidates are then accepted greedily
// in descending value order (ties by ascending linear index); a candidate is
// kept only if its Euclidean distance to every already-accepted peak exceeds
// min_distance. The returned list is in acceptance order.
inline std::vector<Peak> peak_local_max(const Grid3<float>& vol, const PeakParams& params,
                                        const Grid3<std::uint8_t>* mask = nullptr,
                                        int threads = 1) {
    if (!(params.min_distance >= 1.0))
        throw validation_error("peak_local_max: min_distance must be >= 1");
    if (mask && mask->shape() != vol.shape())
        throw validation_error("peak_local_max: mask shape does not match volume");

    const Shape3& shape = vol.shape();
    const std::int64_t r = static_cast<std::int64_t>(std::floor(params.min_distance));
    const std::int64_t n = vol.size();

    // The flat global background is never a peak: a candidate must exceed the
    // volume-wide minimum (so a constant volume has no peaks), while an
    // explicit threshold_abs floor is honoured inclusively.
    float vmin = vol[0];
    for (std::int64_t i = 1; i < n; ++i) vmin = std::min(vmin, vol[i]);

    struct Candidate {
        float value;
        std::int64_t lin;
    };
    std::vector<std::vector<Candidate>> per_chunk(chunk_ranges(n, threads).size());
    auto scan = [&](std::size_t bucket, std::int64_t lo, std::int64_t hi) {
        auto& out = per_chunk[bucket];
        for (std::int64_t i = lo; i < hi; ++i) {
            if (mask && !(*mask)[i]) continue;
            const float v = vol[i];
            if (v < params.threshold_abs || v <= vmin) continue;
            const auto zyx = vol.unravel(i);
            const std::int64_t z0 = std::max<std::int64_t>(0, zyx[0] - r);
            const std::int64_t y0 = std::max<std::int64_t>(0, zyx[1] - r);
            const std::int64_t x0 = std::max<std::int64_t>(0, zyx[2] - r);
            const std::int64_t z1 = std::min(shape[0] - 1, zyx[0] + r);
            const std::int64_t y1 = std::min(shape[1] - 1, zyx[1] + r);
            const std::int64_t x1 = std::min(shape[2] - 1, zyx[2] + r);
            bool is_max = true;
            for (std::int64_t z = z0; z <= z1 && is_max; ++z)
                for (std::int64_t y = y0; y <= y1 && is_max; ++y)
                    for (std::int64_t x = x0; x <= x1; ++x)
                        if (vol.at(z, y, x) > v) {
                            is_max = false;
                            break;
                        }
            if (is_max) out.push_back({v, i});
        }
    };
    parallel_for_chunks(n, threads, scan);

    std::vector<Candidate> cands;
    for (auto& v : per_chunk) cands.insert(cands.end(), v.begin(), v.end());
    std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
        if (a.value != b.value) return a.value > b.value;
        return a.lin < b.lin;
    });

    const double d2_min = params.min_distance * params.min_distance;
    std::vector<Peak> accepted;
    for (const auto& c : cands) {
        const auto zyx = vol.unravel(c.lin);
        bool ok = true;
        for (const auto& p : accepted) {
            const double dz = static_cast<double>(zyx[0] - p.zyx[0]);
            const double dy = static_cast<double>(zyx[1] - p.zyx[1]);
            const double dx = static_cast<double>(zyx[2] - p.zyx[2]);
            if (dz * dz + dy * dy + dx * dx <= d2_min) {
                ok = false;
                break;
            }
        }
        if (ok) accepted.push_back({zyx, c.value});
    }
    return accepted;
}

inline PointSet peaks_to_points(const std::vector<Peak>& peaks, Channel channel) {
    PointSet ps;
    ps.channel = channel;
    ps.has_scores = true;
    ps.points.reserve(peaks.size());
    std::int64_t id = 0;
    for (const auto& p : peaks) {
        Point pt;
        pt.id = id++;
        pt.z = static_cast<double>(p.zyx[0]);
        pt.y = static_cast<double>(p.zyx[1]);
        pt.x = static_cast<double>(p.zyx[2]);
        pt.score = p.value;
        ps.points.push_back(pt);
    }
    return ps;
}

} // namespace voxsyn
