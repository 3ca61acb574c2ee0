#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>

#include "voxsyn/error.hpp"
#include "voxsyn/grid.hpp"
#include "voxsyn/points.hpp"

namespace voxsyn {

struct TargetConfig {
    double radius_voxels = 4.0;

    void validate() const {
        if (!(radius_voxels >= 1.0))
            throw validation_error("TargetConfig: radius_voxels must be >= 1, got " +
                                   std::to_string(radius_voxels));
    }
};

// Stamps a solid Euclidean ball of 1s around each point. Balls at volume
// edges are clipped; overlapping balls union.
inline void stamp_spheres(Grid3<std::uint8_t>& target, const PointSet& points, double radius) {
    const Shape3& shape = target.shape();
    const double r2 = radius * radius;
    for (const auto& p : points.points) {
        const std::int64_t z0 = std::max<std::int64_t>(0, static_cast<std::int64_t>(std::ceil(p.z - radius)));
        const std::int64_t z1 = std::min<std::int64_t>(shape[0] - 1, static_cast<std::int64_t>(std::floor(p.z + radius)));
        const std::int64_t y0 = std::max<std::int64_t>(0, static_cast<std::int64_t>(std::ceil(p.y - radius)));
        const std::int64_t y1 = std::min<std::int64_t>(shape[1] - 1, static_cast<std::int64_t>(std::floor(p.y + radius)));
        const std::int64_t x0 = std::max<std::int64_t>(0, static_cast<std::int64_t>(std::ceil(p.x - radius)));
        const std::int64_t x1 = std::min<std::int64_t>(shape[2] - 1, static_cast<std::int64_t>(std::floor(p.x + radius)));
        for (std::int64_t z = z0; z <= z1; ++z) {
            const double dz2 = (static_cast<double>(z) - p.z) * (static_cast<double>(z) - p.z);
            for (std::int64_t y = y0; y <= y1; ++y) {
                const double dy2 = (static_cast<double>(y) - p.y) * (static_cast<double>(y) - p.y);
                for (std::int64_t x = x0; x <= x1; ++x) {
                    const double dx2 = (static_cast<double>(x) - p.x) * (static_cast<double>(x) - p.x);
                    if (dz2 + dy2 + dx2 <= r2) target.at(z, y, x) = 1;
                }
            }
        }
    }
}

// Dual-channel binary training targets: voxel v is foreground in a channel
// iff some point c of that channel satisfies ||v - c|| <= radius.
inline std::pair<Grid3<std::uint8_t>, Grid3<std::uint8_t>>
render_targets(const PointSet& pre, const PointSet& post, const Shape3& shape,
               const TargetConfig& cfg) {
    cfg.validate();
    for (const PointSet* set : {&pre, &post}) {
        auto bad = set->ids_outside(shape);
        if (!bad.empty()) {
            std::string ids;
            for (std::size_t i = 0; i < bad.size(); ++i)
                ids += (i ? "," : "") + std::to_string(bad[i]);
            throw validation_error(std::string("render_targets: ") + to_string(set->channel) +
                                   " points outside volume " + shape_to_string(shape) +
                                   ": ids " + ids);
        }
    }
    Grid3<std::uint8_t> pre_target(shape, 0);
    Grid3<std::uint8_t> post_target(shape, 0);
    stamp_spheres(pre_target, pre, cfg.radius_voxels);
    stamp_spheres(post_target, post, cfg.radius_voxels);
    return {std::move(pre_target), std::move(post_target)};
}

// Foreground/background re-weighting by voxel counts: w_c = N / (2 * N_c).
// The expected total weight contributed by each class is then equal. An empty
// class gets weight 0 and the other class weight 1.
struct WeightMap {
    Grid3<float> grid;
    double fg_weight = 0.0;
    double bg_weight = 0.0;
};

inline WeightMap compute_weight_map(const Grid3<std::uint8_t>& target) {
    std::int64_t n_fg = 0;
    for (std::uint8_t v : target.data()) {
        if (v > 1)
            throw validation_error("compute_weight_map: target must be binary (0/1)");
        n_fg += v;
    }
    const std::int64_t n = target.size();
    const std::int64_t n_bg = n - n_fg;

    WeightMap wm;
    if (n_fg == 0) {
        wm.fg_weight = 0.0;
        wm.bg_weight = 1.0;
    } else if (n_bg == 0) {
        wm.fg_weight = 1.0;
        wm.bg_weight = 0.0;
    } else {
        wm.fg_weight = static_cast<double>(n) / (2.0 * static_cast<double>(n_fg));
        wm.bg_weight = static_cast<double>(n) / (2.0 * static_cast<double>(n_bg));
    }
    wm.grid = Grid3<float>(target.shape());
    const auto fg = static_cast<float>(wm.fg_weight);
    const auto bg = static_cast<float>(wm.bg_weight);
    for (std::int64_t i = 0; i < n; ++i) wm.grid[i] = target[i] ? fg : bg;
    return wm;
}

} // namespace voxsyn
