#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "voxsyn/error.hpp"
#include "voxsyn/grid.hpp"
#include "voxsyn/points.hpp"

namespace voxsyn {

struct PatchSet {
    int size = 32;
    std::string source_id;                 // volume this set was cut from
    std::vector<Grid3<float>> patches;     // one cube per surviving site
    std::vector<std::int64_t> point_ids;   // site id per patch
    std::int64_t skipped = 0;              // sites whose cube did not fit
    bool normalized = true;
};

inline Grid3<float> to_float_grid(const Volume3D& vol) {
    if (!vol.is_uint8()) return vol.as_float();
    const auto& g = vol.as_uint8();
    Grid3<float> out(g.shape());
    for (std::int64_t i = 0; i < g.size(); ++i)
        out[i] = static_cast<float>(g[i]) / 255.0f;
    return out;
}

// Cuts a size^3 cube around each site's rounded coordinate. Cubes that do not
// fit entirely inside the volume are skipped and counted. With normalize on,
// each cube is min-max scaled to [0,1]; a constant cube maps to all zeros.
inline PatchSet extract_patches(const Grid3<float>& vol, const PointSet& sites, int size = 32,
                                bool normalize = true, std::string source_id = {}) {
    if (size < 2 || size % 2 != 0)
        throw validation_error("extract_patches: size must be even and >= 2");
    PatchSet out;
    out.size = size;
    out.source_id = std::move(source_id);
    out.normalized = normalize;
    const std::int64_t half = size / 2;
    const Shape3& shape = vol.shape();
    for (const auto& p : sites.points) {
        const std::array<std::int64_t, 3> c = {static_cast<std::int64_t>(std::llround(p.z)),
                                               static_cast<std::int64_t>(std::llround(p.y)),
                                               static_cast<std::int64_t>(std::llround(p.x))};
        bool fits = true;
        std::array<std::int64_t, 3> start{};
        for (int a = 0; a < 3; ++a) {
            const auto ai = static_cast<std::size_t>(a);
            start[ai] = c[ai] - half;
            if (start[ai] < 0 || start[ai] + size > shape[ai]) fits = false;
        }
        if (!fits) {
            ++out.skipped;
            continue;
        }
        Grid3<float> patch({size, size, size});
        float lo = vol.at(start[0], start[1], start[2]);
        float hi = lo;
        for (std::int64_t z = 0; z < size; ++z)
            for (std::int64_t y = 0; y < size; ++y)
                for (std::int64_t x = 0; x < size; ++x) {
                    const float v = vol.at(start[0] + z, start[1] + y, start[2] + x);
                    patch.at(z, y, x) = v;
                    lo = std::min(lo, v);
                    hi = std::max(hi, v);
                }
        if (normalize) {
            const float range = hi - lo;
            for (std::int64_t i = 0; i < patch.size(); ++i)
                patch[i] = range > 0.0f ? (patch[i] - lo) / range : 0.0f;
        }
        out.patches.push_back(std::move(patch));
        out.point_ids.push_back(p.id);
    }
    return out;
}

} // namespace voxsyn
