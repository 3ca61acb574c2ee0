#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "voxsyn/error.hpp"
#include "voxsyn/grid.hpp"
#include "voxsyn/kdtree.hpp"
#include "voxsyn/points.hpp"

namespace voxsyn {

enum class FilterMode { none, by_distance, by_distance_and_mask };

inline std::string to_string(FilterMode m) {
    switch (m) {
        case FilterMode::none: return "none";
        case FilterMode::by_distance: return "by_distance";
        case FilterMode::by_distance_and_mask: return "by_distance_and_mask";
    }
    return "none";
}

inline FilterMode filter_mode_from_string(const std::string& s) {
    if (s == "none") return FilterMode::none;
    if (s == "by_distance") return FilterMode::by_distance;
    if (s == "by_distance_and_mask") return FilterMode::by_distance_and_mask;
    throw validation_error("unknown filter mode: " + s);
}

struct FilterParams {
    FilterMode mode = FilterMode::by_distance;
    double d_min = 8.0; // voxels

    void validate() const {
        if (mode != FilterMode::none && !(d_min >= 0.0))
            throw validation_error("filter_points: d_min must be >= 0");
    }
};

namespace detail {

// Priority order for greedy suppression: descending score when scores are
// present, ties by ascending id; without scores the order is ascending id.
inline std::vector<std::size_t> suppression_order(const PointSet& ps) {
    std::vector<std::size_t> order(ps.points.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&ps](std::size_t a, std::size_t b) {
        if (ps.has_scores && ps.points[a].score != ps.points[b].score)
            return ps.points[a].score > ps.points[b].score;
        return ps.points[a].id < ps.points[b].id;
    });
    return order;
}

inline bool voxel_in_mask(const Grid3<std::uint8_t>& mask, const Point& p) {
    const auto z = static_cast<std::int64_t>(std::llround(p.z));
    const auto y = static_cast<std::int64_t>(std::llround(p.y));
    const auto x = static_cast<std::int64_t>(std::llround(p.x));
    if (!mask.in_bounds(z, y, x)) return false;
    return mask.at(z, y, x) != 0;
}

} // namespace detail

// Distance/mask plausibility filtering of detected sites.
//
// none: identity. by_distance: greedy suppression in priority order (see
// suppression_order); a point is dropped when it lies within d_min (<=) of an
// already-kept point, so survivors are pairwise > d_min apart.
// by_distance_and_mask: additionally drops, before suppression, points whose
// nearest voxel (rounded, out-of-bounds counts as background) is mask
// background. Kept points are returned in ascending id order.
inline PointSet filter_points(const PointSet& points, const FilterParams& params,
                              const Grid3<std::uint8_t>* mask = nullptr) {
    params.validate();
    if (params.mode == FilterMode::none) return points;
    if (params.mode == FilterMode::by_distance_and_mask && !mask)
        throw validation_error("filter_points: mask mode requires a mask volume");

    std::vector<Point> eligible;
    eligible.reserve(points.points.size());
    for (const auto& p : points.points)
        if (params.mode != FilterMode::by_distance_and_mask ||
            detail::voxel_in_mask(*mask, p))
            eligible.push_back(p);

    PointSet pre;
    pre.channel = points.channel;
    pre.has_scores = points.has_scores;
    pre.points = std::move(eligible);

    const std::vector<std::size_t> order = detail::suppression_order(pre);
    const KdTree3 tree(pre.points);
    std::vector<char> kept(pre.points.size(), 0);
    std::vector<std::size_t> rank(pre.points.size(), 0);
    for (std::size_t r = 0; r < order.size(); ++r) rank[order[r]] = r;
    for (std::size_t r = 0; r < order.size(); ++r) {
        const std::size_t i = order[r];
        const Point& p = pre.points[i];
        bool ok = true;
        for (std::size_t j : tree.within_radius(p.z, p.y, p.x, params.d_min)) {
            if (j == i) continue;
            if (kept[j] && rank[j] < r) {
                ok = false;
                break;
            }
        }
        if (ok) kept[i] = 1;
    }

    PointSet out;
    out.channel = points.channel;
    out.has_scores = points.has_scores;
    for (std::size_t i = 0; i < pre.points.size(); ++i)
        if (kept[i]) out.points.push_back(pre.points[i]);
    std::sort(out.points.begin(), out.points.end(),
              [](const Point& a, const Point& b) { return a.id < b.id; });
    return out;
}

} // namespace voxsyn
