#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <vector>

#include "voxsyn/points.hpp"

namespace voxsyn {

// Query results identify points by their index in the vector the structure
// was built from. Ties on distance are broken by ascending point id, so the
// answer is independent of tree layout and matches the exhaustive scan.
struct NearestHit {
    std::size_t index = 0;
    double distance_sq = std::numeric_limits<double>::infinity();
    bool found = false;
};

inline NearestHit nearest_point_exhaustive(const std::vector<Point>& pts, double z, double y,
                                           double x) {
    NearestHit best;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const double dz = pts[i].z - z, dy = pts[i].y - y, dx = pts[i].x - x;
        const double d2 = dz * dz + dy * dy + dx * dx;
        if (!best.found || d2 < best.distance_sq ||
            (d2 == best.distance_sq && pts[i].id < pts[best.index].id)) {
            best.index = i;
            best.distance_sq = d2;
            best.found = true;
        }
    }
    return best;
}

class KdTree3 {
public:
    explicit KdTree3(const std::vector<Point>& pts) : pts_(pts) {
        if (pts_.empty()) return;
        std::vector<std::size_t> order(pts_.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        nodes_.reserve(pts_.size());
        root_ = build(order, 0, static_cast<std::int64_t>(order.size()));
    }

    bool empty() const { return pts_.empty(); }

    NearestHit nearest(double z, double y, double x) const {
        NearestHit best;
        if (root_ >= 0) search(root_, z, y, x, best);
        return best;
    }

    // Indices of all points with distance <= radius (any order).
    std::vector<std::size_t> within_radius(double z, double y, double x, double radius) const {
        std::vector<std::size_t> out;
        if (root_ >= 0) collect(root_, z, y, x, radius * radius, out);
        return out;
    }

private:
    struct Node {
        std::size_t point = 0;
        std::int32_t left = -1, right = -1;
        int axis = 0;
    };

    static double coord(const Point& p, int axis) {
        return axis == 0 ? p.z : axis == 1 ? p.y : p.x;
    }

    std::int32_t build(std::vector<std::size_t>& order, std::int64_t lo, std::int64_t hi) {
        if (lo >= hi) return -1;
        // split on the axis with the largest coordinate spread
        double mins[3], maxs[3];
        for (int a = 0; a < 3; ++a) {
            mins[a] = std::numeric_limits<double>::infinity();
            maxs[a] = -std::numeric_limits<double>::infinity();
        }
        for (std::int64_t i = lo; i < hi; ++i)
            for (int a = 0; a < 3; ++a) {
                const double c = coord(pts_[order[static_cast<std::size_t>(i)]], a);
                mins[a] = std::min(mins[a], c);
                maxs[a] = std::max(maxs[a], c);
            }
        int axis = 0;
        for (int a = 1; a < 3; ++a)
            if (maxs[a] - mins[a] > maxs[axis] - mins[axis]) axis = a;

        const std::int64_t mid = lo + (hi - lo) / 2;
        std::nth_element(order.begin() + lo, order.begin() + mid, order.begin() + hi,
                         [this, axis](std::size_t a, std::size_t b) {
                             const double ca = coord(pts_[a], axis), cb = coord(pts_[b], axis);
                             if (ca != cb) return ca < cb;
                             return pts_[a].id < pts_[b].id;
                         });
        Node node;
        node.point = order[static_cast<std::size_t>(mid)];
        node.axis = axis;
        const auto self = static_cast<std::int32_t>(nodes_.size());
        nodes_.push_back(node);
        const std::int32_t l = build(order, lo, mid);
        const std::int32_t r = build(order, mid + 1, hi);
        nodes_[static_cast<std::size_t>(self)].left = l;
        nodes_[static_cast<std::size_t>(self)].right = r;
        return self;
    }

    void search(std::int32_t ni, double z, double y, double x, NearestHit& best) const {
        const Node& node = nodes_[static_cast<std::size_t>(ni)];
        const Point& p = pts_[node.point];
        const double dz = p.z - z, dy = p.y - y, dx = p.x - x;
        const double d2 = dz * dz + dy * dy + dx * dx;
        if (!best.found || d2 < best.distance_sq ||
            (d2 == best.distance_sq && p.id < pts_[best.index].id)) {
            best.index = node.point;
            best.distance_sq = d2;
            best.found = true;
        }
        const double q = node.axis == 0 ? z : node.axis == 1 ? y : x;
        const double delta = q - coord(p, node.axis);
        const std::int32_t near = delta < 0 ? node.left : node.right;
        const std::int32_t far = delta < 0 ? node.right : node.left;
        if (near >= 0) search(near, z, y, x, best);
        // the far side can still hold an equal-distance point with a smaller
        // id, so it is visited on <= rather than <
        if (far >= 0 && delta * delta <= best.distance_sq) search(far, z, y, x, best);
    }

    void collect(std::int32_t ni, double z, double y, double x, double r2,
                 std::vector<std::size_t>& out) const {
        const Node& node = nodes_[static_cast<std::size_t>(ni)];
        const Point& p = pts_[node.point];
        const double dz = p.z - z, dy = p.y - y, dx = p.x - x;
        if (dz * dz + dy * dy + dx * dx <= r2) out.push_back(node.point);
        const double q = node.axis == 0 ? z : node.axis == 1 ? y : x;
        const double delta = q - coord(p, node.axis);
        const std::int32_t near = delta < 0 ? node.left : node.right;
        const std::int32_t far = delta < 0 ? node.right : node.left;
        if (near >= 0) collect(near, z, y, x, r2, out);
        if (far >= 0 && delta * delta <= r2) collect(far, z, y, x, r2, out);
    }

    std::vector<Point> pts_;
    std::vector<Node> nodes_;
    std::int32_t root_ = -1;
};

} // namespace voxsyn
