#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "voxsyn/error.hpp"
#include "voxsyn/grid.hpp"

namespace voxsyn {

enum class Channel { pre, post };

inline const char* to_string(Channel c) { return c == Channel::pre ? "pre" : "post"; }

// A typed 3D point annotation in voxel coordinates (voxel-centre convention:
// voxel (z,y,x) sits at coordinate (z,y,x); valid bounds are [0, dim-1]).
struct Point {
    std::int64_t id = 0;
    double z = 0.0, y = 0.0, x = 0.0;
    float score = 0.0f;
};

inline double distance(const Point& a, const Point& b) {
    const double dz = a.z - b.z, dy = a.y - b.y, dx = a.x - b.x;
    return std::sqrt(dz * dz + dy * dy + dx * dx);
}

inline double squared_distance(const Point& a, const Point& b) {
    const double dz = a.z - b.z, dy = a.y - b.y, dx = a.x - b.x;
    return dz * dz + dy * dy + dx * dx;
}

struct PointSet {
    Channel channel = Channel::pre;
    std::vector<Point> points;
    bool has_scores = false;

    std::size_t size() const { return points.size(); }

    void validate_unique_ids() const {
        std::unordered_set<std::int64_t> seen;
        for (const auto& p : points)
            if (!seen.insert(p.id).second)
                throw format_error("PointSet: duplicate point id " + std::to_string(p.id));
    }

    // Ids of points outside [0, dim-1] on any axis; empty when all fit.
    std::vector<std::int64_t> ids_outside(const Shape3& shape) const {
        std::vector<std::int64_t> bad;
        for (const auto& p : points) {
            const bool ok = p.z >= 0.0 && p.z <= static_cast<double>(shape[0] - 1) &&
                            p.y >= 0.0 && p.y <= static_cast<double>(shape[1] - 1) &&
                            p.x >= 0.0 && p.x <= static_cast<double>(shape[2] - 1);
            if (!ok) bad.push_back(p.id);
        }
        return bad;
    }
};

// Directed pre -> post connection. One pre may fan out to many posts; each
// post has at most one pre partner.
struct SynapsePair {
    std::int64_t pre_id = 0;
    std::int64_t post_id = 0;
    double distance_voxels = 0.0;
};

struct SynapsePairSet {
    std::vector<SynapsePair> pairs;

    std::size_t size() const { return pairs.size(); }

    void validate_unique_posts() const {
        std::unordered_set<std::int64_t> seen;
        for (const auto& p : pairs)
            if (!seen.insert(p.post_id).second)
                throw format_error("SynapsePairSet: post id " + std::to_string(p.post_id) +
                                   " appears in more than one pair");
    }

    // Checks stored distances against the referenced point sets.
    void validate_distances(const PointSet& pre, const PointSet& post,
                            double tol = 1e-6) const {
        std::unordered_map<std::int64_t, const Point*> pre_by_id, post_by_id;
        for (const auto& p : pre.points) pre_by_id[p.id] = &p;
        for (const auto& p : post.points) post_by_id[p.id] = &p;
        for (const auto& pair : pairs) {
            auto itp = pre_by_id.find(pair.pre_id);
            auto itq = post_by_id.find(pair.post_id);
            if (itp == pre_by_id.end())
                throw validation_error("pair references unknown pre id " +
                                       std::to_string(pair.pre_id));
            if (itq == post_by_id.end())
                throw validation_error("pair references unknown post id " +
                                       std::to_string(pair.post_id));
            const double d = distance(*itp->second, *itq->second);
            if (std::abs(d - pair.distance_voxels) > tol)
                throw validation_error("pair (" + std::to_string(pair.pre_id) + "," +
                                       std::to_string(pair.post_id) + ") stores distance " +
                                       std::to_string(pair.distance_voxels) +
                                       " but points are " + std::to_string(d) + " apart");
        }
    }
};

} // namespace voxsyn
