#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "voxsyn/error.hpp"
#include "voxsyn/kdtree.hpp"
#include "voxsyn/points.hpp"

namespace voxsyn {

enum class NnBackend {
    automatic, // kdtree for larger pre sets, exhaustive otherwise
    kdtree,
    exhaustive,
};

struct PairingResult {
    SynapsePairSet pairs;
    std::vector<std::int64_t> unpaired_post_ids; // ascending
};

// Nearest-neighbour pairing of post sites to pre sites.
//
// Each post is assigned its Euclidean-nearest pre (ties: ascending pre id)
// and a pair is emitted iff the distance is <= max_distance. Posts farther
// than that are reported unpaired. Many posts may share one pre (polyadic
// fan-out). Pairs are returned sorted by ascending post id. Both backends
// produce identical output; `automatic` picks by pre-set size.
inline PairingResult pair_synapses(const PointSet& pre, const PointSet& post,
                                   double max_distance,
                                   NnBackend backend = NnBackend::automatic) {
    if (!(max_distance > 0.0))
        throw validation_error("pair_synapses: max_distance must be > 0");
    const bool use_tree = backend == NnBackend::kdtree ||
                          (backend == NnBackend::automatic && pre.points.size() >= 32);

    PairingResult result;
    std::vector<std::size_t> post_order(post.points.size());
    for (std::size_t i = 0; i < post_order.size(); ++i) post_order[i] = i;
    std::sort(post_order.begin(), post_order.end(), [&post](std::size_t a, std::size_t b) {
        return post.points[a].id < post.points[b].id;
    });

    const KdTree3 tree(use_tree ? pre.points : std::vector<Point>{});
    const double max_d2 = max_distance * max_distance;
    for (std::size_t oi : post_order) {
        const Point& q = post.points[oi];
        const NearestHit hit = use_tree ? tree.nearest(q.z, q.y, q.x)
                                        : nearest_point_exhaustive(pre.points, q.z, q.y, q.x);
        if (!hit.found || hit.distance_sq > max_d2) {
            result.unpaired_post_ids.push_back(q.id);
            continue;
        }
        SynapsePair pair;
        pair.pre_id = pre.points[hit.index].id;
        pair.post_id = q.id;
        pair.distance_voxels = std::sqrt(hit.distance_sq);
        result.pairs.pairs.push_back(pair);
    }
    return result;
}

} // namespace voxsyn
