// Tests for plausibility filtering (filter_points), the KD-tree spatial
// index, and nearest-neighbour synapse pairing (pair_synapses).

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <set>
#include <vector>

#include "oracles.hpp"
#include "voxsyn/filters.hpp"
#include "voxsyn/grid.hpp"
#include "voxsyn/kdtree.hpp"
#include "voxsyn/pairing.hpp"
#include "voxsyn/points.hpp"
#include "voxsyn/rng.hpp"

using voxsyn::Channel;
using voxsyn::FilterMode;
using voxsyn::FilterParams;
using voxsyn::Grid3;
using voxsyn::KdTree3;
using voxsyn::NnBackend;
using voxsyn::PairingResult;
using voxsyn::Point;
using voxsyn::PointSet;
using voxsyn::Rng;
using voxsyn::Shape3;

namespace {

PointSet make_set(std::vector<Point> pts, bool scores, Channel ch = Channel::pre) {
    PointSet ps;
    ps.channel = ch;
    ps.has_scores = scores;
    ps.points = std::move(pts);
    return ps;
}

std::vector<std::int64_t> ids_of(const PointSet& ps) {
    std::vector<std::int64_t> ids;
    for (const Point& p : ps.points) ids.push_back(p.id);
    return ids;
}

PointSet random_points(Rng& rng, std::int64_t n, double extent, bool scores,
                       bool integer_coords = false) {
    PointSet ps;
    ps.has_scores = scores;
    for (std::int64_t i = 0; i < n; ++i) {
        Point p;
        p.id = i * 3 + 1; // non-contiguous ids so order by id != order by index
        if (integer_coords) {
            p.z = static_cast<double>(rng.uniform_index(static_cast<std::int64_t>(extent)));
            p.y = static_cast<double>(rng.uniform_index(static_cast<std::int64_t>(extent)));
            p.x = static_cast<double>(rng.uniform_index(static_cast<std::int64_t>(extent)));
        } else {
            p.z = rng.uniform01() * extent;
            p.y = rng.uniform01() * extent;
            p.x = rng.uniform01() * extent;
        }
        if (scores) {
            // quantised scores so ties between scores genuinely occur
            p.score = static_cast<float>(rng.uniform_index(8)) / 8.0f;
        }
        ps.points.push_back(p);
    }
    return ps;
}

} // namespace

TEST_CASE("filter_points keeps the higher-scoring of two close points") {
    PointSet ps = make_set({Point{0, 0, 0, 0, 0.9f}, Point{1, 0, 0, 2, 0.8f}}, true);
    FilterParams params;
    params.mode = FilterMode::by_distance;
    params.d_min = 5.0;
    const PointSet out = voxsyn::filter_points(ps, params);
    REQUIRE(out.points.size() == 1);
    CHECK(out.points[0].id == 0);
    CHECK(out.points[0].score == 0.9f);
    CHECK(out.has_scores);
}

TEST_CASE("filter_points mode none is the identity") {
    Rng rng(101);
    const PointSet ps = random_points(rng, 25, 40.0, true);
    FilterParams params;
    params.mode = FilterMode::none;
    params.d_min = -3.0; // ignored (and not validated) for the identity mode
    const PointSet out = voxsyn::filter_points(ps, params);
    REQUIRE(out.points.size() == ps.points.size());
    for (std::size_t i = 0; i < ps.points.size(); ++i) {
        CHECK(out.points[i].id == ps.points[i].id);
        CHECK(out.points[i].z == ps.points[i].z);
        CHECK(out.points[i].y == ps.points[i].y);
        CHECK(out.points[i].x == ps.points[i].x);
        CHECK(out.points[i].score == ps.points[i].score);
    }
    CHECK(out.channel == ps.channel);
    CHECK(out.has_scores == ps.has_scores);
}

TEST_CASE("filter_points without scores prioritises ascending id") {
    // Both points are within d_min of each other; without scores the
    // smaller id wins regardless of insertion order.
    PointSet ps = make_set({Point{5, 0, 0, 0, 0.0f}, Point{3, 0, 0, 2, 0.0f}}, false);
    FilterParams params;
    params.mode = FilterMode::by_distance;
    params.d_min = 5.0;
    const PointSet out = voxsyn::filter_points(ps, params);
    REQUIRE(out.points.size() == 1);
    CHECK(out.points[0].id == 3);
}

TEST_CASE("filter_points drops a point at exactly d_min and keeps one beyond") {
    // Suppression is inclusive (<= d_min removed), so survivors are
    // pairwise strictly farther than d_min apart.
    PointSet at = make_set({Point{0, 0, 0, 0, 0.9f}, Point{1, 0, 0, 5, 0.8f}}, true);
    PointSet beyond = make_set({Point{0, 0, 0, 0, 0.9f}, Point{1, 0, 0, 5.5, 0.8f}}, true);
    FilterParams params;
    params.mode = FilterMode::by_distance;
    params.d_min = 5.0;
    CHECK(voxsyn::filter_points(at, params).points.size() == 1);
    CHECK(voxsyn::filter_points(beyond, params).points.size() == 2);
}

TEST_CASE("filter_points mask mode requires a mask and applies it") {
    PointSet ps = make_set({Point{0, 1, 1, 1, 0.9f},   // foreground voxel
                            Point{1, 1, 1, 9, 0.8f},   // background voxel
                            Point{2, 1.4, 1.4, 0.6, 0.7f}, // rounds to fg (1,1,1)
                            Point{3, -4, 0, 0, 0.6f}}, // out of bounds -> dropped
                           true);
    Grid3<std::uint8_t> mask(Shape3{4, 4, 12}, 0);
    mask.at(1, 1, 1) = 1;

    FilterParams params;
    params.mode = FilterMode::by_distance_and_mask;
    params.d_min = 1.0;

    SECTION("missing mask throws") {
        REQUIRE_THROWS_AS(voxsyn::filter_points(ps, params), voxsyn::validation_error);
    }
    SECTION("mask prefilter happens before suppression") {
        const PointSet out = voxsyn::filter_points(ps, params, &mask);
        // ids 1 and 3 are removed by the mask; 0 and 2 both round to the
        // same foreground voxel and then suppress down to the higher score.
        REQUIRE(out.points.size() == 1);
        CHECK(out.points[0].id == 0);
    }
}

TEST_CASE("filter_points validates d_min") {
    PointSet ps = make_set({Point{0, 0, 0, 0, 0.5f}}, true);
    FilterParams params;
    params.mode = FilterMode::by_distance;
    params.d_min = -1.0;
    REQUIRE_THROWS_AS(voxsyn::filter_points(ps, params), voxsyn::validation_error);
}

TEST_CASE("filter_points matches the quadratic greedy oracle on random sets") {
    Rng rng(2024);
    for (int trial = 0; trial < 150; ++trial) {
        const bool scores = trial % 2 == 0;
        const bool use_mask = trial % 3 == 0;
        const bool integer = trial % 5 == 0; // integer coordinates force distance ties
        const std::int64_t n = 1 + rng.uniform_index(60);
        const double extent = 10.0 + rng.uniform01() * 20.0;
        PointSet ps = random_points(rng, n, extent, scores, integer);

        Grid3<std::uint8_t> mask =
            oracle::random_mask(rng, Shape3{32, 32, 32}, 0.6);
        FilterParams params;
        params.mode = use_mask ? FilterMode::by_distance_and_mask : FilterMode::by_distance;
        params.d_min = rng.uniform01() * 8.0;

        const PointSet out =
            voxsyn::filter_points(ps, params, use_mask ? &mask : nullptr);
        const std::vector<std::int64_t> expect =
            oracle::greedy_filter_ids(ps, params.d_min, use_mask ? &mask : nullptr);

        INFO("trial " << trial << " n=" << n << " d_min=" << params.d_min
                      << " scores=" << scores << " mask=" << use_mask);
        REQUIRE(ids_of(out) == expect);

        // survivors are pairwise strictly farther apart than d_min
        for (std::size_t i = 0; i < out.points.size(); ++i)
            for (std::size_t j = i + 1; j < out.points.size(); ++j)
                REQUIRE(voxsyn::distance(out.points[i], out.points[j]) > params.d_min);

        // output is sorted by ascending id
        REQUIRE(std::is_sorted(out.points.begin(), out.points.end(),
                               [](const Point& a, const Point& b) { return a.id < b.id; }));
    }
}

TEST_CASE("KdTree3 nearest matches the linear scan") {
    Rng rng(77);
    for (int trial = 0; trial < 80; ++trial) {
        const bool integer = trial % 2 == 0;
        const std::int64_t n = 1 + rng.uniform_index(80);
        const PointSet ps = random_points(rng, n, 12.0, false, integer);
        const KdTree3 tree(ps.points);
        for (int q = 0; q < 25; ++q) {
            const double z = integer ? static_cast<double>(rng.uniform_index(12))
                                     : rng.uniform01() * 12.0;
            const double y = integer ? static_cast<double>(rng.uniform_index(12))
                                     : rng.uniform01() * 12.0;
            const double x = integer ? static_cast<double>(rng.uniform_index(12))
                                     : rng.uniform01() * 12.0;
            const voxsyn::NearestHit hit = tree.nearest(z, y, x);
            const auto [oid, od2] = oracle::nearest_linear(ps.points, z, y, x);
            REQUIRE(hit.found);
            CHECK(ps.points[hit.index].id == oid);
            CHECK(hit.distance_sq == od2);
        }
    }
}

TEST_CASE("KdTree3 breaks exact distance ties toward the smaller id") {
    // Query sits exactly between two points; a third is farther away.
    std::vector<Point> pts = {Point{9, 0, 0, 4, 0.0f}, Point{2, 0, 0, 0, 0.0f},
                              Point{5, 0, 0, 9, 0.0f}};
    const KdTree3 tree(pts);
    const voxsyn::NearestHit hit = tree.nearest(0, 0, 2);
    REQUIRE(hit.found);
    CHECK(pts[hit.index].id == 2);
    CHECK(hit.distance_sq == 4.0);
}

TEST_CASE("KdTree3 on an empty set reports not found") {
    const KdTree3 tree(std::vector<Point>{});
    CHECK(tree.empty());
    CHECK_FALSE(tree.nearest(1, 2, 3).found);
    CHECK(tree.within_radius(1, 2, 3, 100.0).empty());
}

TEST_CASE("KdTree3 within_radius matches the linear scan as a set") {
    Rng rng(78);
    for (int trial = 0; trial < 60; ++trial) {
        const std::int64_t n = 1 + rng.uniform_index(70);
        const PointSet ps = random_points(rng, n, 10.0, false, trial % 2 == 0);
        const KdTree3 tree(ps.points);
        const double radius = rng.uniform01() * 6.0;
        for (int q = 0; q < 10; ++q) {
            const double z = rng.uniform01() * 10.0;
            const double y = rng.uniform01() * 10.0;
            const double x = rng.uniform01() * 10.0;
            std::vector<std::size_t> got = tree.within_radius(z, y, x, radius);
            std::sort(got.begin(), got.end());
            std::vector<std::size_t> expect;
            for (std::size_t i = 0; i < ps.points.size(); ++i) {
                const double dz = ps.points[i].z - z, dy = ps.points[i].y - y,
                             dx = ps.points[i].x - x;
                if (dz * dz + dy * dy + dx * dx <= radius * radius) expect.push_back(i);
            }
            REQUIRE(got == expect);
        }
    }
}

TEST_CASE("pair_synapses pairs a post with its nearest pre") {
    PointSet pre = make_set({Point{0, 0, 0, 0, 0.0f}, Point{1, 0, 0, 30, 0.0f}}, false,
                            Channel::pre);
    PointSet post = make_set({Point{7, 0, 0, 10, 0.0f}}, false, Channel::post);
    const PairingResult res = voxsyn::pair_synapses(pre, post, 120.0);
    REQUIRE(res.pairs.pairs.size() == 1);
    CHECK(res.pairs.pairs[0].pre_id == 0);
    CHECK(res.pairs.pairs[0].post_id == 7);
    CHECK(res.pairs.pairs[0].distance_voxels == 10.0);
    CHECK(res.unpaired_post_ids.empty());
}

TEST_CASE("pair_synapses breaks equidistant ties toward the smaller pre id") {
    PointSet pre = make_set({Point{6, 0, 0, 0, 0.0f}, Point{4, 0, 0, 8, 0.0f}}, false,
                            Channel::pre);
    PointSet post = make_set({Point{0, 0, 0, 4, 0.0f}}, false, Channel::post);
    const PairingResult res = voxsyn::pair_synapses(pre, post, 120.0);
    REQUIRE(res.pairs.pairs.size() == 1);
    CHECK(res.pairs.pairs[0].pre_id == 4);
    CHECK(res.pairs.pairs[0].distance_voxels == 4.0);
}

TEST_CASE("pair_synapses supports polyadic fan-out") {
    PointSet pre = make_set({Point{0, 0, 0, 0, 0.0f}, Point{1, 0, 0, 100, 0.0f}}, false,
                            Channel::pre);
    PointSet post = make_set({Point{10, 0, 0, 3, 0.0f}, Point{11, 0, 3, 0, 0.0f},
                              Point{12, 3, 0, 0, 0.0f}},
                             false, Channel::post);
    const PairingResult res = voxsyn::pair_synapses(pre, post, 120.0);
    REQUIRE(res.pairs.pairs.size() == 3);
    for (const auto& pair : res.pairs.pairs) {
        CHECK(pair.pre_id == 0);
        CHECK(pair.distance_voxels == 3.0);
    }
    // one post is never claimed twice
    res.pairs.validate_unique_posts();
}

TEST_CASE("pair_synapses leaves posts beyond max_distance unpaired") {
    PointSet pre = make_set({Point{0, 0, 0, 0, 0.0f}}, false, Channel::pre);
    PointSet post = make_set({Point{3, 0, 0, 5, 0.0f}, Point{1, 0, 0, 50, 0.0f},
                              Point{2, 0, 0, 5.0, 0.0f}},
                             false, Channel::post);
    const PairingResult res = voxsyn::pair_synapses(pre, post, 5.0);
    // distance exactly equal to max_distance still pairs (<= rule)
    REQUIRE(res.pairs.pairs.size() == 2);
    CHECK(res.pairs.pairs[0].post_id == 2);
    CHECK(res.pairs.pairs[1].post_id == 3);
    REQUIRE(res.unpaired_post_ids == std::vector<std::int64_t>{1});
}

TEST_CASE("pair_synapses with an empty pre set reports every post unpaired") {
    PointSet pre = make_set({}, false, Channel::pre);
    PointSet post = make_set({Point{5, 0, 0, 0, 0.0f}, Point{2, 1, 1, 1, 0.0f}}, false,
                             Channel::post);
    const PairingResult res = voxsyn::pair_synapses(pre, post, 10.0);
    CHECK(res.pairs.pairs.empty());
    REQUIRE(res.unpaired_post_ids == std::vector<std::int64_t>{2, 5});
}

TEST_CASE("pair_synapses validates max_distance") {
    PointSet pre = make_set({Point{0, 0, 0, 0, 0.0f}}, false, Channel::pre);
    PointSet post = make_set({Point{1, 0, 0, 1, 0.0f}}, false, Channel::post);
    REQUIRE_THROWS_AS(voxsyn::pair_synapses(pre, post, 0.0), voxsyn::validation_error);
    REQUIRE_THROWS_AS(voxsyn::pair_synapses(pre, post, -2.0), voxsyn::validation_error);
}

TEST_CASE("pair_synapses matches the exhaustive oracle on random instances") {
    Rng rng(4242);
    for (int trial = 0; trial < 120; ++trial) {
        const bool integer = trial % 2 == 0;
        const std::int64_t n_pre = 1 + rng.uniform_index(50);
        const std::int64_t n_post = 1 + rng.uniform_index(50);
        PointSet pre = random_points(rng, n_pre, 20.0, false, integer);
        PointSet post = random_points(rng, n_post, 20.0, false, integer);
        pre.channel = Channel::pre;
        post.channel = Channel::post;
        const double max_d = 2.0 + rng.uniform01() * 15.0;

        const PairingResult res = voxsyn::pair_synapses(pre, post, max_d);

        // oracle: nearest pre by linear scan, smaller id on ties
        std::size_t expect_pairs = 0;
        std::vector<std::int64_t> expect_unpaired;
        for (const Point& q : post.points) {
            const auto [oid, od2] = oracle::nearest_linear(pre.points, q.z, q.y, q.x);
            if (od2 <= max_d * max_d)
                ++expect_pairs;
            else
                expect_unpaired.push_back(q.id);
        }
        std::sort(expect_unpaired.begin(), expect_unpaired.end());

        REQUIRE(res.pairs.pairs.size() == expect_pairs);
        REQUIRE(res.unpaired_post_ids == expect_unpaired);
        for (const auto& pair : res.pairs.pairs) {
            const Point* q = nullptr;
            for (const Point& cand : post.points)
                if (cand.id == pair.post_id) q = &cand;
            REQUIRE(q != nullptr);
            const auto [oid, od2] = oracle::nearest_linear(pre.points, q->z, q->y, q->x);
            CHECK(pair.pre_id == oid);
            CHECK(pair.distance_voxels == std::sqrt(od2));
        }

        // pairs come back ordered by ascending post id
        REQUIRE(std::is_sorted(res.pairs.pairs.begin(), res.pairs.pairs.end(),
                               [](const voxsyn::SynapsePair& a, const voxsyn::SynapsePair& b) {
                                   return a.post_id < b.post_id;
                               }));
    }
}

TEST_CASE("pair_synapses backends agree around the automatic crossover") {
    Rng rng(905);
    for (std::int64_t n_pre : {1, 8, 31, 32, 33, 64}) {
        PointSet pre = random_points(rng, n_pre, 25.0, false);
        PointSet post = random_points(rng, 40, 25.0, false);
        pre.channel = Channel::pre;
        post.channel = Channel::post;
        const PairingResult a = voxsyn::pair_synapses(pre, post, 9.0, NnBackend::automatic);
        const PairingResult b = voxsyn::pair_synapses(pre, post, 9.0, NnBackend::kdtree);
        const PairingResult c = voxsyn::pair_synapses(pre, post, 9.0, NnBackend::exhaustive);
        REQUIRE(a.pairs.pairs.size() == b.pairs.pairs.size());
        REQUIRE(a.pairs.pairs.size() == c.pairs.pairs.size());
        for (std::size_t i = 0; i < a.pairs.pairs.size(); ++i) {
            CHECK(a.pairs.pairs[i].pre_id == b.pairs.pairs[i].pre_id);
            CHECK(a.pairs.pairs[i].pre_id == c.pairs.pairs[i].pre_id);
            CHECK(a.pairs.pairs[i].post_id == b.pairs.pairs[i].post_id);
            CHECK(a.pairs.pairs[i].post_id == c.pairs.pairs[i].post_id);
            CHECK(a.pairs.pairs[i].distance_voxels == b.pairs.pairs[i].distance_voxels);
            CHECK(a.pairs.pairs[i].distance_voxels == c.pairs.pairs[i].distance_voxels);
        }
        REQUIRE(a.unpaired_post_ids == b.unpaired_post_ids);
        REQUIRE(a.unpaired_post_ids == c.unpaired_post_ids);
    }
}
