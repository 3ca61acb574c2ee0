#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "oracles.hpp"
#include "voxsyn/voxsyn.hpp"

using namespace voxsyn;

namespace {
std::int64_t count_fg(const Grid3<std::uint8_t>& g) {
    std::int64_t n = 0;
    for (std::int64_t i = 0; i < g.size(); ++i) n += g[i] ? 1 : 0;
    return n;
}

// Direct enumeration of |{v integer : ||v - c||_2 <= r}| inside the volume.
std::int64_t brute_sphere_count(const Shape3& shape, double cz, double cy, double cx,
                                double r) {
    std::int64_t n = 0;
    for (std::int64_t z = 0; z < shape[0]; ++z)
        for (std::int64_t y = 0; y < shape[1]; ++y)
            for (std::int64_t x = 0; x < shape[2]; ++x) {
                const double dz = z - cz, dy = y - cy, dx = x - cx;
                if (dz * dz + dy * dy + dx * dx <= r * r) ++n;
            }
    return n;
}

PointSet one_point(Channel ch, std::int64_t id, double z, double y, double x) {
    PointSet s;
    s.channel = ch;
    s.points.push_back(Point{id, z, y, x, 0.0f});
    return s;
}
} // namespace

TEST_CASE("radius-1 interior sphere is exactly the 7-voxel cross") {
    TargetConfig cfg;
    cfg.radius_voxels = 1.0;
    const auto [pre, post] = render_targets(one_point(Channel::pre, 0, 2, 2, 2),
                                            PointSet{Channel::post, {}, false}, {5, 5, 5},
                                            cfg);
    REQUIRE(count_fg(pre) == 7);
    REQUIRE(count_fg(post) == 0);
    REQUIRE(pre.at(2, 2, 2) == 1);
    REQUIRE(pre.at(1, 2, 2) == 1);
    REQUIRE(pre.at(3, 2, 2) == 1);
    REQUIRE(pre.at(2, 1, 2) == 1);
    REQUIRE(pre.at(2, 3, 2) == 1);
    REQUIRE(pre.at(2, 2, 1) == 1);
    REQUIRE(pre.at(2, 2, 3) == 1);
    REQUIRE(pre.at(1, 1, 2) == 0); // diagonal neighbour is sqrt(2) away
}

TEST_CASE("radius-4 interior sphere matches the brute-force enumeration") {
    TargetConfig cfg;
    cfg.radius_voxels = 4.0;
    const Shape3 shape{21, 21, 21};
    const auto [pre, post] =
        render_targets(one_point(Channel::pre, 0, 10, 10, 10),
                       PointSet{Channel::post, {}, false}, shape, cfg);
    const std::int64_t expected = brute_sphere_count(shape, 10, 10, 10, 4.0);
    REQUIRE(count_fg(pre) == expected);
    REQUIRE(expected == 257); // golden count for ||v||_2 <= 4 on the integer grid

    // every foreground voxel satisfies the distance predicate and vice versa
    for (std::int64_t z = 0; z < shape[0]; ++z)
        for (std::int64_t y = 0; y < shape[1]; ++y)
            for (std::int64_t x = 0; x < shape[2]; ++x) {
                const double d2 = (z - 10.0) * (z - 10.0) + (y - 10.0) * (y - 10.0) +
                                  (x - 10.0) * (x - 10.0);
                REQUIRE((pre.at(z, y, x) == 1) == (d2 <= 16.0));
            }
}

TEST_CASE("zero points render all-background channels") {
    const auto [pre, post] =
        render_targets(PointSet{Channel::pre, {}, false},
                       PointSet{Channel::post, {}, false}, {8, 8, 8}, TargetConfig{});
    REQUIRE(count_fg(pre) == 0);
    REQUIRE(count_fg(post) == 0);
}

TEST_CASE("spheres at the boundary are clipped, overlapping spheres union") {
    TargetConfig cfg;
    cfg.radius_voxels = 2.0;
    const Shape3 shape{9, 9, 9};
    PointSet pre;
    pre.channel = Channel::pre;
    pre.points.push_back(Point{0, 0, 0, 0, 0.0f}); // corner: clipped to one octant
    const auto [corner, unused] =
        render_targets(pre, PointSet{Channel::post, {}, false}, shape, cfg);
    REQUIRE(count_fg(corner) == brute_sphere_count(shape, 0, 0, 0, 2.0));

    PointSet two;
    two.channel = Channel::pre;
    two.points.push_back(Point{0, 4, 4, 3, 0.0f});
    two.points.push_back(Point{1, 4, 4, 5, 0.0f}); // overlapping: union, no double count
    const auto [overlap, unused2] =
        render_targets(two, PointSet{Channel::post, {}, false}, shape, cfg);
    std::int64_t brute = 0;
    for (std::int64_t z = 0; z < shape[0]; ++z)
        for (std::int64_t y = 0; y < shape[1]; ++y)
            for (std::int64_t x = 0; x < shape[2]; ++x) {
                const double a = (z - 4.) * (z - 4.) + (y - 4.) * (y - 4.) + (x - 3.) * (x - 3.);
                const double b = (z - 4.) * (z - 4.) + (y - 4.) * (y - 4.) + (x - 5.) * (x - 5.);
                if (a <= 4.0 || b <= 4.0) ++brute;
            }
    REQUIRE(count_fg(overlap) == brute);
}

TEST_CASE("foreground count is monotone in radius and channels are independent") {
    Rng rng(55);
    const Shape3 shape{16, 16, 16};
    PointSet pre, post;
    pre.channel = Channel::pre;
    post.channel = Channel::post;
    for (int i = 0; i < 3; ++i) {
        pre.points.push_back(Point{i, static_cast<double>(rng.uniform_index(16)),
                                   static_cast<double>(rng.uniform_index(16)),
                                   static_cast<double>(rng.uniform_index(16)), 0.0f});
        post.points.push_back(Point{i, static_cast<double>(rng.uniform_index(16)),
                                    static_cast<double>(rng.uniform_index(16)),
                                    static_cast<double>(rng.uniform_index(16)), 0.0f});
    }
    std::int64_t prev = -1;
    for (double r = 1.0; r <= 5.0; r += 0.5) {
        TargetConfig cfg;
        cfg.radius_voxels = r;
        const auto [pg, sg] = render_targets(pre, post, shape, cfg);
        REQUIRE(count_fg(pg) >= prev);
        prev = count_fg(pg);

        // PRE points never touch the POST channel and vice versa
        const auto [pre_only, empty_post] =
            render_targets(pre, PointSet{Channel::post, {}, false}, shape, cfg);
        const auto [empty_pre, post_only] =
            render_targets(PointSet{Channel::pre, {}, false}, post, shape, cfg);
        for (std::int64_t i = 0; i < pg.size(); ++i) {
            REQUIRE(pg[i] == pre_only[i]);
            REQUIRE(sg[i] == post_only[i]);
        }
        REQUIRE(count_fg(empty_post) == 0);
        REQUIRE(count_fg(empty_pre) == 0);
    }
}

TEST_CASE("points outside the volume raise an error naming the ids") {
    PointSet pre;
    pre.channel = Channel::pre;
    pre.points.push_back(Point{4, 2, 2, 2, 0.0f});
    pre.points.push_back(Point{9, 2, 2, 11, 0.0f});  // x out of bounds
    pre.points.push_back(Point{12, -1, 2, 2, 0.0f}); // z out of bounds
    try {
        render_targets(pre, PointSet{Channel::post, {}, false}, {8, 8, 8}, TargetConfig{});
        FAIL("expected validation_error");
    } catch (const validation_error& e) {
        const std::string msg = e.what();
        REQUIRE(msg.find("9") != std::string::npos);
        REQUIRE(msg.find("12") != std::string::npos);
    }
}

TEST_CASE("weight map implements inverse-frequency weighting") {
    Grid3<std::uint8_t> target({10, 10, 1}, 0);
    for (int i = 0; i < 10; ++i) target[i] = 1; // 10 fg of 100
    const WeightMap w = compute_weight_map(target);
    REQUIRE(w.fg_weight == Catch::Approx(5.0).epsilon(1e-12));
    REQUIRE(w.bg_weight == Catch::Approx(100.0 / 180.0).epsilon(1e-12));
    for (std::int64_t i = 0; i < target.size(); ++i)
        REQUIRE(w.grid[i] == (target[i] ? Catch::Approx(w.fg_weight)
                                        : Catch::Approx(w.bg_weight)));
}

TEST_CASE("weight map balance identity on random targets") {
    Rng rng(77);
    for (int it = 0; it < 20; ++it) {
        const Shape3 shape{2 + rng.uniform_index(8), 2 + rng.uniform_index(8),
                           2 + rng.uniform_index(8)};
        Grid3<std::uint8_t> target = oracle::random_mask(rng, shape, 0.3);
        std::int64_t fg = 0;
        for (std::int64_t i = 0; i < target.size(); ++i) fg += target[i];
        if (fg == 0 || fg == target.size()) continue;
        const WeightMap w = compute_weight_map(target);
        // balanced expected contribution: N_fg * w_fg == N_bg * w_bg
        const double fg_total = static_cast<double>(fg) * w.fg_weight;
        const double bg_total = static_cast<double>(target.size() - fg) * w.bg_weight;
        REQUIRE(fg_total == Catch::Approx(bg_total).epsilon(1e-9));
        REQUIRE(w.fg_weight > 0.0);
        REQUIRE(w.bg_weight > 0.0);
        // the stored grid carries the same weights at float precision
        for (std::int64_t i = 0; i < target.size(); ++i)
            REQUIRE(w.grid[i] == static_cast<float>(target[i] ? w.fg_weight : w.bg_weight));
    }
}

TEST_CASE("weight map degenerate rules") {
    Grid3<std::uint8_t> empty({4, 4, 4}, 0);
    const WeightMap we = compute_weight_map(empty);
    REQUIRE(we.fg_weight == 0.0);
    REQUIRE(we.bg_weight == 1.0);

    Grid3<std::uint8_t> full({4, 4, 4}, 1);
    const WeightMap wf = compute_weight_map(full);
    REQUIRE(wf.fg_weight == 1.0);
    REQUIRE(wf.bg_weight == 0.0);
}

TEST_CASE("target config validation") {
    TargetConfig cfg;
    cfg.radius_voxels = 0.5;
    REQUIRE_THROWS_AS(cfg.validate(), validation_error);
}
