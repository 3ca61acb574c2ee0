#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "voxsyn/error.hpp"
#include "voxsyn/grid.hpp"
#include "voxsyn/points.hpp"
#include "voxsyn/rng.hpp"

namespace voxsyn {

enum class RenderMode { gaussian, spheres };

inline std::string to_string(RenderMode m) {
    return m == RenderMode::gaussian ? "gaussian" : "spheres";
}

inline RenderMode render_mode_from_string(const std::string& s) {
    if (s == "gaussian") return RenderMode::gaussian;
    if (s == "spheres") return RenderMode::spheres;
    throw validation_error("unknown render mode: " + s);
}

// Synthetic scene parameters. The separation/margin knobs exist so planted
// configurations survive the decoding defaults: site separation stays above
// twice the distance-filter radius, and every post is closer to its own pre
// than to any other pre by at least nearest_margin.
struct SynthConfig {
    Shape3 shape{128, 128, 128};
    int n_synapses = 40;
    std::map<int, double> fanout{{1, 0.4}, {2, 0.3}, {3, 0.2}, {4, 0.1}};
    double pre_post_min = 8.0;  // own pre<->post distance range, voxels
    double pre_post_max = 16.0;
    double blob_sigma = 3.0;
    double noise_std = 0.05;
    double clutter_density = 0.0; // sub-threshold blobs per 1e6 voxels
    std::uint64_t seed = 0;

    double min_site_separation = 17.0; // within each channel
    double nearest_margin = 8.0;       // post-to-foreign-pre slack
    double border_margin = 10.0;       // keep sites this far from faces
    RenderMode render = RenderMode::gaussian;
    double sphere_radius = 4.0; // spheres render mode only
    int post_tries = 2000;
    int group_tries = 500;

    void validate() const {
        if (shape[0] < 1 || shape[1] < 1 || shape[2] < 1)
            throw validation_error("synth: shape components must be >= 1");
        if (n_synapses < 0) throw validation_error("synth: n_synapses must be >= 0");
        if (fanout.empty()) throw validation_error("synth: fanout distribution is empty");
        double sum = 0.0;
        for (const auto& [k, p] : fanout) {
            if (k < 1 || k > 5)
                throw validation_error("synth: fanout keys must be in 1..5");
            if (p < 0.0) throw validation_error("synth: fanout probabilities must be >= 0");
            sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-9)
            throw validation_error("synth: fanout probabilities must sum to 1");
        if (!(pre_post_min > 0.0) || !(pre_post_max >= pre_post_min))
            throw validation_error("synth: invalid pre/post distance range");
        if (!(blob_sigma > 0.0)) throw validation_error("synth: blob_sigma must be > 0");
        if (noise_std < 0.0) throw validation_error("synth: noise_std must be >= 0");
        if (clutter_density < 0.0)
            throw validation_error("synth: clutter_density must be >= 0");
        if (!(min_site_separation >= 0.0) || !(nearest_margin >= 0.0) ||
            !(border_margin >= 0.0))
            throw validation_error("synth: separations must be >= 0");
        if (!(sphere_radius >= 1.0))
            throw validation_error("synth: sphere_radius must be >= 1");
    }
};

struct SynthResult {
    PointSet pre;
    PointSet post;
    SynapsePairSet pairs;
    Grid3<float> pre_prob;
    Grid3<float> post_prob;
};

namespace detail {

struct Site {
    std::array<double, 3> zyx;
    std::int64_t owner_pre = -1; // for posts
};

inline double site_distance(const std::array<double, 3>& a, const std::array<double, 3>& b) {
    const double dz = a[0] - b[0], dy = a[1] - b[1], dx = a[2] - b[2];
    return std::sqrt(dz * dz + dy * dy + dx * dx);
}

// Adds a peak-1 Gaussian at `centre`, truncated at 4 sigma. Accumulation is
// clipped to [0,1] only after all blobs are in (callers do the clip).
inline void render_gaussian(Grid3<float>& vol, const std::array<double, 3>& centre,
                            double sigma, double peak) {
    const auto r = static_cast<std::int64_t>(std::ceil(4.0 * sigma));
    const Shape3& shape = vol.shape();
    const auto cz = static_cast<std::int64_t>(std::llround(centre[0]));
    const auto cy = static_cast<std::int64_t>(std::llround(centre[1]));
    const auto cx = static_cast<std::int64_t>(std::llround(centre[2]));
    const double inv = 1.0 / (2.0 * sigma * sigma);
    for (std::int64_t z = std::max<std::int64_t>(0, cz - r);
         z <= std::min(shape[0] - 1, cz + r); ++z)
        for (std::int64_t y = std::max<std::int64_t>(0, cy - r);
             y <= std::min(shape[1] - 1, cy + r); ++y)
            for (std::int64_t x = std::max<std::int64_t>(0, cx - r);
                 x <= std::min(shape[2] - 1, cx + r); ++x) {
                const double dz = static_cast<double>(z) - centre[0];
                const double dy = static_cast<double>(y) - centre[1];
                const double dx = static_cast<double>(x) - centre[2];
                const double d2 = dz * dz + dy * dy + dx * dx;
                vol.at(z, y, x) +=
                    static_cast<float>(peak * std::exp(-d2 * inv));
            }
}

inline void render_sphere(Grid3<float>& vol, const std::array<double, 3>& centre,
                          double radius) {
    const auto r = static_cast<std::int64_t>(std::ceil(radius));
    const Shape3& shape = vol.shape();
    const auto cz = static_cast<std::int64_t>(std::llround(centre[0]));
    const auto cy = static_cast<std::int64_t>(std::llround(centre[1]));
    const auto cx = static_cast<std::int64_t>(std::llround(centre[2]));
    const double r2 = radius * radius;
    for (std::int64_t z = std::max<std::int64_t>(0, cz - r);
         z <= std::min(shape[0] - 1, cz + r); ++z)
        for (std::int64_t y = std::max<std::int64_t>(0, cy - r);
             y <= std::min(shape[1] - 1, cy + r); ++y)
            for (std::int64_t x = std::max<std::int64_t>(0, cx - r);
                 x <= std::min(shape[2] - 1, cx + r); ++x) {
                const double dz = static_cast<double>(z - cz);
                const double dy = static_cast<double>(y - cy);
                const double dx = static_cast<double>(x - cx);
                if (dz * dz + dy * dy + dx * dx <= r2) vol.at(z, y, x) = 1.0f;
            }
}

inline void clip01(Grid3<float>& vol) {
    for (std::int64_t i = 0; i < vol.size(); ++i)
        vol[i] = std::min(1.0f, std::max(0.0f, vol[i]));
}

inline void add_noise(Grid3<float>& vol, double std_dev, Rng& rng) {
    if (std_dev <= 0.0) return;
    for (std::int64_t i = 0; i < vol.size(); ++i)
        vol[i] += static_cast<float>(std_dev * rng.normal());
}

// Uniform direction on the unit sphere from two engine-draw normals per axis.
inline std::array<double, 3> random_direction(Rng& rng) {
    while (true) {
        const double z = rng.normal(), y = rng.normal(), x = rng.normal();
        const double n = std::sqrt(z * z + y * y + x * x);
        if (n > 1e-12) return {z / n, y / n, x / n};
    }
}

} // namespace detail

// Plants pre sites (rejection-sampled to the separation constraints), draws a
// fan-out per pre from the configured distribution, places each post on a
// random offset within the distance range, then renders noisy probability
// volumes per channel. Sites live on integer voxel coordinates. Generation is
// single-threaded and consumes fixed RNG substreams (placement, per-channel
// noise, per-channel clutter), so a seed fully determines the result.
inline SynthResult generate(const SynthConfig& cfg) {
    cfg.validate();
    const Shape3& shape = cfg.shape;
    const auto margin = static_cast<std::int64_t>(std::ceil(cfg.border_margin));
    std::array<std::int64_t, 3> lo{}, extent{};
    for (int a = 0; a < 3; ++a) {
        const auto ai = static_cast<std::size_t>(a);
        lo[ai] = margin;
        extent[ai] = shape[ai] - 2 * margin;
        if (cfg.n_synapses > 0 && extent[ai] < 1)
            throw validation_error(
                "generate: shape too small for border margin; no room for sites");
    }

    Rng place(substream_seed(cfg.seed, 0));
    std::vector<detail::Site> pres;
    std::vector<detail::Site> posts;
    std::vector<int> fanouts;

    auto draw_site = [&]() -> std::array<double, 3> {
        return {static_cast<double>(lo[0] + place.uniform_index(extent[0])),
                static_cast<double>(lo[1] + place.uniform_index(extent[1])),
                static_cast<double>(lo[2] + place.uniform_index(extent[2]))};
    };
    auto draw_fanout = [&]() {
        const double u = place.uniform01();
        double cum = 0.0;
        int last = 1;
        for (const auto& [k, p] : cfg.fanout) {
            cum += p;
            last = k;
            if (u < cum) return k;
        }
        return last;
    };

    // rejection bookkeeping so packing failures can name their cause
    std::map<std::string, std::int64_t> rejects;

    for (int s = 0; s < cfg.n_synapses; ++s) {
        bool placed_group = false;
        for (int attempt = 0; attempt < cfg.group_tries && !placed_group; ++attempt) {
            const std::array<double, 3> pre_site = draw_site();
            bool ok = true;
            for (const auto& p : pres)
                if (detail::site_distance(p.zyx, pre_site) < cfg.min_site_separation) {
                    ok = false;
                    ++rejects["pre separation"];
                    break;
                }
            if (ok)
                // a new pre must not capture someone else's post: keep it
                // farther from every existing post than that post's own pre,
                // plus the margin
                for (const auto& q : posts) {
                    const double own = detail::site_distance(
                        q.zyx, pres[static_cast<std::size_t>(q.owner_pre)].zyx);
                    if (detail::site_distance(q.zyx, pre_site) < own + cfg.nearest_margin) {
                        ok = false;
                        ++rejects["pre vs foreign post margin"];
                        break;
                    }
                }
            if (!ok) continue;

            const int k = draw_fanout();
            std::vector<detail::Site> group_posts;
            bool group_ok = true;
            for (int j = 0; j < k && group_ok; ++j) {
                bool post_ok = false;
                for (int t = 0; t < cfg.post_tries && !post_ok; ++t) {
                    const auto dir = detail::random_direction(place);
                    const double rad = place.uniform(cfg.pre_post_min, cfg.pre_post_max);
                    std::array<double, 3> cand{};
                    bool in_bounds = true;
                    for (int a = 0; a < 3; ++a) {
                        const auto ai = static_cast<std::size_t>(a);
                        cand[ai] = std::llround(pre_site[ai] + rad * dir[ai]);
                        if (cand[ai] < static_cast<double>(lo[ai]) ||
                            cand[ai] > static_cast<double>(lo[ai] + extent[ai] - 1))
                            in_bounds = false;
                    }
                    if (!in_bounds) {
                        ++rejects["post bounds"];
                        continue;
                    }
                    const double own = detail::site_distance(cand, pre_site);
                    if (own < cfg.pre_post_min || own > cfg.pre_post_max) {
                        ++rejects["post distance range"];
                        continue;
                    }
                    bool clash = false;
                    for (const auto& q : posts)
                        if (detail::site_distance(q.zyx, cand) < cfg.min_site_separation) {
                            clash = true;
                            ++rejects["post separation"];
                            break;
                        }
                    if (!clash)
                        for (const auto& q : group_posts)
                            if (detail::site_distance(q.zyx, cand) <
                                cfg.min_site_separation) {
                                clash = true;
                                ++rejects["post separation"];
                                break;
                            }
                    if (!clash)
                        for (const auto& p : pres)
                            if (detail::site_distance(cand, p.zyx) <
                                own + cfg.nearest_margin) {
                                clash = true;
                                ++rejects["post vs foreign pre margin"];
                                break;
                            }
                    if (clash) continue;
                    detail::Site site;
                    site.zyx = cand;
                    site.owner_pre = static_cast<std::int64_t>(pres.size());
                    group_posts.push_back(site);
                    post_ok = true;
                }
                if (!post_ok) group_ok = false;
            }
            if (!group_ok) continue;

            pres.push_back({pre_site, -1});
            for (auto& gp : group_posts) posts.push_back(gp);
            fanouts.push_back(k);
            placed_group = true;
        }
        if (!placed_group) {
            std::string binding = "unknown";
            std::int64_t worst = -1;
            for (const auto& [name, count] : rejects)
                if (count > worst) {
                    worst = count;
                    binding = name;
                }
            throw validation_error("generate: failed to place synapse " + std::to_string(s) +
                                   " after " + std::to_string(cfg.group_tries) +
                                   " attempts; binding constraint: " + binding);
        }
    }

    SynthResult out;
    out.pre.channel = Channel::pre;
    out.post.channel = Channel::post;
    for (std::size_t i = 0; i < pres.size(); ++i) {
        Point p;
        p.id = static_cast<std::int64_t>(i);
        p.z = pres[i].zyx[0];
        p.y = pres[i].zyx[1];
        p.x = pres[i].zyx[2];
        out.pre.points.push_back(p);
    }
    for (std::size_t i = 0; i < posts.size(); ++i) {
        Point p;
        p.id = static_cast<std::int64_t>(i);
        p.z = posts[i].zyx[0];
        p.y = posts[i].zyx[1];
        p.x = posts[i].zyx[2];
        out.post.points.push_back(p);
        SynapsePair pair;
        pair.pre_id = posts[i].owner_pre;
        pair.post_id = p.id;
        pair.distance_voxels =
            detail::site_distance(posts[i].zyx, pres[static_cast<std::size_t>(posts[i].owner_pre)].zyx);
        out.pairs.pairs.push_back(pair);
    }

    out.pre_prob = Grid3<float>(shape, 0.0f);
    out.post_prob = Grid3<float>(shape, 0.0f);
    auto render_channel = [&](Grid3<float>& vol, const std::vector<detail::Site>& sites,
                              std::uint64_t noise_key, std::uint64_t clutter_key) {
        for (const auto& s : sites) {
            if (cfg.render == RenderMode::gaussian)
                detail::render_gaussian(vol, s.zyx, cfg.blob_sigma, 1.0);
            else
                detail::render_sphere(vol, s.zyx, cfg.sphere_radius);
        }
        const auto n_clutter = static_cast<std::int64_t>(
            std::llround(cfg.clutter_density * static_cast<double>(vol.size()) / 1e6));
        if (n_clutter > 0) {
            Rng clutter(substream_seed(cfg.seed, clutter_key));
            for (std::int64_t c = 0; c < n_clutter; ++c) {
                const std::array<double, 3> at = {
                    static_cast<double>(clutter.uniform_index(shape[0])),
                    static_cast<double>(clutter.uniform_index(shape[1])),
                    static_cast<double>(clutter.uniform_index(shape[2]))};
                const double peak = clutter.uniform(0.2, 0.5);
                detail::render_gaussian(vol, at, cfg.blob_sigma, peak);
            }
        }
        detail::clip01(vol);
        Rng noise(substream_seed(cfg.seed, noise_key));
        detail::add_noise(vol, cfg.noise_std, noise);
        detail::clip01(vol);
    };
    render_channel(out.pre_prob, pres, 1, 3);
    render_channel(out.post_prob, posts, 2, 4);
    return out;
}

// Annotation-noise model: each point independently dropped with probability
// drop_rate; survivors get isotropic Gaussian jitter of std jitter_std per
// axis. Ids are preserved.
inline PointSet corrupt_labels(const PointSet& truth, double drop_rate, double jitter_std,
                               std::uint64_t seed) {
    if (!(drop_rate >= 0.0 && drop_rate < 1.0))
        throw validation_error("corrupt_labels: drop_rate must be in [0,1)");
    if (jitter_std < 0.0)
        throw validation_error("corrupt_labels: jitter_std must be >= 0");
    Rng rng(substream_seed(seed, 0));
    PointSet out;
    out.channel = truth.channel;
    out.has_scores = truth.has_scores;
    for (const auto& p : truth.points) {
        if (rng.uniform01() < drop_rate) continue;
        Point q = p;
        if (jitter_std > 0.0) {
            q.z += jitter_std * rng.normal();
            q.y += jitter_std * rng.normal();
            q.x += jitter_std * rng.normal();
        }
        out.points.push_back(q);
    }
    return out;
}

} // namespace voxsyn
