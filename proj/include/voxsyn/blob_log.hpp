#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "voxsyn/convolve.hpp"
#include "voxsyn/error.hpp"
#include "voxsyn/grid.hpp"
#include "voxsyn/parallel.hpp"
#include "voxsyn/points.hpp"

namespace voxsyn {

struct Blob {
    std::array<std::int64_t, 3> zyx{0, 0, 0};
    double sigma = 0.0;
    float response = 0.0f; // scale-normalised -sigma^2 * Laplacian(G_sigma * I)
};

struct BlobLogParams {
    double sigma_min = 2.0;
    double sigma_max = 4.0;
    int num_sigma = 5;
    float blob_threshold = 0.1f;

    void validate() const {
        if (!(sigma_min > 0.0)) throw validation_error("blob_log: sigma_min must be > 0");
        if (!(sigma_min < sigma_max))
            throw validation_error("blob_log: sigma_min must be < sigma_max");
        if (num_sigma < 1) throw validation_error("blob_log: num_sigma must be >= 1");
    }
};

namespace detail {

// 6-neighbour Laplacian with reflect boundary, negated and scale-normalised.
inline void log_response(const std::vector<double>& blurred, std::vector<float>& out,
                         const Shape3& shape, double sigma, int threads) {
    const std::int64_t nz = shape[0], ny = shape[1], nx = shape[2];
    const std::int64_t n = nz * ny * nx;
    const double s2 = sigma * sigma;
    parallel_for(n, threads, [&](std::int64_t lo, std::int64_t hi) {
        for (std::int64_t i = lo; i < hi; ++i) {
            const std::int64_t z = i / (ny * nx);
            const std::int64_t y = (i / nx) % ny;
            const std::int64_t x = i % nx;
            auto sample = [&](std::int64_t zz, std::int64_t yy, std::int64_t xx) {
                zz = reflect_index(zz, nz);
                yy = reflect_index(yy, ny);
                xx = reflect_index(xx, nx);
                return blurred[static_cast<std::size_t>((zz * ny + yy) * nx + xx)];
            };
            const double c = blurred[static_cast<std::size_t>(i)];
            const double lap = sample(z - 1, y, x) + sample(z + 1, y, x) +
                               sample(z, y - 1, x) + sample(z, y + 1, x) +
                               sample(z, y, x - 1) + sample(z, y, x + 1) - 6.0 * c;
            out[static_cast<std::size_t>(i)] = static_cast<float>(-s2 * lap);
        }
    });
}

} // namespace detail

inline std::vector<double> blob_scales(const BlobLogParams& params) {
    std::vector<double> scales(static_cast<std::size_t>(params.num_sigma));
    if (params.num_sigma == 1) {
        scales[0] = params.sigma_min;
        return scales;
    }
    const double step =
        (params.sigma_max - params.sigma_min) / static_cast<double>(params.num_sigma - 1);
    for (int s = 0; s < params.num_sigma; ++s)
        scales[static_cast<std::size_t>(s)] = params.sigma_min + step * s;
    return scales;
}

// Scale-normalised Laplacian-of-Gaussian blob detection.
//
// For each scale sigma in an inclusive linspace [sigma_min, sigma_max] the
// volume is Gaussian-blurred (separable, sampled taps truncated at 4*sigma,
// reflect boundary) and the response -sigma^2 * Laplacian is taken with a
// 6-neighbour stencil. Candidates are local maxima of the (space x scale)
// stack over the 3x3x3 spatial neighbourhood at adjacent scales with response
// >= blob_threshold. Candidates sorted by descending response (ties: ascending
// scale index, then linear voxel index) are pruned greedily: a blob is dropped
// when its centre lies closer than r1 + r2 (r = sigma * sqrt(3)) to a kept one.
inline std::vector<Blob> blob_log_detailed(const Grid3<float>& vol, const BlobLogParams& params,
                                           int threads = 1) {
    params.validate();
    const Shape3& shape = vol.shape();
    const std::int64_t n = vol.size();
    const std::vector<double> scales = blob_scales(params);
    const int num_s = params.num_sigma;

    std::vector<std::vector<float>> stack(static_cast<std::size_t>(num_s));
    std::vector<double> src(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i) src[static_cast<std::size_t>(i)] = vol[i];
    std::vector<double> tmp_a(static_cast<std::size_t>(n)), tmp_b(static_cast<std::size_t>(n));
    for (int s = 0; s < num_s; ++s) {
        const double sigma = scales[static_cast<std::size_t>(s)];
        const auto taps =
            detail::gaussian_taps(sigma, static_cast<std::int64_t>(std::ceil(4.0 * sigma)));
        detail::blur3(src, tmp_a, tmp_b, shape, taps, threads);
        auto& resp = stack[static_cast<std::size_t>(s)];
        resp.resize(static_cast<std::size_t>(n));
        detail::log_response(tmp_a, resp, shape, sigma, threads);
    }

    struct Cand {
        float response;
        int scale;
        std::int64_t lin;
    };
    std::vector<std::vector<Cand>> per_chunk(
        chunk_ranges(n * num_s, threads).size());
    parallel_for_chunks(n * num_s, threads, [&](std::size_t bucket, std::int64_t lo,
                                                std::int64_t hi) {
        auto& out = per_chunk[bucket];
        for (std::int64_t idx = lo; idx < hi; ++idx) {
            const int s = static_cast<int>(idx / n);
            const std::int64_t i = idx % n;
            const float v = stack[static_cast<std::size_t>(s)][static_cast<std::size_t>(i)];
            if (v < params.blob_threshold) continue;
            const auto zyx = vol.unravel(i);
            bool is_max = true;
            for (int ds = -1; ds <= 1 && is_max; ++ds) {
                const int ss = s + ds;
                if (ss < 0 || ss >= num_s) continue;
                const auto& layer = stack[static_cast<std::size_t>(ss)];
                for (std::int64_t dz = -1; dz <= 1 && is_max; ++dz)
                    for (std::int64_t dy = -1; dy <= 1 && is_max; ++dy)
                        for (std::int64_t dx = -1; dx <= 1; ++dx) {
                            const std::int64_t z = zyx[0] + dz, y = zyx[1] + dy,
                                               x = zyx[2] + dx;
                            if (!vol.in_bounds(z, y, x)) continue;
                            if (layer[static_cast<std::size_t>(vol.index(z, y, x))] > v) {
                                is_max = false;
                                break;
                            }
                        }
            }
            if (is_max) out.push_back({v, s, i});
        }
    });
    std::vector<Cand> cands;
    for (auto& c : per_chunk) cands.insert(cands.end(), c.begin(), c.end());
    std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
        if (a.response != b.response) return a.response > b.response;
        if (a.scale != b.scale) return a.scale < b.scale;
        return a.lin < b.lin;
    });

    const double sqrt3 = std::sqrt(3.0);
    std::vector<Blob> kept;
    for (const auto& c : cands) {
        const auto zyx = vol.unravel(c.lin);
        const double r1 = scales[static_cast<std::size_t>(c.scale)] * sqrt3;
        bool ok = true;
        for (const auto& b : kept) {
            const double r2 = b.sigma * sqrt3;
            const double dz = static_cast<double>(zyx[0] - b.zyx[0]);
            const double dy = static_cast<double>(zyx[1] - b.zyx[1]);
            const double dx = static_cast<double>(zyx[2] - b.zyx[2]);
            if (std::sqrt(dz * dz + dy * dy + dx * dx) < r1 + r2) {
                ok = false;
                break;
            }
        }
        if (ok) kept.push_back({zyx, scales[static_cast<std::size_t>(c.scale)], c.response});
    }
    return kept;
}

inline PointSet blob_log(const Grid3<float>& vol, const BlobLogParams& params, Channel channel,
                         int threads = 1) {
    const auto blobs = blob_log_detailed(vol, params, threads);
    PointSet ps;
    ps.channel = channel;
    ps.has_scores = true;
    ps.points.reserve(blobs.size());
    std::int64_t id = 0;
    for (const auto& b : blobs) {
        Point pt;
        pt.id = id++;
        pt.z = static_cast<double>(b.zyx[0]);
        pt.y = static_cast<double>(b.zyx[1]);
        pt.x = static_cast<double>(b.zyx[2]);
        pt.score = b.response;
        ps.points.push_back(pt);
    }
    return ps;
}

} // namespace voxsyn
