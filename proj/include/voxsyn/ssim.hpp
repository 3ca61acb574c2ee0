#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "voxsyn/convolve.hpp"
#include "voxsyn/error.hpp"
#include "voxsyn/grid.hpp"

namespace voxsyn {

// Canonical single-scale SSIM parameters on data range 1.0, extended to 3D.
struct SsimParams {
    int window = 11;      // odd cube side
    double sigma = 1.5;   // Gaussian window
    double c1 = 0.01 * 0.01;
    double c2 = 0.03 * 0.03;
};

// Mean structural similarity between two equally shaped volumes in [0,1].
// Windowed statistics use a Gaussian window of `window`^3 support; the SSIM
// map is averaged over the valid region only, i.e. voxels whose window lies
// fully inside the volume (no padding enters the score). Every dimension must
// be >= window.
inline double ssim3d(const Grid3<float>& a, const Grid3<float>& b,
                     const SsimParams& params = {}, int threads = 1) {
    if (a.shape() != b.shape()) throw validation_error("ssim3d: shape mismatch");
    if (params.window < 3 || params.window % 2 == 0)
        throw validation_error("ssim3d: window must be odd and >= 3");
    const Shape3& shape = a.shape();
    const std::int64_t r = params.window / 2;
    for (int ax = 0; ax < 3; ++ax)
        if (shape[static_cast<std::size_t>(ax)] < params.window)
            throw validation_error("ssim3d: every dimension must be >= the window side");

    const std::int64_t n = a.size();
    const auto taps = detail::gaussian_taps(params.sigma, r);

    std::vector<double> va(static_cast<std::size_t>(n)), vb(static_cast<std::size_t>(n));
    std::vector<double> vaa(static_cast<std::size_t>(n)), vbb(static_cast<std::size_t>(n)),
        vab(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i) {
        const double x = a[i], y = b[i];
        va[static_cast<std::size_t>(i)] = x;
        vb[static_cast<std::size_t>(i)] = y;
        vaa[static_cast<std::size_t>(i)] = x * x;
        vbb[static_cast<std::size_t>(i)] = y * y;
        vab[static_cast<std::size_t>(i)] = x * y;
    }
    std::vector<double> out(static_cast<std::size_t>(n)), scratch(static_cast<std::size_t>(n));
    auto smooth = [&](std::vector<double>& v) {
        detail::blur3(v, out, scratch, shape, taps, threads);
        v.swap(out);
    };
    smooth(va);
    smooth(vb);
    smooth(vaa);
    smooth(vbb);
    smooth(vab);

    double total = 0.0;
    std::int64_t count = 0;
    for (std::int64_t z = r; z < shape[0] - r; ++z)
        for (std::int64_t y = r; y < shape[1] - r; ++y)
            for (std::int64_t x = r; x < shape[2] - r; ++x) {
                const auto i = static_cast<std::size_t>((z * shape[1] + y) * shape[2] + x);
                const double mu_a = va[i], mu_b = vb[i];
                const double var_a = vaa[i] - mu_a * mu_a;
                const double var_b = vbb[i] - mu_b * mu_b;
                const double cov = vab[i] - mu_a * mu_b;
                const double num = (2.0 * mu_a * mu_b + params.c1) * (2.0 * cov + params.c2);
                const double den = (mu_a * mu_a + mu_b * mu_b + params.c1) *
                                   (var_a + var_b + params.c2);
                total += num / den;
                ++count;
            }
    return total / static_cast<double>(count);
}

struct CosineResult {
    double value = 0.0;
    bool degenerate = false; // a zero vector was involved
};

// Cosine similarity of the flattened volumes; zero vectors yield 0, flagged.
inline CosineResult cosine(const Grid3<float>& a, const Grid3<float>& b) {
    if (a.shape() != b.shape()) throw validation_error("cosine: shape mismatch");
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::int64_t i = 0; i < a.size(); ++i) {
        const double x = a[i], y = b[i];
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    CosineResult out;
    if (na == 0.0 || nb == 0.0) {
        out.degenerate = true;
        return out;
    }
    out.value = dot / (std::sqrt(na) * std::sqrt(nb));
    return out;
}

} // namespace voxsyn
