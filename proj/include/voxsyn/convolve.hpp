#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "voxsyn/grid.hpp"
#include "voxsyn/parallel.hpp"

namespace voxsyn {
namespace detail {

// Sampled Gaussian taps over [-radius, radius], normalised to sum 1.
inline std::vector<double> gaussian_taps(double sigma, std::int64_t radius) {
    std::vector<double> w(static_cast<std::size_t>(2 * radius + 1));
    double sum = 0.0;
    for (std::int64_t k = -radius; k <= radius; ++k) {
        const double v = std::exp(-(static_cast<double>(k) * static_cast<double>(k)) /
                                  (2.0 * sigma * sigma));
        w[static_cast<std::size_t>(k + radius)] = v;
        sum += v;
    }
    for (auto& v : w) v /= sum;
    return w;
}

// Reflect indexing (edge value included): ... c b a | a b c ...
inline std::int64_t reflect_index(std::int64_t i, std::int64_t n) {
    while (i < 0 || i >= n) {
        if (i < 0) i = -i - 1;
        if (i >= n) i = 2 * n - 1 - i;
    }
    return i;
}

// One separable convolution pass along `axis` (0=z, 1=y, 2=x) with reflect
// boundary. Interior voxels whose full support lies in bounds are exact
// windowed sums, independent of the boundary rule.
inline void blur_axis(const std::vector<double>& in, std::vector<double>& out,
                      const Shape3& shape, int axis, const std::vector<double>& taps,
                      int threads) {
    const std::int64_t r = (static_cast<std::int64_t>(taps.size()) - 1) / 2;
    const std::int64_t nz = shape[0], ny = shape[1], nx = shape[2];
    const std::int64_t n = nz * ny * nx;
    const std::int64_t dim = shape[static_cast<std::size_t>(axis)];
    const std::int64_t stride = axis == 0 ? ny * nx : axis == 1 ? nx : 1;
    parallel_for(n, threads, [&](std::int64_t lo, std::int64_t hi) {
        for (std::int64_t i = lo; i < hi; ++i) {
            const std::int64_t z = i / (ny * nx);
            const std::int64_t y = (i / nx) % ny;
            const std::int64_t x = i % nx;
            const std::int64_t c = axis == 0 ? z : axis == 1 ? y : x;
            const std::int64_t base = i - c * stride;
            double acc = 0.0;
            for (std::int64_t k = -r; k <= r; ++k) {
                const std::int64_t j = reflect_index(c + k, dim);
                acc += taps[static_cast<std::size_t>(k + r)] *
                       in[static_cast<std::size_t>(base + j * stride)];
            }
            out[static_cast<std::size_t>(i)] = acc;
        }
    });
}

// Full separable 3D pass with the same taps on each axis.
inline void blur3(const std::vector<double>& in, std::vector<double>& out,
                  std::vector<double>& scratch, const Shape3& shape,
                  const std::vector<double>& taps, int threads) {
    blur_axis(in, out, shape, 0, taps, threads);
    blur_axis(out, scratch, shape, 1, taps, threads);
    blur_axis(scratch, out, shape, 2, taps, threads);
}

} // namespace detail
} // namespace voxsyn
