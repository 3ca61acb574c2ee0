#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "voxsyn/error.hpp"
#include "voxsyn/grid.hpp"
#include "voxsyn/parallel.hpp"

namespace voxsyn {

enum class ThresholdMode { manual, automatic, relative, relative_batch };

inline const char* to_string(ThresholdMode m) {
    switch (m) {
        case ThresholdMode::manual: return "manual";
        case ThresholdMode::automatic: return "auto";
        case ThresholdMode::relative: return "relative";
        case ThresholdMode::relative_batch: return "relative_batch";
    }
    return "manual";
}

inline ThresholdMode threshold_mode_from_string(const std::string& s) {
    if (s == "manual") return ThresholdMode::manual;
    if (s == "auto") return ThresholdMode::automatic;
    if (s == "relative") return ThresholdMode::relative;
    if (s == "relative_batch") return ThresholdMode::relative_batch;
    throw validation_error("unknown threshold mode \"" + s + "\"");
}

struct ThresholdSpec {
    ThresholdMode mode = ThresholdMode::relative;
    double tau_abs = 0.5; // manual
    double rho = 0.5;     // relative / relative_batch

    void validate() const {
        if (mode == ThresholdMode::manual && !(tau_abs >= 0.0 && tau_abs <= 1.0))
            throw validation_error("threshold.tau: must be in [0,1], got " +
                                   std::to_string(tau_abs));
        if ((mode == ThresholdMode::relative || mode == ThresholdMode::relative_batch) &&
            !(rho > 0.0 && rho <= 1.0))
            throw validation_error("threshold.rho: must be in (0,1], got " +
                                   std::to_string(rho));
    }
};

struct ThresholdResult {
    Grid3<std::uint8_t> mask;
    double tau = 0.0;
    bool warning = false; // relative threshold on an all-zero volume
};

namespace detail {

inline void check_prob(const Grid3<float>& prob) {
    for (float v : prob.data())
        if (!(v >= 0.0f && v <= 1.0f))
            throw validation_error("threshold: probability volume has value outside [0,1]");
}

inline float max_value(const Grid3<float>& prob, int threads) {
    const std::int64_t n = prob.size();
    const int t = clamp_threads(threads);
    std::vector<float> partial(static_cast<std::size_t>(t), 0.0f);
    const std::int64_t chunk = (n + t - 1) / t;
    parallel_for(static_cast<std::int64_t>(t), t, [&](std::int64_t b, std::int64_t e) {
        for (std::int64_t k = b; k < e; ++k) {
            const std::int64_t lo = k * chunk, hi = std::min(n, lo + chunk);
            float m = 0.0f;
            for (std::int64_t i = lo; i < hi; ++i) m = std::max(m, prob[i]);
            partial[static_cast<std::size_t>(k)] = m;
        }
    });
    float m = 0.0f;
    for (float v : partial) m = std::max(m, v);
    return m;
}

inline std::array<std::uint64_t, 256> histogram256(const Grid3<float>& prob, int threads) {
    const std::int64_t n = prob.size();
    const int t = clamp_threads(threads);
    std::vector<std::array<std::uint64_t, 256>> partial(
        static_cast<std::size_t>(t), std::array<std::uint64_t, 256>{});
    const std::int64_t chunk = (n + t - 1) / t;
    parallel_for(static_cast<std::int64_t>(t), t, [&](std::int64_t b, std::int64_t e) {
        for (std::int64_t k = b; k < e; ++k) {
            const std::int64_t lo = k * chunk, hi = std::min(n, lo + chunk);
            auto& h = partial[static_cast<std::size_t>(k)];
            for (std::int64_t i = lo; i < hi; ++i) {
                auto bin = static_cast<int>(prob[i] * 256.0f);
                if (bin > 255) bin = 255;
                ++h[static_cast<std::size_t>(bin)];
            }
        }
    });
    std::array<std::uint64_t, 256> hist{};
    for (const auto& h : partial)
        for (int b = 0; b < 256; ++b) hist[static_cast<std::size_t>(b)] += h[static_cast<std::size_t>(b)];
    return hist;
}

} // namespace detail

// Otsu's method on a 256-bin histogram of [0,1] values. Returns the threshold
// as the lower edge of the first foreground bin; ties pick the lowest bin.
inline double otsu_threshold(const std::array<std::uint64_t, 256>& hist) {
    double total = 0.0, total_sum = 0.0;
    for (int b = 0; b < 256; ++b) {
        total += static_cast<double>(hist[static_cast<std::size_t>(b)]);
        total_sum += static_cast<double>(b) * static_cast<double>(hist[static_cast<std::size_t>(b)]);
    }
    if (total == 0.0) return 0.0;
    double w0 = 0.0, sum0 = 0.0, best = -1.0;
    int best_bin = 0;
    for (int k = 0; k < 256; ++k) {
        w0 += static_cast<double>(hist[static_cast<std::size_t>(k)]);
        sum0 += static_cast<double>(k) * static_cast<double>(hist[static_cast<std::size_t>(k)]);
        const double w1 = total - w0;
        if (w0 == 0.0 || w1 == 0.0) continue;
        const double mu0 = sum0 / w0;
        const double mu1 = (total_sum - sum0) / w1;
        const double between = w0 * w1 * (mu0 - mu1) * (mu0 - mu1);
        if (between > best) {
            best = between;
            best_bin = k;
        }
    }
    return static_cast<double>(best_bin + 1) / 256.0;
}

// Binarize a probability volume. Output voxel = 1 iff prob >= tau, where tau
// comes from the selected mode. `context` is the batch for relative_batch
// (the input volume itself is always part of its batch).
inline ThresholdResult threshold(const Grid3<float>& prob, const ThresholdSpec& spec,
                                 const std::vector<const Grid3<float>*>& context = {},
                                 int threads = 1) {
    spec.validate();
    detail::check_prob(prob);

    ThresholdResult result;
    switch (spec.mode) {
        case ThresholdMode::manual:
            result.tau = spec.tau_abs;
            break;
        case ThresholdMode::automatic:
            result.tau = otsu_threshold(detail::histogram256(prob, threads));
            break;
        case ThresholdMode::relative: {
            const float m = detail::max_value(prob, threads);
            if (m == 0.0f) {
                result.tau = 0.0;
                result.warning = true;
                result.mask = Grid3<std::uint8_t>(prob.shape(), 0);
                return result;
            }
            result.tau = spec.rho * static_cast<double>(m);
            break;
        }
        case ThresholdMode::relative_batch: {
            float m = detail::max_value(prob, threads);
            for (const auto* other : context) {
                detail::check_prob(*other);
                m = std::max(m, detail::max_value(*other, threads));
            }
            if (m == 0.0f) {
                result.tau = 0.0;
                result.warning = true;
                result.mask = Grid3<std::uint8_t>(prob.shape(), 0);
                return result;
            }
            result.tau = spec.rho * static_cast<double>(m);
            break;
        }
    }

    result.mask = Grid3<std::uint8_t>(prob.shape(), 0);
    const auto tau = static_cast<float>(result.tau);
    auto& mask = result.mask;
    parallel_for(prob.size(), threads, [&](std::int64_t b, std::int64_t e) {
        for (std::int64_t i = b; i < e; ++i) mask[i] = prob[i] >= tau ? 1 : 0;
    });
    return result;
}

} // namespace voxsyn
