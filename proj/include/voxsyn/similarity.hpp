#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "voxsyn/error.hpp"
#include "voxsyn/parallel.hpp"
#include "voxsyn/patches.hpp"
#include "voxsyn/rng.hpp"
#include "voxsyn/ssim.hpp"

namespace voxsyn {

enum class Metric { ssim, cosine };

inline std::string to_string(Metric m) { return m == Metric::ssim ? "ssim" : "cosine"; }

inline Metric metric_from_string(const std::string& s) {
    if (s == "ssim") return Metric::ssim;
    if (s == "cosine") return Metric::cosine;
    throw validation_error("unknown metric: " + s);
}

struct SimilarityMatrix {
    std::vector<std::vector<double>> values;  // square, symmetric
    std::vector<std::vector<char>> defined;   // false where a cell has no pairs
    std::vector<std::string> labels;
    Metric metric = Metric::ssim;
    std::uint64_t seed = 0;
    std::int64_t pair_budget = 0;
    std::vector<std::vector<std::int64_t>> pair_counts; // pairs averaged per cell
};

// Mean pairwise similarity between patch groups. Off-diagonal cells average
// the metric over cross-group pairs, diagonal cells over distinct unordered
// within-group pairs. When a cell's pair population exceeds pair_budget the
// pairs are sampled with replacement from a per-cell seeded stream, so the
// matrix is reproducible for any thread count. Cells with no pairs (group of
// fewer than 2 patches on the diagonal, empty group anywhere) are undefined.
inline SimilarityMatrix similarity_matrix(const std::vector<PatchSet>& groups, Metric metric,
                                          std::uint64_t seed = 0,
                                          std::int64_t pair_budget = 10000, int threads = 1) {
    if (groups.empty()) throw validation_error("similarity_matrix: need at least one group");
    if (pair_budget < 1) throw validation_error("similarity_matrix: pair budget must be >= 1");
    const std::size_t ng = groups.size();
    for (std::size_t g = 1; g < ng; ++g)
        if (groups[g].size != groups[0].size)
            throw validation_error("similarity_matrix: groups disagree on patch size");

    SimilarityMatrix out;
    out.metric = metric;
    out.seed = seed;
    out.pair_budget = pair_budget;
    out.values.assign(ng, std::vector<double>(ng, 0.0));
    out.defined.assign(ng, std::vector<char>(ng, 0));
    out.pair_counts.assign(ng, std::vector<std::int64_t>(ng, 0));
    for (const auto& g : groups)
        out.labels.push_back(g.source_id.empty() ? "group" + std::to_string(out.labels.size())
                                                 : g.source_id);

    // Enumerate or sample every cell's pair list up front; metric evaluation
    // then fills a pre-sized slot per pair, making threading invisible.
    struct PairJob {
        std::size_t gi, gj;
        std::size_t pa, pb;
    };
    std::vector<PairJob> jobs;
    std::vector<std::pair<std::size_t, std::size_t>> cell_ranges; // [begin, end) into jobs
    std::vector<std::pair<std::size_t, std::size_t>> cell_ids;
    for (std::size_t i = 0; i < ng; ++i)
        for (std::size_t j = i; j < ng; ++j) {
            const std::size_t ni = groups[i].patches.size();
            const std::size_t nj = groups[j].patches.size();
            const std::size_t begin = jobs.size();
            if (i == j) {
                const std::uint64_t total =
                    ni < 2 ? 0 : static_cast<std::int64_t>(ni) * (ni - 1) / 2;
                if (total == 0) {
                    // undefined diagonal cell
                } else if (total <= static_cast<std::uint64_t>(pair_budget)) {
                    for (std::size_t a = 0; a < ni; ++a)
                        for (std::size_t b = a + 1; b < ni; ++b)
                            jobs.push_back({i, j, a, b});
                } else {
                    Rng rng(substream_seed(seed, static_cast<std::uint64_t>(i * ng + j)));
                    for (std::int64_t k = 0; k < pair_budget; ++k) {
                        const auto a = static_cast<std::size_t>(rng.uniform_index(
                            static_cast<std::int64_t>(ni)));
                        auto b = static_cast<std::size_t>(
                            rng.uniform_index(static_cast<std::int64_t>(ni - 1)));
                        if (b >= a) ++b;
                        jobs.push_back({i, j, a, b});
                    }
                }
            } else {
                const std::uint64_t total = static_cast<std::int64_t>(ni) * nj;
                if (total == 0) {
                    // undefined cross cell (an empty group)
                } else if (total <= static_cast<std::uint64_t>(pair_budget)) {
                    for (std::size_t a = 0; a < ni; ++a)
                        for (std::size_t b = 0; b < nj; ++b) jobs.push_back({i, j, a, b});
                } else {
                    Rng rng(substream_seed(seed, static_cast<std::uint64_t>(i * ng + j)));
                    for (std::int64_t k = 0; k < pair_budget; ++k) {
                        const auto a = static_cast<std::size_t>(
                            rng.uniform_index(static_cast<std::int64_t>(ni)));
                        const auto b = static_cast<std::size_t>(
                            rng.uniform_index(static_cast<std::int64_t>(nj)));
                        jobs.push_back({i, j, a, b});
                    }
                }
            }
            cell_ranges.emplace_back(begin, jobs.size());
            cell_ids.emplace_back(i, j);
        }

    std::vector<double> metric_values(jobs.size(), 0.0);
    parallel_for(static_cast<std::int64_t>(jobs.size()), threads,
                 [&](std::int64_t lo, std::int64_t hi) {
                     for (std::int64_t k = lo; k < hi; ++k) {
                         const PairJob& job = jobs[static_cast<std::size_t>(k)];
                         const auto& pa = groups[job.gi].patches[job.pa];
                         const auto& pb = groups[job.gj].patches[job.pb];
                         metric_values[static_cast<std::size_t>(k)] =
                             metric == Metric::ssim ? ssim3d(pa, pb) : cosine(pa, pb).value;
                     }
                 });

    for (std::size_t c = 0; c < cell_ranges.size(); ++c) {
        const auto [begin, end] = cell_ranges[c];
        const auto [i, j] = cell_ids[c];
        if (begin == end) continue; // stays undefined
        double sum = 0.0;
        for (std::size_t k = begin; k < end; ++k) sum += metric_values[k];
        const double mean = sum / static_cast<double>(end - begin);
        out.values[i][j] = mean;
        out.values[j][i] = mean;
        out.defined[i][j] = 1;
        out.defined[j][i] = 1;
        out.pair_counts[i][j] = static_cast<std::int64_t>(end - begin);
        out.pair_counts[j][i] = out.pair_counts[i][j];
    }
    return out;
}

} // namespace voxsyn
