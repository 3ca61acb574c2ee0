#pragma once

#include <array>
#include <cstdint>
#include <numeric>
#include <vector>

#include "voxsyn/error.hpp"
#include "voxsyn/grid.hpp"
#include "voxsyn/parallel.hpp"

namespace voxsyn {

// 26-connectivity neighbour offsets that precede a voxel in z-major order.
// Scanning with these covers every adjacent pair exactly once.
inline const std::array<std::array<int, 3>, 13>& backward_neighbours_26() {
    static const std::array<std::array<int, 3>, 13> offs = {{
        {-1, -1, -1}, {-1, -1, 0}, {-1, -1, 1},
        {-1, 0, -1},  {-1, 0, 0},  {-1, 0, 1},
        {-1, 1, -1},  {-1, 1, 0},  {-1, 1, 1},
        {0, -1, -1},  {0, -1, 0},  {0, -1, 1},
        {0, 0, -1},
    }};
    return offs;
}

struct ComponentStats {
    std::int64_t voxel_count = 0;
    std::array<double, 3> centroid{0, 0, 0};
    std::array<std::int64_t, 3> max_prob_voxel{0, 0, 0};
    float max_prob = 0.0f;
};

struct ComponentLabels {
    Grid3<std::uint32_t> labels; // 0 = background, components 1..count
    std::uint32_t count = 0;
    std::vector<ComponentStats> stats; // indexed by label-1
};

namespace detail {

class UnionFind {
public:
    explicit UnionFind(std::size_t n) : parent_(n) {
        std::iota(parent_.begin(), parent_.end(), std::uint32_t{0});
    }
    std::uint32_t find(std::uint32_t a) {
        while (parent_[a] != a) {
            parent_[a] = parent_[parent_[a]];
            a = parent_[a];
        }
        return a;
    }
    void unite(std::uint32_t a, std::uint32_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return;
        if (a < b) parent_[b] = a; else parent_[a] = b;
    }
    std::size_t size() const { return parent_.size(); }

private:
    std::vector<std::uint32_t> parent_;
};

// Relabels provisional labels to canonical 1..count, ordered by ascending
// minimum linear voxel index, and gathers per-component statistics.
inline ComponentLabels canonicalize(Grid3<std::uint32_t>&& provisional, UnionFind& uf,
                                    const Grid3<float>* prob) {
    ComponentLabels out;
    out.labels = std::move(provisional);
    std::vector<std::uint32_t> canonical(uf.size(), 0);
    std::uint32_t next = 0;
    auto& labels = out.labels;
    const std::int64_t n = labels.size();
    for (std::int64_t i = 0; i < n; ++i) {
        if (labels[i] == 0) continue;
        const std::uint32_t root = uf.find(labels[i]);
        if (canonical[root] == 0) canonical[root] = ++next;
        labels[i] = canonical[root];
    }
    out.count = next;
    out.stats.assign(next, ComponentStats{});
    std::vector<bool> seen(next, false);
    for (std::int64_t i = 0; i < n; ++i) {
        const std::uint32_t lab = labels[i];
        if (lab == 0) continue;
        auto& st = out.stats[lab - 1];
        const auto zyx = labels.unravel(i);
        st.voxel_count += 1;
        st.centroid[0] += static_cast<double>(zyx[0]);
        st.centroid[1] += static_cast<double>(zyx[1]);
        st.centroid[2] += static_cast<double>(zyx[2]);
        const float p = prob ? prob->at(zyx[0], zyx[1], zyx[2]) : 0.0f;
        if (!seen[lab - 1] || p > st.max_prob) {
            st.max_prob = p;
            st.max_prob_voxel = zyx;
            seen[lab - 1] = true;
        }
    }
    for (auto& st : out.stats)
        for (int a = 0; a < 3; ++a)
            st.centroid[static_cast<std::size_t>(a)] /= static_cast<double>(st.voxel_count);
    return out;
}

} // namespace detail

// Whole-volume 26-connected component labelling (two-pass union-find).
// Labels are canonically ordered by ascending minimum linear voxel index.
// `prob`, when given, must share the mask's shape and feeds the per-component
// max-probability voxel.
inline ComponentLabels connected_components(const Grid3<std::uint8_t>& mask,
                                            const Grid3<float>* prob = nullptr) {
    if (prob && prob->shape() != mask.shape())
        throw validation_error("connected_components: prob shape does not match mask");
    const Shape3& shape = mask.shape();
    Grid3<std::uint32_t> provisional(shape, 0);
    std::uint32_t next = 1;
    // worst case: one provisional label per foreground voxel of a checkerboard
    detail::UnionFind uf(static_cast<std::size_t>(mask.size() / 2 + 2));

    const auto& offs = backward_neighbours_26();
    for (std::int64_t z = 0; z < shape[0]; ++z)
        for (std::int64_t y = 0; y < shape[1]; ++y)
            for (std::int64_t x = 0; x < shape[2]; ++x) {
                if (!mask.at(z, y, x)) continue;
                std::uint32_t lab = 0;
                for (const auto& o : offs) {
                    const std::int64_t nz = z + o[0], ny = y + o[1], nx = x + o[2];
                    if (!mask.in_bounds(nz, ny, nx)) continue;
                    const std::uint32_t nl = provisional.at(nz, ny, nx);
                    if (nl == 0) continue;
                    if (lab == 0) lab = nl;
                    else uf.unite(lab, nl);
                }
                if (lab == 0) lab = next++;
                provisional.at(z, y, x) = lab;
            }
    return detail::canonicalize(std::move(provisional), uf, prob);
}

// Block-parallel variant: each block is labelled independently, then labels
// are merged across block seams with union-find. The block partition is
// non-overlapping. The result is identical to whole-volume labelling.
inline ComponentLabels connected_components_blocked(const Grid3<std::uint8_t>& mask,
                                                    const Shape3& block_shape,
                                                    const Grid3<float>* prob = nullptr,
                                                    int threads = 1) {
    if (prob && prob->shape() != mask.shape())
        throw validation_error("connected_components_blocked: prob shape does not match mask");
    const Shape3& shape = mask.shape();
    BlockSpec spec;
    spec.block_shape = block_shape;
    spec.overlap = {0, 0, 0};
    const std::vector<Block> blocks = iter_blocks(shape, spec);

    // Pass 1: local labelling per block, written into the global label volume
    // with a per-block base offset so provisional labels never collide.
    Grid3<std::uint32_t> provisional(shape, 0);
    std::vector<std::uint32_t> block_label_count(blocks.size(), 0);
    const auto& offs = backward_neighbours_26();

    auto label_block = [&](const Block& blk, std::uint32_t base) -> std::uint32_t {
        std::uint32_t local_next = 0;
        detail::UnionFind local_uf(static_cast<std::size_t>(
            voxel_count(blk.shape) / 2 + 2));
        const std::int64_t z1 = blk.origin[0] + blk.shape[0];
        const std::int64_t y1 = blk.origin[1] + blk.shape[1];
        const std::int64_t x1 = blk.origin[2] + blk.shape[2];
        for (std::int64_t z = blk.origin[0]; z < z1; ++z)
            for (std::int64_t y = blk.origin[1]; y < y1; ++y)
                for (std::int64_t x = blk.origin[2]; x < x1; ++x) {
                    if (!mask.at(z, y, x)) continue;
                    std::uint32_t lab = 0;
                    for (const auto& o : offs) {
                        const std::int64_t nz = z + o[0], ny = y + o[1], nx = x + o[2];
                        if (nz < blk.origin[0] || ny < blk.origin[1] || nx < blk.origin[2] ||
                            nz >= z1 || ny >= y1 || nx >= x1)
                            continue;
                        const std::uint32_t nl = provisional.at(nz, ny, nx);
                        if (nl == 0) continue;
                        if (lab == 0) lab = nl;
                        else local_uf.unite(lab - 1, nl - 1);
                    }
                    if (lab == 0) lab = ++local_next;
                    provisional.at(z, y, x) = lab;
                }
        // flatten local equivalences and shift by the block base
        std::vector<std::uint32_t> remap(local_next + 1, 0);
        std::uint32_t flat = 0;
        for (std::uint32_t l = 1; l <= local_next; ++l) {
            const std::uint32_t root = local_uf.find(l - 1) + 1;
            if (remap[root] == 0) remap[root] = ++flat;
            remap[l] = remap[root];
        }
        for (std::int64_t z = blk.origin[0]; z < z1; ++z)
            for (std::int64_t y = blk.origin[1]; y < y1; ++y)
                for (std::int64_t x = blk.origin[2]; x < x1; ++x) {
                    const std::uint32_t l = provisional.at(z, y, x);
                    if (l) provisional.at(z, y, x) = base + remap[l];
                }
        return flat;
    };

    // Upper bound on labels per block lets bases be precomputed so the pass
    // is order-independent under threading.
    std::vector<std::uint32_t> base(blocks.size(), 0);
    std::uint32_t acc = 0;
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        base[b] = acc;
        acc += static_cast<std::uint32_t>(voxel_count(blocks[b].shape) / 2 + 1);
    }
    parallel_for(static_cast<std::int64_t>(blocks.size()), threads,
                 [&](std::int64_t lo, std::int64_t hi) {
                     for (std::int64_t b = lo; b < hi; ++b)
                         block_label_count[static_cast<std::size_t>(b)] =
                             label_block(blocks[static_cast<std::size_t>(b)],
                                         base[static_cast<std::size_t>(b)]);
                 });

    // Pass 2: merge across seams. A voxel pair spans a seam when its two
    // endpoints fall in different blocks; checking backward neighbours of
    // every voxel near a block face covers all such pairs.
    detail::UnionFind uf(static_cast<std::size_t>(acc) + 1);
    auto block_index_of = [&](std::int64_t z, std::int64_t y, std::int64_t x) {
        // blocks are laid out on a z-major grid of per-axis origin lists
        std::array<std::int64_t, 3> counts{}, idx{};
        for (int a = 0; a < 3; ++a) {
            const auto ai = static_cast<std::size_t>(a);
            const std::int64_t step = block_shape[ai];
            const std::int64_t dim = shape[ai];
            counts[ai] = (dim + step - 1) / step;
            const std::int64_t c = (a == 0 ? z : a == 1 ? y : x) / step;
            idx[ai] = std::min(c, counts[ai] - 1);
        }
        return (idx[0] * counts[1] + idx[1]) * counts[2] + idx[2];
    };
    for (std::int64_t z = 0; z < shape[0]; ++z)
        for (std::int64_t y = 0; y < shape[1]; ++y)
            for (std::int64_t x = 0; x < shape[2]; ++x) {
                const std::uint32_t lab = provisional.at(z, y, x);
                if (!lab) continue;
                // backward offsets reach -1 in z but +/-1 in y and x, so both
                // the entering and leaving faces of a block can host seam pairs
                const bool near_seam = (z % block_shape[0] == 0) ||
                                       (y % block_shape[1] == 0) ||
                                       (y % block_shape[1] == block_shape[1] - 1) ||
                                       (x % block_shape[2] == 0) ||
                                       (x % block_shape[2] == block_shape[2] - 1);
                if (!near_seam) continue;
                const std::int64_t self_block = block_index_of(z, y, x);
                for (const auto& o : offs) {
                    const std::int64_t nz = z + o[0], ny = y + o[1], nx = x + o[2];
                    if (!mask.in_bounds(nz, ny, nx)) continue;
                    const std::uint32_t nl = provisional.at(nz, ny, nx);
                    if (!nl) continue;
                    if (block_index_of(nz, ny, nx) != self_block) uf.unite(lab, nl);
                }
            }
    return detail::canonicalize(std::move(provisional), uf, prob);
}

} // namespace voxsyn
