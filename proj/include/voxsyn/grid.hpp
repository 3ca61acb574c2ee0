#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "voxsyn/error.hpp"

namespace voxsyn {

// All coordinates and shapes follow the (z, y, x) convention with z-major
// (C-order) linear layout. Index 0 is z everywhere.
using Shape3 = std::array<std::int64_t, 3>;

inline std::int64_t voxel_count(const Shape3& s) { return s[0] * s[1] * s[2]; }

inline std::string shape_to_string(const Shape3& s) {
    return "(" + std::to_string(s[0]) + "," + std::to_string(s[1]) + "," +
           std::to_string(s[2]) + ")";
}

// Dense 3D scalar grid.
template <typename T>
class Grid3 {
public:
    Grid3() : shape_{0, 0, 0} {}

    explicit Grid3(const Shape3& shape, T fill = T{}) : shape_(shape) {
        if (shape[0] < 1 || shape[1] < 1 || shape[2] < 1)
            throw validation_error("Grid3: shape components must be >= 1, got " +
                                   shape_to_string(shape));
        data_.assign(static_cast<std::size_t>(voxel_count(shape)), fill);
    }

    Grid3(const Shape3& shape, std::vector<T> data) : shape_(shape), data_(std::move(data)) {
        if (shape[0] < 1 || shape[1] < 1 || shape[2] < 1)
            throw validation_error("Grid3: shape components must be >= 1, got " +
                                   shape_to_string(shape));
        if (static_cast<std::int64_t>(data_.size()) != voxel_count(shape))
            throw validation_error("Grid3: data length " + std::to_string(data_.size()) +
                                   " does not match shape " + shape_to_string(shape));
    }

    const Shape3& shape() const { return shape_; }
    std::int64_t dim(int axis) const { return shape_[static_cast<std::size_t>(axis)]; }
    std::int64_t size() const { return static_cast<std::int64_t>(data_.size()); }

    std::int64_t index(std::int64_t z, std::int64_t y, std::int64_t x) const {
        return (z * shape_[1] + y) * shape_[2] + x;
    }

    bool in_bounds(std::int64_t z, std::int64_t y, std::int64_t x) const {
        return z >= 0 && z < shape_[0] && y >= 0 && y < shape_[1] && x >= 0 && x < shape_[2];
    }

    T& at(std::int64_t z, std::int64_t y, std::int64_t x) {
        return data_[static_cast<std::size_t>(index(z, y, x))];
    }
    const T& at(std::int64_t z, std::int64_t y, std::int64_t x) const {
        return data_[static_cast<std::size_t>(index(z, y, x))];
    }

    T& operator[](std::int64_t i) { return data_[static_cast<std::size_t>(i)]; }
    const T& operator[](std::int64_t i) const { return data_[static_cast<std::size_t>(i)]; }

    std::vector<T>& data() { return data_; }
    const std::vector<T>& data() const { return data_; }

    // Decompose a linear index back into (z, y, x).
    std::array<std::int64_t, 3> unravel(std::int64_t i) const {
        const std::int64_t x = i % shape_[2];
        const std::int64_t y = (i / shape_[2]) % shape_[1];
        const std::int64_t z = i / (shape_[2] * shape_[1]);
        return {z, y, x};
    }

    bool operator==(const Grid3& other) const {
        return shape_ == other.shape_ && data_ == other.data_;
    }

private:
    Shape3 shape_;
    std::vector<T> data_;
};

enum class VolumeKind { raw, prob, label };

inline const char* to_string(VolumeKind k) {
    switch (k) {
        case VolumeKind::raw: return "raw";
        case VolumeKind::prob: return "prob";
        case VolumeKind::label: return "label";
    }
    return "raw";
}

struct VolumeMeta {
    std::array<double, 3> voxel_size_nm{8.0, 8.0, 8.0};
    VolumeKind kind = VolumeKind::raw;
};

// A volume as it exists on disk: uint8 or float32 payload plus metadata.
struct Volume3D {
    std::variant<Grid3<std::uint8_t>, Grid3<float>> grid;
    VolumeMeta meta;

    const Shape3& shape() const {
        return std::visit([](const auto& g) -> const Shape3& { return g.shape(); }, grid);
    }
    bool is_uint8() const { return grid.index() == 0; }
    const Grid3<std::uint8_t>& as_uint8() const { return std::get<Grid3<std::uint8_t>>(grid); }
    const Grid3<float>& as_float() const { return std::get<Grid3<float>>(grid); }
};

// Block decomposition of a volume. Blocks at the far boundary are shrunk to
// fit, never padded.
struct BlockSpec {
    Shape3 block_shape{64, 64, 64};
    Shape3 overlap{0, 0, 0};

    void validate() const {
        for (int a = 0; a < 3; ++a) {
            auto ai = static_cast<std::size_t>(a);
            if (block_shape[ai] < 1)
                throw validation_error("BlockSpec: block_shape must be >= 1 per axis");
            if (overlap[ai] < 0 || overlap[ai] >= block_shape[ai])
                throw validation_error("BlockSpec: overlap must satisfy 0 <= overlap < block_shape");
        }
    }
};

struct Block {
    Shape3 origin;
    Shape3 shape;
};

// Deterministic z-major tiling. Origins advance by (block - overlap) per axis;
// every voxel is covered and interior neighbours share exactly `overlap`.
inline std::vector<Block> iter_blocks(const Shape3& volume_shape, const BlockSpec& spec) {
    spec.validate();
    std::array<std::vector<std::int64_t>, 3> axis_origins;
    for (int a = 0; a < 3; ++a) {
        auto ai = static_cast<std::size_t>(a);
        const std::int64_t dim = volume_shape[ai];
        const std::int64_t step = spec.block_shape[ai] - spec.overlap[ai];
        for (std::int64_t o = 0; o < dim; o += step) axis_origins[ai].push_back(o);
    }
    std::vector<Block> blocks;
    blocks.reserve(axis_origins[0].size() * axis_origins[1].size() * axis_origins[2].size());
    for (std::int64_t oz : axis_origins[0])
        for (std::int64_t oy : axis_origins[1])
            for (std::int64_t ox : axis_origins[2]) {
                Block b;
                b.origin = {oz, oy, ox};
                b.shape = {std::min(spec.block_shape[0], volume_shape[0] - oz),
                           std::min(spec.block_shape[1], volume_shape[1] - oy),
                           std::min(spec.block_shape[2], volume_shape[2] - ox)};
                blocks.push_back(b);
            }
    return blocks;
}

// Copy of the voxels under `block`; read-only use.
template <typename T>
Grid3<T> extract_block(const Grid3<T>& vol, const Block& block) {
    Grid3<T> out(block.shape);
    for (std::int64_t z = 0; z < block.shape[0]; ++z)
        for (std::int64_t y = 0; y < block.shape[1]; ++y) {
            const T* src = &vol.at(block.origin[0] + z, block.origin[1] + y, block.origin[2]);
            T* dst = &out.at(z, y, 0);
            std::copy(src, src + block.shape[2], dst);
        }
    return out;
}

} // namespace voxsyn
