// SPDX-FileCopyrightText: 2026 The voxnt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "voxnt/error.hpp"

namespace voxnt {

inline constexpr std::uint16_t kEmptyClass = 0;
inline constexpr std::uint16_t kIgnoreLabel = 255;
inline constexpr std::uint16_t kDefaultNumClasses = 20;
inline constexpr double kDefaultVoxelSizeM = 0.2;

enum class Axis : std::uint8_t { X = 0, Y = 1, Z = 2 };

inline constexpr std::array<Axis, 3> kAxes = {Axis::X, Axis::Y, Axis::Z};

// Channel order of every offset field: x+, x-, y+, y-, z+, z-.
enum class Direction : std::uint8_t { XPos = 0, XNeg, YPos, YNeg, ZPos, ZNeg };

inline constexpr std::array<Direction, 6> kDirections = {
    Direction::XPos, Direction::XNeg, Direction::YPos,
    Direction::YNeg, Direction::ZPos, Direction::ZNeg};

constexpr Axis axis_of(Direction d) { return static_cast<Axis>(static_cast<int>(d) / 2); }
constexpr bool is_positive(Direction d) { return static_cast<int>(d) % 2 == 0; }
constexpr Direction make_direction(Axis a, bool positive) {
    return static_cast<Direction>(static_cast<int>(a) * 2 + (positive ? 0 : 1));
}
constexpr std::size_t channel_of(Direction d) { return static_cast<std::size_t>(d); }

std::string_view to_string(Axis a);
std::string_view to_string(Direction d);
Axis parse_axis(std::string_view s);

struct VoxelCoord {
    std::uint32_t i = 0;
    std::uint32_t j = 0;
    std::uint32_t k = 0;

    std::uint32_t operator[](Axis a) const {
        return a == Axis::X ? i : (a == Axis::Y ? j : k);
    }
    std::uint32_t& operator[](Axis a) { return a == Axis::X ? i : (a == Axis::Y ? j : k); }
    friend bool operator==(const VoxelCoord&, const VoxelCoord&) = default;
};

struct GridDims {
    std::uint32_t x = 1;
    std::uint32_t y = 1;
    std::uint32_t z = 1;

    std::uint64_t total() const {
        return static_cast<std::uint64_t>(x) * y * z;
    }
    std::uint32_t extent(Axis a) const { return a == Axis::X ? x : (a == Axis::Y ? y : z); }
    bool contains(const VoxelCoord& c) const { return c.i < x && c.j < y && c.k < z; }

    // Throws ShapeError unless every extent is at least one.
    void validate() const;
    std::string to_string() const;  // "XxYxZ"

    friend bool operator==(const GridDims&, const GridDims&) = default;
};

// Flat index with z varying fastest: (i*Y + j)*Z + k. Throws BoundsError.
std::uint64_t linear_index(const GridDims& dims, std::uint32_t i, std::uint32_t j, std::uint32_t k);

inline std::uint64_t linear_index_unchecked(const GridDims& d, std::uint32_t i, std::uint32_t j,
                                            std::uint32_t k) {
    return (static_cast<std::uint64_t>(i) * d.y + j) * d.z + k;
}

VoxelCoord coord_of(const GridDims& dims, std::uint64_t index);

// Distance in elements between consecutive voxels along an axis.
inline std::uint64_t axis_stride(const GridDims& d, Axis a) {
    switch (a) {
    case Axis::X: return static_cast<std::uint64_t>(d.y) * d.z;
    case Axis::Y: return d.z;
    case Axis::Z: return 1;
    }
    return 1;
}

// Dense per-voxel class labels. Immutable once built.
class VoxelGrid {
public:
    VoxelGrid(GridDims dims, std::vector<std::uint16_t> labels,
              std::uint16_t num_classes = kDefaultNumClasses,
              double voxel_size_m = kDefaultVoxelSizeM);

    static VoxelGrid uniform(GridDims dims, std::uint16_t label,
                             std::uint16_t num_classes = kDefaultNumClasses);

    const GridDims& dims() const { return dims_; }
    std::span<const std::uint16_t> labels() const { return labels_; }
    std::uint16_t label(std::uint64_t index) const { return labels_[index]; }
    std::uint16_t label(std::uint32_t i, std::uint32_t j, std::uint32_t k) const {
        return labels_[linear_index(dims_, i, j, k)];
    }
    std::uint16_t num_classes() const { return num_classes_; }
    std::uint16_t ignore_label() const { return kIgnoreLabel; }
    double voxel_size_m() const { return voxel_size_m_; }
    std::uint64_t size() const { return labels_.size(); }

    // Same metadata, new labels (validated).
    VoxelGrid with_labels(std::vector<std::uint16_t> labels) const;

    friend bool operator==(const VoxelGrid& a, const VoxelGrid& b) {
        return a.dims_ == b.dims_ && a.num_classes_ == b.num_classes_ && a.labels_ == b.labels_;
    }

private:
    GridDims dims_;
    std::vector<std::uint16_t> labels_;
    std::uint16_t num_classes_;
    double voxel_size_m_;
};

// Integer boundary distances, six per voxel, interleaved in Direction order.
class OffsetField {
public:
    OffsetField(GridDims dims, std::vector<std::uint32_t> values);

    const GridDims& dims() const { return dims_; }
    std::span<const std::uint32_t> values() const { return values_; }
    std::uint32_t at(std::uint64_t voxel, Direction d) const {
        return values_[voxel * 6 + channel_of(d)];
    }
    std::array<std::uint32_t, 6> voxel(std::uint64_t index) const;
    std::vector<std::uint32_t> channel(Direction d) const;

    // Throws ValidationError unless 1 <= d <= extent for every entry.
    void validate_ranges() const;

    friend bool operator==(const OffsetField&, const OffsetField&) = default;

private:
    GridDims dims_;
    std::vector<std::uint32_t> values_;
};

// Offsets divided by the extent of their axis. Predictions may stray outside (0,1];
// call validate_unit_interval() where the strict range matters.
class NormalizedOffsetField {
public:
    NormalizedOffsetField(GridDims dims, std::vector<double> values);

    const GridDims& dims() const { return dims_; }
    std::span<const double> values() const { return values_; }
    double at(std::uint64_t voxel, Direction d) const { return values_[voxel * 6 + channel_of(d)]; }

    void validate_unit_interval() const;

private:
    GridDims dims_;
    std::vector<double> values_;
};

VoxelGrid flip(const VoxelGrid& grid, Axis axis);

// Reverses a per-voxel scalar channel along an axis.
template <typename T>
std::vector<T> flip_channel(const GridDims& dims, std::span<const T> channel, Axis axis) {
    std::vector<T> out(channel.size());
    for (std::uint32_t i = 0; i < dims.x; ++i)
        for (std::uint32_t j = 0; j < dims.y; ++j)
            for (std::uint32_t k = 0; k < dims.z; ++k) {
                VoxelCoord c{i, j, k};
                VoxelCoord m = c;
                m[axis] = dims.extent(axis) - 1 - c[axis];
                out[linear_index_unchecked(dims, m.i, m.j, m.k)] =
                    channel[linear_index_unchecked(dims, i, j, k)];
            }
    return out;
}

}  // namespace voxnt
