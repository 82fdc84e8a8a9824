// SPDX-FileCopyrightText: 2026 The voxnt Authors
// SPDX-License-Identifier: Apache-2.0

#include "voxnt/grid.hpp"

#include <cmath>
#include <limits>

namespace voxnt {

std::string_view to_string(Axis a) {
    switch (a) {
    case Axis::X: return "x";
    case Axis::Y: return "y";
    case Axis::Z: return "z";
    }
    return "?";
}

std::string_view to_string(Direction d) {
    static constexpr std::array<std::string_view, 6> names = {"x+", "x-", "y+", "y-", "z+", "z-"};
    return names[channel_of(d)];
}

Axis parse_axis(std::string_view s) {
    if (s == "x" || s == "X") return Axis::X;
    if (s == "y" || s == "Y") return Axis::Y;
    if (s == "z" || s == "Z") return Axis::Z;
    throw ConfigError("unknown axis '" + std::string(s) + "'");
}

void GridDims::validate() const {
    if (x < 1 || y < 1 || z < 1) {
        throw ShapeError("grid dims must be >= 1 on every axis, got " + to_string());
    }
    constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
    const std::uint64_t xy = static_cast<std::uint64_t>(x) * y;
    if (xy > kMax / z) {
        throw ShapeError("grid dims " + to_string() + " overflow a 64-bit voxel count");
    }
}

std::string GridDims::to_string() const {
    return std::to_string(x) + "x" + std::to_string(y) + "x" + std::to_string(z);
}

std::uint64_t linear_index(const GridDims& dims, std::uint32_t i, std::uint32_t j, std::uint32_t k) {
    if (i >= dims.x || j >= dims.y || k >= dims.z) {
        throw BoundsError("voxel (" + std::to_string(i) + "," + std::to_string(j) + "," +
                          std::to_string(k) + ") outside grid " + dims.to_string());
    }
    return linear_index_unchecked(dims, i, j, k);
}

VoxelCoord coord_of(const GridDims& dims, std::uint64_t index) {
    if (index >= dims.total()) {
        throw BoundsError("flat index " + std::to_string(index) + " outside grid " + dims.to_string());
    }
    VoxelCoord c;
    c.k = static_cast<std::uint32_t>(index % dims.z);
    index /= dims.z;
    c.j = static_cast<std::uint32_t>(index % dims.y);
    c.i = static_cast<std::uint32_t>(index / dims.y);
    return c;
}

VoxelGrid::VoxelGrid(GridDims dims, std::vector<std::uint16_t> labels, std::uint16_t num_classes,
                     double voxel_size_m)
    : dims_(dims), labels_(std::move(labels)), num_classes_(num_classes), voxel_size_m_(voxel_size_m) {
    dims_.validate();
    if (labels_.size() != dims_.total()) {
        throw ShapeError("label count " + std::to_string(labels_.size()) + " does not match grid " +
                         dims_.to_string() + " (" + std::to_string(dims_.total()) + " voxels)");
    }
    // Class ids must stay distinguishable from the ignore label.
    if (num_classes_ < 1 || num_classes_ > kIgnoreLabel) {
        throw ConfigError("num_classes must be in [1, 255], got " + std::to_string(num_classes_));
    }
    if (!(voxel_size_m_ > 0.0) || !std::isfinite(voxel_size_m_)) {
        throw ConfigError("voxel size must be a positive finite length");
    }
    for (std::size_t n = 0; n < labels_.size(); ++n) {
        const auto l = labels_[n];
        if (l >= num_classes_ && l != kIgnoreLabel) {
            throw ValidationError("label " + std::to_string(l) + " at flat index " + std::to_string(n) +
                                  " is neither < num_classes (" + std::to_string(num_classes_) +
                                  ") nor the ignore label");
        }
    }
}

VoxelGrid VoxelGrid::uniform(GridDims dims, std::uint16_t label, std::uint16_t num_classes) {
    dims.validate();
    return VoxelGrid(dims, std::vector<std::uint16_t>(dims.total(), label), num_classes);
}

VoxelGrid VoxelGrid::with_labels(std::vector<std::uint16_t> labels) const {
    return VoxelGrid(dims_, std::move(labels), num_classes_, voxel_size_m_);
}

OffsetField::OffsetField(GridDims dims, std::vector<std::uint32_t> values)
    : dims_(dims), values_(std::move(values)) {
    dims_.validate();
    if (values_.size() != dims_.total() * 6) {
        throw ShapeError("offset field for " + dims_.to_string() + " needs " +
                         std::to_string(dims_.total() * 6) + " values, got " +
                         std::to_string(values_.size()));
    }
}

std::array<std::uint32_t, 6> OffsetField::voxel(std::uint64_t index) const {
    std::array<std::uint32_t, 6> out{};
    for (std::size_t c = 0; c < 6; ++c) out[c] = values_[index * 6 + c];
    return out;
}

std::vector<std::uint32_t> OffsetField::channel(Direction d) const {
    std::vector<std::uint32_t> out(dims_.total());
    const std::size_t c = channel_of(d);
    for (std::uint64_t n = 0; n < out.size(); ++n) out[n] = values_[n * 6 + c];
    return out;
}

void OffsetField::validate_ranges() const {
    for (std::uint64_t n = 0; n < dims_.total(); ++n) {
        for (Direction d : kDirections) {
            const auto v = at(n, d);
            if (v < 1 || v > dims_.extent(axis_of(d))) {
                throw ValidationError("offset " + std::to_string(v) + " in direction " +
                                      std::string(to_string(d)) + " at flat index " +
                                      std::to_string(n) + " outside [1, extent]");
            }
        }
    }
}

NormalizedOffsetField::NormalizedOffsetField(GridDims dims, std::vector<double> values)
    : dims_(dims), values_(std::move(values)) {
    dims_.validate();
    if (values_.size() != dims_.total() * 6) {
        throw ShapeError("normalized offset field for " + dims_.to_string() + " needs " +
                         std::to_string(dims_.total() * 6) + " values, got " +
                         std::to_string(values_.size()));
    }
}

void NormalizedOffsetField::validate_unit_interval() const {
    for (std::size_t n = 0; n < values_.size(); ++n) {
        const double v = values_[n];
        if (!(v > 0.0 && v <= 1.0)) {
            throw ValidationError("normalized offset " + std::to_string(v) + " at element " +
                                  std::to_string(n) + " outside (0, 1]");
        }
    }
}

VoxelGrid flip(const VoxelGrid& grid, Axis axis) {
    return grid.with_labels(flip_channel<std::uint16_t>(grid.dims(), grid.labels(), axis));
}

}  // namespace voxnt
