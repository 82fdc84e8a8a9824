// SPDX-FileCopyrightText: 2026 The voxnt Authors
// SPDX-License-Identifier: Apache-2.0

// On-disk formats.
//
// Raw grid:        dims.total() little-endian u16 labels, no header.
// Container grid:  "VXG1", u32 version (1), u32 x, y, z, then the raw payload.
// Offset field:    "VXO1", u32 version (1), u32 x, y, z, then six u32 per voxel.
// Real tensor:     "VXW1", u32 version (1), u32 rank, u32 extents[rank], f64 payload.
// Invalid mask:    dims.total() bytes of 0/1; voxels marked 1 load as the ignore label.
//
// Every payload is little-endian and follows linear_index order, except raw grids
// and masks read with a non-default axis order.

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "voxnt/grid.hpp"

namespace voxnt {

inline constexpr std::uint32_t kFormatVersion = 1;

enum class GridFormat { Auto, Raw, Container };

GridFormat parse_grid_format(std::string_view s);

// Storage order of a raw stream: order[0] is the slowest-varying axis, order[2] the fastest.
struct AxisOrder {
    std::array<Axis, 3> order = {Axis::X, Axis::Y, Axis::Z};

    static AxisOrder parse(std::string_view s);  // e.g. "xyz", "zyx"
    bool is_identity() const { return order == std::array<Axis, 3>{Axis::X, Axis::Y, Axis::Z}; }
};

struct FormatOptions {
    GridFormat format = GridFormat::Auto;  // Auto sniffs the container magic
    AxisOrder axis_order;                  // raw streams only
    std::uint16_t num_classes = kDefaultNumClasses;
    double voxel_size_m = kDefaultVoxelSizeM;
    std::optional<std::filesystem::path> invalid_mask;
};

// Container when the bytes start with the grid magic, raw otherwise.
GridFormat sniff_grid_format(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> encode_grid(const VoxelGrid& grid, const FormatOptions& opts);
// `dims` is used for raw payloads and ignored when the bytes carry a container header.
VoxelGrid decode_grid(std::span<const std::uint8_t> bytes, GridDims dims, const FormatOptions& opts);

VoxelGrid read_grid(const std::filesystem::path& path, GridDims dims, const FormatOptions& opts = {});
void write_grid(const VoxelGrid& grid, const std::filesystem::path& path,
                const FormatOptions& opts = {});

std::vector<std::uint8_t> encode_offsets(const OffsetField& field);
OffsetField decode_offsets(std::span<const std::uint8_t> bytes);
OffsetField read_offsets(const std::filesystem::path& path);
void write_offsets(const OffsetField& field, const std::filesystem::path& path);

std::vector<std::uint8_t> read_invalid_mask(const std::filesystem::path& path, GridDims dims,
                                            const AxisOrder& order = {});
VoxelGrid apply_invalid_mask(const VoxelGrid& grid, std::span<const std::uint8_t> mask);

struct RealTensor {
    std::vector<std::uint32_t> shape;
    std::vector<double> data;

    std::uint64_t element_count() const;
};

std::vector<std::uint8_t> encode_tensor(const RealTensor& tensor);
RealTensor decode_tensor(std::span<const std::uint8_t> bytes);
RealTensor read_tensor(const std::filesystem::path& path);
void write_tensor(const RealTensor& tensor, const std::filesystem::path& path);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace voxnt
