// SPDX-FileCopyrightText: 2026 The voxnt Authors
// SPDX-License-Identifier: Apache-2.0

// Voxel-to-instance offsets: for each voxel, the number of consecutive same-class
// voxels (itself included) before the class changes or the volume ends, along each
// of the six axis directions.

#pragma once

#include <cstdint>
#include <vector>

#include "voxnt/grid.hpp"

namespace voxnt {

struct ScanPolicy {
    // When false, offsets are still computed at empty voxels but regression_mask()
    // excludes them.
    bool include_empty = true;
    // When true the ignore label is a class of its own and ends runs. When false an
    // ignore voxel links to both neighbours, bridging the runs on either side.
    bool ignore_breaks_runs = true;
};

// Single backward scan per line: out[last] = 1, out[i] = out[i+1] + 1 on a match, else 1.
std::vector<std::uint32_t> run_length_positive(const VoxelGrid& grid, Axis axis,
                                               const ScanPolicy& policy = {});

// Negative direction is computed as flip -> run_length_positive -> flip back.
std::vector<std::uint32_t> run_length_along(const VoxelGrid& grid, Axis axis, bool positive,
                                            const ScanPolicy& policy = {});

// One direction by direct scan (no flipping).
std::vector<std::uint32_t> compute_direction(const VoxelGrid& grid, Direction direction,
                                             const ScanPolicy& policy = {}, unsigned workers = 1);

// All six directions in one field. Work is split over independent lines; the result
// does not depend on `workers`.
OffsetField compute_offsets(const VoxelGrid& grid, const ScanPolicy& policy = {}, unsigned workers = 1);

// Per-voxel outward walk. O(voxels * run length); test oracle only.
OffsetField compute_offsets_naive(const VoxelGrid& grid, const ScanPolicy& policy = {});

// Divides x channels by dims.x, y channels by dims.y, z channels by dims.z.
NormalizedOffsetField normalize_offsets(const OffsetField& field);

// Inverse of normalize_offsets: round(value * extent), clamped to [1, extent].
OffsetField denormalize_offsets(const NormalizedOffsetField& field);

// 1 where a voxel's offsets are regression targets: never for the ignore label, and
// not for the empty class when policy.include_empty is false.
std::vector<std::uint8_t> regression_mask(const VoxelGrid& grid, const ScanPolicy& policy = {});

}  // namespace voxnt
