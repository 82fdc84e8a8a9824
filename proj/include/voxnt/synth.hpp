// SPDX-FileCopyrightText: 2026 The voxnt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "voxnt/grid.hpp"

namespace voxnt {

// Half-open box [min, max) on every axis.
struct Box {
    VoxelCoord min;
    VoxelCoord max;

    bool contains(const VoxelCoord& c) const {
        return c.i >= min.i && c.i < max.i && c.j >= min.j && c.j < max.j && c.k >= min.k && c.k < max.k;
    }
    std::uint64_t volume() const {
        return static_cast<std::uint64_t>(max.i - min.i) * (max.j - min.j) * (max.k - min.k);
    }
    friend bool operator==(const Box&, const Box&) = default;
};

// True when at least one axis leaves a gap of one or more voxels between a and b.
bool boxes_separated(const Box& a, const Box& b);

struct ShapeSpec {
    Box box;
    std::uint16_t class_id = 1;
};

struct SpeckSpec {
    std::uint32_t count = 0;
    std::uint16_t class_id = 1;
};

// Straight one-voxel-thick runs, e.g. the trace a moving car leaves in accumulated scans.
struct StreakSpec {
    std::uint32_t count = 0;
    std::uint32_t length = 0;
    Axis axis = Axis::X;
    std::uint16_t class_id = 1;
};

struct SceneSpec {
    GridDims dims;
    std::uint16_t background_class = kEmptyClass;
    std::uint16_t num_classes = kDefaultNumClasses;
    std::vector<ShapeSpec> shapes;  // painted in order, later shapes win
    SpeckSpec specks;
    StreakSpec streaks;
    // Random specks and streaks are re-drawn until they keep a one-voxel gap from
    // every earlier shape.
    bool keep_separated = false;
    std::uint64_t seed = 0;

    // Throws SpecError on out-of-bounds boxes, bad class ids or impossible streaks.
    void validate() const;
};

enum class ShapeKind { Box, Speck, Streak };

std::string_view to_string(ShapeKind kind);

struct PlacedShape {
    ShapeKind kind = ShapeKind::Box;
    Box box;
    std::uint16_t class_id = 0;

    friend bool operator==(const PlacedShape&, const PlacedShape&) = default;
};

struct SynthResult {
    VoxelGrid grid;
    std::vector<PlacedShape> manifest;  // painter's order
};

// Explicit boxes followed by the seeded specks, then streaks.
std::vector<PlacedShape> place_shapes(const SceneSpec& spec);

SynthResult synthesize(const SceneSpec& spec);

// Closed-form offsets for scenes whose placed shapes are pairwise separated and never
// use the background class. Throws SpecError for anything else.
OffsetField expected_offsets(const SceneSpec& spec);

// Street-like fixture: a ground slab, parked boxes and tall poles over free space.
// Long empty runs make it the worst case for per-voxel walking.
SceneSpec benchmark_scene(GridDims dims, std::uint64_t seed = 0);

std::string scene_spec_to_json(const SceneSpec& spec);
SceneSpec scene_spec_from_json(std::string_view text);
std::string manifest_to_json(const std::vector<PlacedShape>& manifest);

}  // namespace voxnt
