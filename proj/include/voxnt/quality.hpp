// SPDX-FileCopyrightText: 2026 The voxnt Authors
// SPDX-License-Identifier: Apache-2.0

// Scale-based detection of corrupted ground truth. Isolated specks have tiny scales on
// every axis; smeared traces of moving objects have a huge scale on at least one axis.
// Masks are class-agnostic; only refinement is gated on the target classes.

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "voxnt/grid.hpp"
#include "voxnt/scale.hpp"

namespace voxnt {

inline constexpr std::uint16_t kCarClass = 1;
inline constexpr std::uint32_t kDefaultMinScale = 3;
inline constexpr std::uint32_t kDefaultMaxScale = 30;

struct AnomalyThresholds {
    std::array<std::uint32_t, 3> k_min = {kDefaultMinScale, kDefaultMinScale, kDefaultMinScale};
    // A disengaged entry disables the large-scale test on that axis. Full-height
    // structures reach l^z = dims.z + 1, so z is off unless requested.
    std::array<std::optional<std::uint32_t>, 3> k_max = {kDefaultMaxScale, kDefaultMaxScale, std::nullopt};
    std::vector<std::uint16_t> target_classes = {kCarClass};

    // Throws ConfigError unless 2 <= k_min[a] <= k_max[a] for every axis.
    void validate() const;
    bool is_target(std::uint16_t label) const;
};

struct AnomalyMask {
    GridDims dims;
    std::vector<std::uint8_t> min_flags;  // l < k_min on all three axes
    std::vector<std::uint8_t> max_flags;  // l >= k_max on at least one enabled axis

    std::uint64_t min_count() const;
    std::uint64_t max_count() const;
};

AnomalyMask detect_anomalies(const ScaleField& scales, const AnomalyThresholds& thresholds);

// Flagged voxels of a target class become the ignore label; every other voxel is copied.
VoxelGrid refine_labels(const VoxelGrid& grid, const AnomalyMask& mask, const AnomalyThresholds& thresholds);

struct ClassQuality {
    std::uint16_t class_id = 0;
    std::uint64_t total = 0;
    std::uint64_t min_flagged = 0;
    std::uint64_t max_flagged = 0;
    std::uint64_t flagged = 0;  // min or max
    double fraction_flagged() const { return total ? static_cast<double>(flagged) / total : 0.0; }
};

struct QualityReport {
    std::vector<ClassQuality> classes;  // one entry per class id < num_classes
    std::uint64_t ignored_voxels = 0;
    std::uint64_t total_voxels = 0;

    const ClassQuality& at(std::uint16_t class_id) const { return classes.at(class_id); }
};

QualityReport quality_report(const VoxelGrid& grid, const AnomalyMask& mask);

// JSON object with a "thresholds" header echoing k_min, k_max (null = disabled) and targets.
std::string quality_report_json(const QualityReport& report, const AnomalyThresholds& thresholds,
                                int indent = 1);

}  // namespace voxnt
