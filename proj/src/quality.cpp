// SPDX-FileCopyrightText: 2026 The voxnt Authors
// SPDX-License-Identifier: Apache-2.0

#include "voxnt/quality.hpp"

#include <algorithm>

#include <json.hpp>

namespace voxnt {

void AnomalyThresholds::validate() const {
    for (Axis a : kAxes) {
        const auto n = static_cast<std::size_t>(a);
        const std::string axis(to_string(a));
        if (k_min[n] < 2) {
            throw ConfigError("k_min." + axis + " = " + std::to_string(k_min[n]) +
                              " is below the smallest possible scale 2");
        }
        if (k_max[n] && *k_max[n] < k_min[n]) {
            throw ConfigError("k_max." + axis + " = " + std::to_string(*k_max[n]) + " is below k_min." + axis +
                              " = " + std::to_string(k_min[n]));
        }
    }
}

bool AnomalyThresholds::is_target(std::uint16_t label) const {
    return std::find(target_classes.begin(), target_classes.end(), label) != target_classes.end();
}

std::uint64_t AnomalyMask::min_count() const {
    return static_cast<std::uint64_t>(std::count(min_flags.begin(), min_flags.end(), std::uint8_t{1}));
}

std::uint64_t AnomalyMask::max_count() const {
    return static_cast<std::uint64_t>(std::count(max_flags.begin(), max_flags.end(), std::uint8_t{1}));
}

AnomalyMask detect_anomalies(const ScaleField& scales, const AnomalyThresholds& thresholds) {
    thresholds.validate();
    const auto n_voxels = scales.dims().total();
    AnomalyMask mask{scales.dims(), std::vector<std::uint8_t>(n_voxels), std::vector<std::uint8_t>(n_voxels)};
    const auto& kmin = thresholds.k_min;
    const auto& kmax = thresholds.k_max;
    for (std::uint64_t n = 0; n < n_voxels; ++n) {
        const auto l = scales.voxel(n);
        mask.min_flags[n] = l[0] < kmin[0] && l[1] < kmin[1] && l[2] < kmin[2];
        bool large = false;
        for (std::size_t a = 0; a < 3; ++a) large = large || (kmax[a] && l[a] >= *kmax[a]);
        mask.max_flags[n] = large;
    }
    return mask;
}

VoxelGrid refine_labels(const VoxelGrid& grid, const AnomalyMask& mask, const AnomalyThresholds& thresholds) {
    if (!(grid.dims() == mask.dims) || mask.min_flags.size() != grid.size() ||
        mask.max_flags.size() != grid.size()) {
        throw ShapeError("grid " + grid.dims().to_string() + " and anomaly mask " + mask.dims.to_string() +
                         " differ");
    }
    for (auto c : thresholds.target_classes) {
        if (c >= grid.num_classes()) {
            throw ConfigError("target class " + std::to_string(c) + " >= num_classes " +
                              std::to_string(grid.num_classes()));
        }
    }
    std::vector<std::uint16_t> labels(grid.labels().begin(), grid.labels().end());
    for (std::size_t n = 0; n < labels.size(); ++n) {
        if ((mask.min_flags[n] || mask.max_flags[n]) && thresholds.is_target(labels[n])) {
            labels[n] = kIgnoreLabel;
        }
    }
    return grid.with_labels(std::move(labels));
}

QualityReport quality_report(const VoxelGrid& grid, const AnomalyMask& mask) {
    if (!(grid.dims() == mask.dims)) {
        throw ShapeError("grid " + grid.dims().to_string() + " and anomaly mask " + mask.dims.to_string() +
                         " differ");
    }
    QualityReport report;
    report.total_voxels = grid.size();
    report.classes.resize(grid.num_classes());
    for (std::uint16_t c = 0; c < grid.num_classes(); ++c) report.classes[c].class_id = c;
    for (std::uint64_t n = 0; n < grid.size(); ++n) {
        const auto l = grid.label(n);
        if (l == kIgnoreLabel) {
            ++report.ignored_voxels;
            continue;
        }
        auto& q = report.classes[l];
        ++q.total;
        q.min_flagged += mask.min_flags[n];
        q.max_flagged += mask.max_flags[n];
        q.flagged += (mask.min_flags[n] || mask.max_flags[n]);
    }
    return report;
}

std::string quality_report_json(const QualityReport& report, const AnomalyThresholds& thresholds, int indent) {
    nlohmann::json kmax = nlohmann::json::array();
    for (const auto& k : thresholds.k_max) kmax.push_back(k ? nlohmann::json(*k) : nlohmann::json(nullptr));
    nlohmann::json classes = nlohmann::json::array();
    for (const auto& q : report.classes) {
        classes.push_back({{"class_id", q.class_id},
                           {"total", q.total},
                           {"min_flagged", q.min_flagged},
                           {"max_flagged", q.max_flagged},
                           {"flagged", q.flagged},
                           {"fraction_flagged", q.fraction_flagged()}});
    }
    nlohmann::json j = {{"thresholds",
                         {{"k_min", thresholds.k_min}, {"k_max", kmax}, {"target_classes", thresholds.target_classes}}},
                        {"total_voxels", report.total_voxels},
                        {"ignored_voxels", report.ignored_voxels},
                        {"classes", classes}};
    return j.dump(indent);
}

}  // namespace voxnt
