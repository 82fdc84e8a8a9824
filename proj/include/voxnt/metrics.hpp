// SPDX-FileCopyrightText: 2026 The voxnt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "voxnt/grid.hpp"

namespace voxnt {

// cells[t * K + p] counts voxels with truth t predicted as p. Truth voxels carrying
// the ignore label are tallied separately and never enter the matrix.
class ConfusionMatrix {
public:
    explicit ConfusionMatrix(std::uint16_t num_classes);

    std::uint16_t num_classes() const { return num_classes_; }
    std::uint64_t cell(std::uint16_t truth, std::uint16_t pred) const {
        return cells_[static_cast<std::size_t>(truth) * num_classes_ + pred];
    }
    std::span<const std::uint64_t> cells() const { return cells_; }
    std::uint64_t ignored_voxels() const { return ignored_; }
    std::uint64_t evaluated_voxels() const;
    std::uint64_t row_sum(std::uint16_t truth) const;
    std::uint64_t col_sum(std::uint16_t pred) const;

    void add(std::uint16_t truth, std::uint16_t pred, std::uint64_t count = 1);
    void add_ignored(std::uint64_t count) { ignored_ += count; }
    void merge(const ConfusionMatrix& other);

    friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;

private:
    std::uint16_t num_classes_;
    std::vector<std::uint64_t> cells_;
    std::uint64_t ignored_ = 0;
};

// Throws ShapeError on differing dims or class counts, ValidationError when the
// prediction contains the ignore label.
void accumulate(ConfusionMatrix& cm, const VoxelGrid& truth, const VoxelGrid& pred);

struct MetricsReport {
    bool valid = false;           // false when no voxel was evaluated; every metric is NaN then
    double occupancy_iou = 0.0;   // occupied := label != 0
    double occupancy_precision = 0.0;
    double occupancy_recall = 0.0;
    std::vector<double> per_class_iou;  // classes 1..K-1; NaN for classes absent from truth and prediction
    double miou = 0.0;                  // mean over classes with a defined IoU
    std::uint64_t ignored_voxels = 0;
    std::uint64_t evaluated_voxels = 0;
};

MetricsReport finalize(const ConfusionMatrix& cm);

// Fields: occupancy_iou, per_class_iou, miou, ignored_voxels, evaluated_voxels (plus
// valid, occupancy_precision, occupancy_recall). NaN serializes as null.
std::string metrics_to_json(const MetricsReport& report, int indent = 1);

struct L1Result {
    double sum = 0.0;
    double mean = 0.0;  // sum / element count; NaN when no element counted
    std::uint64_t elements = 0;
};

// Sum of |pred - truth| over every voxel and direction, in flat order. With a mask,
// only voxels whose mask byte is nonzero contribute their six channels.
L1Result regression_l1(const NormalizedOffsetField& pred, const NormalizedOffsetField& truth,
                       std::optional<std::span<const std::uint8_t>> mask = std::nullopt);

}  // namespace voxnt
