// SPDX-FileCopyrightText: 2026 The voxnt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "voxnt/grid.hpp"

namespace voxnt {

// Per-voxel instance scale l^a = offset(a+) + offset(a-), three per voxel in x, y, z order.
// Equals the length of the voxel's run along a, plus one.
class ScaleField {
public:
    ScaleField(GridDims dims, std::vector<std::uint32_t> values);

    const GridDims& dims() const { return dims_; }
    std::span<const std::uint32_t> values() const { return values_; }
    std::uint32_t at(std::uint64_t voxel, Axis a) const {
        return values_[voxel * 3 + static_cast<std::size_t>(a)];
    }
    std::array<std::uint32_t, 3> voxel(std::uint64_t index) const {
        return {values_[index * 3], values_[index * 3 + 1], values_[index * 3 + 2]};
    }

    friend bool operator==(const ScaleField&, const ScaleField&) = default;

private:
    GridDims dims_;
    std::vector<std::uint32_t> values_;
};

ScaleField scales_from_offsets(const OffsetField& field);

enum class BinScale { Log2, Linear };
enum class SampleMode { PerVoxel, PerRun };

struct BinSpec {
    std::uint32_t bins = 32;
    BinScale scale = BinScale::Log2;
    double lo = 2.0;
    std::optional<double> hi;  // defaults to the axis extent + 1
};

// bins + 1 monotone edges from lo to hi; the last edge is exactly hi.
std::vector<double> make_bin_edges(double lo, double hi, std::uint32_t bins, BinScale scale);

// Bin b holds edges[b] <= v < edges[b+1]; the last bin also holds v == hi.
// Values outside [lo, hi] land in the end bins.
std::size_t bin_index(const std::vector<double>& edges, double value);

struct ScaleHistogram {
    std::uint16_t class_id = 0;
    Axis axis = Axis::X;
    std::vector<double> bin_edges;
    std::vector<std::uint64_t> counts;
    std::vector<double> normalized;  // counts / max(counts), all zero for an empty class

    std::uint64_t total() const;
    void renormalize();

    friend bool operator==(const ScaleHistogram&, const ScaleHistogram&) = default;
};

// Tallies l^axis over the voxels labelled class_id; ignore-label voxels never count.
// PerRun counts each maximal run once (at its first voxel) instead of once per voxel.
ScaleHistogram class_scale_histogram(const VoxelGrid& grid, const ScaleField& scales,
                                     std::uint16_t class_id, Axis axis, const BinSpec& bins = {},
                                     SampleMode mode = SampleMode::PerVoxel);

// Every (class, axis) pair, classes ascending then x, y, z. One pass over the grid.
std::vector<ScaleHistogram> all_scale_histograms(const VoxelGrid& grid, const ScaleField& scales,
                                                 const BinSpec& bins = {},
                                                 SampleMode mode = SampleMode::PerVoxel);

// Adds b into a. Throws ShapeError unless class, axis and edges agree.
void merge_into(ScaleHistogram& a, const ScaleHistogram& b);
void merge_into(std::vector<ScaleHistogram>& a, const std::vector<ScaleHistogram>& b);

enum class HistogramFormat { Csv, Json };

HistogramFormat parse_histogram_format(std::string_view s);

// CSV: header "class_id,axis,bin,lower_edge,upper_edge,count,normalized", one row per bin.
std::string histograms_to_csv(const std::vector<ScaleHistogram>& histograms);
std::string histograms_to_json(const std::vector<ScaleHistogram>& histograms);
std::vector<ScaleHistogram> histograms_from_json(std::string_view text);

void export_histograms(const std::vector<ScaleHistogram>& histograms, const std::filesystem::path& path,
                       HistogramFormat format);

}  // namespace voxnt
