// SPDX-FileCopyrightText: 2026 The voxnt Authors
// SPDX-License-Identifier: Apache-2.0

// Double-precision reference kernels for softmax-weighted plane projection and
// offset-guided attention over the six boundary voxels of an instance. Weights are
// always caller-supplied; nothing here trains.

#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "voxnt/grid.hpp"
#include "voxnt/io.hpp"

namespace voxnt {

// X*Y*Z*C reals, channels contiguous per voxel.
class FeatureVolume {
public:
    FeatureVolume(GridDims dims, std::uint32_t channels, std::vector<double> values);

    const GridDims& dims() const { return dims_; }
    std::uint32_t channels() const { return channels_; }
    std::span<const double> values() const { return values_; }
    std::span<const double> voxel(std::uint64_t index) const {
        return std::span<const double>(values_).subspan(index * channels_, channels_);
    }
    double at(std::uint64_t index, std::uint32_t c) const { return values_[index * channels_ + c]; }

    static FeatureVolume from_tensor(const RealTensor& t);  // shape (X, Y, Z, C)
    RealTensor to_tensor() const;

private:
    GridDims dims_;
    std::uint32_t channels_;
    std::vector<double> values_;
};

// One logit per voxel and target plane: channel 0 pools along z (XY plane),
// channel 1 along y (XZ plane), channel 2 along x (YZ plane).
class ProjectionWeights {
public:
    ProjectionWeights(GridDims dims, std::vector<double> eta);

    const GridDims& dims() const { return dims_; }
    double eta(std::uint64_t index, std::size_t plane_channel) const { return eta_[index * 3 + plane_channel]; }
    std::span<const double> values() const { return eta_; }

    static ProjectionWeights from_tensor(const RealTensor& t);  // shape (X, Y, Z, 3)

private:
    GridDims dims_;
    std::vector<double> eta_;
};

enum class Plane { XY, XZ, YZ };

struct PlaneFeatures {
    Plane plane = Plane::XY;
    std::uint32_t rows = 0;  // XY: X, XZ: X, YZ: Y
    std::uint32_t cols = 0;  // XY: Y, XZ: Z, YZ: Z
    std::uint32_t channels = 0;
    std::vector<double> values;

    double at(std::uint32_t r, std::uint32_t c, std::uint32_t ch) const {
        return values[(static_cast<std::size_t>(r) * cols + c) * channels + ch];
    }
};

// Softmax over the collapsed axis of the plane's logit channel, then a weighted sum.
PlaneFeatures dense_project(const FeatureVolume& vol, const ProjectionWeights& weights, Plane plane);

// Linear maps are row-major C*C: (W v)[r] = sum_c W[r*C + c] * v[c].
struct AttentionWeights {
    std::uint32_t channels = 0;
    std::vector<double> wq, wk, wv;
    double d_k = 0.0;

    // d_k defaults to the channel count.
    static AttentionWeights make(std::uint32_t channels, std::vector<double> wq, std::vector<double> wk,
                                 std::vector<double> wv);
    static AttentionWeights from_tensor(const RealTensor& t);  // shape (3, C, C): q, k, v
    RealTensor to_tensor() const;

    void validate() const;
};

// Inclusive: a distance of 1 points at the origin itself, so the step is
// max(round(alpha * d) - 1, 0). Exclusive drops the -1 (sensitivity checks only).
enum class CandidateConvention { Inclusive, Exclusive };

// Candidate voxel per direction, in x+, x-, y+, y-, z+, z- order. alpha * d rounds
// half away from zero; results clamp to the volume.
std::array<VoxelCoord, 6> gather_boundary_candidates(const VoxelCoord& origin, const std::array<double, 6>& offsets,
                                                     double alpha, const GridDims& dims,
                                                     CandidateConvention convention = CandidateConvention::Inclusive);

struct GroupNormParams {
    std::uint32_t groups = 8;
    double eps = 1e-5;
    std::vector<double> gamma;  // per channel; empty means all ones
    std::vector<double> beta;   // per channel; empty means all zeros
};

// Statistics per group over the group's channels and every voxel of the volume.
FeatureVolume group_norm(const FeatureVolume& vol, const GroupNormParams& params);

// Offsets in voxel units, six per voxel in direction order. OffsetField and
// predicted (normalized) fields both convert to this.
std::vector<double> offsets_in_voxels(const OffsetField& field);
std::vector<double> offsets_in_voxels(const NormalizedOffsetField& field);

// Softmax weights over the six candidates, six per voxel.
std::vector<double> aggregation_attention(const FeatureVolume& vol, std::span<const double> offsets,
                                          const AttentionWeights& weights, double alpha,
                                          CandidateConvention convention = CandidateConvention::Inclusive);

// sum_d attention_d * W_v v_d + v, before normalization.
FeatureVolume aggregate_residual(const FeatureVolume& vol, std::span<const double> offsets,
                                 const AttentionWeights& weights, double alpha,
                                 CandidateConvention convention = CandidateConvention::Inclusive);

// Norm(aggregate_residual(...)).
FeatureVolume instance_aggregate(const FeatureVolume& vol, const OffsetField& offsets,
                                 const AttentionWeights& weights, double alpha, const GroupNormParams& norm,
                                 CandidateConvention convention = CandidateConvention::Inclusive);
FeatureVolume instance_aggregate(const FeatureVolume& vol, std::span<const double> offsets,
                                 const AttentionWeights& weights, double alpha, const GroupNormParams& norm,
                                 CandidateConvention convention = CandidateConvention::Inclusive);

// Applies one aggregation layer per weight set, feeding each output to the next.
FeatureVolume instance_aggregate_stack(const FeatureVolume& vol, const OffsetField& offsets,
                                       std::span<const AttentionWeights> layers, double alpha,
                                       const GroupNormParams& norm,
                                       CandidateConvention convention = CandidateConvention::Inclusive);

}  // namespace voxnt
