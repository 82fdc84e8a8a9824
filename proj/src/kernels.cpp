// SPDX-FileCopyrightText: 2026 The voxnt Authors
// SPDX-License-Identifier: Apache-2.0

#include "voxnt/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace voxnt {

namespace {

void require_finite(std::span<const double> values, const char* what) {
    for (std::size_t n = 0; n < values.size(); ++n) {
        if (!std::isfinite(values[n])) {
            throw ValidationError(std::string(what) + " holds a non-finite value at element " + std::to_string(n));
        }
    }
}

void mat_vec(std::span<const double> w, std::span<const double> v, std::span<double> out) {
    const std::size_t c = v.size();
    for (std::size_t r = 0; r < c; ++r) {
        double acc = 0.0;
        for (std::size_t k = 0; k < c; ++k) acc += w[r * c + k] * v[k];
        out[r] = acc;
    }
}

void check_offsets(const FeatureVolume& vol, std::span<const double> offsets) {
    if (offsets.size() != vol.dims().total() * 6) {
        throw ShapeError("offsets hold " + std::to_string(offsets.size()) + " values, volume " +
                         vol.dims().to_string() + " needs " + std::to_string(vol.dims().total() * 6));
    }
    require_finite(offsets, "offsets");
}

// Shared per-voxel attention step; emits the six weights and the pre-norm output.
template <typename Sink>
void attend(const FeatureVolume& vol, std::span<const double> offsets, const AttentionWeights& weights,
            double alpha, CandidateConvention convention, Sink&& sink) {
    weights.validate();
    if (weights.channels != vol.channels()) {
        throw ShapeError("attention weights are " + std::to_string(weights.channels) + " channels wide, volume has " +
                         std::to_string(vol.channels()));
    }
    check_offsets(vol, offsets);
    const GridDims& dims = vol.dims();
    const std::uint32_t c = vol.channels();
    const double scale = 1.0 / std::sqrt(weights.d_k);

    std::vector<double> q(c), k(c), vv(c), out(c);
    std::array<double, 6> scores{}, attn{};
    std::array<std::uint64_t, 6> cand_index{};
    for (std::uint64_t idx = 0; idx < dims.total(); ++idx) {
        const auto v = vol.voxel(idx);
        std::array<double, 6> off{};
        std::copy_n(offsets.begin() + static_cast<std::ptrdiff_t>(idx * 6), 6, off.begin());
        const auto cands = gather_boundary_candidates(coord_of(dims, idx), off, alpha, dims, convention);
        mat_vec(weights.wq, v, q);
        for (std::size_t d = 0; d < 6; ++d) {
            cand_index[d] = linear_index_unchecked(dims, cands[d].i, cands[d].j, cands[d].k);
            mat_vec(weights.wk, vol.voxel(cand_index[d]), k);
            double dot = 0.0;
            for (std::uint32_t ch = 0; ch < c; ++ch) dot += q[ch] * k[ch];
            scores[d] = dot * scale;
        }
        const double peak = *std::max_element(scores.begin(), scores.end());
        double denom = 0.0;
        for (std::size_t d = 0; d < 6; ++d) denom += (attn[d] = std::exp(scores[d] - peak));
        for (auto& a : attn) a /= denom;

        std::copy(v.begin(), v.end(), out.begin());
        for (std::size_t d = 0; d < 6; ++d) {
            mat_vec(weights.wv, vol.voxel(cand_index[d]), vv);
            for (std::uint32_t ch = 0; ch < c; ++ch) out[ch] += attn[d] * vv[ch];
        }
        sink(idx, attn, out);
    }
}

}  // namespace

FeatureVolume::FeatureVolume(GridDims dims, std::uint32_t channels, std::vector<double> values)
    : dims_(dims), channels_(channels), values_(std::move(values)) {
    dims_.validate();
    if (channels_ < 1) throw ShapeError("feature volume needs at least one channel");
    if (values_.size() != dims_.total() * channels_) {
        throw ShapeError("feature volume " + dims_.to_string() + "x" + std::to_string(channels_) + " needs " +
                         std::to_string(dims_.total() * channels_) + " values, got " +
                         std::to_string(values_.size()));
    }
    require_finite(values_, "feature volume");
}

FeatureVolume FeatureVolume::from_tensor(const RealTensor& t) {
    if (t.shape.size() != 4) throw ShapeError("feature tensor must have shape (X, Y, Z, C)");
    return FeatureVolume(GridDims{t.shape[0], t.shape[1], t.shape[2]}, t.shape[3], t.data);
}

RealTensor FeatureVolume::to_tensor() const {
    return RealTensor{{dims_.x, dims_.y, dims_.z, channels_}, values_};
}

ProjectionWeights::ProjectionWeights(GridDims dims, std::vector<double> eta) : dims_(dims), eta_(std::move(eta)) {
    dims_.validate();
    if (eta_.size() != dims_.total() * 3) {
        throw ShapeError("projection weights for " + dims_.to_string() + " need " +
                         std::to_string(dims_.total() * 3) + " logits, got " + std::to_string(eta_.size()));
    }
    require_finite(eta_, "projection weights");
}

ProjectionWeights ProjectionWeights::from_tensor(const RealTensor& t) {
    if (t.shape.size() != 4 || t.shape[3] != 3) throw ShapeError("projection tensor must have shape (X, Y, Z, 3)");
    return ProjectionWeights(GridDims{t.shape[0], t.shape[1], t.shape[2]}, t.data);
}

PlaneFeatures dense_project(const FeatureVolume& vol, const ProjectionWeights& weights, Plane plane) {
    if (!(vol.dims() == weights.dims())) {
        throw ShapeError("feature volume " + vol.dims().to_string() + " and projection weights " +
                         weights.dims().to_string() + " differ");
    }
    const GridDims& dims = vol.dims();
    Axis row_axis = Axis::X, col_axis = Axis::Y, pooled = Axis::Z;
    std::size_t eta_channel = 0;
    switch (plane) {
    case Plane::XY: row_axis = Axis::X; col_axis = Axis::Y; pooled = Axis::Z; eta_channel = 0; break;
    case Plane::XZ: row_axis = Axis::X; col_axis = Axis::Z; pooled = Axis::Y; eta_channel = 1; break;
    case Plane::YZ: row_axis = Axis::Y; col_axis = Axis::Z; pooled = Axis::X; eta_channel = 2; break;
    }
    PlaneFeatures out;
    out.plane = plane;
    out.rows = dims.extent(row_axis);
    out.cols = dims.extent(col_axis);
    out.channels = vol.channels();
    out.values.assign(static_cast<std::size_t>(out.rows) * out.cols * out.channels, 0.0);

    const std::uint32_t depth = dims.extent(pooled);
    std::vector<std::uint64_t> index(depth);
    std::vector<double> w(depth);
    for (std::uint32_t r = 0; r < out.rows; ++r) {
        for (std::uint32_t c = 0; c < out.cols; ++c) {
            VoxelCoord at;
            at[row_axis] = r;
            at[col_axis] = c;
            for (std::uint32_t p = 0; p < depth; ++p) {
                at[pooled] = p;
                index[p] = linear_index_unchecked(dims, at.i, at.j, at.k);
                w[p] = weights.eta(index[p], eta_channel);
            }
            const double peak = *std::max_element(w.begin(), w.end());
            double denom = 0.0;
            for (auto& x : w) denom += (x = std::exp(x - peak));
            double* dst = &out.values[(static_cast<std::size_t>(r) * out.cols + c) * out.channels];
            for (std::uint32_t p = 0; p < depth; ++p) {
                const double a = w[p] / denom;
                const auto v = vol.voxel(index[p]);
                for (std::uint32_t ch = 0; ch < out.channels; ++ch) dst[ch] += a * v[ch];
            }
        }
    }
    return out;
}

AttentionWeights AttentionWeights::make(std::uint32_t channels, std::vector<double> wq, std::vector<double> wk,
                                        std::vector<double> wv) {
    AttentionWeights w{channels, std::move(wq), std::move(wk), std::move(wv), static_cast<double>(channels)};
    w.validate();
    return w;
}

AttentionWeights AttentionWeights::from_tensor(const RealTensor& t) {
    if (t.shape.size() != 3 || t.shape[0] != 3 || t.shape[1] != t.shape[2]) {
        throw ShapeError("attention tensor must have shape (3, C, C)");
    }
    const std::size_t cc = static_cast<std::size_t>(t.shape[1]) * t.shape[2];
    const auto begin = t.data.begin();
    return make(t.shape[1], std::vector<double>(begin, begin + cc), std::vector<double>(begin + cc, begin + 2 * cc),
                std::vector<double>(begin + 2 * cc, begin + 3 * cc));
}

RealTensor AttentionWeights::to_tensor() const {
    RealTensor t{{3, channels, channels}, {}};
    t.data.reserve(3 * wq.size());
    for (const auto* m : {&wq, &wk, &wv}) t.data.insert(t.data.end(), m->begin(), m->end());
    return t;
}

void AttentionWeights::validate() const {
    const std::size_t cc = static_cast<std::size_t>(channels) * channels;
    if (channels < 1 || wq.size() != cc || wk.size() != cc || wv.size() != cc) {
        throw ShapeError("attention weights must be three " + std::to_string(channels) + "x" +
                         std::to_string(channels) + " matrices");
    }
    if (!(d_k > 0.0) || !std::isfinite(d_k)) throw ValidationError("d_k must be positive and finite");
    require_finite(wq, "W_q");
    require_finite(wk, "W_k");
    require_finite(wv, "W_v");
}

std::array<VoxelCoord, 6> gather_boundary_candidates(const VoxelCoord& origin, const std::array<double, 6>& offsets,
                                                     double alpha, const GridDims& dims,
                                                     CandidateConvention convention) {
    if (!dims.contains(origin)) {
        throw BoundsError("candidate origin (" + std::to_string(origin.i) + "," + std::to_string(origin.j) + "," +
                          std::to_string(origin.k) + ") outside grid " + dims.to_string());
    }
    if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw ValidationError("alpha must be finite and >= 0");
    const double shift = convention == CandidateConvention::Inclusive ? 1.0 : 0.0;
    std::array<VoxelCoord, 6> out{};
    for (Direction d : kDirections) {
        const Axis a = axis_of(d);
        const double extent = dims.extent(a);
        const double delta = offsets[channel_of(d)];
        if (!std::isfinite(delta)) throw ValidationError("non-finite offset");
        // Capped at the extent so the conversion below cannot overflow.
        const double step = std::clamp(std::round(alpha * delta) - shift, 0.0, extent);
        const double target = is_positive(d) ? origin[a] + step : origin[a] - step;
        VoxelCoord c = origin;
        c[a] = static_cast<std::uint32_t>(std::clamp(target, 0.0, extent - 1.0));
        out[channel_of(d)] = c;
    }
    return out;
}

FeatureVolume group_norm(const FeatureVolume& vol, const GroupNormParams& params) {
    const std::uint32_t c = vol.channels();
    if (params.groups < 1 || c % params.groups != 0) {
        throw ConfigError("channel count " + std::to_string(c) + " is not divisible by " +
                          std::to_string(params.groups) + " groups");
    }
    if ((!params.gamma.empty() && params.gamma.size() != c) || (!params.beta.empty() && params.beta.size() != c)) {
        throw ShapeError("group norm affine parameters must have one entry per channel");
    }
    if (!(params.eps > 0.0)) throw ConfigError("group norm eps must be positive");
    const std::uint32_t per_group = c / params.groups;
    const std::uint64_t n_voxels = vol.dims().total();
    const auto src = vol.values();
    std::vector<double> out(src.size());
    for (std::uint32_t g = 0; g < params.groups; ++g) {
        const std::uint32_t c0 = g * per_group;
        const double count = static_cast<double>(n_voxels) * per_group;
        double mean = 0.0;
        for (std::uint64_t v = 0; v < n_voxels; ++v)
            for (std::uint32_t ch = c0; ch < c0 + per_group; ++ch) mean += src[v * c + ch];
        mean /= count;
        double var = 0.0;
        for (std::uint64_t v = 0; v < n_voxels; ++v)
            for (std::uint32_t ch = c0; ch < c0 + per_group; ++ch) {
                const double dlt = src[v * c + ch] - mean;
                var += dlt * dlt;
            }
        var /= count;
        const double inv = 1.0 / std::sqrt(var + params.eps);
        for (std::uint64_t v = 0; v < n_voxels; ++v)
            for (std::uint32_t ch = c0; ch < c0 + per_group; ++ch) {
                const double gamma = params.gamma.empty() ? 1.0 : params.gamma[ch];
                const double beta = params.beta.empty() ? 0.0 : params.beta[ch];
                out[v * c + ch] = (src[v * c + ch] - mean) * inv * gamma + beta;
            }
    }
    return FeatureVolume(vol.dims(), c, std::move(out));
}

std::vector<double> offsets_in_voxels(const OffsetField& field) {
    const auto src = field.values();
    return std::vector<double>(src.begin(), src.end());
}

std::vector<double> offsets_in_voxels(const NormalizedOffsetField& field) {
    const auto src = field.values();
    std::vector<double> out(src.size());
    for (std::size_t n = 0; n < src.size(); ++n) {
        out[n] = src[n] * field.dims().extent(axis_of(static_cast<Direction>(n % 6)));
    }
    return out;
}

std::vector<double> aggregation_attention(const FeatureVolume& vol, std::span<const double> offsets,
                                          const AttentionWeights& weights, double alpha,
                                          CandidateConvention convention) {
    std::vector<double> out(vol.dims().total() * 6);
    attend(vol, offsets, weights, alpha, convention,
           [&](std::uint64_t idx, const std::array<double, 6>& attn, const std::vector<double>&) {
               std::copy(attn.begin(), attn.end(), out.begin() + static_cast<std::ptrdiff_t>(idx * 6));
           });
    return out;
}

FeatureVolume aggregate_residual(const FeatureVolume& vol, std::span<const double> offsets,
                                 const AttentionWeights& weights, double alpha, CandidateConvention convention) {
    const std::uint32_t c = vol.channels();
    std::vector<double> out(vol.values().size());
    attend(vol, offsets, weights, alpha, convention,
           [&](std::uint64_t idx, const std::array<double, 6>&, const std::vector<double>& value) {
               std::copy(value.begin(), value.end(), out.begin() + static_cast<std::ptrdiff_t>(idx * c));
           });
    return FeatureVolume(vol.dims(), c, std::move(out));
}

FeatureVolume instance_aggregate(const FeatureVolume& vol, std::span<const double> offsets,
                                 const AttentionWeights& weights, double alpha, const GroupNormParams& norm,
                                 CandidateConvention convention) {
    return group_norm(aggregate_residual(vol, offsets, weights, alpha, convention), norm);
}

FeatureVolume instance_aggregate(const FeatureVolume& vol, const OffsetField& offsets,
                                 const AttentionWeights& weights, double alpha, const GroupNormParams& norm,
                                 CandidateConvention convention) {
    if (!(offsets.dims() == vol.dims())) {
        throw ShapeError("offset field " + offsets.dims().to_string() + " and feature volume " +
                         vol.dims().to_string() + " differ");
    }
    return instance_aggregate(vol, offsets_in_voxels(offsets), weights, alpha, norm, convention);
}

FeatureVolume instance_aggregate_stack(const FeatureVolume& vol, const OffsetField& offsets,
                                       std::span<const AttentionWeights> layers, double alpha,
                                       const GroupNormParams& norm, CandidateConvention convention) {
    FeatureVolume cur = vol;
    for (const auto& layer : layers) cur = instance_aggregate(cur, offsets, layer, alpha, norm, convention);
    return cur;
}

}  // namespace voxnt
