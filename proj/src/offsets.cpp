// SPDX-FileCopyrightText: 2026 The voxnt Authors
// SPDX-License-Identifier: Apache-2.0

#include "voxnt/offsets.hpp"

#include <algorithm>
#include <cmath>

#include "voxnt/parallel.hpp"

namespace voxnt {

namespace {

// A grid seen along one axis: `outer` slabs, each holding `length` planes of `inner`
// contiguous voxels. For x: (1, X, Y*Z); for y: (X, Y, Z); for z: (X*Y, Z, 1).
struct LineLayout {
    std::uint64_t outer;
    std::uint64_t length;
    std::uint64_t inner;
};

LineLayout layout_for(const GridDims& d, Axis axis) {
    switch (axis) {
    case Axis::X: return {1, d.x, static_cast<std::uint64_t>(d.y) * d.z};
    case Axis::Y: return {d.x, d.y, d.z};
    case Axis::Z: return {static_cast<std::uint64_t>(d.x) * d.y, d.z, 1};
    }
    return {1, 1, 1};
}

constexpr std::uint64_t kInnerBlock = 512;

template <bool Bridge>
inline bool same_run(std::uint16_t a, std::uint16_t b) {
    if constexpr (Bridge) {
        return a == b || a == kIgnoreLabel || b == kIgnoreLabel;
    } else {
        return a == b;
    }
}

// Writes one direction into out[index * stride].
template <bool Bridge>
void scan_direction(const std::uint16_t* labels, const GridDims& dims, Axis axis, bool positive,
                    std::uint32_t* out, std::size_t stride, unsigned workers) {
    const LineLayout lay = layout_for(dims, axis);
    const std::uint64_t blocks = (lay.inner + kInnerBlock - 1) / kInnerBlock;
    const std::uint64_t items = lay.outer * blocks;

    parallel_for_chunks(items, workers, [&](std::uint64_t begin, std::uint64_t end) {
        for (std::uint64_t item = begin; item < end; ++item) {
            const std::uint64_t o = item / blocks;
            const std::uint64_t n0 = (item % blocks) * kInnerBlock;
            const std::uint64_t n1 = std::min(lay.inner, n0 + kInnerBlock);
            const std::uint64_t slab = o * lay.length * lay.inner;
            const std::uint64_t first = positive ? lay.length - 1 : 0;

            for (std::uint64_t n = n0; n < n1; ++n) out[(slab + first * lay.inner + n) * stride] = 1;

            for (std::uint64_t step = 1; step < lay.length; ++step) {
                const std::uint64_t l = positive ? lay.length - 1 - step : step;
                const std::uint64_t prev = positive ? l + 1 : l - 1;
                const std::uint64_t row = slab + l * lay.inner;
                const std::uint64_t prev_row = slab + prev * lay.inner;
                for (std::uint64_t n = n0; n < n1; ++n) {
                    const bool same = same_run<Bridge>(labels[row + n], labels[prev_row + n]);
                    out[(row + n) * stride] = same ? out[(prev_row + n) * stride] + 1 : 1;
                }
            }
        }
    });
}

void scan(const VoxelGrid& grid, Axis axis, bool positive, const ScanPolicy& policy,
          std::uint32_t* out, std::size_t stride, unsigned workers) {
    if (policy.ignore_breaks_runs) {
        scan_direction<false>(grid.labels().data(), grid.dims(), axis, positive, out, stride, workers);
    } else {
        scan_direction<true>(grid.labels().data(), grid.dims(), axis, positive, out, stride, workers);
    }
}

}  // namespace

std::vector<std::uint32_t> run_length_positive(const VoxelGrid& grid, Axis axis, const ScanPolicy& policy) {
    std::vector<std::uint32_t> out(grid.size());
    scan(grid, axis, true, policy, out.data(), 1, 1);
    return out;
}

std::vector<std::uint32_t> run_length_along(const VoxelGrid& grid, Axis axis, bool positive,
                                            const ScanPolicy& policy) {
    if (positive) return run_length_positive(grid, axis, policy);
    const VoxelGrid flipped = flip(grid, axis);
    const auto scanned = run_length_positive(flipped, axis, policy);
    return flip_channel<std::uint32_t>(grid.dims(), scanned, axis);
}

std::vector<std::uint32_t> compute_direction(const VoxelGrid& grid, Direction direction, const ScanPolicy& policy,
                                             unsigned workers) {
    std::vector<std::uint32_t> out(grid.size());
    scan(grid, axis_of(direction), is_positive(direction), policy, out.data(), 1, workers);
    return out;
}

OffsetField compute_offsets(const VoxelGrid& grid, const ScanPolicy& policy, unsigned workers) {
    std::vector<std::uint32_t> values(grid.size() * 6);
    for (Direction d : kDirections) {
        scan(grid, axis_of(d), is_positive(d), policy, values.data() + channel_of(d), 6, workers);
    }
    return OffsetField(grid.dims(), std::move(values));
}

OffsetField compute_offsets_naive(const VoxelGrid& grid, const ScanPolicy& policy) {
    const GridDims& dims = grid.dims();
    const auto same = [&](std::uint16_t a, std::uint16_t b) {
        return policy.ignore_breaks_runs ? same_run<false>(a, b) : same_run<true>(a, b);
    };
    std::vector<std::uint32_t> values(grid.size() * 6);
    for (std::uint32_t i = 0; i < dims.x; ++i)
        for (std::uint32_t j = 0; j < dims.y; ++j)
            for (std::uint32_t k = 0; k < dims.z; ++k) {
                const VoxelCoord origin{i, j, k};
                const std::uint64_t idx = linear_index(dims, i, j, k);
                for (Direction d : kDirections) {
                    const Axis a = axis_of(d);
                    const std::int64_t step = is_positive(d) ? 1 : -1;
                    VoxelCoord cur = origin;
                    std::uint32_t count = 1;
                    while (true) {
                        const std::int64_t next = static_cast<std::int64_t>(cur[a]) + step;
                        if (next < 0 || next >= static_cast<std::int64_t>(dims.extent(a))) break;
                        VoxelCoord nc = cur;
                        nc[a] = static_cast<std::uint32_t>(next);
                        if (!same(grid.label(cur.i, cur.j, cur.k), grid.label(nc.i, nc.j, nc.k))) break;
                        ++count;
                        cur = nc;
                    }
                    values[idx * 6 + channel_of(d)] = count;
                }
            }
    return OffsetField(dims, std::move(values));
}

NormalizedOffsetField normalize_offsets(const OffsetField& field) {
    const GridDims& dims = field.dims();
    const auto src = field.values();
    std::vector<double> values(src.size());
    std::array<double, 6> extent{};
    for (Direction d : kDirections) extent[channel_of(d)] = dims.extent(axis_of(d));
    for (std::size_t n = 0; n < src.size(); ++n) values[n] = src[n] / extent[n % 6];
    return NormalizedOffsetField(dims, std::move(values));
}

OffsetField denormalize_offsets(const NormalizedOffsetField& field) {
    const GridDims& dims = field.dims();
    const auto src = field.values();
    std::vector<std::uint32_t> values(src.size());
    for (std::size_t n = 0; n < src.size(); ++n) {
        const double extent = dims.extent(axis_of(static_cast<Direction>(n % 6)));
        if (!std::isfinite(src[n])) throw ValidationError("non-finite normalized offset");
        const double r = std::clamp(std::round(src[n] * extent), 1.0, extent);
        values[n] = static_cast<std::uint32_t>(r);
    }
    return OffsetField(dims, std::move(values));
}

std::vector<std::uint8_t> regression_mask(const VoxelGrid& grid, const ScanPolicy& policy) {
    std::vector<std::uint8_t> mask(grid.size());
    const auto labels = grid.labels();
    for (std::size_t n = 0; n < mask.size(); ++n) {
        const auto l = labels[n];
        mask[n] = !(l == kIgnoreLabel || (!policy.include_empty && l == kEmptyClass));
    }
    return mask;
}

}  // namespace voxnt
