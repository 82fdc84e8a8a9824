// SPDX-FileCopyrightText: 2026 The voxnt Authors
// SPDX-License-Identifier: Apache-2.0

// Independent scalar references and fixture generators shared by the unit and
// acceptance suites. Nothing here calls the code under test except for type
// construction, so a bug in the library cannot hide behind its own oracle.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "voxnt/grid.hpp"
#include "voxnt/kernels.hpp"
#include "voxnt/synth.hpp"

namespace voxnt::testing {

// Deterministic across platforms: only mt19937_64 raw output is used.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next() { return gen_(); }
    // Uniform in [0, n); the modulo bias is irrelevant for fixtures.
    std::uint32_t below(std::uint32_t n) { return static_cast<std::uint32_t>(gen_() % n); }
    std::uint32_t between(std::uint32_t lo, std::uint32_t hi) { return lo + below(hi - lo + 1); }
    double unit() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }
    double real(double lo, double hi) { return lo + (hi - lo) * unit(); }
    bool coin(double p = 0.5) { return unit() < p; }

private:
    std::mt19937_64 gen_;
};

inline GridDims random_dims(Rng& rng, std::uint32_t max_extent) {
    return {rng.between(1, max_extent), rng.between(1, max_extent), rng.between(1, max_extent)};
}

// Labels drawn from [0, classes); with `blobby` set, neighbours are copied often so
// runs are long enough to exercise more than the trivial path.
inline VoxelGrid random_grid(Rng& rng, GridDims dims, std::uint16_t classes, bool blobby = true,
                             double ignore_rate = 0.0) {
    std::vector<std::uint16_t> labels(dims.total());
    const double copy_p = blobby ? rng.real(0.0, 0.9) : 0.0;
    for (std::uint64_t n = 0; n < labels.size(); ++n) {
        if (ignore_rate > 0.0 && rng.coin(ignore_rate)) {
            labels[n] = kIgnoreLabel;
        } else if (n > 0 && rng.coin(copy_p)) {
            const auto c = coord_of(dims, n);
            // copy from a random earlier axis neighbour when one exists
            const int axis = static_cast<int>(rng.below(3));
            std::uint64_t src = n - 1;
            if (axis == 0 && c.i > 0) src = n - static_cast<std::uint64_t>(dims.y) * dims.z;
            if (axis == 1 && c.j > 0) src = n - dims.z;
            labels[n] = labels[src];
        } else {
            labels[n] = static_cast<std::uint16_t>(rng.below(classes));
        }
    }
    return VoxelGrid(dims, std::move(labels), std::max<std::uint16_t>(classes, 1));
}

inline std::uint16_t raw_label(const VoxelGrid& g, std::int64_t i, std::int64_t j, std::int64_t k) {
    const auto& d = g.dims();
    return g.labels()[static_cast<std::size_t>((i * d.y + j) * d.z + k)];
}

// Walks outward from every voxel one step at a time and counts the voxels that keep
// the origin's label, origin included.
inline std::vector<std::uint32_t> oracle_offsets(const VoxelGrid& g) {
    const auto& d = g.dims();
    const std::int64_t ext[3] = {d.x, d.y, d.z};
    static constexpr int dirs[6][3] = {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
    std::vector<std::uint32_t> out;
    out.reserve(d.total() * 6);
    for (std::int64_t i = 0; i < ext[0]; ++i)
        for (std::int64_t j = 0; j < ext[1]; ++j)
            for (std::int64_t k = 0; k < ext[2]; ++k) {
                const auto own = raw_label(g, i, j, k);
                for (const auto& dv : dirs) {
                    std::uint32_t count = 1;
                    std::int64_t p[3] = {i + dv[0], j + dv[1], k + dv[2]};
                    while (p[0] >= 0 && p[0] < ext[0] && p[1] >= 0 && p[1] < ext[1] && p[2] >= 0 &&
                           p[2] < ext[2] && raw_label(g, p[0], p[1], p[2]) == own) {
                        ++count;
                        for (int a = 0; a < 3; ++a) p[a] += dv[a];
                    }
                    out.push_back(count);
                }
            }
    return out;
}

// Length of the maximal same-label run through each voxel along `axis`, measured
// by locating both ends of the run.
inline std::vector<std::uint32_t> oracle_run_lengths(const VoxelGrid& g, int axis) {
    const auto& d = g.dims();
    const std::int64_t ext[3] = {d.x, d.y, d.z};
    std::vector<std::uint32_t> out(d.total());
    for (std::int64_t i = 0; i < ext[0]; ++i)
        for (std::int64_t j = 0; j < ext[1]; ++j)
            for (std::int64_t k = 0; k < ext[2]; ++k) {
                std::int64_t c[3] = {i, j, k};
                const auto own = raw_label(g, i, j, k);
                std::int64_t lo = c[axis], hi = c[axis];
                auto at = [&](std::int64_t v) {
                    std::int64_t q[3] = {i, j, k};
                    q[axis] = v;
                    return raw_label(g, q[0], q[1], q[2]);
                };
                while (lo > 0 && at(lo - 1) == own) --lo;
                while (hi + 1 < ext[axis] && at(hi + 1) == own) ++hi;
                out[static_cast<std::size_t>((i * d.y + j) * d.z + k)] = static_cast<std::uint32_t>(hi - lo + 1);
            }
    return out;
}

// Brute-force confusion tally; ignore-label truth voxels are skipped.
inline std::vector<std::uint64_t> oracle_confusion(const VoxelGrid& truth, const VoxelGrid& pred,
                                                   std::uint16_t classes, std::uint64_t* ignored = nullptr) {
    std::vector<std::uint64_t> cells(static_cast<std::size_t>(classes) * classes, 0);
    std::uint64_t skipped = 0;
    for (std::size_t n = 0; n < truth.labels().size(); ++n) {
        const auto t = truth.labels()[n];
        if (t == kIgnoreLabel) {
            ++skipped;
            continue;
        }
        cells[static_cast<std::size_t>(t) * classes + pred.labels()[n]] += 1;
    }
    if (ignored) *ignored = skipped;
    return cells;
}

inline double rel_err(double got, double want) {
    const double scale = std::max(1.0, std::fabs(want));
    return std::fabs(got - want) / scale;
}

// Plane projection written as the textbook double loop: for each output cell,
// gather the column's logits, softmax them, weight the features.
inline std::vector<double> oracle_project(const FeatureVolume& vol, const ProjectionWeights& w, Plane plane) {
    const auto& d = vol.dims();
    const std::uint32_t C = vol.channels();
    const std::uint32_t ext[3] = {d.x, d.y, d.z};
    int row_axis = 0, col_axis = 1, depth_axis = 2, eta_ch = 0;
    if (plane == Plane::XZ) {
        row_axis = 0, col_axis = 2, depth_axis = 1, eta_ch = 1;
    } else if (plane == Plane::YZ) {
        row_axis = 1, col_axis = 2, depth_axis = 0, eta_ch = 2;
    }
    std::vector<double> out;
    for (std::uint32_t r = 0; r < ext[row_axis]; ++r)
        for (std::uint32_t c = 0; c < ext[col_axis]; ++c) {
            std::vector<double> logits;
            std::vector<std::uint64_t> idx;
            for (std::uint32_t t = 0; t < ext[depth_axis]; ++t) {
                std::uint32_t q[3];
                q[row_axis] = r;
                q[col_axis] = c;
                q[depth_axis] = t;
                const std::uint64_t n = (static_cast<std::uint64_t>(q[0]) * d.y + q[1]) * d.z + q[2];
                idx.push_back(n);
                logits.push_back(w.values()[n * 3 + eta_ch]);
            }
            double mx = logits[0];
            for (double l : logits) mx = std::max(mx, l);
            double z = 0.0;
            for (double l : logits) z += std::exp(l - mx);
            for (std::uint32_t ch = 0; ch < C; ++ch) {
                double acc = 0.0;
                for (std::size_t t = 0; t < idx.size(); ++t) acc += std::exp(logits[t] - mx) / z * vol.at(idx[t], ch);
                out.push_back(acc);
            }
        }
    return out;
}

inline std::vector<double> matvec(const std::vector<double>& m, const double* v, std::uint32_t C) {
    std::vector<double> out(C, 0.0);
    for (std::uint32_t r = 0; r < C; ++r)
        for (std::uint32_t c = 0; c < C; ++c) out[r] += m[r * C + c] * v[c];
    return out;
}

// Candidate index along one signed direction: origin + sign * max(round(alpha*d) - 1, 0),
// clamped to the axis.
inline std::int64_t oracle_candidate(std::int64_t origin, int sign, double alpha, double dist, std::int64_t extent) {
    const double scaled = alpha * dist;
    const double rounded = scaled >= 0 ? std::floor(scaled + 0.5) : -std::floor(-scaled + 0.5);
    const std::int64_t step = std::max<std::int64_t>(static_cast<std::int64_t>(rounded) - 1, 0);
    return std::clamp<std::int64_t>(origin + sign * step, 0, extent - 1);
}

struct OracleAggregate {
    std::vector<double> attention;  // six per voxel
    std::vector<double> residual;   // C per voxel, before normalization
    std::vector<double> normalized;
};

// Per-voxel attention over the six boundary candidates followed by group norm over
// (group channels x all voxels), all spelled out with plain loops.
inline OracleAggregate oracle_aggregate(const FeatureVolume& vol, const std::vector<double>& offsets,
                                        const AttentionWeights& w, double alpha, std::uint32_t groups, double eps) {
    const auto& d = vol.dims();
    const std::uint32_t C = vol.channels();
    const std::int64_t ext[3] = {d.x, d.y, d.z};
    static constexpr int axis_of_dir[6] = {0, 0, 1, 1, 2, 2};
    static constexpr int sign_of_dir[6] = {1, -1, 1, -1, 1, -1};
    OracleAggregate out;
    out.residual.assign(d.total() * C, 0.0);
    for (std::uint64_t n = 0; n < d.total(); ++n) {
        const std::int64_t c[3] = {static_cast<std::int64_t>(n / (static_cast<std::uint64_t>(d.y) * d.z)),
                                   static_cast<std::int64_t>((n / d.z) % d.y), static_cast<std::int64_t>(n % d.z)};
        const double* v = vol.values().data() + n * C;
        const auto q = matvec(w.wq, v, C);
        std::array<std::uint64_t, 6> cand{};
        std::array<double, 6> score{};
        for (int dir = 0; dir < 6; ++dir) {
            std::int64_t p[3] = {c[0], c[1], c[2]};
            const int a = axis_of_dir[dir];
            p[a] = oracle_candidate(c[a], sign_of_dir[dir], alpha, offsets[n * 6 + dir], ext[a]);
            cand[dir] = static_cast<std::uint64_t>((p[0] * ext[1] + p[1]) * ext[2] + p[2]);
            const auto k = matvec(w.wk, vol.values().data() + cand[dir] * C, C);
            double dot = 0.0;
            for (std::uint32_t ch = 0; ch < C; ++ch) dot += q[ch] * k[ch];
            score[dir] = dot / std::sqrt(w.d_k);
        }
        double mx = score[0];
        for (double s : score) mx = std::max(mx, s);
        double z = 0.0;
        for (double s : score) z += std::exp(s - mx);
        for (int dir = 0; dir < 6; ++dir) {
            const double a = std::exp(score[dir] - mx) / z;
            out.attention.push_back(a);
            const auto val = matvec(w.wv, vol.values().data() + cand[dir] * C, C);
            for (std::uint32_t ch = 0; ch < C; ++ch) out.residual[n * C + ch] += a * val[ch];
        }
        for (std::uint32_t ch = 0; ch < C; ++ch) out.residual[n * C + ch] += v[ch];
    }

    out.normalized.assign(out.residual.size(), 0.0);
    const std::uint32_t per = C / groups;
    for (std::uint32_t g = 0; g < groups; ++g) {
        double sum = 0.0;
        std::uint64_t count = 0;
        for (std::uint64_t n = 0; n < d.total(); ++n)
            for (std::uint32_t ch = g * per; ch < (g + 1) * per; ++ch, ++count) sum += out.residual[n * C + ch];
        const double mean = sum / static_cast<double>(count);
        double var = 0.0;
        for (std::uint64_t n = 0; n < d.total(); ++n)
            for (std::uint32_t ch = g * per; ch < (g + 1) * per; ++ch) {
                const double dv = out.residual[n * C + ch] - mean;
                var += dv * dv;
            }
        var /= static_cast<double>(count);
        for (std::uint64_t n = 0; n < d.total(); ++n)
            for (std::uint32_t ch = g * per; ch < (g + 1) * per; ++ch)
                out.normalized[n * C + ch] = (out.residual[n * C + ch] - mean) / std::sqrt(var + eps);
    }
    return out;
}

inline FeatureVolume random_volume(Rng& rng, GridDims dims, std::uint32_t channels) {
    std::vector<double> v(dims.total() * channels);
    for (auto& x : v) x = rng.real(-1.0, 1.0);
    return FeatureVolume(dims, channels, std::move(v));
}

inline AttentionWeights random_attention(Rng& rng, std::uint32_t channels) {
    auto mat = [&] {
        std::vector<double> m(static_cast<std::size_t>(channels) * channels);
        for (auto& x : m) x = rng.real(-1.0, 1.0);
        return m;
    };
    auto wq = mat();
    auto wk = mat();
    auto wv = mat();
    return AttentionWeights::make(channels, std::move(wq), std::move(wk), std::move(wv));
}

// Boxes with a gap of at least one voxel on some axis, drawn by rejection; optional
// separated specks and streaks on top. Shape classes never equal the background.
inline SceneSpec random_separated_spec(Rng& rng, std::uint32_t max_extent) {
    SceneSpec spec;
    spec.dims = {rng.between(2, max_extent), rng.between(2, max_extent), rng.between(2, max_extent)};
    spec.background_class = static_cast<std::uint16_t>(rng.below(3));
    spec.seed = rng.next();
    auto shape_class = [&] {
        std::uint16_t c;
        do c = static_cast<std::uint16_t>(rng.below(spec.num_classes));
        while (c == spec.background_class);
        return c;
    };
    auto apart = [](const Box& a, const Box& b) {
        for (int ax = 0; ax < 3; ++ax) {
            const auto axis = static_cast<Axis>(ax);
            if (a.max[axis] < b.min[axis] || b.max[axis] < a.min[axis]) return true;
        }
        return false;
    };
    const std::uint32_t wanted = rng.between(1, 6);
    for (std::uint32_t attempt = 0; attempt < 200 && spec.shapes.size() < wanted; ++attempt) {
        Box b;
        for (int ax = 0; ax < 3; ++ax) {
            const auto axis = static_cast<Axis>(ax);
            const std::uint32_t ext = spec.dims.extent(axis);
            const std::uint32_t len = rng.between(1, std::max(1u, ext / 2));
            b.min[axis] = rng.below(ext - len + 1);
            b.max[axis] = b.min[axis] + len;
        }
        bool ok = true;
        for (const auto& s : spec.shapes) ok = ok && apart(s.box, b);
        if (ok) spec.shapes.push_back({b, shape_class()});
    }
    if (rng.coin(0.5)) {
        spec.keep_separated = true;
        spec.specks = {rng.below(4), shape_class()};
        if (rng.coin(0.5)) {
            spec.streaks.axis = static_cast<Axis>(rng.below(3));
            spec.streaks.count = rng.below(3);
            spec.streaks.length = rng.between(1, spec.dims.extent(spec.streaks.axis));
            spec.streaks.class_id = shape_class();
        }
    }
    return spec;
}

}  // namespace voxnt::testing
