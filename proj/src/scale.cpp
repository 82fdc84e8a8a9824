// SPDX-FileCopyrightText: 2026 The voxnt Authors
// SPDX-License-Identifier: Apache-2.0

#include "voxnt/scale.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>

#include <json.hpp>

namespace voxnt {

namespace {

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::vector<double> edges_for(const GridDims& dims, Axis axis, const BinSpec& spec) {
    if (spec.bins < 1) throw ConfigError("histogram needs at least one bin");
    double hi = spec.hi.value_or(static_cast<double>(dims.extent(axis)) + 1.0);
    if (hi <= spec.lo) hi = spec.lo + 1.0;
    return make_bin_edges(spec.lo, hi, spec.bins, spec.scale);
}

bool is_run_start(const VoxelGrid& grid, std::uint64_t index, Axis axis) {
    const VoxelCoord c = coord_of(grid.dims(), index);
    if (c[axis] == 0) return true;
    return grid.label(index - axis_stride(grid.dims(), axis)) != grid.label(index);
}

void check_shapes(const VoxelGrid& grid, const ScaleField& scales) {
    if (!(grid.dims() == scales.dims())) {
        throw ShapeError("grid " + grid.dims().to_string() + " and scale field " +
                         scales.dims().to_string() + " differ");
    }
}

}  // namespace

ScaleField::ScaleField(GridDims dims, std::vector<std::uint32_t> values)
    : dims_(dims), values_(std::move(values)) {
    dims_.validate();
    if (values_.size() != dims_.total() * 3) {
        throw ShapeError("scale field for " + dims_.to_string() + " needs " +
                         std::to_string(dims_.total() * 3) + " values, got " + std::to_string(values_.size()));
    }
}

ScaleField scales_from_offsets(const OffsetField& field) {
    const auto src = field.values();
    std::vector<std::uint32_t> values(field.dims().total() * 3);
    for (std::uint64_t n = 0; n < field.dims().total(); ++n) {
        for (std::size_t a = 0; a < 3; ++a) values[n * 3 + a] = src[n * 6 + 2 * a] + src[n * 6 + 2 * a + 1];
    }
    return ScaleField(field.dims(), std::move(values));
}

std::vector<double> make_bin_edges(double lo, double hi, std::uint32_t bins, BinScale scale) {
    if (bins < 1) throw ConfigError("histogram needs at least one bin");
    if (!(lo > 0.0) || !(hi > lo)) throw ConfigError("bin range needs 0 < lo < hi");
    std::vector<double> edges(bins + 1);
    for (std::uint32_t b = 0; b <= bins; ++b) {
        const double t = static_cast<double>(b) / bins;
        edges[b] = scale == BinScale::Log2 ? lo * std::exp2(std::log2(hi / lo) * t) : lo + (hi - lo) * t;
    }
    edges.front() = lo;
    edges.back() = hi;
    return edges;
}

std::size_t bin_index(const std::vector<double>& edges, double value) {
    const std::size_t bins = edges.size() - 1;
    const auto it = std::upper_bound(edges.begin(), edges.end(), value);
    if (it == edges.begin()) return 0;
    const auto b = static_cast<std::size_t>(it - edges.begin()) - 1;
    return std::min(b, bins - 1);
}

std::uint64_t ScaleHistogram::total() const {
    std::uint64_t sum = 0;
    for (auto c : counts) sum += c;
    return sum;
}

void ScaleHistogram::renormalize() {
    normalized.assign(counts.size(), 0.0);
    const auto peak = counts.empty() ? 0 : *std::max_element(counts.begin(), counts.end());
    if (peak == 0) return;
    for (std::size_t b = 0; b < counts.size(); ++b) {
        normalized[b] = static_cast<double>(counts[b]) / static_cast<double>(peak);
    }
}

ScaleHistogram class_scale_histogram(const VoxelGrid& grid, const ScaleField& scales, std::uint16_t class_id,
                                     Axis axis, const BinSpec& bins, SampleMode mode) {
    check_shapes(grid, scales);
    if (class_id >= grid.num_classes()) {
        throw ConfigError("class id " + std::to_string(class_id) + " >= num_classes " +
                          std::to_string(grid.num_classes()));
    }
    ScaleHistogram h;
    h.class_id = class_id;
    h.axis = axis;
    h.bin_edges = edges_for(grid.dims(), axis, bins);
    h.counts.assign(h.bin_edges.size() - 1, 0);
    for (std::uint64_t n = 0; n < grid.size(); ++n) {
        if (grid.label(n) != class_id) continue;
        if (mode == SampleMode::PerRun && !is_run_start(grid, n, axis)) continue;
        ++h.counts[bin_index(h.bin_edges, scales.at(n, axis))];
    }
    h.renormalize();
    return h;
}

std::vector<ScaleHistogram> all_scale_histograms(const VoxelGrid& grid, const ScaleField& scales,
                                                 const BinSpec& bins, SampleMode mode) {
    check_shapes(grid, scales);
    const std::uint16_t k = grid.num_classes();
    std::vector<ScaleHistogram> out(static_cast<std::size_t>(k) * 3);
    std::array<std::vector<double>, 3> edges;
    for (Axis a : kAxes) edges[static_cast<int>(a)] = edges_for(grid.dims(), a, bins);
    for (std::uint16_t c = 0; c < k; ++c) {
        for (Axis a : kAxes) {
            auto& h = out[c * 3 + static_cast<int>(a)];
            h.class_id = c;
            h.axis = a;
            h.bin_edges = edges[static_cast<int>(a)];
            h.counts.assign(h.bin_edges.size() - 1, 0);
        }
    }
    for (std::uint64_t n = 0; n < grid.size(); ++n) {
        const auto label = grid.label(n);
        if (label == kIgnoreLabel) continue;
        for (Axis a : kAxes) {
            if (mode == SampleMode::PerRun && !is_run_start(grid, n, a)) continue;
            auto& h = out[label * 3 + static_cast<int>(a)];
            ++h.counts[bin_index(h.bin_edges, scales.at(n, a))];
        }
    }
    for (auto& h : out) h.renormalize();
    return out;
}

void merge_into(ScaleHistogram& a, const ScaleHistogram& b) {
    if (a.class_id != b.class_id || a.axis != b.axis || a.bin_edges != b.bin_edges) {
        throw ShapeError("cannot merge histograms with different class, axis or bin edges");
    }
    for (std::size_t n = 0; n < a.counts.size(); ++n) a.counts[n] += b.counts[n];
    a.renormalize();
}

void merge_into(std::vector<ScaleHistogram>& a, const std::vector<ScaleHistogram>& b) {
    if (a.size() != b.size()) {
        throw ShapeError("cannot merge histogram sets of size " + std::to_string(a.size()) + " and " +
                         std::to_string(b.size()));
    }
    for (std::size_t n = 0; n < a.size(); ++n) merge_into(a[n], b[n]);
}

HistogramFormat parse_histogram_format(std::string_view s) {
    if (s == "csv") return HistogramFormat::Csv;
    if (s == "json") return HistogramFormat::Json;
    throw ConfigError("unknown histogram format '" + std::string(s) + "' (expected csv|json)");
}

std::string histograms_to_csv(const std::vector<ScaleHistogram>& histograms) {
    std::string out = "class_id,axis,bin,lower_edge,upper_edge,count,normalized\n";
    for (const auto& h : histograms) {
        for (std::size_t b = 0; b < h.counts.size(); ++b) {
            out += std::to_string(h.class_id);
            out += ',';
            out += to_string(h.axis);
            out += ',' + std::to_string(b);
            out += ',' + format_double(h.bin_edges[b]);
            out += ',' + format_double(h.bin_edges[b + 1]);
            out += ',' + std::to_string(h.counts[b]);
            out += ',' + format_double(h.normalized[b]);
            out += '\n';
        }
    }
    return out;
}

std::string histograms_to_json(const std::vector<ScaleHistogram>& histograms) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& h : histograms) {
        arr.push_back({{"class_id", h.class_id},
                       {"axis", std::string(to_string(h.axis))},
                       {"bin_edges", h.bin_edges},
                       {"counts", h.counts},
                       {"normalized", h.normalized}});
    }
    return arr.dump(1) + "\n";
}

std::vector<ScaleHistogram> histograms_from_json(std::string_view text) {
    std::vector<ScaleHistogram> out;
    try {
        const auto arr = nlohmann::json::parse(text);
        for (const auto& item : arr) {
            ScaleHistogram h;
            h.class_id = item.at("class_id").get<std::uint16_t>();
            h.axis = parse_axis(item.at("axis").get<std::string>());
            h.bin_edges = item.at("bin_edges").get<std::vector<double>>();
            h.counts = item.at("counts").get<std::vector<std::uint64_t>>();
            h.normalized = item.at("normalized").get<std::vector<double>>();
            if (h.bin_edges.size() != h.counts.size() + 1 || h.normalized.size() != h.counts.size()) {
                throw FormatError("histogram json: inconsistent bin, count and normalized lengths");
            }
            out.push_back(std::move(h));
        }
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("histogram json: ") + e.what());
    }
    return out;
}

void export_histograms(const std::vector<ScaleHistogram>& histograms, const std::filesystem::path& path,
                       HistogramFormat format) {
    const std::string text =
        format == HistogramFormat::Csv ? histograms_to_csv(histograms) : histograms_to_json(histograms);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out << text;
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

}  // namespace voxnt
