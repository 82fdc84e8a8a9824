// SPDX-FileCopyrightText: 2026 The voxnt Authors
// SPDX-License-Identifier: Apache-2.0

#include "voxnt/io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

namespace voxnt {

namespace {

constexpr std::array<char, 4> kGridMagic = {'V', 'X', 'G', '1'};
constexpr std::array<char, 4> kOffsetMagic = {'V', 'X', 'O', '1'};
constexpr std::array<char, 4> kTensorMagic = {'V', 'X', 'W', '1'};
constexpr std::size_t kDimsHeaderBytes = 20;

class ByteWriter {
public:
    explicit ByteWriter(std::size_t reserve) { bytes_.reserve(reserve); }

    void magic(const std::array<char, 4>& m) {
        for (char c : m) bytes_.push_back(static_cast<std::uint8_t>(c));
    }
    void u16(std::uint16_t v) {
        bytes_.push_back(static_cast<std::uint8_t>(v));
        bytes_.push_back(static_cast<std::uint8_t>(v >> 8));
    }
    void u32(std::uint32_t v) {
        for (int s = 0; s < 32; s += 8) bytes_.push_back(static_cast<std::uint8_t>(v >> s));
    }
    void u64(std::uint64_t v) {
        for (int s = 0; s < 64; s += 8) bytes_.push_back(static_cast<std::uint8_t>(v >> s));
    }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

    std::vector<std::uint8_t> take() { return std::move(bytes_); }

private:
    std::vector<std::uint8_t> bytes_;
};

class ByteReader {
public:
    ByteReader(std::span<const std::uint8_t> bytes, std::string_view what)
        : bytes_(bytes), what_(what) {}

    std::size_t remaining() const { return bytes_.size() - pos_; }

    void need(std::size_t n) const {
        if (remaining() < n) {
            throw FormatError(std::string(what_) + ": truncated, needed " + std::to_string(n) +
                              " more bytes at offset " + std::to_string(pos_) + ", have " +
                              std::to_string(remaining()));
        }
    }
    bool peek_magic(const std::array<char, 4>& m) const {
        return remaining() >= 4 && std::memcmp(bytes_.data() + pos_, m.data(), 4) == 0;
    }
    void expect_magic(const std::array<char, 4>& m) {
        need(4);
        if (!peek_magic(m)) {
            const std::string got(reinterpret_cast<const char*>(bytes_.data() + pos_), 4);
            throw FormatError(std::string(what_) + ": unknown magic '" + got + "', expected '" +
                              std::string(m.data(), 4) + "'");
        }
        pos_ += 4;
    }
    std::uint16_t u16() {
        need(2);
        const auto v = static_cast<std::uint16_t>(bytes_[pos_] | (bytes_[pos_ + 1] << 8));
        pos_ += 2;
        return v;
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int b = 0; b < 4; ++b) v |= static_cast<std::uint32_t>(bytes_[pos_ + b]) << (8 * b);
        pos_ += 4;
        return v;
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int b = 0; b < 8; ++b) v |= static_cast<std::uint64_t>(bytes_[pos_ + b]) << (8 * b);
        pos_ += 8;
        return v;
    }
    double f64() { return std::bit_cast<double>(u64()); }

private:
    std::span<const std::uint8_t> bytes_;
    std::string_view what_;
    std::size_t pos_ = 0;
};

void write_dims_header(ByteWriter& w, const std::array<char, 4>& magic, const GridDims& dims) {
    w.magic(magic);
    w.u32(kFormatVersion);
    w.u32(dims.x);
    w.u32(dims.y);
    w.u32(dims.z);
}

GridDims read_dims_header(ByteReader& r, const std::array<char, 4>& magic, std::string_view what) {
    r.expect_magic(magic);
    const auto version = r.u32();
    if (version != kFormatVersion) {
        throw FormatError(std::string(what) + ": unsupported version " + std::to_string(version));
    }
    GridDims dims{r.u32(), r.u32(), r.u32()};
    try {
        dims.validate();
    } catch (const ShapeError& e) {
        throw FormatError(std::string(what) + ": bad header dims: " + e.what());
    }
    return dims;
}

// Calls fn(stream_position, linear_index) for every voxel in storage order.
template <typename Fn>
void for_each_in_order(const GridDims& dims, const AxisOrder& order, Fn&& fn) {
    if (order.is_identity()) {
        for (std::uint64_t n = 0; n < dims.total(); ++n) fn(n, n);
        return;
    }
    const auto [a0, a1, a2] = order.order;
    std::uint64_t pos = 0;
    VoxelCoord c;
    for (std::uint32_t p = 0; p < dims.extent(a0); ++p) {
        c[a0] = p;
        for (std::uint32_t q = 0; q < dims.extent(a1); ++q) {
            c[a1] = q;
            for (std::uint32_t s = 0; s < dims.extent(a2); ++s) {
                c[a2] = s;
                fn(pos++, linear_index_unchecked(dims, c.i, c.j, c.k));
            }
        }
    }
}

std::string path_context(const std::filesystem::path& path) { return "'" + path.string() + "'"; }

}  // namespace

GridFormat parse_grid_format(std::string_view s) {
    if (s == "auto") return GridFormat::Auto;
    if (s == "raw") return GridFormat::Raw;
    if (s == "container") return GridFormat::Container;
    throw ConfigError("unknown grid format '" + std::string(s) + "' (expected raw|container|auto)");
}

AxisOrder AxisOrder::parse(std::string_view s) {
    if (s.size() != 3) throw ConfigError("axis order must name three axes, got '" + std::string(s) + "'");
    AxisOrder out;
    std::array<bool, 3> seen{};
    for (std::size_t n = 0; n < 3; ++n) {
        const Axis a = parse_axis(s.substr(n, 1));
        if (seen[static_cast<int>(a)]) {
            throw ConfigError("axis order '" + std::string(s) + "' is not a permutation of xyz");
        }
        seen[static_cast<int>(a)] = true;
        out.order[n] = a;
    }
    return out;
}

GridFormat sniff_grid_format(std::span<const std::uint8_t> bytes) {
    return ByteReader(bytes, "grid").peek_magic(kGridMagic) ? GridFormat::Container : GridFormat::Raw;
}

std::vector<std::uint8_t> encode_grid(const VoxelGrid& grid, const FormatOptions& opts) {
    const GridDims& dims = grid.dims();
    const auto labels = grid.labels();
    if (opts.format == GridFormat::Raw) {
        std::vector<std::uint8_t> out(dims.total() * 2);
        for_each_in_order(dims, opts.axis_order, [&](std::uint64_t pos, std::uint64_t idx) {
            out[2 * pos] = static_cast<std::uint8_t>(labels[idx]);
            out[2 * pos + 1] = static_cast<std::uint8_t>(labels[idx] >> 8);
        });
        return out;
    }
    ByteWriter w(kDimsHeaderBytes + dims.total() * 2);
    write_dims_header(w, kGridMagic, dims);
    for (auto l : labels) w.u16(l);
    return w.take();
}

VoxelGrid decode_grid(std::span<const std::uint8_t> bytes, GridDims dims, const FormatOptions& opts) {
    ByteReader r(bytes, "grid");
    const bool container = opts.format == GridFormat::Container ||
                           (opts.format == GridFormat::Auto && r.peek_magic(kGridMagic));
    if (container) {
        dims = read_dims_header(r, kGridMagic, "grid container");
        const std::uint64_t expected = dims.total() * 2;
        if (r.remaining() != expected) {
            throw FormatError("grid container: payload size mismatch, expected " +
                              std::to_string(expected) + " bytes, got " +
                              std::to_string(r.remaining()));
        }
        std::vector<std::uint16_t> labels(dims.total());
        for (auto& l : labels) l = r.u16();
        return VoxelGrid(dims, std::move(labels), opts.num_classes, opts.voxel_size_m);
    }

    dims.validate();
    const std::uint64_t expected = dims.total() * 2;
    if (bytes.size() != expected) {
        throw FormatError("raw grid: size mismatch for dims " + dims.to_string() + ", expected " +
                          std::to_string(expected) + " bytes, got " + std::to_string(bytes.size()));
    }
    std::vector<std::uint16_t> labels(dims.total());
    for_each_in_order(dims, opts.axis_order, [&](std::uint64_t pos, std::uint64_t idx) {
        labels[idx] = static_cast<std::uint16_t>(bytes[2 * pos] | (bytes[2 * pos + 1] << 8));
    });
    return VoxelGrid(dims, std::move(labels), opts.num_classes, opts.voxel_size_m);
}

VoxelGrid read_grid(const std::filesystem::path& path, GridDims dims, const FormatOptions& opts) {
    const auto bytes = read_file_bytes(path);
    VoxelGrid grid = [&] {
        try {
            return decode_grid(bytes, dims, opts);
        } catch (const FormatError& e) {
            throw FormatError(path_context(path) + ": " + e.what());
        }
    }();
    if (opts.invalid_mask) {
        const auto mask = read_invalid_mask(*opts.invalid_mask, grid.dims(), opts.axis_order);
        grid = apply_invalid_mask(grid, mask);
    }
    return grid;
}

void write_grid(const VoxelGrid& grid, const std::filesystem::path& path, const FormatOptions& opts) {
    write_file_bytes(path, encode_grid(grid, opts));
}

std::vector<std::uint8_t> encode_offsets(const OffsetField& field) {
    ByteWriter w(kDimsHeaderBytes + field.values().size() * 4);
    write_dims_header(w, kOffsetMagic, field.dims());
    for (auto v : field.values()) w.u32(v);
    return w.take();
}

OffsetField decode_offsets(std::span<const std::uint8_t> bytes) {
    ByteReader r(bytes, "offset container");
    const GridDims dims = read_dims_header(r, kOffsetMagic, "offset container");
    const std::uint64_t expected = dims.total() * 6 * 4;
    if (r.remaining() != expected) {
        throw FormatError("offset container: payload size mismatch, expected " +
                          std::to_string(expected) + " bytes, got " + std::to_string(r.remaining()));
    }
    std::vector<std::uint32_t> values(dims.total() * 6);
    for (auto& v : values) v = r.u32();
    return OffsetField(dims, std::move(values));
}

OffsetField read_offsets(const std::filesystem::path& path) {
    const auto bytes = read_file_bytes(path);
    try {
        return decode_offsets(bytes);
    } catch (const FormatError& e) {
        throw FormatError(path_context(path) + ": " + e.what());
    }
}

void write_offsets(const OffsetField& field, const std::filesystem::path& path) {
    write_file_bytes(path, encode_offsets(field));
}

std::vector<std::uint8_t> read_invalid_mask(const std::filesystem::path& path, GridDims dims,
                                            const AxisOrder& order) {
    const auto bytes = read_file_bytes(path);
    if (bytes.size() != dims.total()) {
        throw FormatError(path_context(path) + ": invalid mask size mismatch, expected " +
                          std::to_string(dims.total()) + " bytes, got " + std::to_string(bytes.size()));
    }
    std::vector<std::uint8_t> mask(dims.total());
    for_each_in_order(dims, order, [&](std::uint64_t pos, std::uint64_t idx) {
        const auto b = bytes[pos];
        if (b > 1) {
            throw FormatError(path_context(path) + ": invalid mask byte " + std::to_string(b) +
                              " at offset " + std::to_string(pos) + " (expected 0 or 1)");
        }
        mask[idx] = b;
    });
    return mask;
}

VoxelGrid apply_invalid_mask(const VoxelGrid& grid, std::span<const std::uint8_t> mask) {
    if (mask.size() != grid.size()) {
        throw ShapeError("invalid mask has " + std::to_string(mask.size()) + " entries, grid has " +
                         std::to_string(grid.size()));
    }
    std::vector<std::uint16_t> labels(grid.labels().begin(), grid.labels().end());
    for (std::size_t n = 0; n < labels.size(); ++n) {
        if (mask[n]) labels[n] = kIgnoreLabel;
    }
    return grid.with_labels(std::move(labels));
}

std::uint64_t RealTensor::element_count() const {
    std::uint64_t n = 1;
    for (auto e : shape) n *= e;
    return n;
}

std::vector<std::uint8_t> encode_tensor(const RealTensor& tensor) {
    if (tensor.element_count() != tensor.data.size()) {
        throw ShapeError("tensor shape holds " + std::to_string(tensor.element_count()) +
                         " elements but data has " + std::to_string(tensor.data.size()));
    }
    ByteWriter w(12 + 4 * tensor.shape.size() + 8 * tensor.data.size());
    w.magic(kTensorMagic);
    w.u32(kFormatVersion);
    w.u32(static_cast<std::uint32_t>(tensor.shape.size()));
    for (auto e : tensor.shape) w.u32(e);
    for (double v : tensor.data) w.f64(v);
    return w.take();
}

RealTensor decode_tensor(std::span<const std::uint8_t> bytes) {
    ByteReader r(bytes, "tensor container");
    r.expect_magic(kTensorMagic);
    const auto version = r.u32();
    if (version != kFormatVersion) {
        throw FormatError("tensor container: unsupported version " + std::to_string(version));
    }
    RealTensor t;
    const auto rank = r.u32();
    r.need(static_cast<std::size_t>(rank) * 4);
    t.shape.resize(rank);
    for (auto& e : t.shape) e = r.u32();
    const std::uint64_t count = t.element_count();
    if (r.remaining() != count * 8) {
        throw FormatError("tensor container: payload size mismatch, expected " +
                          std::to_string(count * 8) + " bytes, got " + std::to_string(r.remaining()));
    }
    t.data.resize(count);
    for (auto& v : t.data) v = r.f64();
    return t;
}

RealTensor read_tensor(const std::filesystem::path& path) {
    const auto bytes = read_file_bytes(path);
    try {
        return decode_tensor(bytes);
    } catch (const FormatError& e) {
        throw FormatError(path_context(path) + ": " + e.what());
    }
}

void write_tensor(const RealTensor& tensor, const std::filesystem::path& path) {
    write_file_bytes(path, encode_tensor(tensor));
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path_context(path) + " for reading");
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) throw IoError("read failed for " + path_context(path));
    return bytes;
}

void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path_context(path) + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed for " + path_context(path));
}

}  // namespace voxnt
