// SPDX-FileCopyrightText: 2026 The voxnt Authors
// SPDX-License-Identifier: Apache-2.0

#include "voxnt/synth.hpp"

#include <algorithm>
#include <random>

#include <json.hpp>

namespace voxnt {

namespace {

constexpr int kMaxPlacementAttempts = 10000;

// std::uniform_int_distribution is implementation-defined; this draw is not.
class SeededDraw {
public:
    explicit SeededDraw(std::uint64_t seed) : engine_(seed) {}

    std::uint32_t below(std::uint32_t n) {
        const std::uint64_t range = n;
        const std::uint64_t limit = std::mt19937_64::max() - std::mt19937_64::max() % range;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return static_cast<std::uint32_t>(x % range);
    }

private:
    std::mt19937_64 engine_;
};

void check_class(std::uint16_t c, const SceneSpec& spec, const char* what) {
    if (c >= spec.num_classes) {
        throw SpecError(std::string(what) + " class " + std::to_string(c) + " >= num_classes " +
                        std::to_string(spec.num_classes));
    }
}

bool separated_from_all(const Box& b, const std::vector<PlacedShape>& placed) {
    return std::all_of(placed.begin(), placed.end(),
                       [&](const PlacedShape& p) { return boxes_separated(b, p.box); });
}

template <typename Draw>
Box place_random(const SceneSpec& spec, const std::vector<PlacedShape>& placed, Draw&& draw, const char* what) {
    for (int attempt = 0; attempt < kMaxPlacementAttempts; ++attempt) {
        const Box b = draw();
        if (!spec.keep_separated || separated_from_all(b, placed)) return b;
    }
    throw SpecError(std::string("could not place a separated ") + what + " after " +
                    std::to_string(kMaxPlacementAttempts) + " attempts");
}

nlohmann::json coord_json(const VoxelCoord& c) { return nlohmann::json::array({c.i, c.j, c.k}); }

VoxelCoord coord_from(const nlohmann::json& j) {
    const auto v = j.get<std::vector<std::uint32_t>>();
    if (v.size() != 3) throw SpecError("coordinates must have three entries");
    return {v[0], v[1], v[2]};
}

}  // namespace

bool boxes_separated(const Box& a, const Box& b) {
    for (Axis ax : kAxes) {
        if (b.min[ax] >= a.max[ax] + 1 || a.min[ax] >= b.max[ax] + 1) return true;
    }
    return false;
}

std::string_view to_string(ShapeKind kind) {
    switch (kind) {
    case ShapeKind::Box: return "box";
    case ShapeKind::Speck: return "speck";
    case ShapeKind::Streak: return "streak";
    }
    return "?";
}

void SceneSpec::validate() const {
    try {
        dims.validate();
    } catch (const ShapeError& e) {
        throw SpecError(e.what());
    }
    if (num_classes < 1 || num_classes > kIgnoreLabel) throw SpecError("num_classes must be in [1, 255]");
    check_class(background_class, *this, "background");
    for (std::size_t n = 0; n < shapes.size(); ++n) {
        const auto& s = shapes[n];
        check_class(s.class_id, *this, "shape");
        for (Axis a : kAxes) {
            if (s.box.min[a] >= s.box.max[a] || s.box.max[a] > dims.extent(a)) {
                throw SpecError("shape " + std::to_string(n) + " is empty or leaves the grid " + dims.to_string() +
                                " along " + std::string(to_string(a)));
            }
        }
    }
    if (specks.count) check_class(specks.class_id, *this, "speck");
    if (streaks.count) {
        check_class(streaks.class_id, *this, "streak");
        if (streaks.length < 1 || streaks.length > dims.extent(streaks.axis)) {
            throw SpecError("streak length " + std::to_string(streaks.length) + " does not fit the " +
                            std::string(to_string(streaks.axis)) + " extent " +
                            std::to_string(dims.extent(streaks.axis)));
        }
    }
}

std::vector<PlacedShape> place_shapes(const SceneSpec& spec) {
    spec.validate();
    std::vector<PlacedShape> placed;
    placed.reserve(spec.shapes.size() + spec.specks.count + spec.streaks.count);
    for (const auto& s : spec.shapes) placed.push_back({ShapeKind::Box, s.box, s.class_id});

    SeededDraw rng(spec.seed);
    const GridDims& d = spec.dims;
    for (std::uint32_t n = 0; n < spec.specks.count; ++n) {
        const Box b = place_random(spec, placed, [&] {
            const VoxelCoord c{rng.below(d.x), rng.below(d.y), rng.below(d.z)};
            return Box{c, {c.i + 1, c.j + 1, c.k + 1}};
        }, "speck");
        placed.push_back({ShapeKind::Speck, b, spec.specks.class_id});
    }
    for (std::uint32_t n = 0; n < spec.streaks.count; ++n) {
        const Axis a = spec.streaks.axis;
        const Box b = place_random(spec, placed, [&] {
            VoxelCoord lo;
            for (Axis ax : kAxes) {
                const std::uint32_t span = ax == a ? d.extent(ax) - spec.streaks.length + 1 : d.extent(ax);
                lo[ax] = rng.below(span);
            }
            VoxelCoord hi{lo.i + 1, lo.j + 1, lo.k + 1};
            hi[a] = lo[a] + spec.streaks.length;
            return Box{lo, hi};
        }, "streak");
        placed.push_back({ShapeKind::Streak, b, spec.streaks.class_id});
    }
    return placed;
}

SynthResult synthesize(const SceneSpec& spec) {
    auto manifest = place_shapes(spec);
    const GridDims& d = spec.dims;
    std::vector<std::uint16_t> labels(d.total(), spec.background_class);
    for (const auto& p : manifest) {
        for (std::uint32_t i = p.box.min.i; i < p.box.max.i; ++i)
            for (std::uint32_t j = p.box.min.j; j < p.box.max.j; ++j)
                for (std::uint32_t k = p.box.min.k; k < p.box.max.k; ++k)
                    labels[linear_index_unchecked(d, i, j, k)] = p.class_id;
    }
    return SynthResult{VoxelGrid(d, std::move(labels), spec.num_classes), std::move(manifest)};
}

OffsetField expected_offsets(const SceneSpec& spec) {
    const auto placed = place_shapes(spec);
    for (std::size_t a = 0; a < placed.size(); ++a) {
        if (placed[a].class_id == spec.background_class) {
            throw SpecError("shape " + std::to_string(a) + " uses the background class; no closed form");
        }
        for (std::size_t b = a + 1; b < placed.size(); ++b) {
            if (!boxes_separated(placed[a].box, placed[b].box)) {
                throw SpecError("shapes " + std::to_string(a) + " and " + std::to_string(b) +
                                " overlap or touch; no closed form");
            }
        }
    }

    const GridDims& d = spec.dims;
    std::vector<std::uint32_t> values(d.total() * 6);
    for (std::uint32_t i = 0; i < d.x; ++i)
        for (std::uint32_t j = 0; j < d.y; ++j)
            for (std::uint32_t k = 0; k < d.z; ++k) {
                const VoxelCoord v{i, j, k};
                const std::uint64_t idx = linear_index_unchecked(d, i, j, k);
                const auto inside = std::find_if(placed.begin(), placed.end(),
                                                 [&](const PlacedShape& p) { return p.box.contains(v); });
                for (Axis a : kAxes) {
                    std::uint32_t pos, neg;
                    if (inside != placed.end()) {
                        pos = inside->box.max[a] - v[a];
                        neg = v[a] - inside->box.min[a] + 1;
                    } else {
                        // Background run ends at the nearest box crossing this line, or the border.
                        pos = d.extent(a) - v[a];
                        neg = v[a] + 1;
                        for (const auto& p : placed) {
                            bool crosses = true;
                            for (Axis o : kAxes) {
                                if (o != a && (v[o] < p.box.min[o] || v[o] >= p.box.max[o])) crosses = false;
                            }
                            if (!crosses) continue;
                            if (p.box.min[a] > v[a]) pos = std::min(pos, p.box.min[a] - v[a]);
                            if (p.box.max[a] <= v[a]) neg = std::min(neg, v[a] - p.box.max[a] + 1);
                        }
                    }
                    values[idx * 6 + channel_of(make_direction(a, true))] = pos;
                    values[idx * 6 + channel_of(make_direction(a, false))] = neg;
                }
            }
    return OffsetField(d, std::move(values));
}

SceneSpec benchmark_scene(GridDims dims, std::uint64_t seed) {
    dims.validate();
    constexpr std::uint16_t kRoad = 9, kCar = 1, kPole = 18, kVegetation = 15;
    SceneSpec spec;
    spec.dims = dims;
    spec.seed = seed;
    SeededDraw rng(seed);
    const std::uint32_t ground = std::max(1u, dims.z / 8);
    spec.shapes.push_back({Box{{0, 0, 0}, {dims.x, dims.y, ground}}, kRoad});

    // Clips to the grid; boxes that vanish are dropped.
    const auto add = [&](VoxelCoord lo, VoxelCoord size, std::uint16_t cls) {
        Box b{lo, {}};
        for (Axis a : kAxes) b.max[a] = std::min(dims.extent(a), lo[a] + std::max(1u, size[a]));
        for (Axis a : kAxes) {
            if (b.min[a] >= b.max[a]) return;
        }
        spec.shapes.push_back({b, cls});
    };
    const std::uint32_t cell_x = std::max(1u, dims.x / 4), cell_y = std::max(1u, dims.y / 4);
    for (std::uint32_t cx = 0; cx < dims.x; cx += cell_x) {
        for (std::uint32_t cy = 0; cy < dims.y; cy += cell_y) {
            const VoxelCoord jitter{rng.below(std::max(1u, cell_x / 4)), rng.below(std::max(1u, cell_y / 4)), 0};
            add({cx + jitter.i, cy + jitter.j, ground}, {dims.x / 12, dims.y / 24, dims.z / 6}, kCar);
            add({cx + cell_x / 2, cy + cell_y / 2, ground}, {1, 1, dims.z / 2}, kPole);
            add({cx + cell_x * 3 / 4, cy + jitter.j, ground}, {cell_x / 5, cell_y / 3, dims.z / 3}, kVegetation);
        }
    }
    return spec;
}

std::string scene_spec_to_json(const SceneSpec& spec) {
    nlohmann::json shapes = nlohmann::json::array();
    for (const auto& s : spec.shapes) {
        shapes.push_back({{"min", coord_json(s.box.min)}, {"max", coord_json(s.box.max)}, {"class_id", s.class_id}});
    }
    nlohmann::json j = {
        {"dims", {spec.dims.x, spec.dims.y, spec.dims.z}},
        {"background_class", spec.background_class},
        {"num_classes", spec.num_classes},
        {"shapes", shapes},
        {"specks", {{"count", spec.specks.count}, {"class_id", spec.specks.class_id}}},
        {"streaks",
         {{"count", spec.streaks.count},
          {"length", spec.streaks.length},
          {"axis", std::string(to_string(spec.streaks.axis))},
          {"class_id", spec.streaks.class_id}}},
        {"keep_separated", spec.keep_separated},
        {"seed", spec.seed}};
    return j.dump(1) + "\n";
}

SceneSpec scene_spec_from_json(std::string_view text) {
    SceneSpec spec;
    try {
        const auto j = nlohmann::json::parse(text);
        const auto dims = j.at("dims").get<std::vector<std::uint32_t>>();
        if (dims.size() != 3) throw SpecError("dims must have three entries");
        spec.dims = {dims[0], dims[1], dims[2]};
        spec.background_class = j.value("background_class", spec.background_class);
        spec.num_classes = j.value("num_classes", spec.num_classes);
        if (j.contains("shapes")) {
            for (const auto& s : j.at("shapes")) {
                spec.shapes.push_back({Box{coord_from(s.at("min")), coord_from(s.at("max"))},
                                       s.at("class_id").get<std::uint16_t>()});
            }
        }
        if (j.contains("specks")) {
            const auto& s = j.at("specks");
            spec.specks.count = s.value("count", 0u);
            spec.specks.class_id = s.value("class_id", spec.specks.class_id);
        }
        if (j.contains("streaks")) {
            const auto& s = j.at("streaks");
            spec.streaks.count = s.value("count", 0u);
            spec.streaks.length = s.value("length", 0u);
            spec.streaks.axis = parse_axis(s.value("axis", std::string("x")));
            spec.streaks.class_id = s.value("class_id", spec.streaks.class_id);
        }
        spec.keep_separated = j.value("keep_separated", false);
        spec.seed = j.value("seed", std::uint64_t{0});
    } catch (const nlohmann::json::exception& e) {
        throw SpecError(std::string("scene spec json: ") + e.what());
    } catch (const ConfigError& e) {
        throw SpecError(std::string("scene spec json: ") + e.what());
    }
    spec.validate();
    return spec;
}

std::string manifest_to_json(const std::vector<PlacedShape>& manifest) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& p : manifest) {
        arr.push_back({{"kind", std::string(to_string(p.kind))},
                       {"min", coord_json(p.box.min)},
                       {"max", coord_json(p.box.max)},
                       {"class_id", p.class_id}});
    }
    return arr.dump(1) + "\n";
}

}  // namespace voxnt
