// SPDX-FileCopyrightText: 2026 The voxnt Authors
// SPDX-License-Identifier: Apache-2.0

// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <sstream>
#include <string>

#include <json.hpp>

#include "commands.hpp"
#include "oracles.hpp"
#include "voxnt/io.hpp"
#include "voxnt/kernels.hpp"
#include "voxnt/metrics.hpp"
#include "voxnt/offsets.hpp"
#include "voxnt/quality.hpp"
#include "voxnt/scale.hpp"
#include "voxnt/synth.hpp"

using namespace voxnt;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
    std::string first_failure;

    void fail(const std::string& why) {
        if (pass) first_failure = why;
        pass = false;
    }
};

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

// Shared corpus for criteria 1, 2 and 8: 1000 grids up to 16^3 over up to 20 classes.
std::vector<VoxelGrid> make_corpus() {
    testing::Rng rng(20260101);
    std::vector<VoxelGrid> out;
    out.reserve(1000);
    for (int n = 0; n < 1000; ++n) {
        const GridDims d = n < 8 ? GridDims{16, 16, 16} : testing::random_dims(rng, 16);
        const auto classes = static_cast<std::uint16_t>(rng.between(1, 20));
        const double ignore = rng.coin(0.2) ? 0.05 : 0.0;
        out.push_back(testing::random_grid(rng, d, classes, rng.coin(0.75), ignore));
    }
    return out;
}

Outcome criterion_oracle(const std::vector<VoxelGrid>& corpus) {
    Outcome o;
    const auto start = Clock::now();
    std::size_t n = 0;
    for (const auto& g : corpus) {
        const auto fast = compute_offsets(g);
        if (!(fast == compute_offsets_naive(g))) o.fail("grid " + std::to_string(n) + " differs from the naive walk");
        const auto walked = testing::oracle_offsets(g);
        if (!std::equal(fast.values().begin(), fast.values().end(), walked.begin(), walked.end()))
            o.fail("grid " + std::to_string(n) + " differs from the test oracle");
        ++n;
    }
    const double secs = seconds_since(start);
    if (secs >= 60.0) o.fail("took " + fmt("%.1f", secs) + " s");
    o.detail = std::to_string(n) + " grids, " + fmt("%.2f", secs) + " s";
    return o;
}

Outcome criterion_run_sum(const std::vector<VoxelGrid>& corpus) {
    Outcome o;
    std::uint64_t checks = 0;
    for (std::size_t n = 0; n < corpus.size(); ++n) {
        const auto& g = corpus[n];
        const auto f = compute_offsets(g);
        for (int a = 0; a < 3; ++a) {
            const auto runs = testing::oracle_run_lengths(g, a);
            const Axis axis = static_cast<Axis>(a);
            for (std::uint64_t v = 0; v < g.size(); ++v, ++checks) {
                if (f.at(v, make_direction(axis, true)) + f.at(v, make_direction(axis, false)) != runs[v] + 1)
                    o.fail("grid " + std::to_string(n) + " voxel " + std::to_string(v));
            }
        }
    }
    o.detail = std::to_string(checks) + " voxel-axis checks";
    return o;
}

Outcome criterion_three_way() {
    Outcome o;
    testing::Rng rng(777);
    int checked = 0, drawn = 0;
    while (checked < 150 && drawn < 1000) {
        ++drawn;
        const auto spec = testing::random_separated_spec(rng, 16);
        std::optional<SynthResult> r;
        try {
            r = synthesize(spec);
        } catch (const SpecError&) {
            continue;  // crowded scene, speck placement gave up
        }
        const auto fast = compute_offsets(r->grid);
        if (!(expected_offsets(spec) == fast)) o.fail("closed form differs on spec seed " + std::to_string(spec.seed));
        if (!(compute_offsets_naive(r->grid) == fast)) o.fail("naive differs on spec seed " + std::to_string(spec.seed));
        ++checked;
    }
    if (checked < 100) o.fail("only " + std::to_string(checked) + " specs checked");
    o.detail = std::to_string(checked) + " seeded specs";
    return o;
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag) {
        path = fs::temp_directory_path() / ("voxnt_acc_" + tag + "_" + std::to_string(::getpid()));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

int run_cli(std::vector<std::string> args, std::string* out = nullptr) {
    args.insert(args.begin(), "voxnt");
    std::ostringstream o, e;
    const int code = cli::run(args, o, e);
    if (out) *out = o.str();
    return code;
}

std::vector<std::uint8_t> bytes_of(const fs::path& p) { return read_file_bytes(p); }

Outcome criterion_refinement() {
    Outcome o;
    TempDir tmp("refine");
    // A street: road slab, parked cars that must survive, plus one floating car
    // speck and a 120-voxel car streak along x.
    const GridDims d{160, 32, 8};
    SceneSpec spec;
    spec.dims = d;
    spec.shapes.push_back({Box{{0, 0, 0}, {160, 32, 1}}, 9});
    for (std::uint32_t x = 4; x + 8 <= 160; x += 20) spec.shapes.push_back({Box{{x, 2, 1}, {x + 8, 6, 3}}, kCarClass});
    spec.shapes.push_back({Box{{30, 20, 1}, {31, 21, 8}}, 18});
    const VoxelCoord speck{100, 26, 5};
    spec.shapes.push_back({Box{speck, {101, 27, 6}}, kCarClass});
    spec.shapes.push_back({Box{{20, 14, 4}, {140, 15, 5}}, kCarClass});
    const auto grid = synthesize(spec).grid;

    const fs::path in = tmp.path / "street.raw";
    FormatOptions raw;
    raw.format = GridFormat::Raw;
    write_grid(grid, in, raw);
    const int code = run_cli({"refine", in.string(), "--dims", "160,32,8", "--format", "raw", "--out",
                              (tmp.path / "out").string()});
    if (code != 0) {
        o.fail("refine exited " + std::to_string(code));
        return o;
    }
    const auto before = bytes_of(in);
    const auto after = bytes_of(tmp.path / "out" / "street.raw");
    if (before.size() != after.size()) {
        o.fail("output size changed");
        return o;
    }
    std::vector<std::uint64_t> expected;
    expected.push_back(linear_index(d, speck.i, speck.j, speck.k));
    for (std::uint32_t x = 20; x < 140; ++x) expected.push_back(linear_index(d, x, 14, 4));
    std::sort(expected.begin(), expected.end());

    std::vector<std::uint64_t> changed;
    for (std::uint64_t v = 0; v < grid.size(); ++v) {
        const bool differs = before[2 * v] != after[2 * v] || before[2 * v + 1] != after[2 * v + 1];
        if (!differs) continue;
        changed.push_back(v);
        if (after[2 * v] != 255 || after[2 * v + 1] != 0) o.fail("voxel " + std::to_string(v) + " not set to 255");
    }
    if (changed != expected) {
        o.fail(std::to_string(changed.size()) + " voxels changed, expected " + std::to_string(expected.size()));
    }
    const auto report_bytes = bytes_of(tmp.path / "out" / "street.quality.json");
    const auto report = nlohmann::json::parse(report_bytes.begin(), report_bytes.end());
    if (report["thresholds"]["k_min"] != nlohmann::json({3, 3, 3}) || report["thresholds"]["k_max"][0] != 30 ||
        report["thresholds"]["k_max"][1] != 30)
        o.fail("report header does not echo k_min 3 / k_max 30");
    o.detail = "speck + 120-voxel streak -> 255, " + std::to_string(changed.size()) + " of " +
               std::to_string(grid.size()) + " voxels changed";
    return o;
}

MetricsReport oracle_report(const std::vector<std::uint64_t>& cells, std::uint16_t k) {
    // Independent re-derivation from the brute-force cells.
    MetricsReport r;
    std::uint64_t tp = 0, fp = 0, fn = 0;
    for (std::uint16_t t = 0; t < k; ++t)
        for (std::uint16_t p = 0; p < k; ++p) {
            const auto c = cells[t * k + p];
            if (t && p) tp += c;
            if (!t && p) fp += c;
            if (t && !p) fn += c;
        }
    r.occupancy_iou = tp + fp + fn == 0 ? 1.0 : static_cast<double>(tp) / static_cast<double>(tp + fp + fn);
    double sum = 0.0;
    int present = 0;
    for (std::uint16_t c = 1; c < k; ++c) {
        std::uint64_t row = 0, col = 0;
        for (std::uint16_t x = 0; x < k; ++x) {
            row += cells[c * k + x];
            col += cells[x * k + c];
        }
        const auto inter = cells[c * k + c];
        const auto uni = row + col - inter;
        r.per_class_iou.push_back(uni ? static_cast<double>(inter) / static_cast<double>(uni) : std::nan(""));
        if (uni) {
            sum += r.per_class_iou.back();
            ++present;
        }
    }
    r.miou = present ? sum / present : std::nan("");
    return r;
}

bool same_real(double a, double b) { return (std::isnan(a) && std::isnan(b)) || a == b; }

Outcome criterion_metrics() {
    Outcome o;
    testing::Rng rng(5150);
    const std::uint16_t k = 20;
    int pairs = 0;
    for (int rep = 0; rep < 300; ++rep, ++pairs) {
        const auto truth = testing::random_grid(rng, {8, 8, 4}, k, rng.coin(), rng.coin(0.3) ? 0.1 : 0.0);
        std::vector<std::uint16_t> p(truth.size());
        const double keep = rng.unit();
        for (std::size_t n = 0; n < p.size(); ++n) {
            const auto t = truth.label(n);
            p[n] = t != kIgnoreLabel && rng.coin(keep) ? t : static_cast<std::uint16_t>(rng.below(k));
        }
        const auto pred = truth.with_labels(p);
        ConfusionMatrix cm(k);
        accumulate(cm, truth, pred);
        const auto cells = testing::oracle_confusion(truth, pred, k);
        if (!std::equal(cm.cells().begin(), cm.cells().end(), cells.begin(), cells.end())) o.fail("cells differ");
        const auto got = finalize(cm);
        const auto want = oracle_report(cells, k);
        if (!same_real(got.occupancy_iou, want.occupancy_iou) || !same_real(got.miou, want.miou))
            o.fail("report differs on pair " + std::to_string(rep));
        for (std::size_t c = 0; c < want.per_class_iou.size(); ++c)
            if (!same_real(got.per_class_iou[c], want.per_class_iou[c])) o.fail("per-class IoU differs");

        // perfect prediction (ignored truth voxels predicted as empty)
        std::vector<std::uint16_t> perfect(truth.labels().begin(), truth.labels().end());
        for (auto& l : perfect)
            if (l == kIgnoreLabel) l = 0;
        ConfusionMatrix pcm(k);
        accumulate(pcm, truth, truth.with_labels(perfect));
        const auto pr = finalize(pcm);
        if (pr.occupancy_iou != 1.0 || (!std::isnan(pr.miou) && pr.miou != 1.0)) o.fail("perfect prediction < 1");

        // shard along x and merge
        ConfusionMatrix sharded(k);
        for (std::uint32_t half = 0; half < 2; ++half) {
            std::vector<std::uint16_t> t(truth.labels().begin(), truth.labels().end());
            for (std::size_t n = 0; n < t.size(); ++n)
                if ((coord_of(truth.dims(), n).i < 4) != (half == 0)) t[n] = kIgnoreLabel;
            ConfusionMatrix part(k);
            accumulate(part, truth.with_labels(t), pred);
            sharded.merge(part);
        }
        if (!std::equal(sharded.cells().begin(), sharded.cells().end(), cm.cells().begin()))
            o.fail("sharded cells differ");
        if (metrics_to_json(finalize(sharded)) !=
            metrics_to_json([&] {
                auto r = finalize(cm);
                r.ignored_voxels = finalize(sharded).ignored_voxels;
                return r;
            }()))
            o.fail("sharded report differs");
    }
    o.detail = std::to_string(pairs) + " random 8x8x4 pairs";
    return o;
}

Outcome criterion_l1() {
    Outcome o;
    testing::Rng rng(66);
    double worst = 0.0;
    for (int rep = 0; rep < 200; ++rep) {
        const GridDims d = testing::random_dims(rng, 8);
        const bool integer = rep % 2 == 0;
        auto field = [&] {
            std::vector<double> v(d.total() * 6);
            for (auto& x : v) x = integer ? static_cast<double>(rng.below(1000)) : rng.unit();
            return NormalizedOffsetField(d, v);
        };
        const auto a = field(), b = field();
        std::vector<std::uint8_t> mask(d.total());
        for (auto& m : mask) m = rng.coin() ? 1 : 0;
        const bool masked = rng.coin();
        double oracle = 0.0;
        for (std::uint64_t v = 0; v < d.total(); ++v) {
            if (masked && !mask[v]) continue;
            for (int c = 0; c < 6; ++c) oracle += std::fabs(a.values()[v * 6 + c] - b.values()[v * 6 + c]);
        }
        const double got =
            masked ? regression_l1(a, b, std::span<const std::uint8_t>(mask)).sum : regression_l1(a, b).sum;
        if (integer) {
            if (got != oracle) o.fail("integer fixture off by " + fmt("%g", got - oracle));
        } else {
            const double rel = oracle == 0.0 ? std::fabs(got) : std::fabs(got - oracle) / oracle;
            worst = std::max(worst, rel);
            if (rel > 1e-12) o.fail("relative error " + fmt("%g", rel));
        }
    }
    o.detail = "integer fixtures exact, worst real relative error " + fmt("%.3g", worst);
    return o;
}

Outcome criterion_kernels() {
    Outcome o;
    testing::Rng rng(4243);
    const GridDims d{4, 4, 3};
    const std::uint32_t C = 4;
    double worst_mean = 0.0, worst_proj = 0.0, worst_attn_sum = 0.0, worst_agg = 0.0;
    for (int rep = 0; rep < 50; ++rep) {
        const auto vol = testing::random_volume(rng, d, C);

        // uniform eta against mean pooling on all three planes
        const ProjectionWeights flat(d, std::vector<double>(d.total() * 3, rng.real(-5, 5)));
        for (Plane p : {Plane::XY, Plane::XZ, Plane::YZ}) {
            const auto got = dense_project(vol, flat, p);
            for (std::uint32_t r = 0; r < got.rows; ++r)
                for (std::uint32_t c = 0; c < got.cols; ++c)
                    for (std::uint32_t ch = 0; ch < C; ++ch) {
                        double mean = 0.0;
                        std::uint32_t depth = 0;
                        for (std::uint64_t n = 0; n < d.total(); ++n) {
                            const auto q = coord_of(d, n);
                            const bool hit = p == Plane::XY   ? (q.i == r && q.j == c)
                                             : p == Plane::XZ ? (q.i == r && q.k == c)
                                                              : (q.j == r && q.k == c);
                            if (!hit) continue;
                            mean += vol.at(n, ch);
                            ++depth;
                        }
                        mean /= depth;
                        const double rel = std::fabs(got.at(r, c, ch) - mean) / std::max(std::fabs(mean), 1e-300);
                        worst_mean = std::max(worst_mean, std::fabs(mean) < 1e-12 ? 0.0 : rel);
                    }
        }

        // random eta against the double-loop oracle
        std::vector<double> eta(d.total() * 3);
        for (auto& e : eta) e = rng.real(-4, 4);
        const ProjectionWeights w(d, eta);
        for (Plane p : {Plane::XY, Plane::XZ, Plane::YZ}) {
            const auto got = dense_project(vol, w, p);
            const auto want = testing::oracle_project(vol, w, p);
            for (std::size_t n = 0; n < want.size(); ++n)
                worst_proj = std::max(worst_proj, testing::rel_err(got.values[n], want[n]));
        }

        // aggregation against the scalar oracle
        const auto offs = offsets_in_voxels(compute_offsets(testing::random_grid(rng, d, 4)));
        const auto aw = testing::random_attention(rng, C);
        const double alpha = rep == 0 ? 1.0 : rng.real(0.0, 2.0);
        GroupNormParams norm;
        norm.groups = rep % 2 ? 2 : 4;
        const auto attn = aggregation_attention(vol, offs, aw, alpha);
        const auto got = instance_aggregate(vol, offs, aw, alpha, norm);
        const auto want = testing::oracle_aggregate(vol, offs, aw, alpha, norm.groups, norm.eps);
        for (std::uint64_t n = 0; n < d.total(); ++n) {
            double s = 0.0;
            for (int k = 0; k < 6; ++k) {
                if (attn[n * 6 + k] < 0.0) o.fail("negative attention weight");
                s += attn[n * 6 + k];
            }
            worst_attn_sum = std::max(worst_attn_sum, std::fabs(s - 1.0));
        }
        for (std::size_t n = 0; n < attn.size(); ++n)
            worst_agg = std::max(worst_agg, testing::rel_err(attn[n], want.attention[n]));
        for (std::size_t n = 0; n < want.normalized.size(); ++n)
            worst_agg = std::max(worst_agg, testing::rel_err(got.values()[n], want.normalized[n]));
    }
    if (worst_mean > 1e-12) o.fail("mean pooling error " + fmt("%g", worst_mean));
    if (worst_attn_sum > 1e-9) o.fail("attention row sum off by " + fmt("%g", worst_attn_sum));
    if (worst_proj > 1e-10) o.fail("projection oracle error " + fmt("%g", worst_proj));
    if (worst_agg > 1e-10) o.fail("aggregation oracle error " + fmt("%g", worst_agg));
    o.detail = "mean " + fmt("%.2g", worst_mean) + ", rowsum " + fmt("%.2g", worst_attn_sum) + ", project " +
               fmt("%.2g", worst_proj) + ", aggregate " + fmt("%.2g", worst_agg);
    return o;
}

Outcome criterion_alpha(const std::vector<VoxelGrid>& corpus) {
    Outcome o;
    std::uint64_t voxels = 0, agree = 0;
    for (std::size_t n = 0; n < corpus.size(); n += 4) {
        const auto& g = corpus[n];
        const auto f = compute_offsets(g);
        const auto walked = testing::oracle_offsets(g);
        if (!std::equal(f.values().begin(), f.values().end(), walked.begin(), walked.end())) {
            o.fail("offsets not oracle-verified on grid " + std::to_string(n));
            continue;
        }
        for (std::uint64_t v = 0; v < g.size(); ++v) {
            std::array<double, 6> off{};
            for (Direction dir : kDirections) off[channel_of(dir)] = f.at(v, dir);
            const auto origin = coord_of(g.dims(), v);
            for (const auto& c : gather_boundary_candidates(origin, off, 0.0, g.dims()))
                if (!(c == origin)) o.fail("alpha 0 moved off the origin");
            bool all = true;
            for (const auto& c : gather_boundary_candidates(origin, off, 1.0, g.dims()))
                all = all && g.label(c.i, c.j, c.k) == g.label(v);
            ++voxels;
            agree += all;
        }
    }
    if (agree != voxels) o.fail(std::to_string(voxels - agree) + " voxels with a foreign candidate at alpha 1");
    o.detail = "alpha 1 label match at " + std::to_string(agree) + "/" + std::to_string(voxels) + " voxels";
    return o;
}

template <typename Fn>
double time_best(int repeat, Fn&& fn) {
    double best = 1e300;
    for (int r = 0; r < repeat; ++r) {
        const auto t = Clock::now();
        fn();
        best = std::min(best, seconds_since(t));
    }
    return best;
}

Outcome criterion_performance() {
    Outcome o;
    const auto big = synthesize(benchmark_scene({256, 256, 32}, 1)).grid;
    std::vector<double> runs;
    for (int r = 0; r < 3; ++r) {
        const auto t = Clock::now();
        const auto f = compute_offsets(big, {}, 1);
        runs.push_back(seconds_since(t));
        if (f.values().size() != big.size() * 6) o.fail("wrong field size");
    }
    std::sort(runs.begin(), runs.end());
    const double median = runs[1];
    if (median >= 1.0) o.fail("256x256x32 took " + fmt("%.3f", median) + " s");

    const auto mid = synthesize(benchmark_scene({64, 64, 16}, 0)).grid;
    std::optional<OffsetField> fast, naive;
    const double t_fast = time_best(5, [&] { fast = compute_offsets(mid, {}, 1); });
    const double t_naive = time_best(3, [&] { naive = compute_offsets_naive(mid); });
    const double speedup = t_naive / t_fast;
    if (!(*fast == *naive)) o.fail("fast and naive disagree on the benchmark scene");
    if (speedup < 10.0) o.fail("speedup " + fmt("%.1f", speedup) + "x");
    o.detail = "256x256x32 median " + fmt("%.3f", median) + " s single-threaded, 64x64x16 speedup " +
               fmt("%.1f", speedup) + "x";
    return o;
}

bool same_tree(const fs::path& a, const fs::path& b, std::string& why) {
    std::vector<fs::path> fa, fb;
    for (const auto& e : fs::recursive_directory_iterator(a))
        if (e.is_regular_file()) fa.push_back(fs::relative(e.path(), a));
    for (const auto& e : fs::recursive_directory_iterator(b))
        if (e.is_regular_file()) fb.push_back(fs::relative(e.path(), b));
    std::sort(fa.begin(), fa.end());
    std::sort(fb.begin(), fb.end());
    if (fa != fb) {
        why = "file sets differ between " + a.filename().string() + " and " + b.filename().string();
        return false;
    }
    for (const auto& f : fa) {
        if (read_file_bytes(a / f) != read_file_bytes(b / f)) {
            why = f.string() + " differs";
            return false;
        }
    }
    return !fa.empty() || (why = "no outputs", false);
}

Outcome criterion_determinism() {
    Outcome o;
    TempDir tmp("determinism");
    const fs::path in = tmp.path / "in";
    fs::create_directories(in);
    testing::Rng rng(10);
    FormatOptions raw;
    raw.format = GridFormat::Raw;
    for (int n = 0; n < 6; ++n) {
        const auto g = testing::random_grid(rng, {24, 20, 8}, 20, true, 0.01);
        write_grid(g, in / ("t" + std::to_string(n) + ".raw"), raw);
        std::vector<std::uint16_t> p(g.labels().begin(), g.labels().end());
        for (auto& l : p)
            if (l == kIgnoreLabel || rng.coin(0.2)) l = static_cast<std::uint16_t>(rng.below(20));
        write_grid(g.with_labels(p), in / ("p" + std::to_string(n) + ".raw"), raw);
    }
    SceneSpec spec;
    spec.dims = {48, 32, 8};
    spec.shapes = {{Box{{2, 2, 0}, {10, 6, 3}}, 1}};
    spec.specks = {6, 1};
    spec.streaks = {2, 35, Axis::X, 1};
    spec.keep_separated = true;
    spec.seed = 99;
    const auto spec_text = scene_spec_to_json(spec);
    write_file_bytes(tmp.path / "spec.json", std::vector<std::uint8_t>(spec_text.begin(), spec_text.end()));

    const std::string dims = "24,20,8";
    const std::string truth = (in / "t*.raw").string(), pred = (in / "p*.raw").string();
    int runs = 0;
    for (const std::string cmd : {"offsets", "stats", "refine", "eval", "synth", "bench"}) {
        std::vector<fs::path> outs;
        std::vector<std::string> stdouts;
        for (const std::string workers : {"1", "1", "4"}) {
            const fs::path out = tmp.path / (cmd + "_" + std::to_string(runs++));
            std::vector<std::string> args;
            if (cmd == "eval") {
                args = {cmd, "--truth", truth, "--pred", pred, "--dims", dims};
            } else if (cmd == "synth") {
                args = {cmd, "--spec", (tmp.path / "spec.json").string()};
            } else if (cmd == "bench") {
                args = {cmd, "--dims", "16,16,8", "--repeat", "1"};
            } else {
                args = {cmd, truth, "--dims", dims};
            }
            for (const auto& extra : {std::string("--workers"), workers, std::string("--out"), out.string()})
                args.push_back(extra);
            std::string text;
            const int code = run_cli(args, &text);
            if (code != 0) o.fail(cmd + " exited " + std::to_string(code));
            if (cmd == "bench") {
                // timings are measurements; everything else must match
                auto j = nlohmann::json::parse(text);
                for (auto& r : j["results"]) r.erase("ns_per_voxel");
                j.erase("speedup");
                j.erase("workers");
                text = j.dump();
                fs::create_directories(out);
                write_file_bytes(out / "bench.json", std::vector<std::uint8_t>(text.begin(), text.end()));
            }
            outs.push_back(out);
            stdouts.push_back(cmd == "eval" ? text : "");
        }
        std::string why;
        if (!same_tree(outs[0], outs[1], why)) o.fail(cmd + " across runs: " + why);
        if (!same_tree(outs[0], outs[2], why)) o.fail(cmd + " across worker counts: " + why);
        if (stdouts[0] != stdouts[1] || stdouts[0] != stdouts[2]) o.fail(cmd + " stdout differs");
    }
    o.detail = "6 subcommands x (2 runs at 1 worker + 1 run at 4 workers), bench compared without timings";
    return o;
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        std::function<Outcome()> run;
    };
    std::optional<std::vector<VoxelGrid>> corpus;
    auto shared = [&]() -> const std::vector<VoxelGrid>& {
        if (!corpus) corpus = make_corpus();
        return *corpus;
    };
    const std::vector<Criterion> criteria = {
        {1, "oracle equivalence", [&] { return criterion_oracle(shared()); }},
        {2, "run-sum law", [&] { return criterion_run_sum(shared()); }},
        {3, "three-way agreement on box scenes", criterion_three_way},
        {4, "label refinement", criterion_refinement},
        {5, "metrics correctness", criterion_metrics},
        {6, "regression loss", criterion_l1},
        {7, "kernel fidelity", criterion_kernels},
        {8, "alpha limits", [&] { return criterion_alpha(shared()); }},
        {9, "performance", criterion_performance},
        {10, "cli determinism", criterion_determinism},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        Outcome out;
        try {
            out = c.run();
        } catch (const std::exception& e) {
            out.fail(std::string("exception: ") + e.what());
        }
        if (!out.pass) ++failed;
        std::printf("%s %2d %s: %s%s\n", out.pass ? "PASS" : "FAIL", c.id, c.name, out.detail.c_str(),
                    out.pass ? "" : (" [" + out.first_failure + "]").c_str());
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed ? 1 : 0;
}
