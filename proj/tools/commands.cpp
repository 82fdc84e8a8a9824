// SPDX-FileCopyrightText: 2026 The voxnt Authors
// SPDX-License-Identifier: Apache-2.0

#include "commands.hpp"

#include <glob.h>

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "voxnt/io.hpp"
#include "voxnt/metrics.hpp"
#include "voxnt/offsets.hpp"
#include "voxnt/parallel.hpp"
#include "voxnt/quality.hpp"
#include "voxnt/scale.hpp"
#include "voxnt/synth.hpp"

namespace voxnt::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

// Raised for problems that stop a command before any input is processed.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) out.push_back(item);
    return out;
}

std::uint32_t parse_u32(const std::string& s, const std::string& what) {
    try {
        std::size_t used = 0;
        const unsigned long long v = std::stoull(s, &used);
        if (used != s.size() || v > 0xffffffffULL) throw std::invalid_argument(s);
        return static_cast<std::uint32_t>(v);
    } catch (const std::exception&) {
        throw UsageError(what + ": '" + s + "' is not a non-negative integer");
    }
}

std::array<std::string, 3> parse_triple(const std::string& s, const std::string& what) {
    const auto parts = split(s, ',');
    if (parts.size() != 3) throw UsageError(what + " expects three comma-separated values, got '" + s + "'");
    return {parts[0], parts[1], parts[2]};
}

bool parse_bool(const std::string& s, const std::string& what) {
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    throw UsageError(what + ": '" + s + "' is not a boolean");
}

// Flattens a config-file value into the same text a flag would carry.
std::string json_to_flag_text(const json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_null()) return "-";
    if (v.is_array()) {
        std::string out;
        for (std::size_t n = 0; n < v.size(); ++n) {
            if (n) out += ',';
            out += json_to_flag_text(v[n]);
        }
        return out;
    }
    return v.dump();
}

bool has_glob_chars(const std::string& s) { return s.find_first_of("*?[") != std::string::npos; }

// Wildcard patterns expand via glob(3); literal paths pass through so that unreadable
// files are reported per file. Result is sorted and deduplicated.
std::vector<fs::path> expand_inputs(const std::vector<std::string>& patterns) {
    std::vector<std::string> found;
    for (const auto& p : patterns) {
        if (!has_glob_chars(p)) {
            found.push_back(p);
            continue;
        }
        glob_t g{};
        if (::glob(p.c_str(), 0, nullptr, &g) == 0) {
            for (std::size_t n = 0; n < g.gl_pathc; ++n) found.emplace_back(g.gl_pathv[n]);
        }
        ::globfree(&g);
    }
    std::sort(found.begin(), found.end());
    found.erase(std::unique(found.begin(), found.end()), found.end());
    return {found.begin(), found.end()};
}

struct JobConfig {
    std::vector<fs::path> inputs;
    std::optional<GridDims> dims;
    AxisOrder axis_order;
    std::optional<fs::path> out_dir;
    AnomalyThresholds thresholds;
    ScanPolicy policy;
    unsigned workers = 1;
    GridFormat format = GridFormat::Auto;
    std::uint32_t bins = 32;
    HistogramFormat hist_format = HistogramFormat::Csv;
    SampleMode sample_mode = SampleMode::PerVoxel;
    bool jsonl = false;
    std::uint16_t num_classes = kDefaultNumClasses;
    std::string invalid_suffix;

    fs::path out() const { return out_dir.value_or(fs::path(".")); }
    FormatOptions format_options(GridFormat fmt) const {
        FormatOptions o;
        o.format = fmt;
        o.axis_order = axis_order;
        o.num_classes = num_classes;
        return o;
    }
};

// Option text gathered from flags, then filled from --config for anything not given.
class OptionSet {
public:
    void bind(CLI::App* app, const std::string& name, const std::string& help) {
        auto& slot = values_[name];
        options_.push_back({name, app->add_option("--" + name, slot, help)});
    }
    void bind_flag(CLI::App* app, const std::string& name, const std::string& help) {
        flags_.push_back({name, app->add_flag("--" + name, help)});
    }
    void bind_list(CLI::App* app, const std::string& name, const std::string& help, bool positional = false) {
        auto& slot = lists_[name];
        CLI::Option* opt = positional ? app->add_option(name, slot, help) : app->add_option("--" + name, slot, help);
        lists_given_.push_back({name, opt});
    }

    // Flags win; config entries fill the gaps.
    void resolve(const std::optional<json>& config) {
        for (auto& [name, opt] : options_) {
            if (opt->count() > 0) given_[name] = values_[name];
        }
        for (auto& [name, opt] : flags_) {
            if (opt->count() > 0) given_[name] = "true";
        }
        for (auto& [name, opt] : lists_given_) {
            if (opt->count() > 0) given_lists_[name] = lists_[name];
        }
        if (!config) return;
        for (const auto& [key, value] : config->items()) {
            if (values_.count(key) || std::any_of(flags_.begin(), flags_.end(),
                                                  [&](const auto& f) { return f.first == key; })) {
                if (!given_.count(key)) given_[key] = json_to_flag_text(value);
            } else if (lists_.count(key)) {
                if (!given_lists_.count(key)) {
                    std::vector<std::string> items;
                    if (value.is_array()) {
                        for (const auto& v : value) items.push_back(json_to_flag_text(v));
                    } else {
                        items.push_back(json_to_flag_text(value));
                    }
                    given_lists_[key] = items;
                }
            } else if (key != "config") {
                throw UsageError("unknown config key '" + key + "'");
            }
        }
    }

    std::optional<std::string> get(const std::string& name) const {
        const auto it = given_.find(name);
        return it == given_.end() ? std::nullopt : std::optional(it->second);
    }
    std::vector<std::string> list(const std::string& name) const {
        const auto it = given_lists_.find(name);
        return it == given_lists_.end() ? std::vector<std::string>{} : it->second;
    }

private:
    std::map<std::string, std::string> values_;
    std::map<std::string, std::vector<std::string>> lists_;
    std::vector<std::pair<std::string, CLI::Option*>> options_;
    std::vector<std::pair<std::string, CLI::Option*>> flags_;
    std::vector<std::pair<std::string, CLI::Option*>> lists_given_;
    std::map<std::string, std::string> given_;
    std::map<std::string, std::vector<std::string>> given_lists_;
};

unsigned default_workers() {
    if (const char* env = std::getenv("VOXNT_WORKERS")) {
        const auto w = parse_u32(env, "VOXNT_WORKERS");
        if (w < 1) throw UsageError("VOXNT_WORKERS must be >= 1");
        return w;
    }
    return 1;
}

JobConfig build_config(const OptionSet& opts) {
    JobConfig cfg;
    cfg.workers = default_workers();
    if (auto v = opts.get("dims")) {
        const auto t = parse_triple(*v, "--dims");
        cfg.dims = GridDims{parse_u32(t[0], "--dims"), parse_u32(t[1], "--dims"), parse_u32(t[2], "--dims")};
        try {
            cfg.dims->validate();
        } catch (const Error& e) {
            throw UsageError(std::string("--dims: ") + e.what());
        }
    }
    try {
        if (auto v = opts.get("axis-order")) cfg.axis_order = AxisOrder::parse(*v);
        if (auto v = opts.get("format")) cfg.format = parse_grid_format(*v);
        if (auto v = opts.get("hist-format")) cfg.hist_format = parse_histogram_format(*v);
    } catch (const ConfigError& e) {
        throw UsageError(e.what());
    }
    if (auto v = opts.get("out")) cfg.out_dir = fs::path(*v);
    if (auto v = opts.get("workers")) {
        cfg.workers = parse_u32(*v, "--workers");
        if (cfg.workers < 1) throw UsageError("--workers must be >= 1");
    }
    if (auto v = opts.get("bins")) {
        cfg.bins = parse_u32(*v, "--bins");
        if (cfg.bins < 1) throw UsageError("--bins must be >= 1");
    }
    if (auto v = opts.get("num-classes")) {
        const auto k = parse_u32(*v, "--num-classes");
        if (k < 1 || k > 255) throw UsageError("--num-classes must be in [1, 255]");
        cfg.num_classes = static_cast<std::uint16_t>(k);
    }
    if (auto v = opts.get("jsonl")) cfg.jsonl = parse_bool(*v, "--jsonl");
    if (auto v = opts.get("per-run")) {
        if (parse_bool(*v, "--per-run")) cfg.sample_mode = SampleMode::PerRun;
    }
    if (auto v = opts.get("include-empty")) cfg.policy.include_empty = parse_bool(*v, "--include-empty");
    if (auto v = opts.get("exclude-empty")) {
        if (parse_bool(*v, "--exclude-empty")) cfg.policy.include_empty = false;
    }
    if (auto v = opts.get("ignore-bridges")) cfg.policy.ignore_breaks_runs = !parse_bool(*v, "--ignore-bridges");
    if (auto v = opts.get("invalid-suffix")) cfg.invalid_suffix = *v;
    if (auto v = opts.get("kmin")) {
        const auto t = parse_triple(*v, "--kmin");
        for (std::size_t a = 0; a < 3; ++a) cfg.thresholds.k_min[a] = parse_u32(t[a], "--kmin");
    }
    if (auto v = opts.get("kmax")) {
        const auto t = parse_triple(*v, "--kmax");
        for (std::size_t a = 0; a < 3; ++a) {
            if (t[a] == "-" || t[a] == "none" || t[a] == "off") {
                cfg.thresholds.k_max[a] = std::nullopt;
            } else {
                cfg.thresholds.k_max[a] = parse_u32(t[a], "--kmax");
            }
        }
    }
    if (auto v = opts.get("target-class")) {
        cfg.thresholds.target_classes.clear();
        for (const auto& part : split(*v, ',')) {
            const auto c = parse_u32(part, "--target-class");
            if (c >= cfg.num_classes) throw UsageError("--target-class " + part + " >= num_classes");
            cfg.thresholds.target_classes.push_back(static_cast<std::uint16_t>(c));
        }
    }
    try {
        cfg.thresholds.validate();
    } catch (const ConfigError& e) {
        throw UsageError(e.what());
    }
    if (cfg.format == GridFormat::Raw && !cfg.dims) throw UsageError("raw inputs need --dims X,Y,Z");
    cfg.inputs = expand_inputs(opts.list("inputs"));
    return cfg;
}

std::optional<json> load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open config file '" + path + "'");
    try {
        json j = json::parse(in);
        if (!j.is_object()) throw UsageError("config file '" + path + "' must hold a JSON object");
        return j;
    } catch (const json::exception& e) {
        throw UsageError("config file '" + path + "': " + e.what());
    }
}

struct LoadedGrid {
    VoxelGrid grid;
    GridFormat format;
};

LoadedGrid load_grid(const fs::path& path, const JobConfig& cfg) {
    const auto bytes = read_file_bytes(path);
    const GridFormat fmt = cfg.format == GridFormat::Auto ? sniff_grid_format(bytes) : cfg.format;
    if (fmt == GridFormat::Raw && !cfg.dims) {
        throw ConfigError("'" + path.string() + "' is a raw grid; pass --dims X,Y,Z");
    }
    VoxelGrid grid = [&] {
        try {
            return decode_grid(bytes, cfg.dims.value_or(GridDims{}), cfg.format_options(fmt));
        } catch (const FormatError& e) {
            throw FormatError("'" + path.string() + "': " + e.what());
        }
    }();
    if (!cfg.invalid_suffix.empty()) {
        const fs::path mask_path = path.string() + cfg.invalid_suffix;
        if (fs::exists(mask_path)) {
            grid = apply_invalid_mask(grid, read_invalid_mask(mask_path, grid.dims(), cfg.axis_order));
        }
    }
    return {std::move(grid), fmt};
}

struct FileResult {
    fs::path input;
    bool ok = false;
    std::string message;
    std::vector<std::string> outputs;
    double wall_ms = 0.0;
    json extra;
};

// Runs fn on every input over a pool of cfg.workers threads; fn receives the
// within-file worker budget.
std::vector<FileResult> for_each_file(const JobConfig& cfg,
                                      const std::function<void(std::size_t, unsigned, FileResult&)>& fn) {
    std::vector<FileResult> results(cfg.inputs.size());
    const unsigned file_workers = std::max(1u, std::min<unsigned>(cfg.workers, static_cast<unsigned>(cfg.inputs.size())));
    const unsigned inner = std::max(1u, cfg.workers / file_workers);
    parallel_for_chunks(cfg.inputs.size(), file_workers, [&](std::uint64_t begin, std::uint64_t end) {
        for (std::uint64_t n = begin; n < end; ++n) {
            auto& r = results[n];
            r.input = cfg.inputs[n];
            const auto start = Clock::now();
            try {
                fn(static_cast<std::size_t>(n), inner, r);
                r.ok = true;
            } catch (const std::exception& e) {
                r.ok = false;
                r.message = e.what();
            }
            r.wall_ms = elapsed_ms(start);
        }
    });
    return results;
}

int report_files(const std::vector<FileResult>& results, const JobConfig& cfg, std::ostream& out,
                 std::ostream& err) {
    int failures = 0;
    for (const auto& r : results) {
        if (!r.ok) ++failures;
        if (cfg.jsonl) {
            json line = {{"file", r.input.string()}, {"status", r.ok ? "ok" : "error"}, {"wall_ms", r.wall_ms}};
            if (!r.outputs.empty()) line["outputs"] = r.outputs;
            if (!r.ok) line["message"] = r.message;
            if (!r.extra.is_null()) line["report"] = r.extra;
            out << line.dump() << '\n';
        } else if (r.ok) {
            out << "ok " << r.input.string();
            for (const auto& o : r.outputs) out << " -> " << o;
            out << " (" << r.wall_ms << " ms)\n";
        } else {
            err << "error " << r.input.string() << ": " << r.message << '\n';
        }
    }
    return failures == 0 ? kExitOk : kExitPartial;
}

void require_inputs(const JobConfig& cfg) {
    if (cfg.inputs.empty()) throw UsageError("no inputs matched");
}

fs::path prepare_out_dir(const JobConfig& cfg) {
    const fs::path dir = cfg.out();
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw UsageError("cannot create output directory '" + dir.string() + "': " + ec.message());
    return dir;
}

int cmd_offsets(const JobConfig& cfg, std::ostream& out, std::ostream& err) {
    require_inputs(cfg);
    const fs::path dir = prepare_out_dir(cfg);
    const auto results = for_each_file(cfg, [&](std::size_t, unsigned inner, FileResult& r) {
        const fs::path& in = r.input;
        const auto loaded = load_grid(in, cfg);
        const OffsetField field = compute_offsets(loaded.grid, cfg.policy, inner);
        const fs::path dest = dir / (in.stem().string() + ".vxo");
        write_offsets(field, dest);
        r.outputs.push_back(dest.string());
    });
    return report_files(results, cfg, out, err);
}

int cmd_stats(const JobConfig& cfg, std::ostream& out, std::ostream& err) {
    require_inputs(cfg);
    const fs::path dir = prepare_out_dir(cfg);
    BinSpec bins;
    bins.bins = cfg.bins;
    std::vector<std::vector<ScaleHistogram>> per_file(cfg.inputs.size());
    auto results = for_each_file(cfg, [&](std::size_t n, unsigned inner, FileResult& r) {
        const auto loaded = load_grid(r.input, cfg);
        const auto scales = scales_from_offsets(compute_offsets(loaded.grid, cfg.policy, inner));
        auto hist = all_scale_histograms(loaded.grid, scales, bins, cfg.sample_mode);
        r.extra = json{{"voxels", loaded.grid.size()}};
        per_file[n] = std::move(hist);
    });

    std::optional<std::vector<ScaleHistogram>> merged;
    for (std::size_t n = 0; n < results.size(); ++n) {
        if (!results[n].ok) continue;
        if (!merged) {
            merged = per_file[n];
            continue;
        }
        try {
            merge_into(*merged, per_file[n]);
        } catch (const ShapeError& e) {
            results[n].ok = false;
            results[n].message = std::string("cannot merge with earlier inputs: ") + e.what();
        }
    }
    const fs::path dest =
        dir / (cfg.hist_format == HistogramFormat::Csv ? "scale_histograms.csv" : "scale_histograms.json");
    export_histograms(merged.value_or(std::vector<ScaleHistogram>{}), dest, cfg.hist_format);
    const int status = report_files(results, cfg, out, err);
    if (cfg.jsonl) {
        out << json{{"histograms", dest.string()}}.dump() << '\n';
    } else {
        out << "histograms -> " << dest.string() << '\n';
    }
    return status;
}

int cmd_refine(const JobConfig& cfg, std::ostream& out, std::ostream& err) {
    require_inputs(cfg);
    const fs::path dir = prepare_out_dir(cfg);
    const auto results = for_each_file(cfg, [&](std::size_t, unsigned inner, FileResult& r) {
        const fs::path& in = r.input;
        const auto loaded = load_grid(in, cfg);
        const auto scales = scales_from_offsets(compute_offsets(loaded.grid, {}, inner));
        const AnomalyMask mask = detect_anomalies(scales, cfg.thresholds);
        const VoxelGrid refined = refine_labels(loaded.grid, mask, cfg.thresholds);
        const fs::path grid_dest = dir / in.filename();
        if (fs::exists(grid_dest) && fs::equivalent(grid_dest, in)) {
            throw IoError("refusing to overwrite input '" + in.string() + "'; choose another --out");
        }
        write_grid(refined, grid_dest, cfg.format_options(loaded.format));

        json report = json::parse(quality_report_json(quality_report(loaded.grid, mask), cfg.thresholds));
        std::uint64_t rewritten = 0;
        for (std::uint64_t n = 0; n < refined.size(); ++n) rewritten += refined.label(n) != loaded.grid.label(n);
        report["file"] = in.string();
        report["rewritten_voxels"] = rewritten;
        const fs::path report_dest = dir / (in.stem().string() + ".quality.json");
        std::ofstream rep(report_dest, std::ios::trunc);
        if (!rep) throw IoError("cannot open '" + report_dest.string() + "' for writing");
        rep << report.dump(1) << '\n';
        r.outputs = {grid_dest.string(), report_dest.string()};
        r.extra = json{{"rewritten_voxels", rewritten}};
    });
    return report_files(results, cfg, out, err);
}

int cmd_eval(const JobConfig& cfg, const OptionSet& opts, std::ostream& out, std::ostream& err) {
    const auto truths = expand_inputs(opts.list("truth"));
    const auto preds = expand_inputs(opts.list("pred"));
    if (truths.empty() || preds.empty()) throw UsageError("no inputs matched");
    if (truths.size() != preds.size()) {
        throw UsageError("--truth matched " + std::to_string(truths.size()) + " files but --pred matched " +
                         std::to_string(preds.size()));
    }
    struct PairOutcome {
        std::optional<ConfusionMatrix> cm;
        std::string message;
        bool shape_error = false;
    };
    std::vector<PairOutcome> outcomes(truths.size());
    const unsigned workers = std::max(1u, std::min<unsigned>(cfg.workers, static_cast<unsigned>(truths.size())));
    parallel_for_chunks(truths.size(), workers, [&](std::uint64_t begin, std::uint64_t end) {
        for (std::uint64_t n = begin; n < end; ++n) {
            auto& o = outcomes[n];
            try {
                const auto t = load_grid(truths[n], cfg);
                const auto p = load_grid(preds[n], cfg);
                ConfusionMatrix cm(cfg.num_classes);
                accumulate(cm, t.grid, p.grid);
                o.cm = std::move(cm);
            } catch (const ShapeError& e) {
                o.shape_error = true;
                o.message = truths[n].string() + " vs " + preds[n].string() + ": " + e.what();
            } catch (const std::exception& e) {
                o.message = truths[n].string() + " vs " + preds[n].string() + ": " + e.what();
            }
        }
    });

    for (const auto& o : outcomes) {
        if (o.shape_error) {
            err << "shape mismatch: " << o.message << '\n';
            return kExitUsage;
        }
    }
    ConfusionMatrix total(cfg.num_classes);
    int failures = 0;
    for (std::size_t n = 0; n < outcomes.size(); ++n) {
        const auto& o = outcomes[n];
        if (!o.cm) {
            ++failures;
            err << "error " << o.message << '\n';
            continue;
        }
        total.merge(*o.cm);
        if (cfg.jsonl) {
            json line = json::parse(metrics_to_json(finalize(*o.cm), -1));
            line["truth"] = truths[n].string();
            line["pred"] = preds[n].string();
            out << line.dump() << '\n';
        }
    }
    const std::string report = metrics_to_json(finalize(total), cfg.jsonl ? -1 : 1);
    out << report << '\n';
    if (cfg.out_dir) {
        const fs::path dir = prepare_out_dir(cfg);
        std::ofstream f(dir / "metrics.json", std::ios::trunc);
        if (!f) throw UsageError("cannot write '" + (dir / "metrics.json").string() + "'");
        f << metrics_to_json(finalize(total), 1) << '\n';
    }
    return failures ? kExitPartial : kExitOk;
}

int cmd_synth(const JobConfig& cfg, const OptionSet& opts, std::ostream& out) {
    const auto spec_path = opts.get("spec");
    if (!spec_path) throw UsageError("synth needs --spec scene.json");
    std::ifstream in(*spec_path);
    if (!in) throw UsageError("cannot open scene spec '" + *spec_path + "'");
    std::stringstream text;
    text << in.rdbuf();
    SceneSpec spec = [&] {
        try {
            return scene_spec_from_json(text.str());
        } catch (const SpecError& e) {
            throw UsageError(e.what());
        }
    }();
    if (auto seed = opts.get("seed")) {
        try {
            spec.seed = std::stoull(*seed);
        } catch (const std::exception&) {
            throw UsageError("--seed: '" + *seed + "' is not an integer");
        }
    }
    const std::string name = opts.get("name").value_or("scene");
    const fs::path dir = prepare_out_dir(cfg);
    const SynthResult result = [&] {
        try {
            return synthesize(spec);
        } catch (const SpecError& e) {
            throw UsageError(e.what());
        }
    }();
    const GridFormat fmt = cfg.format == GridFormat::Raw ? GridFormat::Raw : GridFormat::Container;
    const fs::path grid_dest = dir / (name + (fmt == GridFormat::Raw ? ".raw" : ".vxg"));
    write_grid(result.grid, grid_dest, cfg.format_options(fmt));
    const fs::path manifest_dest = dir / (name + ".manifest.json");
    std::ofstream m(manifest_dest, std::ios::trunc);
    if (!m) throw UsageError("cannot write '" + manifest_dest.string() + "'");
    m << manifest_to_json(result.manifest);
    if (cfg.jsonl) {
        out << json{{"grid", grid_dest.string()}, {"manifest", manifest_dest.string()}, {"seed", spec.seed}}.dump()
            << '\n';
    } else {
        out << "synth " << grid_dest.string() << " (" << result.manifest.size() << " shapes, seed " << spec.seed
            << ")\n";
    }
    return kExitOk;
}

template <typename Fn>
double best_ns_per_voxel(unsigned repeat, std::uint64_t voxels, Fn&& fn) {
    double best = 0.0;
    for (unsigned r = 0; r < repeat; ++r) {
        const auto start = Clock::now();
        fn();
        const double ns = std::chrono::duration<double, std::nano>(Clock::now() - start).count();
        if (r == 0 || ns < best) best = ns;
    }
    return best / static_cast<double>(voxels);
}

int cmd_bench(const JobConfig& cfg, const OptionSet& opts, std::ostream& out) {
    const GridDims dims = cfg.dims.value_or(GridDims{64, 64, 16});
    const unsigned repeat = opts.get("repeat") ? parse_u32(*opts.get("repeat"), "--repeat") : 3u;
    if (repeat < 1) throw UsageError("--repeat must be >= 1");
    const std::uint64_t seed = opts.get("seed") ? parse_u32(*opts.get("seed"), "--seed") : 0u;
    const std::string scene = opts.get("scene").value_or("street");
    VoxelGrid grid = [&] {
        if (scene == "street") return synthesize(benchmark_scene(dims, seed)).grid;
        if (scene == "random") {
            SceneSpec spec;
            spec.dims = dims;
            spec.seed = seed;
            spec.specks = {static_cast<std::uint32_t>(std::min<std::uint64_t>(dims.total() / 2, 1u << 20)), 1};
            return synthesize(spec).grid;
        }
        throw UsageError("--scene must be street or random");
    }();

    const std::uint64_t voxels = grid.size();
    const std::string name = dims.to_string();
    json records = json::array();
    for (Direction d : kDirections) {
        const double ns = best_ns_per_voxel(repeat, voxels, [&] { (void)compute_direction(grid, d, {}, cfg.workers); });
        records.push_back({{"grid", name}, {"direction", std::string(to_string(d))}, {"impl", "fast"}, {"ns_per_voxel", ns}});
    }
    OffsetField fast(dims, std::vector<std::uint32_t>(voxels * 6));
    const double fast_ns = best_ns_per_voxel(repeat, voxels, [&] { fast = compute_offsets(grid, {}, cfg.workers); });
    std::optional<OffsetField> naive;
    const double naive_ns = best_ns_per_voxel(repeat, voxels, [&] { naive = compute_offsets_naive(grid); });
    records.push_back({{"grid", name}, {"direction", "all"}, {"impl", "fast"}, {"ns_per_voxel", fast_ns}});
    records.push_back({{"grid", name}, {"direction", "all"}, {"impl", "naive"}, {"ns_per_voxel", naive_ns}});
    const bool agree = naive && *naive == fast;
    json summary = {{"grid", name},       {"scene", scene},  {"voxels", voxels},
                    {"workers", cfg.workers}, {"agree", agree}, {"speedup", naive_ns / fast_ns}};
    if (cfg.jsonl) {
        for (const auto& r : records) out << r.dump() << '\n';
        out << summary.dump() << '\n';
    } else {
        summary["results"] = records;
        out << summary.dump(1) << '\n';
    }
    return agree ? kExitOk : kExitPartial;
}

void add_shared_options(CLI::App* sub, OptionSet& opts) {
    opts.bind(sub, "dims", "grid dims X,Y,Z (required for raw inputs)");
    opts.bind(sub, "axis-order", "storage order of raw streams, slowest axis first (default xyz)");
    opts.bind(sub, "out", "output directory");
    opts.bind(sub, "workers", "worker threads (default $VOXNT_WORKERS or 1)");
    opts.bind(sub, "format", "grid format raw|container|auto (default auto)");
    opts.bind(sub, "num-classes", "number of semantic classes including empty (default 20)");
    opts.bind(sub, "invalid-suffix", "load <input><suffix> as an invalid-voxel mask when present");
    opts.bind(sub, "config", "JSON config file; flags override its entries");
    opts.bind_flag(sub, "jsonl", "line-delimited JSON reports");
}

void add_scan_options(CLI::App* sub, OptionSet& opts) {
    opts.bind_flag(sub, "include-empty", "regress the empty class (default)");
    opts.bind_flag(sub, "exclude-empty", "do not regress the empty class");
    opts.bind_flag(sub, "ignore-bridges", "let ignore-label voxels join the runs around them");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Voxel label toolkit: offsets, scale statistics, label refinement and evaluation"};
    app.require_subcommand(1);
    std::map<std::string, OptionSet> opt_sets;

    auto* offsets = app.add_subcommand("offsets", "write the six-direction offset field of each grid");
    auto* stats = app.add_subcommand("stats", "per-class instance-scale histograms");
    auto* refine = app.add_subcommand("refine", "rewrite anomalous target-class voxels to the ignore label");
    auto* eval = app.add_subcommand("eval", "occupancy IoU and per-class IoU over truth/prediction pairs");
    auto* synth = app.add_subcommand("synth", "rasterize a JSON scene spec");
    auto* bench = app.add_subcommand("bench", "offset throughput, fast scan against the naive walk");

    for (auto* sub : {offsets, stats, refine, eval, synth, bench}) add_shared_options(sub, opt_sets[sub->get_name()]);
    for (auto* sub : {offsets, stats, refine}) opt_sets[sub->get_name()].bind_list(sub, "inputs", "input grids or globs", true);
    add_scan_options(offsets, opt_sets["offsets"]);
    add_scan_options(stats, opt_sets["stats"]);
    opt_sets["stats"].bind(stats, "bins", "histogram bins (default 32)");
    opt_sets["stats"].bind(stats, "hist-format", "csv|json (default csv)");
    opt_sets["stats"].bind_flag(stats, "per-run", "count each run once instead of each voxel");
    opt_sets["refine"].bind(refine, "kmin", "minimum scales a,b,c (default 3,3,3)");
    opt_sets["refine"].bind(refine, "kmax", "maximum scales a,b,c; '-' disables an axis (default 30,30,-)");
    opt_sets["refine"].bind(refine, "target-class", "comma-separated class ids to refine (default 1)");
    opt_sets["eval"].bind_list(eval, "truth", "ground-truth grids or globs");
    opt_sets["eval"].bind_list(eval, "pred", "prediction grids or globs, paired with --truth in sorted order");
    opt_sets["synth"].bind(synth, "spec", "scene spec JSON");
    opt_sets["synth"].bind(synth, "seed", "override the spec seed");
    opt_sets["synth"].bind(synth, "name", "output file stem (default scene)");
    opt_sets["bench"].bind(bench, "repeat", "timed repetitions, best kept (default 3)");
    opt_sets["bench"].bind(bench, "seed", "scene seed (default 0)");
    opt_sets["bench"].bind(bench, "scene", "street|random (default street)");

    std::vector<std::string> argv_rest(args.begin() + (args.empty() ? 0 : 1), args.end());
    std::reverse(argv_rest.begin(), argv_rest.end());
    try {
        app.parse(argv_rest);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << e.what() << '\n';
        return kExitUsage;
    }

    CLI::App* chosen = app.get_subcommands().front();
    OptionSet& opts = opt_sets[chosen->get_name()];
    try {
        opts.resolve(std::nullopt);
        std::optional<json> config;
        if (auto path = opts.get("config")) config = load_config_file(*path);
        opts.resolve(config);
        const JobConfig cfg = build_config(opts);
        const std::string name = chosen->get_name();
        if (name == "offsets") return cmd_offsets(cfg, out, err);
        if (name == "stats") return cmd_stats(cfg, out, err);
        if (name == "refine") return cmd_refine(cfg, out, err);
        if (name == "eval") return cmd_eval(cfg, opts, out, err);
        if (name == "synth") return cmd_synth(cfg, opts, out);
        if (name == "bench") return cmd_bench(cfg, opts, out);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitPartial;
    }
    return kExitUsage;
}

}  // namespace voxnt::cli
