#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "greclab/harness.hpp"

namespace {

namespace fs = std::filesystem;
using namespace greclab;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

struct CommonOpts {
    std::string config_path;
    std::string out_dir = "out";
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::uint64_t shots = 0;
    bool shots_set = false;
    std::string format = "csv";
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config_path, "experiment config JSON file");
    cmd->add_option("--out", opts.out_dir, "output directory")->capture_default_str();
    cmd->add_option("--seed", opts.seed, "override master seed")->each([&](const std::string&) {
        opts.seed_set = true;
    });
    cmd->add_option("--shots", opts.shots, "override shot count (0 = exact expectations)")
        ->each([&](const std::string&) { opts.shots_set = true; });
    cmd->add_option("--format", opts.format, "curve output format")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();
}

ExperimentConfig load_config(const CommonOpts& opts) {
    ExperimentConfig cfg;
    if (!opts.config_path.empty()) {
        std::ifstream f(opts.config_path, std::ios::binary);
        if (!f) throw std::invalid_argument("cannot read config file: " + opts.config_path);
        std::stringstream buf;
        buf << f.rdbuf();
        cfg = config_from_json(buf.str());
    } else {
        cfg.validate();
    }
    if (opts.seed_set) cfg.master_seed = opts.seed;
    if (opts.shots_set) cfg.shots = opts.shots;
    return cfg;
}

// Curves are always emitted as CSV; --format json additionally mirrors them
// as JSON documents next to the CSVs.
void mirror_json_curves(const std::string& out_dir, const std::vector<std::string>& files) {
    for (const auto& rel : files) {
        if (rel.size() < 4 || rel.substr(rel.size() - 4) != ".csv") continue;
        std::ifstream f(fs::path(out_dir) / rel, std::ios::binary);
        std::stringstream buf;
        buf << f.rdbuf();
        const Curve c = curve_from_csv(buf.str());
        std::ostringstream j;
        j << "{\n  \"label\": \"" << c.label << "\",\n  \"lambda\": [";
        for (std::size_t i = 0; i < c.size(); ++i) j << (i ? "," : "") << c.lambdas[i];
        j << "],\n  \"value\": [";
        for (std::size_t i = 0; i < c.size(); ++i) j << (i ? "," : "") << c.values[i];
        j << "]\n}\n";
        std::ofstream o(fs::path(out_dir) / (rel.substr(0, rel.size() - 4) + ".json"),
                        std::ios::binary);
        o << j.str();
    }
}

int run_command(const CommonOpts& opts, const std::vector<Stage>& stages,
                const std::function<void(ExperimentConfig&)>& adjust = {}) {
    ExperimentConfig cfg = load_config(opts);
    if (adjust) {
        adjust(cfg);
        cfg.validate();
    }
    const RunOutput out = run_stages(cfg, stages, opts.out_dir);
    if (opts.format == "json") mirror_json_curves(opts.out_dir, out.files);
    std::printf("wrote %zu artifacts under %s\n", out.files.size(), opts.out_dir.c_str());
    for (const auto& [method, per_grid] : out.rmse) {
        std::printf("rmse %-12s", method.c_str());
        for (const auto& [grid, v] : per_grid) std::printf("  %s=%.3e", grid.c_str(), v);
        std::printf("\n");
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"workbench for randomized-ensemble quantum error mitigation on the "
                 "transverse-field Ising benchmark"};
    app.require_subcommand(1);
    app.allow_extras(false);

    CommonOpts opts;
    std::string manifest_path;
    std::string report_dir;
    std::vector<int> nr_list;
    std::vector<double> delta_list;

    auto* oracle = app.add_subcommand("oracle", "emit the exact magnetization curves");
    add_common(oracle, opts);
    auto* simulate = app.add_subcommand("simulate", "emit noisy simulated curves");
    add_common(simulate, opts);
    auto* ensemble = app.add_subcommand("ensemble", "generate and simulate randomized circuits");
    add_common(ensemble, opts);
    auto* grec = app.add_subcommand("grec", "full randomized-ensemble mitigation pipeline");
    add_common(grec, opts);
    auto* baseline = app.add_subcommand("baseline", "two-parameter affine baseline pipeline");
    add_common(baseline, opts);
    bool offset_only = false;
    baseline->add_flag("--offset-only", offset_only, "pin the slope to 1 and fit the offset");
    auto* zne = app.add_subcommand("zne", "zero-noise extrapolation pipeline");
    add_common(zne, opts);
    auto* sweep = app.add_subcommand("sweep", "hyperparameter table over (N_R, delta)");
    add_common(sweep, opts);
    sweep->add_option("--nr-list", nr_list, "candidate ensemble sizes")->delimiter(',');
    sweep->add_option("--delta-list", delta_list, "candidate parameter half-widths")
        ->delimiter(',');
    auto* stability = app.add_subcommand("stability", "extrapolation stability experiment");
    add_common(stability, opts);
    auto* report = app.add_subcommand("report", "render curves from a run directory to SVG");
    report->add_option("--run", report_dir, "run directory with curves/")->required();
    report->add_option("--out", opts.out_dir, "output directory")->capture_default_str();
    auto* replay_cmd = app.add_subcommand("replay", "re-execute a manifest byte-for-byte");
    replay_cmd->add_option("--manifest", manifest_path, "manifest.json from a previous run")
        ->required();
    replay_cmd->add_option("--out", opts.out_dir, "output directory")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (oracle->parsed()) return run_command(opts, {Stage::Oracle});
        if (simulate->parsed()) return run_command(opts, {Stage::Oracle, Stage::Simulate});
        if (ensemble->parsed()) return run_command(opts, {Stage::Oracle, Stage::Ensemble});
        if (grec->parsed())
            return run_command(opts, {Stage::Oracle, Stage::Simulate, Stage::Ensemble, Stage::Grec});
        if (baseline->parsed())
            return run_command(opts, {Stage::Oracle, Stage::Simulate, Stage::Baseline},
                               [&](ExperimentConfig& cfg) {
                                   if (offset_only) cfg.baseline_offset_only = true;
                               });
        if (zne->parsed()) return run_command(opts, {Stage::Oracle, Stage::Simulate, Stage::Zne});
        if (sweep->parsed())
            return run_command(opts, {Stage::Oracle, Stage::Sweep}, [&](ExperimentConfig& cfg) {
                if (!nr_list.empty()) cfg.sweep.nr_candidates = nr_list;
                if (!delta_list.empty()) cfg.sweep.delta_candidates = delta_list;
            });
        if (stability->parsed()) return run_command(opts, {Stage::Stability});
        if (report->parsed()) {
            const std::string svg = render_report_svg(report_dir);
            fs::create_directories(opts.out_dir);
            const fs::path out = fs::path(opts.out_dir) / "plot.svg";
            std::ofstream f(out, std::ios::binary);
            if (!f) throw std::runtime_error("cannot write " + out.string());
            f << svg;
            std::printf("wrote %s\n", out.string().c_str());
            return kExitOk;
        }
        if (replay_cmd->parsed()) {
            const RunOutput out = replay(manifest_path, opts.out_dir);
            std::printf("replayed %zu artifacts under %s\n", out.files.size(),
                        opts.out_dir.c_str());
            return kExitOk;
        }
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return kExitNumeric;
    }
    return kExitConfig;
}
