#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "greclab/chebx.hpp"
#include "greclab/ising.hpp"
#include "greclab/mitigate.hpp"
#include "greclab/randomize.hpp"

namespace greclab {

struct LambdaGrid {
    double min = 1.0;
    double max = 3.5;
    int count = 26;

    std::vector<double> points() const;
};

// Classically accessible regions and their train/validation splits.
struct Regions {
    std::array<double, 2> k1{1.0, 2.0};
    std::array<double, 2> k2{2.5, 3.5};
    std::array<double, 2> t1{1.5, 2.0};
    std::array<double, 2> v1{1.0, 1.5};
    std::array<double, 2> t2{2.5, 3.0};
    std::array<double, 2> v2{3.0, 3.5};
    int points_per_region = 10;
};

// NoiseModel plus the one whole-circuit option: a single global depolarizing
// channel applied after the full circuit.
struct PipelineNoise {
    NoiseModel model;
    double global_depol_end = 0.0;
};

struct ZneSettings {
    double scale_min = 1.0;
    double scale_max = 1.9;
    int count = 9;
    FoldMode fold_mode = FoldMode::GateFold;

    ZneConfig to_config() const;
};

struct SweepSettings {
    std::vector<int> nr_candidates{9};
    std::vector<double> delta_candidates{0.1};
};

struct StabilitySettings {
    double pole = 3.0;    // test function 1/(pole - x)
    int degree = 8;
    double eps = 1e-8;
    double rho = 0.0;     // 0 = derive from the pole position
    double Q = 0.0;       // 0 = sup of the test function on E_rho
    double C = 10.0;
    std::vector<double> probes{1.2};
};

struct ExperimentConfig {
    LambdaGrid lambda_grid;
    Regions regions;
    PipelineNoise noise;
    RandomizationPlan plan;   // plan.seed is derived from master_seed at run time
    ZneSettings zne;
    SweepSettings sweep;
    StabilitySettings stability;
    std::uint64_t shots = 0;  // 0 = exact expectations
    std::uint64_t master_seed = 42;
    bool weighted_fits = false;        // use recorded stderrs as fit weights
    bool baseline_offset_only = false; // pin the baseline slope to 1

    void validate() const;
};

// Strict parser: unknown keys anywhere in the document are errors.
ExperimentConfig config_from_json(const std::string& text);
std::string config_to_json(const ExperimentConfig& config);

enum class Stage { Oracle, Simulate, Ensemble, Grec, Baseline, Zne, Sweep, Stability };

std::string stage_name(Stage s);
Stage stage_from_name(const std::string& name);

struct RunOutput {
    std::vector<std::string> files;  // paths written, relative to out_dir
    std::map<std::string, std::map<std::string, double>> rmse;  // method -> grid -> rmse
};

// Executes the requested stages into out_dir and writes manifest.json last.
// Identical config + stages reproduce every artifact byte-for-byte.
RunOutput run_stages(const ExperimentConfig& config, const std::vector<Stage>& stages,
                     const std::string& out_dir);

// Re-executes the stages recorded in a manifest; the manifest itself is
// copied verbatim so replayed trees are byte-identical.
RunOutput replay(const std::string& manifest_path, const std::string& out_dir);

// Renders curves/lambda/*.csv from a run directory into a minimal SVG plot.
std::string render_report_svg(const std::string& run_dir);

// Thread pool size used when fanning out simulations; the GREC_LAB_THREADS
// environment variable overrides it.
int worker_count();

}  // namespace greclab
