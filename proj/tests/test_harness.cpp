#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "greclab/harness.hpp"

using namespace greclab;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    REQUIRE(f.good());
    std::stringstream buf;
    buf << f.rdbuf();
    return buf.str();
}

fs::path fresh_dir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / "greclab_tests" / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

ExperimentConfig small_config() {
    ExperimentConfig cfg;
    cfg.lambda_grid.count = 11;
    cfg.regions.points_per_region = 5;
    cfg.plan.n_r = 3;
    cfg.master_seed = 42;
    return cfg;
}

const std::vector<Stage> kFullStages{Stage::Oracle, Stage::Simulate, Stage::Ensemble,
                                     Stage::Grec};

}  // namespace

TEST_CASE("default config validates and round-trips through json") {
    ExperimentConfig cfg;
    cfg.validate();
    const std::string text = config_to_json(cfg);
    const ExperimentConfig back = config_from_json(text);
    CHECK(config_to_json(back) == text);
    CHECK(back.lambda_grid.count == 26);
    CHECK(back.plan.n_r == 9);
    CHECK(back.plan.delta == 0.1);
    CHECK(back.regions.points_per_region == 10);
    CHECK(back.zne.count == 9);
}

TEST_CASE("unknown keys are rejected at every level") {
    CHECK_THROWS_AS(config_from_json(R"({"lambda_gird": {}})"), std::invalid_argument);
    CHECK_THROWS_AS(config_from_json(R"({"noise": {"p3": 0.1}})"), std::invalid_argument);
    CHECK_THROWS_AS(config_from_json(R"({"plan": {"Delta": 0.1}})"), std::invalid_argument);
    CHECK_NOTHROW(config_from_json(R"({"noise": {"p1": 0.01}})"));
}

TEST_CASE("config rejects inconsistent regions") {
    CHECK_THROWS_AS(config_from_json(R"({"regions": {"t1": [0.2, 0.8]}})"),
                    std::invalid_argument);
    CHECK_THROWS_AS(config_from_json(R"({"lambda_grid": {"min": 3.0, "max": 1.0}})"),
                    std::invalid_argument);
    CHECK_THROWS_AS(config_from_json(R"({"noise": {"p1": 1.5}})"), std::invalid_argument);
}

TEST_CASE("lambda grid spacing") {
    LambdaGrid g;
    const auto pts = g.points();
    REQUIRE(pts.size() == 26);
    CHECK(pts.front() == 1.0);
    CHECK(pts.back() == 3.5);
    CHECK(pts[1] - pts[0] == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("zero-noise pipeline is a fixed point") {
    const fs::path dir = fresh_dir("zero_noise");
    ExperimentConfig cfg = small_config();
    const RunOutput out = run_stages(cfg, kFullStages, dir.string());

    CHECK(out.rmse.at("raw").at("lambda") < 1e-10);
    CHECK(out.rmse.at("grec_t1").at("lambda") < 1e-8);
    CHECK(out.rmse.at("grec_t2").at("v2") < 1e-8);

    const Curve exact = curve_from_csv(slurp(dir / "curves/lambda/exact.csv"));
    const Curve mitigated = curve_from_csv(slurp(dir / "curves/lambda/grec_t1.csv"));
    for (std::size_t i = 0; i < exact.size(); ++i)
        CHECK(mitigated.values[i] == doctest::Approx(exact.values[i]).epsilon(1e-8));
}

TEST_CASE("global depolarizing only: baseline is exact on the far region") {
    const fs::path dir = fresh_dir("global_depol");
    ExperimentConfig cfg = small_config();
    cfg.noise.global_depol_end = 0.15;
    const RunOutput out =
        run_stages(cfg, {Stage::Oracle, Stage::Simulate, Stage::Baseline}, dir.string());
    CHECK(out.rmse.at("baseline_t1").at("v1") < 1e-6);
    CHECK(out.rmse.at("baseline_t1").at("t2") < 1e-6);
    CHECK(out.rmse.at("baseline_t1").at("v2") < 1e-6);
    CHECK(out.rmse.at("raw").at("v1") > 1e-3);  // the distortion was real
}

TEST_CASE("artifacts are deterministic apart from the manifest timestamp") {
    ExperimentConfig cfg = small_config();
    cfg.noise.model.p1 = 0.002;
    cfg.noise.model.coherent_eps = 0.02;
    const fs::path a = fresh_dir("det_a");
    const fs::path b = fresh_dir("det_b");
    const RunOutput ra = run_stages(cfg, kFullStages, a.string());
    // The worker count must not leak into the results.
    setenv("GREC_LAB_THREADS", "3", 1);
    const RunOutput rb = run_stages(cfg, kFullStages, b.string());
    unsetenv("GREC_LAB_THREADS");
    REQUIRE(ra.files == rb.files);
    for (const auto& rel : ra.files) {
        if (rel == "manifest.json") continue;
        CHECK(slurp(a / rel) == slurp(b / rel));
    }
}

TEST_CASE("shots mode records standard errors and stays deterministic") {
    ExperimentConfig cfg = small_config();
    cfg.shots = 2048;
    cfg.noise.model.p1 = 0.002;
    const fs::path a = fresh_dir("shots_a");
    const fs::path b = fresh_dir("shots_b");
    run_stages(cfg, {Stage::Oracle, Stage::Simulate}, a.string());
    run_stages(cfg, {Stage::Oracle, Stage::Simulate}, b.string());
    const Curve noisy = curve_from_csv(slurp(a / "curves/lambda/noisy.csv"));
    REQUIRE(noisy.stderrs.size() == noisy.values.size());
    CHECK(noisy.stderrs[0] > 0.0);
    CHECK(slurp(a / "curves/lambda/noisy.csv") == slurp(b / "curves/lambda/noisy.csv"));
}

TEST_CASE("replay reproduces a run byte for byte") {
    ExperimentConfig cfg = small_config();
    cfg.noise.model.p1 = 0.003;
    cfg.noise.model.p2 = 0.01;
    const fs::path orig = fresh_dir("replay_orig");
    const RunOutput out = run_stages(cfg, kFullStages, orig.string());

    const fs::path r1 = fresh_dir("replay_1");
    const fs::path r2 = fresh_dir("replay_2");
    replay((orig / "manifest.json").string(), r1.string());
    replay((orig / "manifest.json").string(), r2.string());

    for (const auto& rel : out.files) {
        CAPTURE(rel);
        CHECK(slurp(r1 / rel) == slurp(r2 / rel));
        CHECK(slurp(r1 / rel) == slurp(orig / rel));  // timestamp included: manifest is copied
    }
}

TEST_CASE("training fits never read validation points") {
    const fs::path dir = fresh_dir("hygiene");
    ExperimentConfig cfg = small_config();
    cfg.noise.model.p1 = 0.002;
    cfg.noise.model.coherent_eps = 0.02;
    run_stages(cfg, kFullStages, dir.string());

    // Refit from the emitted t1 curves alone; the stored weights must match.
    std::vector<Curve> train;
    for (int r = 1; r <= cfg.plan.n_r; ++r)
        train.push_back(
            curve_from_csv(slurp(dir / ("curves/t1/randomized_" + std::to_string(r) + ".csv"))));
    const Curve exact_t1 = curve_from_csv(slurp(dir / "curves/t1/exact.csv"));
    const GrecFit refit = grec_fit(train, exact_t1);

    const json fit = json::parse(slurp(dir / "fits/grec_t1.json"));
    REQUIRE(fit.at("etas").size() == refit.etas.size());
    for (std::size_t r = 0; r < refit.etas.size(); ++r)
        CHECK(fit.at("etas").at(r).get<double>() ==
              doctest::Approx(refit.etas[r]).epsilon(1e-14));
    CHECK(fit.at("eta0").get<double>() == doctest::Approx(refit.eta0).epsilon(1e-14));

    // and the training grid lies inside T1 = [1.5, 2.0]
    for (double lam : exact_t1.lambdas) {
        CHECK(lam >= 1.5);
        CHECK(lam <= 2.0);
    }
}

TEST_CASE("rmse table is recomputable from the emitted csv files") {
    const fs::path dir = fresh_dir("rmse_recompute");
    ExperimentConfig cfg = small_config();
    cfg.noise.model.p1 = 0.004;
    const RunOutput out = run_stages(cfg, kFullStages, dir.string());

    const json table = json::parse(slurp(dir / "rmse.json"));
    for (const auto& [method, per_grid] : out.rmse) {
        const std::string label = method == "raw" ? "noisy" : method;
        for (const auto& [grid, value] : per_grid) {
            const Curve got =
                curve_from_csv(slurp(dir / ("curves/" + grid + "/" + label + ".csv")));
            const Curve exact =
                curve_from_csv(slurp(dir / ("curves/" + grid + "/exact.csv")));
            const double recomputed = rmse_between(got, exact);
            CHECK(std::abs(recomputed - value) < 1e-12);
            CHECK(std::abs(table.at(method).at(grid).get<double>() - value) < 1e-15);
        }
    }
}

TEST_CASE("offset-only and weighted fit knobs") {
    // weighted fits require shot noise to provide standard errors
    CHECK_THROWS_AS(config_from_json(R"({"weighted_fits": true})"), std::invalid_argument);
    const ExperimentConfig weighted =
        config_from_json(R"({"weighted_fits": true, "shots": 1024})");
    CHECK(weighted.weighted_fits);

    const fs::path dir = fresh_dir("offset_only");
    ExperimentConfig cfg = small_config();
    cfg.baseline_offset_only = true;
    cfg.noise.global_depol_end = 0.15;
    run_stages(cfg, {Stage::Oracle, Stage::Simulate, Stage::Baseline}, dir.string());
    const json fit = json::parse(slurp(dir / "fits/baseline_t1.json"));
    CHECK(fit.at("etas").at(0).get<double>() == 1.0);
    CHECK(fit.at("eta0").get<double>() > 0.0);  // the offset absorbs part of the damping
}

TEST_CASE("sweep and stability stages emit reports") {
    const fs::path dir = fresh_dir("sweep_stability");
    ExperimentConfig cfg = small_config();
    cfg.sweep.nr_candidates = {2, 3};
    cfg.sweep.delta_candidates = {0.05, 0.1};
    run_stages(cfg, {Stage::Oracle, Stage::Sweep, Stage::Stability}, dir.string());

    const json sweep = json::parse(slurp(dir / "sweep.json"));
    CHECK(sweep.at("table").size() == 4);
    // At zero noise two curves cannot span the exact one, three can; delta
    // ties resolve downward.
    CHECK(sweep.at("best").at("n_r").get<int>() == 3);
    CHECK(sweep.at("best").at("delta").get<double>() == 0.05);

    const json stab = json::parse(slurp(dir / "stability.json"));
    CHECK(stab.at("N").get<int>() == 8);
    CHECK(stab.at("M").get<int>() == 256);
    REQUIRE(stab.at("probes").size() == 1);
    CHECK(stab.at("probes").at(0).at("within_bound").get<bool>());
}

TEST_CASE("svg report renders the standard series") {
    const fs::path dir = fresh_dir("svg");
    ExperimentConfig cfg = small_config();
    cfg.noise.model.p1 = 0.002;
    run_stages(cfg, kFullStages, dir.string());
    const std::string svg = render_report_svg(dir.string());
    CHECK(svg.find("<svg") != std::string::npos);
    CHECK(svg.find("polyline") != std::string::npos);  // exact line
    CHECK(svg.find("grec_t1") != std::string::npos);
    CHECK(svg.find("grec_t2") != std::string::npos);
    CHECK(svg.find("noisy") != std::string::npos);
    CHECK(svg.find("</svg>") != std::string::npos);
}

TEST_CASE("worker count responds to the environment") {
    CHECK(worker_count() >= 1);
}
