#include "greclab/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <tuple>

#include "json.hpp"

#include "greclab/rng.hpp"

namespace greclab {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr const char* kToolVersion = "0.1.0";

void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

std::vector<double> linspace(double lo, double hi, int count) {
    require(count >= 1, "grid needs at least one point");
    std::vector<double> out(static_cast<std::size_t>(count));
    if (count == 1) {
        out[0] = lo;
        return out;
    }
    for (int i = 0; i < count; ++i)
        out[static_cast<std::size_t>(i)] = lo + (hi - lo) * static_cast<double>(i) / (count - 1);
    return out;
}

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

// Strict-object helper: every key must be consumed by the schema.
void check_keys(const json& j, const std::vector<std::string>& allowed, const std::string& where) {
    require(j.is_object(), "config: expected an object at " + where);
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end())
            throw std::invalid_argument("config: unknown key '" + it.key() + "' in " + where);
    }
}

std::array<double, 2> read_interval(const json& j, const std::string& where) {
    require(j.is_array() && j.size() == 2, "config: " + where + " must be [lo, hi]");
    std::array<double, 2> out{j.at(0).get<double>(), j.at(1).get<double>()};
    require(out[0] < out[1], "config: " + where + " must be increasing");
    return out;
}

}  // namespace

std::vector<double> LambdaGrid::points() const { return linspace(min, max, count); }

ZneConfig ZneSettings::to_config() const {
    require(count >= 1, "zne: count must be >= 1");
    ZneConfig c;
    c.scale_factors = linspace(scale_min, scale_max, count);
    c.fold_mode = fold_mode;
    c.validate();
    return c;
}

void ExperimentConfig::validate() const {
    require(lambda_grid.count >= 2, "config: lambda grid needs at least 2 points");
    require(lambda_grid.min < lambda_grid.max, "config: lambda grid must be increasing");
    require(lambda_grid.min >= 1.0, "config: the circuit covers lambda >= 1 only");
    auto inside = [](const std::array<double, 2>& inner, const std::array<double, 2>& outer) {
        return inner[0] >= outer[0] - 1e-12 && inner[1] <= outer[1] + 1e-12;
    };
    require(inside(regions.t1, regions.k1) && inside(regions.v1, regions.k1),
            "config: T1/V1 must lie inside K1");
    require(inside(regions.t2, regions.k2) && inside(regions.v2, regions.k2),
            "config: T2/V2 must lie inside K2");
    const std::array<double, 2> lam{lambda_grid.min, lambda_grid.max};
    require(inside(regions.k1, lam) && inside(regions.k2, lam),
            "config: regions must lie inside the lambda grid");
    require(regions.points_per_region >= 2, "config: points_per_region must be >= 2");
    noise.model.validate();
    require(noise.global_depol_end >= 0.0 && noise.global_depol_end <= 1.0,
            "config: global_depol_end outside [0,1]");
    plan.validate();
    require(zne.count >= 1 && zne.scale_min >= 1.0 && zne.scale_max >= zne.scale_min,
            "config: bad zne scales");
    require(!sweep.nr_candidates.empty() && !sweep.delta_candidates.empty(),
            "config: sweep candidates must be non-empty");
    require(!weighted_fits || shots > 0,
            "config: weighted_fits needs recorded standard errors (shots > 0)");
    require(stability.pole > 1.0, "config: stability pole must exceed 1");
    require(stability.degree >= 1 && stability.degree <= 32, "config: stability degree in [1,32]");
}

ExperimentConfig config_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("config: JSON parse error: ") + e.what());
    }
    ExperimentConfig c;
    check_keys(j, {"lambda_grid", "regions", "noise", "plan", "zne", "sweep", "stability",
                   "shots", "master_seed", "weighted_fits", "baseline_offset_only"},
               "top level");

    if (j.contains("lambda_grid")) {
        const json& g = j["lambda_grid"];
        check_keys(g, {"min", "max", "count"}, "lambda_grid");
        c.lambda_grid.min = g.value("min", c.lambda_grid.min);
        c.lambda_grid.max = g.value("max", c.lambda_grid.max);
        c.lambda_grid.count = g.value("count", c.lambda_grid.count);
    }
    if (j.contains("regions")) {
        const json& g = j["regions"];
        check_keys(g, {"k1", "k2", "t1", "v1", "t2", "v2", "points_per_region"}, "regions");
        if (g.contains("k1")) c.regions.k1 = read_interval(g["k1"], "regions.k1");
        if (g.contains("k2")) c.regions.k2 = read_interval(g["k2"], "regions.k2");
        if (g.contains("t1")) c.regions.t1 = read_interval(g["t1"], "regions.t1");
        if (g.contains("v1")) c.regions.v1 = read_interval(g["v1"], "regions.v1");
        if (g.contains("t2")) c.regions.t2 = read_interval(g["t2"], "regions.t2");
        if (g.contains("v2")) c.regions.v2 = read_interval(g["v2"], "regions.v2");
        c.regions.points_per_region = g.value("points_per_region", c.regions.points_per_region);
    }
    if (j.contains("noise")) {
        const json& g = j["noise"];
        check_keys(g, {"p1", "p2", "gamma_ad", "coherent_eps", "readout_flip", "global_depol_end"},
                   "noise");
        c.noise.model.p1 = g.value("p1", 0.0);
        c.noise.model.p2 = g.value("p2", 0.0);
        c.noise.model.gamma_ad = g.value("gamma_ad", 0.0);
        c.noise.model.coherent_eps = g.value("coherent_eps", 0.0);
        c.noise.model.readout_flip = g.value("readout_flip", 0.0);
        c.noise.global_depol_end = g.value("global_depol_end", 0.0);
    }
    if (j.contains("plan")) {
        const json& g = j["plan"];
        check_keys(g, {"strategy", "n_g", "delta", "range_mode", "n_r"}, "plan");
        const std::string strat = g.value("strategy", std::string("equip_singles"));
        require(strat == "equip_singles" || strat == "random_insert",
                "config: unknown plan.strategy '" + strat + "'");
        c.plan.strategy = strat == "equip_singles" ? RandomizeStrategy::EquipSingles
                                                   : RandomizeStrategy::RandomInsert;
        c.plan.n_g = g.value("n_g", 10);
        c.plan.delta = g.value("delta", 0.1);
        const std::string range = g.value("range_mode", std::string("positive"));
        require(range == "positive" || range == "symmetric",
                "config: unknown plan.range_mode '" + range + "'");
        c.plan.range_mode =
            range == "positive" ? ThetaRange::Positive : ThetaRange::Symmetric;
        c.plan.n_r = g.value("n_r", 9);
    }
    if (j.contains("zne")) {
        const json& g = j["zne"];
        check_keys(g, {"scale_min", "scale_max", "count", "fold_mode"}, "zne");
        c.zne.scale_min = g.value("scale_min", 1.0);
        c.zne.scale_max = g.value("scale_max", 1.9);
        c.zne.count = g.value("count", 9);
        const std::string mode = g.value("fold_mode", std::string("gate"));
        require(mode == "gate" || mode == "global", "config: unknown zne.fold_mode '" + mode + "'");
        c.zne.fold_mode = mode == "gate" ? FoldMode::GateFold : FoldMode::GlobalFold;
    }
    if (j.contains("sweep")) {
        const json& g = j["sweep"];
        check_keys(g, {"nr_candidates", "delta_candidates", "region"}, "sweep");
        if (g.contains("nr_candidates"))
            c.sweep.nr_candidates = g["nr_candidates"].get<std::vector<int>>();
        if (g.contains("delta_candidates"))
            c.sweep.delta_candidates = g["delta_candidates"].get<std::vector<double>>();
    }
    if (j.contains("stability")) {
        const json& g = j["stability"];
        check_keys(g, {"pole", "degree", "eps", "rho", "Q", "C", "probes"}, "stability");
        c.stability.pole = g.value("pole", 3.0);
        c.stability.degree = g.value("degree", 8);
        c.stability.eps = g.value("eps", 1e-8);
        c.stability.rho = g.value("rho", 0.0);
        c.stability.Q = g.value("Q", 0.0);
        c.stability.C = g.value("C", 10.0);
        if (g.contains("probes")) c.stability.probes = g["probes"].get<std::vector<double>>();
    }
    c.shots = j.value("shots", std::uint64_t{0});
    c.master_seed = j.value("master_seed", std::uint64_t{42});
    c.weighted_fits = j.value("weighted_fits", false);
    c.baseline_offset_only = j.value("baseline_offset_only", false);
    c.validate();
    return c;
}

std::string config_to_json(const ExperimentConfig& c) {
    json j;
    j["lambda_grid"] = {{"min", c.lambda_grid.min},
                        {"max", c.lambda_grid.max},
                        {"count", c.lambda_grid.count}};
    j["regions"] = {{"k1", c.regions.k1},         {"k2", c.regions.k2},
                    {"t1", c.regions.t1},         {"v1", c.regions.v1},
                    {"t2", c.regions.t2},         {"v2", c.regions.v2},
                    {"points_per_region", c.regions.points_per_region}};
    j["noise"] = {{"p1", c.noise.model.p1},
                  {"p2", c.noise.model.p2},
                  {"gamma_ad", c.noise.model.gamma_ad},
                  {"coherent_eps", c.noise.model.coherent_eps},
                  {"readout_flip", c.noise.model.readout_flip},
                  {"global_depol_end", c.noise.global_depol_end}};
    j["plan"] = {{"strategy", c.plan.strategy == RandomizeStrategy::EquipSingles
                                  ? "equip_singles"
                                  : "random_insert"},
                 {"n_g", c.plan.n_g},
                 {"delta", c.plan.delta},
                 {"range_mode",
                  c.plan.range_mode == ThetaRange::Positive ? "positive" : "symmetric"},
                 {"n_r", c.plan.n_r}};
    j["zne"] = {{"scale_min", c.zne.scale_min},
                {"scale_max", c.zne.scale_max},
                {"count", c.zne.count},
                {"fold_mode", c.zne.fold_mode == FoldMode::GateFold ? "gate" : "global"}};
    j["sweep"] = {{"nr_candidates", c.sweep.nr_candidates},
                  {"delta_candidates", c.sweep.delta_candidates}};
    j["stability"] = {{"pole", c.stability.pole}, {"degree", c.stability.degree},
                      {"eps", c.stability.eps},   {"rho", c.stability.rho},
                      {"Q", c.stability.Q},       {"C", c.stability.C},
                      {"probes", c.stability.probes}};
    j["shots"] = c.shots;
    j["master_seed"] = c.master_seed;
    j["weighted_fits"] = c.weighted_fits;
    j["baseline_offset_only"] = c.baseline_offset_only;
    return j.dump(2);
}

std::string stage_name(Stage s) {
    switch (s) {
        case Stage::Oracle: return "oracle";
        case Stage::Simulate: return "simulate";
        case Stage::Ensemble: return "ensemble";
        case Stage::Grec: return "grec";
        case Stage::Baseline: return "baseline";
        case Stage::Zne: return "zne";
        case Stage::Sweep: return "sweep";
        case Stage::Stability: return "stability";
    }
    throw std::invalid_argument("unknown stage");
}

Stage stage_from_name(const std::string& name) {
    for (Stage s : {Stage::Oracle, Stage::Simulate, Stage::Ensemble, Stage::Grec, Stage::Baseline,
                    Stage::Zne, Stage::Sweep, Stage::Stability})
        if (stage_name(s) == name) return s;
    throw std::invalid_argument("unknown stage name: " + name);
}

int worker_count() {
    if (const char* env = std::getenv("GREC_LAB_THREADS")) {
        const int n = std::atoi(env);
        if (n >= 1) return std::min(n, 64);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return static_cast<int>(std::clamp(hw, 1u, 8u));
}

namespace {

// Index-parallel fan-out; every index writes its own slot, so the result is
// identical for any worker count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
    const int workers = worker_count();
    if (workers <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (;;) {
                    const std::size_t i = next.fetch_add(1);
                    if (i >= n) break;
                    fn(i);
                }
            } catch (...) {
                errors[static_cast<std::size_t>(w)] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
}

struct NamedGrid {
    std::string name;
    std::vector<double> points;
};

// Validation grids leave out any endpoint they share with their training
// interval, so a point is never both fitted and scored.
std::vector<double> validation_points(const std::array<double, 2>& v,
                                      const std::array<double, 2>& t, int count) {
    const bool skip_hi = v[1] == t[0];
    const bool skip_lo = v[0] == t[1];
    std::vector<double> pts = linspace(v[0], v[1], count + (skip_lo ? 1 : 0) + (skip_hi ? 1 : 0));
    if (skip_hi) pts.pop_back();
    if (skip_lo) pts.erase(pts.begin());
    return pts;
}

std::vector<NamedGrid> make_grids(const ExperimentConfig& c) {
    const int p = c.regions.points_per_region;
    return {
        {"lambda", c.lambda_grid.points()},
        {"t1", linspace(c.regions.t1[0], c.regions.t1[1], p)},
        {"v1", validation_points(c.regions.v1, c.regions.t1, p)},
        {"t2", linspace(c.regions.t2[0], c.regions.t2[1], p)},
        {"v2", validation_points(c.regions.v2, c.regions.t2, p)},
    };
}

// All simulation goes through here so that noise placement, the optional
// trailing global depolarizing channel, and the shot layer stay consistent.
Curve simulate_curve(const CircuitBuilder& builder, const PipelineNoise& noise,
                     const std::vector<double>& grid, std::uint64_t shots,
                     std::uint64_t seed_base, const std::string& label) {
    Curve curve;
    curve.label = label;
    curve.lambdas = grid;
    curve.values.resize(grid.size());
    if (shots > 0) curve.stderrs.resize(grid.size());
    parallel_for(grid.size(), [&](std::size_t i) {
        try {
            const Circuit circ = builder(grid[i]);
            DensityMatrix rho =
                apply_circuit(DensityMatrix::zero_state(circ.width), circ, noise.model);
            if (noise.global_depol_end > 0.0)
                rho = apply_global_depolarizing(rho, noise.global_depol_end);
            if (shots == 0) {
                curve.values[i] = expect_mean_z(rho);
            } else {
                const auto s = sample_expectation(rho, shots, derive_seed(seed_base, i),
                                                  noise.model.readout_flip);
                curve.values[i] = s.value;
                curve.stderrs[i] = s.std_error;
            }
        } catch (const std::exception& e) {
            throw std::runtime_error("while simulating '" + label + "' at lambda=" +
                                     std::to_string(grid[i]) + ": " + e.what());
        }
    });
    return curve;
}

Curve exact_curve(const std::vector<double>& grid) {
    Curve c;
    c.label = "exact";
    c.lambdas = grid;
    c.values.resize(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) c.values[i] = exact_magnetization(grid[i]);
    return c;
}

std::string utc_timestamp() {
    std::time_t now = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    return buf;
}

bool has_stage(const std::vector<Stage>& stages, Stage s) {
    return std::find(stages.begin(), stages.end(), s) != stages.end();
}

// Prefixes escaping errors with the stage name, preserving the
// config-vs-numeric distinction the CLI exit codes rely on.
template <typename Fn>
void with_stage_context(Stage stage, Fn&& fn) {
    try {
        fn();
    } catch (const std::invalid_argument& e) {
        throw std::invalid_argument("stage " + stage_name(stage) + ": " + e.what());
    } catch (const std::exception& e) {
        throw std::runtime_error("stage " + stage_name(stage) + ": " + e.what());
    }
}

struct PendingFiles {
    std::map<std::string, std::string> content;  // relative path -> bytes

    void add(const std::string& rel, std::string bytes) { content[rel] = std::move(bytes); }

    std::vector<std::string> flush(const std::string& out_dir) {
        std::vector<std::string> written;
        try {
            for (const auto& [rel, bytes] : content) {
                const fs::path p = fs::path(out_dir) / rel;
                fs::create_directories(p.parent_path());
                std::ofstream f(p, std::ios::binary);
                if (!f) throw std::runtime_error("cannot open " + p.string() + " for writing");
                f << bytes;
                f.close();
                written.push_back(rel);
            }
        } catch (...) {
            // Remove whatever landed on disk; a failed run leaves no partial tree.
            for (const auto& rel : written) {
                std::error_code ec;
                fs::remove(fs::path(out_dir) / rel, ec);
            }
            throw;
        }
        return written;
    }
};

RunOutput run_stages_impl(const ExperimentConfig& config, const std::vector<Stage>& stages,
                          const std::string& out_dir, const std::string& manifest_override) {
    config.validate();
    require(!stages.empty(), "no stages requested");

    const auto grids = make_grids(config);
    const CircuitBuilder builder = [](double lam) {
        return build_ground_state_circuit(IsingSpec::for_lambda(lam));
    };
    RandomizationPlan plan = config.plan;
    plan.seed = derive_seed(config.master_seed, fnv1a("ensemble"));

    PendingFiles files;
    std::map<std::string, std::map<std::string, Curve>> curves;  // grid -> label -> curve

    auto emit_curve = [&](const std::string& grid, const Curve& c) {
        curves[grid][c.label] = c;
        files.add("curves/" + grid + "/" + c.label + ".csv", curve_to_csv(c));
    };

    // Exact reference values are cheap and most stages need them.
    for (const auto& g : grids) curves[g.name]["exact"] = exact_curve(g.points);
    if (has_stage(stages, Stage::Oracle))
        for (const auto& g : grids) emit_curve(g.name, curves[g.name]["exact"]);

    const bool need_noisy = has_stage(stages, Stage::Simulate) || has_stage(stages, Stage::Grec) ||
                            has_stage(stages, Stage::Baseline) || has_stage(stages, Stage::Zne);
    if (need_noisy) with_stage_context(Stage::Simulate, [&] {
        for (const auto& g : grids) {
            const std::uint64_t seed =
                derive_seed(config.master_seed, fnv1a("noisy:" + g.name));
            Curve c = simulate_curve(builder, config.noise, g.points, config.shots, seed, "noisy");
            if (has_stage(stages, Stage::Simulate))
                emit_curve(g.name, c);
            else
                curves[g.name]["noisy"] = c;
        }
    });

    std::vector<EnsembleMember> members;
    if (has_stage(stages, Stage::Ensemble) || has_stage(stages, Stage::Grec))
        with_stage_context(Stage::Ensemble, [&] {
            const Circuit structure = builder(grids[0].points.front());
            members = generate_ensemble(structure, plan);
            files.add("ensemble.json", ensemble_to_json(plan, members));
            for (const auto& g : grids) {
                for (const auto& m : members) {
                    const std::string label = "randomized_" + std::to_string(m.index);
                    auto realized = [&](double lam) { return realize_member(builder(lam), m, plan); };
                    const std::uint64_t seed =
                        derive_seed(config.master_seed, fnv1a(label + ":" + g.name));
                    emit_curve(g.name, simulate_curve(realized, config.noise, g.points,
                                                      config.shots, seed, label));
                }
            }
        });

    auto randomized_on = [&](const std::string& grid) {
        std::vector<Curve> out;
        for (const auto& m : members)
            out.push_back(curves[grid]["randomized_" + std::to_string(m.index)]);
        return out;
    };

    if (has_stage(stages, Stage::Grec)) with_stage_context(Stage::Grec, [&] {
        for (const auto& [train, val, tag] :
             std::vector<std::tuple<std::string, std::string, std::string>>{
                 {"t1", "v1", "grec_t1"}, {"t2", "v2", "grec_t2"}}) {
            GrecFit fit = grec_fit(randomized_on(train), curves[train]["exact"],
                                   /*box=*/false, config.weighted_fits);
            fit.val_rmse =
                rmse_between(grec_apply(fit, randomized_on(val)), curves[val]["exact"]);
            for (const auto& g : grids) {
                Curve mit = grec_apply(fit, randomized_on(g.name));
                mit.label = tag;
                emit_curve(g.name, mit);
            }
            files.add("fits/" + tag + ".json",
                      grec_fit_to_json(fit, tag, "trained on " + train + ", validated on " + val));
        }
    });

    if (has_stage(stages, Stage::Baseline)) with_stage_context(Stage::Baseline, [&] {
        for (const auto& [train, val, tag] :
             std::vector<std::tuple<std::string, std::string, std::string>>{
                 {"t1", "v1", "baseline_t1"}, {"t2", "v2", "baseline_t2"}}) {
            const BaselineFit fit =
                config.baseline_offset_only
                    ? offset_fit(curves[train]["noisy"], curves[train]["exact"])
                    : baseline_fit(curves[train]["noisy"], curves[train]["exact"],
                                   config.weighted_fits);
            const double val_rmse =
                rmse_between(baseline_apply(fit, curves[val]["noisy"]), curves[val]["exact"]);
            for (const auto& g : grids) {
                Curve mit = baseline_apply(fit, curves[g.name]["noisy"]);
                mit.label = tag;
                emit_curve(g.name, mit);
            }
            files.add("fits/" + tag + ".json", baseline_fit_to_json(fit, tag, val_rmse));
        }
    });

    if (has_stage(stages, Stage::Zne)) with_stage_context(Stage::Zne, [&] {
        // ZNE folds amplify only the per-gate channels; a trailing global
        // depolarizing channel would not scale, so it is applied afterwards.
        for (const auto& g : grids) {
            const std::uint64_t seed = derive_seed(config.master_seed, fnv1a("zne:" + g.name));
            Curve z = zne_run(builder, config.noise.model, config.zne.to_config(), g.points, seed);
            if (config.noise.global_depol_end > 0.0)
                for (auto& v : z.values)
                    v = (1.0 - config.noise.global_depol_end) * v;  // mean-Z of depolarized state
            z.label = "zne";
            emit_curve(g.name, z);
        }
    });

    if (has_stage(stages, Stage::Sweep)) with_stage_context(Stage::Sweep, [&] {
        SweepContext ctx;
        ctx.builder = builder;
        ctx.noise = config.noise.model;
        ctx.base_plan = plan;
        ctx.train_grid = grids[1].points;  // t1
        ctx.val_grid = grids[2].points;    // v1
        ctx.exact_train = curves["t1"]["exact"];
        ctx.exact_val = curves["v1"]["exact"];
        const SweepReport report =
            sweep_hyperparameters(config.sweep.nr_candidates, config.sweep.delta_candidates, ctx);
        files.add("sweep.json", sweep_to_json(report));
    });

    if (has_stage(stages, Stage::Stability)) with_stage_context(Stage::Stability, [&] {
        const StabilitySettings& st = config.stability;
        const double rho_sing = rho_for_real_singularity(st.pole);
        const double rho = st.rho > 0.0 ? st.rho : 1.0 + 0.75 * (rho_sing - 1.0);
        const double reach = 0.5 * (rho + 1.0 / rho);
        const double q = st.Q > 0.0 ? st.Q : 1.0 / (st.pole - reach);
        const auto f = [&](double x) { return 1.0 / (st.pole - x); };
        const StabilityReport report =
            stability_experiment(f, rho, st.degree, st.eps, q, st.C, st.probes,
                                 derive_seed(config.master_seed, fnv1a("stability")));
        files.add("stability.json", stability_to_json(report));
    });

    // RMSE summary across everything this run produced.
    RunOutput out;
    const std::vector<std::pair<std::string, std::string>> method_sources = {
        {"raw", "noisy"},           {"grec_t1", "grec_t1"},       {"grec_t2", "grec_t2"},
        {"baseline_t1", "baseline_t1"}, {"baseline_t2", "baseline_t2"}, {"zne", "zne"}};
    for (const auto& [method, label] : method_sources) {
        bool present = true;
        for (const auto& g : grids) present = present && curves[g.name].count(label) > 0;
        if (!present) continue;
        for (const auto& g : grids)
            out.rmse[method][g.name] = rmse_between(curves[g.name][label], curves[g.name]["exact"]);
    }
    if (!out.rmse.empty()) {
        json jr;
        for (const auto& [method, per_grid] : out.rmse)
            for (const auto& [grid, value] : per_grid) jr[method][grid] = value;
        files.add("rmse.json", jr.dump(2));
    }

    // Manifest goes last; replay copies the original text verbatim.
    if (manifest_override.empty()) {
        json jm;
        jm["tool"] = "greclab";
        jm["version"] = kToolVersion;
        jm["created_utc"] = utc_timestamp();
        json js = json::array();
        for (Stage s : stages) js.push_back(stage_name(s));
        jm["stages"] = js;
        jm["config"] = json::parse(config_to_json(config));
        jm["conventions"] = {
            {"sign", sign_convention_note()},
            {"zne_intercept", "least-squares linear model evaluated at scale 0"},
            {"zne_fold", "GateFold remainder gates chosen by seeded shuffle"},
        };
        if (!members.empty()) jm["ensemble"] = json::parse(ensemble_to_json(plan, members));
        json ja = json::array();
        for (const auto& [rel, bytes] : files.content) ja.push_back(rel);
        jm["artifacts"] = ja;
        files.add("manifest.json", jm.dump(2) + "\n");
    } else {
        files.add("manifest.json", manifest_override);
    }

    out.files = files.flush(out_dir);
    return out;
}

}  // namespace

RunOutput run_stages(const ExperimentConfig& config, const std::vector<Stage>& stages,
                     const std::string& out_dir) {
    return run_stages_impl(config, stages, out_dir, "");
}

RunOutput replay(const std::string& manifest_path, const std::string& out_dir) {
    std::ifstream f(manifest_path, std::ios::binary);
    if (!f) throw std::invalid_argument("cannot read manifest: " + manifest_path);
    std::stringstream buf;
    buf << f.rdbuf();
    const std::string text = buf.str();

    const json jm = json::parse(text);
    const ExperimentConfig config = config_from_json(jm.at("config").dump());
    std::vector<Stage> stages;
    for (const auto& s : jm.at("stages")) stages.push_back(stage_from_name(s.get<std::string>()));
    return run_stages_impl(config, stages, out_dir, text);
}

namespace {

struct Series {
    std::string label;
    std::string color;
    std::string marker;  // "line", "circle", "star", "triangle", "square", "cross"
};

std::string svg_marker(const std::string& kind, double x, double y, const std::string& color) {
    std::ostringstream s;
    if (kind == "circle") {
        s << "<circle cx='" << x << "' cy='" << y << "' r='3.5' fill='none' stroke='" << color
          << "'/>";
    } else if (kind == "triangle") {
        s << "<path d='M" << x << ' ' << (y - 4) << " L" << (x - 4) << ' ' << (y + 3) << " L"
          << (x + 4) << ' ' << (y + 3) << " Z' fill='" << color << "'/>";
    } else if (kind == "square") {
        s << "<rect x='" << (x - 3) << "' y='" << (y - 3) << "' width='6' height='6' fill='none' "
          << "stroke='" << color << "'/>";
    } else if (kind == "cross") {
        s << "<path d='M" << (x - 3.5) << ' ' << (y - 3.5) << " L" << (x + 3.5) << ' ' << (y + 3.5)
          << " M" << (x - 3.5) << ' ' << (y + 3.5) << " L" << (x + 3.5) << ' ' << (y - 3.5)
          << "' stroke='" << color << "'/>";
    } else {  // star
        s << "<path d='M" << x << ' ' << (y - 4.5);
        for (int k = 1; k < 10; ++k) {
            const double rad = (k % 2 == 0) ? 4.5 : 1.9;
            const double ang = -M_PI / 2.0 + k * M_PI / 5.0;
            s << " L" << (x + rad * std::cos(ang)) << ' ' << (y + rad * std::sin(ang));
        }
        s << " Z' fill='" << color << "'/>";
    }
    return s.str();
}

}  // namespace

std::string render_report_svg(const std::string& run_dir) {
    const std::vector<Series> series = {
        {"exact", "#000000", "line"},        {"noisy", "#1f77b4", "circle"},
        {"grec_t1", "#ff7f0e", "star"},      {"grec_t2", "#2ca02c", "triangle"},
        {"baseline_t1", "#bb7f4e", "square"}, {"baseline_t2", "#6aa84f", "square"},
        {"zne", "#9467bd", "cross"},
    };
    std::vector<std::pair<Series, Curve>> loaded;
    for (const auto& s : series) {
        const fs::path p = fs::path(run_dir) / "curves" / "lambda" / (s.label + ".csv");
        if (!fs::exists(p)) continue;
        std::ifstream f(p, std::ios::binary);
        std::stringstream buf;
        buf << f.rdbuf();
        loaded.emplace_back(s, curve_from_csv(buf.str()));
    }
    require(!loaded.empty(), "render_report_svg: no curves found under " + run_dir);

    const double w = 720, h = 480, ml = 64, mr = 160, mt = 24, mb = 48;
    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (const auto& [s, c] : loaded) {
        for (double x : c.lambdas) {
            xmin = std::min(xmin, x);
            xmax = std::max(xmax, x);
        }
        for (double y : c.values) {
            ymin = std::min(ymin, y);
            ymax = std::max(ymax, y);
        }
    }
    const double ypad = std::max(1e-6, 0.05 * (ymax - ymin));
    ymin -= ypad;
    ymax += ypad;
    auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * (w - ml - mr); };
    auto py = [&](double y) { return h - mb - (y - ymin) / (ymax - ymin) * (h - mt - mb); };

    std::ostringstream svg;
    svg << "<svg xmlns='http://www.w3.org/2000/svg' version='1.1' width='" << w << "' height='"
        << h << "' viewBox='0 0 " << w << ' ' << h << "'>\n";
    svg << "<rect width='" << w << "' height='" << h << "' fill='white'/>\n";
    svg << "<g font-family='sans-serif' font-size='12'>\n";
    // axes
    svg << "<line x1='" << ml << "' y1='" << (h - mb) << "' x2='" << (w - mr) << "' y2='"
        << (h - mb) << "' stroke='black'/>\n";
    svg << "<line x1='" << ml << "' y1='" << mt << "' x2='" << ml << "' y2='" << (h - mb)
        << "' stroke='black'/>\n";
    for (int i = 0; i <= 5; ++i) {
        const double x = xmin + (xmax - xmin) * i / 5.0;
        const double y = ymin + (ymax - ymin) * i / 5.0;
        char xb[32], yb[32];
        std::snprintf(xb, sizeof(xb), "%.2f", x);
        std::snprintf(yb, sizeof(yb), "%.3f", y);
        svg << "<line x1='" << px(x) << "' y1='" << (h - mb) << "' x2='" << px(x) << "' y2='"
            << (h - mb + 4) << "' stroke='black'/>"
            << "<text x='" << px(x) << "' y='" << (h - mb + 18) << "' text-anchor='middle'>" << xb
            << "</text>\n";
        svg << "<line x1='" << (ml - 4) << "' y1='" << py(y) << "' x2='" << ml << "' y2='" << py(y)
            << "' stroke='black'/>"
            << "<text x='" << (ml - 8) << "' y='" << (py(y) + 4) << "' text-anchor='end'>" << yb
            << "</text>\n";
    }
    svg << "<text x='" << (ml + (w - ml - mr) / 2) << "' y='" << (h - 10)
        << "' text-anchor='middle'>lambda</text>\n";
    svg << "<text x='16' y='" << (mt + (h - mt - mb) / 2)
        << "' text-anchor='middle' transform='rotate(-90 16 " << (mt + (h - mt - mb) / 2)
        << ")'>mean magnetization</text>\n";

    double legend_y = mt + 10;
    for (const auto& [s, c] : loaded) {
        if (s.marker == "line") {
            svg << "<polyline fill='none' stroke='" << s.color << "' stroke-width='1.5' points='";
            for (std::size_t i = 0; i < c.size(); ++i)
                svg << px(c.lambdas[i]) << ',' << py(c.values[i]) << ' ';
            svg << "'/>\n";
        } else {
            for (std::size_t i = 0; i < c.size(); ++i)
                svg << svg_marker(s.marker, px(c.lambdas[i]), py(c.values[i]), s.color) << '\n';
        }
        const double lx = w - mr + 14;
        if (s.marker == "line")
            svg << "<line x1='" << lx << "' y1='" << legend_y << "' x2='" << (lx + 18) << "' y2='"
                << legend_y << "' stroke='" << s.color << "' stroke-width='1.5'/>\n";
        else
            svg << svg_marker(s.marker, lx + 9, legend_y, s.color) << '\n';
        svg << "<text x='" << (lx + 24) << "' y='" << (legend_y + 4) << "'>" << s.label
            << "</text>\n";
        legend_y += 20;
    }
    svg << "</g>\n</svg>\n";
    return svg.str();
}

}  // namespace greclab
