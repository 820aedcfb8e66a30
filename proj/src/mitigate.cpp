#include "greclab/mitigate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <Eigen/Dense>
#include <Eigen/QR>
#include <Eigen/SVD>

#include "json.hpp"

#include "greclab/rng.hpp"

namespace greclab {

namespace {

using json = nlohmann::json;

void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

void require_shared_grid(const Curve& a, const Curve& b, const char* what) {
    require(a.size() == b.size(), std::string(what) + ": grid sizes differ");
    for (std::size_t i = 0; i < a.size(); ++i)
        require(a.lambdas[i] == b.lambdas[i], std::string(what) + ": grids differ");
}

// Orthonormal basis of the hyperplane {u : sum of the first n_r entries = 0}
// in R^{n_r+1}, via the Householder QR of the constraint vector.
Eigen::MatrixXd constraint_null_space(int n_r) {
    Eigen::VectorXd c = Eigen::VectorXd::Zero(n_r + 1);
    c.head(n_r).setOnes();
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(c);
    Eigen::MatrixXd q = qr.householderQ();
    return q.rightCols(n_r);  // columns orthogonal to c
}

// Minimum-norm solution of min ||X u - y|| subject to c^T u = budget where
// c = (1,...,1,0). Returns u of size n_r + 1 (etas then eta0).
Eigen::VectorXd solve_constrained(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                  double budget = 1.0) {
    const int n_r = static_cast<int>(x.cols()) - 1;
    Eigen::VectorXd u0 = Eigen::VectorXd::Zero(n_r + 1);
    u0.head(n_r).setConstant(budget / n_r);  // minimum-norm point on the constraint
    const Eigen::MatrixXd z = constraint_null_space(n_r);
    const Eigen::MatrixXd xz = x * z;
    const Eigen::VectorXd rhs = y - x * u0;
    // SVD solve yields the minimum-norm t, and u0 is orthogonal to range(z),
    // so u = u0 + z t is the minimum-norm constrained minimizer.
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(xz, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd t = svd.solve(rhs);
    return u0 + z * t;
}

}  // namespace

void Curve::validate() const {
    require(lambdas.size() == values.size(), "curve: lambdas/values length mismatch");
    require(stderrs.empty() || stderrs.size() == values.size(),
            "curve: stderr length mismatch");
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
        require(std::isfinite(lambdas[i]) && std::isfinite(values[i]),
                "curve: non-finite entry");
        if (i > 0) require(lambdas[i] > lambdas[i - 1], "curve: grid not strictly increasing");
    }
}

double rmse_between(const Curve& a, const Curve& b) {
    require_shared_grid(a, b, "rmse_between");
    require(a.size() > 0, "rmse_between: empty curves");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a.values[i] - b.values[i];
        acc += d * d;
    }
    return std::sqrt(acc / static_cast<double>(a.size()));
}

std::string curve_to_csv(const Curve& curve) {
    std::ostringstream out;
    out << "lambda,value,stderr,label\n";
    for (std::size_t i = 0; i < curve.size(); ++i) {
        out << format_double(curve.lambdas[i]) << ',' << format_double(curve.values[i]) << ',';
        if (!curve.stderrs.empty()) out << format_double(curve.stderrs[i]);
        out << ',' << curve.label << '\n';
    }
    return out.str();
}

Curve curve_from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    require(static_cast<bool>(std::getline(in, line)), "curve CSV: empty file");
    require(line == "lambda,value,stderr,label", "curve CSV: unexpected header");
    Curve c;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string lam, val, err, label;
        std::getline(row, lam, ',');
        std::getline(row, val, ',');
        std::getline(row, err, ',');
        std::getline(row, label);
        c.lambdas.push_back(std::stod(lam));
        c.values.push_back(std::stod(val));
        if (!err.empty()) c.stderrs.push_back(std::stod(err));
        c.label = label;
    }
    require(c.stderrs.empty() || c.stderrs.size() == c.values.size(),
            "curve CSV: ragged stderr column");
    c.validate();
    return c;
}

// Reciprocal-stderr row weights; falls back to the RMS stderr of the inputs
// at each grid point when the reference curve carries none.
Eigen::VectorXd fit_weights(const std::vector<const Curve*>& inputs, const Curve& reference) {
    const std::size_t m = reference.size();
    Eigen::VectorXd w(static_cast<Eigen::Index>(m));
    for (std::size_t i = 0; i < m; ++i) {
        double var = 0.0;
        int sources = 0;
        if (!reference.stderrs.empty()) {
            var += reference.stderrs[i] * reference.stderrs[i];
            ++sources;
        }
        for (const Curve* c : inputs)
            if (!c->stderrs.empty()) {
                var += c->stderrs[i] * c->stderrs[i];
                ++sources;
            }
        require(sources > 0, "weighted fit requested but no curve carries standard errors");
        const double sigma = std::sqrt(var / sources);
        require(sigma > 0.0, "weighted fit requires positive standard errors");
        w(static_cast<Eigen::Index>(i)) = 1.0 / sigma;
    }
    return w;
}

GrecFit grec_fit(const std::vector<Curve>& randomized_train, const Curve& exact_train,
                 bool box, bool weighted) {
    require(!randomized_train.empty(), "grec_fit: empty ensemble");
    exact_train.validate();
    const std::size_t m = exact_train.size();
    require(m >= 2, "grec_fit: training grid needs at least 2 points");
    const int n_r = static_cast<int>(randomized_train.size());
    for (const Curve& c : randomized_train) {
        c.validate();
        require_shared_grid(c, exact_train, "grec_fit");
    }

    Eigen::MatrixXd x(m, n_r + 1);
    Eigen::VectorXd y(m);
    for (std::size_t i = 0; i < m; ++i) {
        for (int r = 0; r < n_r; ++r) x(i, r) = randomized_train[static_cast<std::size_t>(r)].values[i];
        x(i, n_r) = 1.0;
        y(i) = exact_train.values[i];
    }
    Eigen::MatrixXd x_fit = x;
    Eigen::VectorXd y_fit = y;
    if (weighted) {
        std::vector<const Curve*> inputs;
        for (const Curve& c : randomized_train) inputs.push_back(&c);
        const Eigen::VectorXd w = fit_weights(inputs, exact_train);
        x_fit = w.asDiagonal() * x_fit;
        y_fit = w.asDiagonal() * y_fit;
    }

    Eigen::VectorXd u = solve_constrained(x_fit, y_fit);

    GrecFit fit;
    fit.box_violations = 0;
    for (int r = 0; r < n_r; ++r)
        if (std::abs(u(r)) >= 1.0 + 1e-12) ++fit.box_violations;

    if (box && fit.box_violations > 0) {
        // Active-set clamp-and-resolve: pin the worst violator to the box
        // boundary, redistribute the remaining budget, repeat. A weight is
        // clamped at most once and never released.
        std::vector<int> clamped(static_cast<std::size_t>(n_r), 0);
        for (;;) {
            int worst = -1;
            double worst_abs = 1.0 + 1e-12;
            for (int r = 0; r < n_r; ++r)
                if (clamped[static_cast<std::size_t>(r)] == 0 && std::abs(u(r)) > worst_abs) {
                    worst = r;
                    worst_abs = std::abs(u(r));
                }
            if (worst < 0) break;
            clamped[static_cast<std::size_t>(worst)] = u(worst) > 0 ? 1 : -1;

            std::vector<int> free_idx;
            double budget = 1.0;
            Eigen::VectorXd y_adj = y_fit;
            for (int r = 0; r < n_r; ++r) {
                if (clamped[static_cast<std::size_t>(r)] != 0) {
                    budget -= clamped[static_cast<std::size_t>(r)];
                    y_adj -= static_cast<double>(clamped[static_cast<std::size_t>(r)]) * x_fit.col(r);
                } else {
                    free_idx.push_back(r);
                }
            }
            Eigen::VectorXd u_next = Eigen::VectorXd::Zero(n_r + 1);
            if (free_idx.empty()) {
                require(std::abs(budget) < 1e-9,
                        "grec_fit: box constraints are incompatible with the sum constraint");
                u_next(n_r) = x_fit.col(n_r).dot(y_adj) / x_fit.col(n_r).squaredNorm();
            } else {
                const int n_free = static_cast<int>(free_idx.size());
                Eigen::MatrixXd x_free(m, n_free + 1);
                for (int j = 0; j < n_free; ++j)
                    x_free.col(j) = x_fit.col(free_idx[static_cast<std::size_t>(j)]);
                x_free.col(n_free) = x_fit.col(n_r);
                const Eigen::VectorXd t = solve_constrained(x_free, y_adj, budget);
                for (int j = 0; j < n_free; ++j)
                    u_next(free_idx[static_cast<std::size_t>(j)]) = t(j);
                u_next(n_r) = t(n_free);
            }
            for (int r = 0; r < n_r; ++r)
                if (clamped[static_cast<std::size_t>(r)] != 0)
                    u_next(r) = clamped[static_cast<std::size_t>(r)];
            u = u_next;
        }
    }

    fit.etas.assign(u.data(), u.data() + n_r);
    fit.eta0 = u(n_r);
    fit.constraint_residual = std::abs(std::accumulate(fit.etas.begin(), fit.etas.end(), 0.0) - 1.0);
    fit.train_rmse = std::sqrt((x * u - y).squaredNorm() / static_cast<double>(m));
    return fit;
}

Curve grec_apply(const GrecFit& fit, const std::vector<Curve>& randomized_full) {
    require(!randomized_full.empty(), "grec_apply: empty ensemble");
    require(fit.etas.size() == randomized_full.size(), "grec_apply: fit arity mismatch");
    for (std::size_t r = 1; r < randomized_full.size(); ++r)
        require_shared_grid(randomized_full[r], randomized_full[0], "grec_apply");

    Curve out;
    out.lambdas = randomized_full[0].lambdas;
    out.label = "mitigated";
    out.values.resize(out.lambdas.size());
    for (std::size_t i = 0; i < out.values.size(); ++i) {
        double v = fit.eta0;
        for (std::size_t r = 0; r < randomized_full.size(); ++r)
            v += fit.etas[r] * randomized_full[r].values[i];
        out.values[i] = v;
    }
    return out;
}

BaselineFit baseline_fit(const Curve& noisy_train, const Curve& exact_train, bool weighted) {
    noisy_train.validate();
    exact_train.validate();
    require_shared_grid(noisy_train, exact_train, "baseline_fit");
    const std::size_t m = noisy_train.size();
    require(m >= 2, "baseline_fit: training grid needs at least 2 points");

    Eigen::VectorXd w = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(m));
    if (weighted) w = fit_weights({&noisy_train}, exact_train);
    const Eigen::VectorXd w2 = w.array().square();

    const double sw = w2.sum();
    double mean_x = 0.0, mean_y = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        mean_x += w2(static_cast<Eigen::Index>(i)) * noisy_train.values[i];
        mean_y += w2(static_cast<Eigen::Index>(i)) * exact_train.values[i];
    }
    mean_x /= sw;
    mean_y /= sw;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double dx = noisy_train.values[i] - mean_x;
        sxx += w2(static_cast<Eigen::Index>(i)) * dx * dx;
        sxy += w2(static_cast<Eigen::Index>(i)) * dx * (exact_train.values[i] - mean_y);
    }
    require(sxx > 1e-24, "baseline_fit: noisy curve is constant (singular design)");

    BaselineFit fit;
    fit.eta1 = sxy / sxx;
    fit.eta0 = mean_y - fit.eta1 * mean_x;
    double acc = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double d = fit.eta1 * noisy_train.values[i] + fit.eta0 - exact_train.values[i];
        acc += d * d;
    }
    fit.train_rmse = std::sqrt(acc / static_cast<double>(m));
    return fit;
}

BaselineFit offset_fit(const Curve& noisy_train, const Curve& exact_train) {
    noisy_train.validate();
    exact_train.validate();
    require_shared_grid(noisy_train, exact_train, "offset_fit");
    const std::size_t m = noisy_train.size();
    require(m >= 1, "offset_fit: empty training grid");

    BaselineFit fit;
    fit.eta1 = 1.0;
    double acc = 0.0;
    for (std::size_t i = 0; i < m; ++i) acc += exact_train.values[i] - noisy_train.values[i];
    fit.eta0 = acc / static_cast<double>(m);
    acc = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double d = noisy_train.values[i] + fit.eta0 - exact_train.values[i];
        acc += d * d;
    }
    fit.train_rmse = std::sqrt(acc / static_cast<double>(m));
    return fit;
}

Curve baseline_apply(const BaselineFit& fit, const Curve& noisy_full) {
    Curve out;
    out.lambdas = noisy_full.lambdas;
    out.label = "mitigated";
    out.values.resize(noisy_full.values.size());
    for (std::size_t i = 0; i < out.values.size(); ++i)
        out.values[i] = fit.eta1 * noisy_full.values[i] + fit.eta0;
    return out;
}

ZneConfig ZneConfig::default_config() {
    ZneConfig c;
    c.scale_factors.resize(9);
    for (int i = 0; i < 9; ++i) c.scale_factors[static_cast<std::size_t>(i)] = 1.0 + 0.1125 * i;
    c.fold_mode = FoldMode::GateFold;
    return c;
}

void ZneConfig::validate() const {
    require(!scale_factors.empty(), "zne: no scale factors");
    for (double s : scale_factors) require(s >= 1.0, "zne: scale factor below 1");
}

FoldResult fold_circuit(const Circuit& circuit, double scale, FoldMode mode,
                        std::uint64_t seed) {
    circuit.validate();
    require(scale >= 1.0, "fold_circuit: scale must be >= 1");
    const std::size_t k = circuit.gates.size();
    FoldResult res{circuit, 1.0};
    if (k == 0) return res;

    if (mode == FoldMode::GlobalFold) {
        const double reps = (scale - 1.0) / 2.0;
        const auto m = static_cast<long long>(std::llround(reps));
        require(std::abs(reps - static_cast<double>(m)) < 1e-9 && m >= 0,
                "fold_circuit: GlobalFold needs an odd integer scale");
        res.circuit.gates.clear();
        res.circuit.gates.insert(res.circuit.gates.end(), circuit.gates.begin(),
                                 circuit.gates.end());
        for (long long rep = 0; rep < m; ++rep) {
            for (auto it = circuit.gates.rbegin(); it != circuit.gates.rend(); ++it)
                res.circuit.gates.push_back(it->adjoint());
            res.circuit.gates.insert(res.circuit.gates.end(), circuit.gates.begin(),
                                     circuit.gates.end());
        }
        res.achieved_scale = static_cast<double>(2 * m + 1);
        return res;
    }

    // GateFold: d fold pairs spread over the circuit, remainder chosen at
    // random without replacement.
    const auto d = static_cast<std::size_t>(std::llround(
        static_cast<double>(k) * (scale - 1.0) / 2.0));
    const std::size_t full_passes = d / k;
    const std::size_t remainder = d % k;

    std::vector<std::size_t> extra(k, full_passes);
    if (remainder > 0) {
        std::vector<std::size_t> idx(k);
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        Xoshiro256pp rng(seed);
        for (std::size_t i = 0; i < remainder; ++i) {
            const std::size_t j = i + static_cast<std::size_t>(rng.below(k - i));
            std::swap(idx[i], idx[j]);
        }
        for (std::size_t i = 0; i < remainder; ++i) ++extra[idx[i]];
    }

    res.circuit.gates.clear();
    for (std::size_t g = 0; g < k; ++g) {
        res.circuit.gates.push_back(circuit.gates[g]);
        for (std::size_t pair = 0; pair < extra[g]; ++pair) {
            res.circuit.gates.push_back(circuit.gates[g].adjoint());
            res.circuit.gates.push_back(circuit.gates[g]);
        }
    }
    res.achieved_scale = static_cast<double>(k + 2 * d) / static_cast<double>(k);
    return res;
}

double linear_intercept(const std::vector<double>& scales, const std::vector<double>& values) {
    require(scales.size() == values.size() && !scales.empty(), "linear_intercept: bad input");
    const std::size_t m = scales.size();
    if (m == 1) return values[0];
    const double mean_s = std::accumulate(scales.begin(), scales.end(), 0.0) / m;
    const double mean_v = std::accumulate(values.begin(), values.end(), 0.0) / m;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double ds = scales[i] - mean_s;
        sxx += ds * ds;
        sxy += ds * (values[i] - mean_v);
    }
    if (sxx == 0.0) return mean_v;  // all scales equal; the intercept is the level
    const double slope = sxy / sxx;
    return mean_v - slope * mean_s;
}

Curve zne_run(const CircuitBuilder& builder, const NoiseModel& noise, const ZneConfig& config,
              const std::vector<double>& grid, std::uint64_t seed) {
    config.validate();
    Curve out;
    out.label = "zne";
    out.lambdas = grid;
    out.values.resize(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const Circuit base = builder(grid[i]);
        const DensityMatrix rho0 = DensityMatrix::zero_state(base.width);
        std::vector<double> values(config.scale_factors.size());
        for (std::size_t j = 0; j < config.scale_factors.size(); ++j) {
            const std::uint64_t fold_seed = derive_seed(seed, i * 1000 + j);
            const FoldResult folded =
                fold_circuit(base, config.scale_factors[j], config.fold_mode, fold_seed);
            values[j] = expect_mean_z(apply_circuit(rho0, folded.circuit, noise));
        }
        out.values[i] = linear_intercept(config.scale_factors, values);
    }
    out.validate();
    return out;
}

std::string grec_fit_to_json(const GrecFit& fit, const std::string& method,
                             const std::string& config_note) {
    json j;
    j["method"] = method;
    j["eta0"] = fit.eta0;
    j["etas"] = fit.etas;
    j["train_rmse"] = fit.train_rmse;
    if (std::isfinite(fit.val_rmse)) j["val_rmse"] = fit.val_rmse;
    j["constraint_residual"] = fit.constraint_residual;
    j["box_violations"] = fit.box_violations;
    j["config"] = config_note;
    return j.dump(2);
}

std::string baseline_fit_to_json(const BaselineFit& fit, const std::string& method,
                                 double val_rmse) {
    json j;
    j["method"] = method;
    j["eta0"] = fit.eta0;
    j["etas"] = {fit.eta1};
    j["train_rmse"] = fit.train_rmse;
    if (std::isfinite(val_rmse)) j["val_rmse"] = val_rmse;
    j["constraint_residual"] = 0.0;
    j["box_violations"] = 0;
    j["config"] = "affine baseline";
    return j.dump(2);
}

namespace {

Curve simulate_on_grid(const CircuitBuilder& builder, const NoiseModel& noise,
                       const std::vector<double>& grid, const std::string& label) {
    Curve c;
    c.label = label;
    c.lambdas = grid;
    c.values.resize(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const Circuit circ = builder(grid[i]);
        c.values[i] = expect_mean_z(apply_circuit(DensityMatrix::zero_state(circ.width), circ, noise));
    }
    return c;
}

}  // namespace

SweepReport sweep_hyperparameters(const std::vector<int>& nr_candidates,
                                  const std::vector<double>& delta_candidates,
                                  const SweepContext& context) {
    require(!nr_candidates.empty() && !delta_candidates.empty(),
            "sweep: empty candidate lists");
    require(!context.train_grid.empty() && !context.val_grid.empty(),
            "sweep: empty train or validation grid");
    for (double lt : context.train_grid)
        for (double lv : context.val_grid)
            require(lt != lv, "sweep: train and validation grids overlap");

    const Circuit structure = context.builder(context.train_grid.front());

    SweepReport report;
    // Near-equal validation errors count as ties and resolve toward the
    // smaller n_r, then the smaller delta.
    const auto better = [](double rmse, int n_r, double delta, double best_rmse, int best_n_r,
                           double best_delta) {
        const double tie = 1e-9 * std::max({1.0, rmse, best_rmse});
        if (rmse < best_rmse - tie) return true;
        if (rmse > best_rmse + tie) return false;
        if (n_r != best_n_r) return n_r < best_n_r;
        return delta < best_delta;
    };
    double best = std::numeric_limits<double>::infinity();
    for (int n_r : nr_candidates) {
        for (double delta : delta_candidates) {
            RandomizationPlan plan = context.base_plan;
            plan.n_r = n_r;
            plan.delta = delta;
            const auto members = generate_ensemble(structure, plan);

            std::vector<Curve> train_curves, val_curves;
            for (const auto& m : members) {
                auto realized = [&](double lam) {
                    return realize_member(context.builder(lam), m, plan);
                };
                train_curves.push_back(simulate_on_grid(realized, context.noise,
                                                        context.train_grid, "randomized"));
                val_curves.push_back(
                    simulate_on_grid(realized, context.noise, context.val_grid, "randomized"));
            }
            GrecFit fit = grec_fit(train_curves, context.exact_train);
            const Curve val_mitigated = grec_apply(fit, val_curves);
            const double val_rmse = rmse_between(val_mitigated, context.exact_val);
            report.table.push_back({n_r, delta, fit.train_rmse, val_rmse});
            if (report.table.size() == 1 ||
                better(val_rmse, n_r, delta, best, report.best_n_r, report.best_delta)) {
                best = val_rmse;
                report.best_n_r = n_r;
                report.best_delta = delta;
            }
        }
    }
    return report;
}

std::string sweep_to_json(const SweepReport& report) {
    json j;
    j["table"] = json::array();
    for (const auto& e : report.table)
        j["table"].push_back({{"n_r", e.n_r},
                              {"delta", e.delta},
                              {"train_rmse", e.train_rmse},
                              {"val_rmse", e.val_rmse}});
    j["best"] = {{"n_r", report.best_n_r}, {"delta", report.best_delta}};
    return j.dump(2);
}

}  // namespace greclab
