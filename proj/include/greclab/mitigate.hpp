#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "greclab/qsim.hpp"
#include "greclab/randomize.hpp"

namespace greclab {

// An observable sampled on a lambda grid. stderrs is empty (exact values) or
// matches values in length.
struct Curve {
    std::vector<double> lambdas;
    std::vector<double> values;
    std::vector<double> stderrs;
    std::string label;

    std::size_t size() const { return lambdas.size(); }
    void validate() const;  // strictly increasing grid, finite values, equal lengths
};

double rmse_between(const Curve& a, const Curve& b);  // shared grid required

// CSV round-trip, header "lambda,value,stderr,label"; empty stderr field when
// none is recorded. Doubles are printed with 17 significant digits so that a
// replayed run is byte-identical.
std::string curve_to_csv(const Curve& curve);
Curve curve_from_csv(const std::string& text);

// Weights of the constrained fit sum_r eta_r A_r + eta0 ~ exact.
struct GrecFit {
    double eta0 = 0.0;
    std::vector<double> etas;
    double constraint_residual = 0.0;  // |sum eta_r - 1|
    double train_rmse = 0.0;
    double val_rmse = std::numeric_limits<double>::quiet_NaN();  // filled by the caller
    int box_violations = 0;  // count of |eta_r| >= 1 in the unboxed solution
};

// Minimizes sum_T (sum_r eta_r A_r + eta0 - exact)^2 subject to sum eta_r = 1,
// returning the minimum-norm (eta0, etas) among exact minimizers. When box is
// set, weights with |eta_r| > 1 are clamped to the box in one active-set pass
// and the remaining weights are re-solved. When weighted is set, residuals are
// scaled by the reciprocal per-point standard errors recorded on the curves
// (off by default; train_rmse stays unweighted either way).
GrecFit grec_fit(const std::vector<Curve>& randomized_train, const Curve& exact_train,
                 bool box = false, bool weighted = false);

// Applies fit weights pointwise on the full grid.
Curve grec_apply(const GrecFit& fit, const std::vector<Curve>& randomized_full);

struct BaselineFit {
    double eta0 = 0.0;
    double eta1 = 1.0;
    double train_rmse = 0.0;
};

// Ordinary least squares for exact ~ eta1 * noisy + eta0. Throws when the
// noisy curve is constant (singular design). weighted as in grec_fit.
BaselineFit baseline_fit(const Curve& noisy_train, const Curve& exact_train,
                         bool weighted = false);

// Degenerate variant with eta1 pinned to 1: eta0 = mean(exact - noisy).
BaselineFit offset_fit(const Curve& noisy_train, const Curve& exact_train);

Curve baseline_apply(const BaselineFit& fit, const Curve& noisy_full);

enum class FoldMode { GlobalFold, GateFold };

struct ZneConfig {
    std::vector<double> scale_factors;  // all >= 1
    FoldMode fold_mode = FoldMode::GateFold;

    // Nine factors equally spaced over [1.0, 1.9] (spacing 0.1125).
    static ZneConfig default_config();
    void validate() const;
};

struct FoldResult {
    Circuit circuit;
    double achieved_scale = 1.0;
};

// Noise scaling by unitary folding. GateFold replaces d = round(k(s-1)/2)
// uniformly chosen gates G by G G^+ G (seeded choice; gates may fold more than
// once when d > k). GlobalFold requires an odd integer scale and repeats the
// whole circuit U (U^+ U)^m. The noiseless unitary is preserved either way.
FoldResult fold_circuit(const Circuit& circuit, double scale, FoldMode mode,
                        std::uint64_t seed = 0);

using CircuitBuilder = std::function<Circuit(double lambda)>;

// For each lambda: simulate the folded circuit at every scale factor, fit
// value = a + b * s by least squares, and report the s -> 0 intercept a.
// (Intercept convention: the linear model is evaluated at scale zero; this is
// recorded in run manifests.)
Curve zne_run(const CircuitBuilder& builder, const NoiseModel& noise, const ZneConfig& config,
              const std::vector<double>& grid, std::uint64_t seed = 0);

// Least-squares intercept at s = 0 for value = a + b * s; exposed for tests.
double linear_intercept(const std::vector<double>& scales, const std::vector<double>& values);

// Fit report JSON used by the CLI and the pipeline.
std::string grec_fit_to_json(const GrecFit& fit, const std::string& method,
                             const std::string& config_note);
std::string baseline_fit_to_json(const BaselineFit& fit, const std::string& method,
                                 double val_rmse);

struct SweepEntry {
    int n_r = 0;
    double delta = 0.0;
    double train_rmse = 0.0;
    double val_rmse = 0.0;
};

struct SweepReport {
    std::vector<SweepEntry> table;
    int best_n_r = 0;
    double best_delta = 0.0;
};

// Everything a hyperparameter sweep needs: how to build and simulate the
// randomized curves and where to fit/validate.
struct SweepContext {
    CircuitBuilder builder;
    NoiseModel noise;
    RandomizationPlan base_plan;  // strategy/range/seed; n_r and delta come from candidates
    std::vector<double> train_grid;
    std::vector<double> val_grid;
    Curve exact_train;
    Curve exact_val;
};

// Fits on the training grid for every (n_r, delta) candidate pair and scores
// RMSE on the validation grid. Ties break toward smaller n_r, then smaller
// delta.
SweepReport sweep_hyperparameters(const std::vector<int>& nr_candidates,
                                  const std::vector<double>& delta_candidates,
                                  const SweepContext& context);

std::string sweep_to_json(const SweepReport& report);

}  // namespace greclab
