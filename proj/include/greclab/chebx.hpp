#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace greclab {

// Chebyshev least-squares fitting on [-1, 1] and stable extrapolation past
// the right endpoint, with the a-priori error bound that controls how far the
// extrapolation can be trusted.

struct ChebyshevExtrapolant {
    int degree = 0;               // truncation degree N
    std::vector<double> coeffs;   // c_0 .. c_N
    int sample_count = 0;         // M
};

// Least squares in the Chebyshev basis over samples with x in [-1, 1].
// Strict mode additionally enforces M >= 4 N^2 (the sampling density the
// stability theory assumes); relaxed mode allows any M >= N + 1.
// Normal equations with column scaling; guarded to N <= 32.
ChebyshevExtrapolant cheb_fit(const std::vector<double>& xs, const std::vector<double>& ys,
                              int degree, bool strict = true);

// Clenshaw evaluation of sum c_n T_n(lambda); valid outside [-1, 1].
double cheb_eval(const ChebyshevExtrapolant& ext, double lambda);

// T_n(x) by the three-term recurrence; used as the independent check of the
// Clenshaw path and by the fit itself.
double chebyshev_t(int n, double x);

struct ExtrapolationRange {
    double lo = 1.0;        // inclusive
    double hi = 1.0;        // exclusive
};

// The stable extrapolation window [1, (rho + 1/rho)/2) for data analytic in
// the Bernstein ellipse E_rho.
ExtrapolationRange extrapolation_range(double rho);

struct BoundInputs {
    double rho = 2.0;      // Bernstein ellipse parameter, > 1
    double Q = 1.0;        // analytic bound on the error functions inside E_rho
    double eps = 0.0;      // precision of the classical data, >= 0
    int n_terms = 1;       // truncation degree entering the remainder estimate
    double eta_max = 1.0;  // largest |eta_r| of the mitigation weights, in (0, 1]
    double C = 1.0;        // bound prefactor constant

    void validate() const;
};

struct ErrorBound {
    double r = 0.0;        // (lambda + sqrt(lambda^2-1)) / rho
    double alpha = 0.0;    // -log r / log rho
    double bound = 0.0;    // C * Q/(1-r) * ((eps + eps_hat)/Q)^alpha; +inf at r >= 1
    double eps_bar = 0.0;  // 2 Q rho^-N / (rho - 1) * N   (|eta_r| < 1 form)
    double eps_hat = 0.0;  // eps_bar / eta_max
};

// Remainder budget 2 Q rho^-N / (rho - 1) for one truncated series.
double remainder_bound(double Q, double rho, int n_terms);

ErrorBound error_bound(double lambda, const BoundInputs& inputs);

struct StabilityProbe {
    double lambda = 0.0;
    double r = 0.0;
    double alpha = 0.0;
    double bound = 0.0;
    double observed = 0.0;
    bool within_bound = true;
};

struct StabilityReport {
    double rho = 0.0;
    int degree = 0;
    int sample_count = 0;
    double eps = 0.0;
    std::vector<StabilityProbe> probes;
};

// Samples f on 4 N^2 equispaced points of [-1, 1] with additive uniform noise
// of magnitude eps_noise (seeded), fits degree N, extrapolates to each probe
// and compares the observed error against error_bound with the configured
// prefactor C.
StabilityReport stability_experiment(const std::function<double(double)>& f, double rho_true,
                                     int degree, double eps_noise, double Q, double C,
                                     const std::vector<double>& probes,
                                     std::uint64_t seed = 0);

std::string stability_to_json(const StabilityReport& report);

// Ellipse parameter of the largest Bernstein ellipse avoiding a real
// singularity at |x| = s > 1.
double rho_for_real_singularity(double s);

}  // namespace greclab
