#include "greclab/chebx.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Dense>

#include "json.hpp"

#include "greclab/rng.hpp"

namespace greclab {

namespace {

using json = nlohmann::json;

void require(bool cond, const char* msg) {
    if (!cond) throw std::invalid_argument(msg);
}

}  // namespace

double chebyshev_t(int n, double x) {
    require(n >= 0, "chebyshev_t: negative order");
    if (n == 0) return 1.0;
    if (n == 1) return x;
    double tm2 = 1.0, tm1 = x, t = x;
    for (int k = 2; k <= n; ++k) {
        t = 2.0 * x * tm1 - tm2;
        tm2 = tm1;
        tm1 = t;
    }
    return t;
}

ChebyshevExtrapolant cheb_fit(const std::vector<double>& xs, const std::vector<double>& ys,
                              int degree, bool strict) {
    require(degree >= 0 && degree <= 32, "cheb_fit: degree must be in [0, 32]");
    require(xs.size() == ys.size(), "cheb_fit: xs/ys length mismatch");
    const int m = static_cast<int>(xs.size());
    require(m >= degree + 1, "cheb_fit: underdetermined system");
    if (strict) {
        const int needed = std::max(degree + 1, 4 * degree * degree);
        require(m >= needed, "cheb_fit: strict mode needs at least max(N+1, 4N^2) samples");
    }
    for (double x : xs)
        require(x >= -1.0 - 1e-12 && x <= 1.0 + 1e-12, "cheb_fit: sample outside [-1, 1]");

    Eigen::MatrixXd phi(m, degree + 1);
    for (int i = 0; i < m; ++i) {
        // Fill the row by the recurrence rather than per-entry powers.
        phi(i, 0) = 1.0;
        if (degree >= 1) phi(i, 1) = xs[static_cast<std::size_t>(i)];
        for (int n = 2; n <= degree; ++n)
            phi(i, n) = 2.0 * xs[static_cast<std::size_t>(i)] * phi(i, n - 1) - phi(i, n - 2);
    }
    Eigen::VectorXd y(m);
    for (int i = 0; i < m; ++i) y(i) = ys[static_cast<std::size_t>(i)];

    // Normal equations with column scaling to tame the conditioning.
    Eigen::MatrixXd a = phi.transpose() * phi;
    Eigen::VectorXd b = phi.transpose() * y;
    Eigen::VectorXd scale(degree + 1);
    for (int j = 0; j <= degree; ++j) scale(j) = 1.0 / std::sqrt(std::max(a(j, j), 1e-300));
    Eigen::MatrixXd a_s = scale.asDiagonal() * a * scale.asDiagonal();
    Eigen::VectorXd b_s = scale.asDiagonal() * b;
    Eigen::VectorXd c_s = a_s.ldlt().solve(b_s);
    Eigen::VectorXd c = scale.asDiagonal() * c_s;

    ChebyshevExtrapolant ext;
    ext.degree = degree;
    ext.sample_count = m;
    ext.coeffs.assign(c.data(), c.data() + degree + 1);
    return ext;
}

double cheb_eval(const ChebyshevExtrapolant& ext, double lambda) {
    require(std::isfinite(lambda), "cheb_eval: lambda must be finite");
    const auto& c = ext.coeffs;
    require(!c.empty(), "cheb_eval: empty extrapolant");
    double b1 = 0.0, b2 = 0.0;
    for (int n = static_cast<int>(c.size()) - 1; n >= 1; --n) {
        const double b0 = c[static_cast<std::size_t>(n)] + 2.0 * lambda * b1 - b2;
        b2 = b1;
        b1 = b0;
    }
    return c[0] + lambda * b1 - b2;
}

ExtrapolationRange extrapolation_range(double rho) {
    require(rho > 1.0, "extrapolation_range: rho must exceed 1");
    return {1.0, 0.5 * (rho + 1.0 / rho)};
}

void BoundInputs::validate() const {
    require(rho > 1.0, "bound inputs: rho must exceed 1");
    require(Q > 0.0, "bound inputs: Q must be positive");
    require(eps >= 0.0, "bound inputs: eps must be >= 0");
    require(eta_max > 0.0 && eta_max <= 1.0, "bound inputs: eta_max must lie in (0, 1]");
    require(n_terms >= 1, "bound inputs: n_terms must be >= 1");
    require(C > 0.0, "bound inputs: C must be positive");
}

double remainder_bound(double Q, double rho, int n_terms) {
    require(rho > 1.0, "remainder_bound: rho must exceed 1");
    return 2.0 * Q * std::pow(rho, -n_terms) / (rho - 1.0);
}

ErrorBound error_bound(double lambda, const BoundInputs& inputs) {
    inputs.validate();
    require(lambda >= 1.0, "error_bound: lambda must be >= 1");

    ErrorBound out;
    out.r = (lambda + std::sqrt(lambda * lambda - 1.0)) / inputs.rho;
    out.eps_bar = remainder_bound(inputs.Q, inputs.rho, inputs.n_terms) * inputs.n_terms;
    out.eps_hat = out.eps_bar / inputs.eta_max;
    if (out.r >= 1.0) {
        // At or past the right end of the stable window the prefactor diverges.
        out.alpha = 0.0;
        out.bound = std::numeric_limits<double>::infinity();
        return out;
    }
    out.alpha = -std::log(out.r) / std::log(inputs.rho);
    const double noise = (inputs.eps + out.eps_hat) / inputs.Q;
    out.bound = inputs.C * inputs.Q / (1.0 - out.r) * std::pow(noise, out.alpha);
    return out;
}

StabilityReport stability_experiment(const std::function<double(double)>& f, double rho_true,
                                     int degree, double eps_noise, double Q, double C,
                                     const std::vector<double>& probes, std::uint64_t seed) {
    require(degree >= 1, "stability_experiment: degree must be >= 1");
    require(eps_noise >= 0.0, "stability_experiment: eps_noise must be >= 0");
    const ExtrapolationRange range = extrapolation_range(rho_true);
    for (double p : probes)
        require(p >= range.lo && p < range.hi, "stability_experiment: probe outside range");

    const int m = 4 * degree * degree;
    std::vector<double> xs(static_cast<std::size_t>(m)), ys(static_cast<std::size_t>(m));
    Xoshiro256pp rng(seed);
    for (int i = 0; i < m; ++i) {
        const double x = -1.0 + 2.0 * static_cast<double>(i) / (m - 1);
        xs[static_cast<std::size_t>(i)] = x;
        double y = f(x);
        if (eps_noise > 0.0) y += rng.uniform(-eps_noise, eps_noise);
        ys[static_cast<std::size_t>(i)] = y;
    }
    const ChebyshevExtrapolant ext = cheb_fit(xs, ys, degree, /*strict=*/true);

    BoundInputs inputs;
    inputs.rho = rho_true;
    inputs.Q = Q;
    inputs.eps = eps_noise;
    inputs.n_terms = degree;
    inputs.eta_max = 1.0;
    inputs.C = C;

    StabilityReport report;
    report.rho = rho_true;
    report.degree = degree;
    report.sample_count = m;
    report.eps = eps_noise;
    for (double lambda : probes) {
        const ErrorBound eb = error_bound(lambda, inputs);
        StabilityProbe probe;
        probe.lambda = lambda;
        probe.r = eb.r;
        probe.alpha = eb.alpha;
        probe.bound = eb.bound;
        probe.observed = std::abs(cheb_eval(ext, lambda) - f(lambda));
        probe.within_bound = probe.observed <= eb.bound;
        report.probes.push_back(probe);
    }
    return report;
}

std::string stability_to_json(const StabilityReport& report) {
    json j;
    j["rho"] = report.rho;
    j["N"] = report.degree;
    j["M"] = report.sample_count;
    j["eps"] = report.eps;
    j["probes"] = json::array();
    for (const auto& p : report.probes)
        j["probes"].push_back({{"lambda", p.lambda},
                               {"r", p.r},
                               {"alpha", p.alpha},
                               {"bound", p.bound},
                               {"observed", p.observed},
                               {"within_bound", p.within_bound}});
    return j.dump(2);
}

double rho_for_real_singularity(double s) {
    require(s > 1.0, "rho_for_real_singularity: singularity must lie outside [-1, 1]");
    return s + std::sqrt(s * s - 1.0);
}

}  // namespace greclab
