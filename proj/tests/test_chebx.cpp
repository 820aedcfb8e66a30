#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "greclab/chebx.hpp"
#include "greclab/rng.hpp"

using namespace greclab;

namespace {

std::vector<double> equispaced(int m) {
    std::vector<double> xs(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i)
        xs[static_cast<std::size_t>(i)] = -1.0 + 2.0 * static_cast<double>(i) / (m - 1);
    return xs;
}

std::vector<double> sample(const std::vector<double>& xs,
                           const std::function<double(double)>& f) {
    std::vector<double> ys;
    ys.reserve(xs.size());
    for (double x : xs) ys.push_back(f(x));
    return ys;
}

// Direct evaluation sum c_n T_n via the recurrence on T_n itself; the
// independent reference for the Clenshaw path.
double eval_direct(const std::vector<double>& coeffs, double x) {
    double acc = 0.0;
    for (std::size_t n = 0; n < coeffs.size(); ++n)
        acc += coeffs[n] * chebyshev_t(static_cast<int>(n), x);
    return acc;
}

}  // namespace

TEST_CASE("constant function yields a single coefficient") {
    const auto xs = equispaced(100);
    const auto ext = cheb_fit(xs, sample(xs, [](double) { return 1.0; }), 5);
    CHECK(ext.coeffs[0] == doctest::Approx(1.0).epsilon(1e-13));
    for (std::size_t n = 1; n < ext.coeffs.size(); ++n) CHECK(std::abs(ext.coeffs[n]) < 1e-12);
}

TEST_CASE("T3 is recovered by orthogonality") {
    const auto xs = equispaced(100);
    const auto ext = cheb_fit(xs, sample(xs, [](double x) { return chebyshev_t(3, x); }), 5);
    CHECK(ext.coeffs[3] == doctest::Approx(1.0).epsilon(1e-12));
    for (std::size_t n = 0; n < ext.coeffs.size(); ++n)
        if (n != 3) CHECK(std::abs(ext.coeffs[n]) < 1e-10);
}

TEST_CASE("pole function interpolation error obeys the remainder estimate") {
    // rho' = 4 keeps the pole at 3 outside the ellipse, whose rightmost point
    // is (4 + 1/4)/2 = 2.125, so |f| <= 1/(3 - 2.125) there.
    const auto f = [](double x) { return 1.0 / (3.0 - x); };
    const auto xs = equispaced(256);
    const auto ext = cheb_fit(xs, sample(xs, f), 8);
    const double rho = 4.0;
    const double q = 1.0 / (3.0 - 2.125);
    const double budget = 2.0 * q * std::pow(rho, -8.0) / (rho - 1.0);
    double worst = 0.0;
    for (int i = 0; i <= 2000; ++i) {
        const double x = -1.0 + 2.0 * i / 2000.0;
        worst = std::max(worst, std::abs(cheb_eval(ext, x) - f(x)));
    }
    CHECK(worst < budget);
}

TEST_CASE("clenshaw matches direct evaluation inside and outside the interval") {
    Xoshiro256pp rng(5);
    ChebyshevExtrapolant ext;
    ext.degree = 9;
    for (int n = 0; n <= 9; ++n) ext.coeffs.push_back(rng.uniform(-1.0, 1.0));
    ext.sample_count = 400;
    for (double x : {-0.99, -0.4, 0.0, 0.73, 1.0, 1.2, 2.0, 2.9}) {
        CHECK(cheb_eval(ext, x) == doctest::Approx(eval_direct(ext.coeffs, x)).epsilon(1e-12));
    }
}

TEST_CASE("explicit T3 extrapolation value") {
    ChebyshevExtrapolant ext;
    ext.degree = 3;
    ext.coeffs = {0.0, 0.0, 0.0, 1.0};
    ext.sample_count = 36;
    // 4 x^3 - 3 x at x = 1.2
    CHECK(cheb_eval(ext, 1.2) == doctest::Approx(3.312).epsilon(1e-12));

    ChebyshevExtrapolant constant;
    constant.degree = 0;
    constant.coeffs = {0.42};
    constant.sample_count = 1;
    CHECK(cheb_eval(constant, 5.0) == doctest::Approx(0.42));

    // T_n(1) = 1 for every n, so the value at 1 is the coefficient sum.
    ChebyshevExtrapolant sum;
    sum.degree = 4;
    sum.coeffs = {0.1, 0.2, 0.3, 0.4, 0.5};
    sum.sample_count = 100;
    CHECK(cheb_eval(sum, 1.0) == doctest::Approx(1.5).epsilon(1e-13));
}

TEST_CASE("growth outside the interval follows cosh(n acosh x)") {
    ChebyshevExtrapolant t6;
    t6.degree = 6;
    t6.coeffs = {0, 0, 0, 0, 0, 0, 1.0};
    t6.sample_count = 144;
    for (double x : {1.1, 1.5, 2.0}) {
        CHECK(cheb_eval(t6, x) ==
              doctest::Approx(std::cosh(6.0 * std::acosh(x))).epsilon(1e-10));
    }
}

TEST_CASE("extrapolation range endpoints") {
    const auto r2 = extrapolation_range(2.0);
    CHECK(r2.lo == 1.0);
    CHECK(r2.hi == doctest::Approx(1.25).epsilon(1e-15));

    const auto tight = extrapolation_range(1.0 + 1e-9);
    CHECK(tight.hi - tight.lo < 1e-15);

    // rho through a pole at 3: (rho + 1/rho)/2 lands exactly on the pole.
    const double rho = rho_for_real_singularity(3.0);
    CHECK(rho == doctest::Approx(3.0 + 2.0 * std::sqrt(2.0)).epsilon(1e-15));
    CHECK(extrapolation_range(rho).hi == doctest::Approx(3.0).epsilon(1e-12));

    CHECK_THROWS_AS(extrapolation_range(1.0), std::invalid_argument);
}

TEST_CASE("bound endpoints: alpha(1) = 1 and r(1) rho = 1") {
    for (double rho : {1.5, 2.0, 5.0}) {
        BoundInputs in;
        in.rho = rho;
        in.Q = 1.0;
        in.eps = 1e-6;
        in.n_terms = 8;
        const ErrorBound eb = error_bound(1.0, in);
        CHECK(std::abs(eb.alpha - 1.0) < 1e-14);
        CHECK(std::abs(eb.r * rho - 1.0) < 1e-14);
    }
}

TEST_CASE("bound at rho = 2, lambda = 1.1") {
    BoundInputs in;
    in.rho = 2.0;
    in.Q = 1.0;
    in.eps = 1e-8;
    in.n_terms = 8;
    const ErrorBound eb = error_bound(1.1, in);
    const double r_expect = (1.1 + std::sqrt(1.1 * 1.1 - 1.0)) / 2.0;
    CHECK(eb.r == doctest::Approx(r_expect).epsilon(1e-15));
    CHECK(eb.r == doctest::Approx(0.779129).epsilon(1e-6));
    CHECK(eb.alpha == doctest::Approx(-std::log(r_expect) / std::log(2.0)).epsilon(1e-15));
    CHECK(eb.alpha == doctest::Approx(0.36007).epsilon(1e-4));
}

TEST_CASE("bound diverges at the right end") {
    BoundInputs in;
    in.rho = 2.0;
    in.Q = 1.0;
    in.eps = 1e-8;
    in.n_terms = 8;
    const ErrorBound eb = error_bound(1.25, in);  // right end for rho = 2
    CHECK(std::isinf(eb.bound));
}

TEST_CASE("alpha decreases and r increases in lambda") {
    BoundInputs in;
    in.rho = 3.0;
    in.Q = 2.0;
    in.eps = 1e-7;
    in.n_terms = 6;
    double prev_alpha = 2.0, prev_r = 0.0;
    const double hi = extrapolation_range(3.0).hi;
    for (int i = 0; i < 40; ++i) {
        const double lam = 1.0 + (hi - 1.0) * 0.98 * i / 39.0;
        const ErrorBound eb = error_bound(lam, in);
        CHECK(eb.alpha < prev_alpha);
        CHECK(eb.r > prev_r);
        prev_alpha = eb.alpha;
        prev_r = eb.r;
    }
}

TEST_CASE("bound is nondecreasing in eps") {
    BoundInputs in;
    in.rho = 2.5;
    in.Q = 1.0;
    in.n_terms = 8;
    double prev = 0.0;
    for (double eps : {0.0, 1e-10, 1e-8, 1e-6, 1e-4}) {
        in.eps = eps;
        const double b = error_bound(1.1, in).bound;
        CHECK(b >= prev);
        prev = b;
    }
}

TEST_CASE("truncation budget equals the weighted remainder at the box boundary") {
    // With every |eta_r| at 1 the weighted sum of per-term remainders equals
    // N_R times the single-term budget.
    const double q = 1.7, rho = 2.2;
    const int n = 9;
    BoundInputs in;
    in.rho = rho;
    in.Q = q;
    in.eps = 0.0;
    in.n_terms = n;
    const ErrorBound eb = error_bound(1.05, in);
    double weighted = 0.0;
    for (int r = 0; r < n; ++r) weighted += 1.0 * remainder_bound(q, rho, n);
    CHECK(eb.eps_bar == doctest::Approx(weighted).epsilon(1e-14));
}

TEST_CASE("polynomial reproduction and exact extrapolation") {
    Xoshiro256pp rng(23);
    for (int rep = 0; rep < 5; ++rep) {
        std::vector<double> coeffs(9);
        for (auto& c : coeffs) c = rng.uniform(-2.0, 2.0);
        const auto xs = equispaced(4 * 8 * 8);
        const auto ext =
            cheb_fit(xs, sample(xs, [&](double x) { return eval_direct(coeffs, x); }), 8);
        for (std::size_t n = 0; n < coeffs.size(); ++n)
            CHECK(ext.coeffs[n] == doctest::Approx(coeffs[n]).epsilon(1e-10));
        for (double lam : {-3.0, -1.5, 1.3, 2.2, 3.0}) {
            const double truth = eval_direct(coeffs, lam);
            CHECK(std::abs(cheb_eval(ext, lam) - truth) <
                  1e-8 * std::max(1.0, std::abs(truth)));
        }
    }
}

TEST_CASE("stability experiment: noiseless polynomial is reproduced") {
    const auto f = [](double x) { return 0.3 - 1.1 * x + 0.5 * chebyshev_t(5, x); };
    const StabilityReport rep =
        stability_experiment(f, 3.0, 6, 0.0, 2.0, 10.0, {1.05, 1.2, 1.4}, 3);
    for (const auto& p : rep.probes) {
        CHECK(p.observed < 1e-9);
        CHECK(p.within_bound);
    }
}

TEST_CASE("stability experiment: pole function stays under the bound") {
    const auto f = [](double x) { return 1.0 / (3.0 - x); };
    const double rho = 4.0;
    const double q = 1.0 / (3.0 - extrapolation_range(rho).hi);
    const StabilityReport rep = stability_experiment(f, rho, 8, 1e-8, q, 10.0, {1.2}, 7);
    REQUIRE(rep.sample_count == 256);
    CHECK(rep.probes[0].within_bound);
    CHECK(rep.probes[0].observed < rep.probes[0].bound);
}

TEST_CASE("stability experiment: error envelope grows toward the range end") {
    const auto f = [](double x) { return 1.0 / (3.0 - x); };
    const double rho = 4.0;
    const double hi = extrapolation_range(rho).hi;
    std::vector<double> probes;
    for (int i = 0; i < 12; ++i) probes.push_back(1.0 + (hi - 1.0) * 0.95 * i / 11.0);
    const double q = 1.0 / (3.0 - hi);
    const StabilityReport rep = stability_experiment(f, rho, 8, 1e-8, q, 10.0, probes, 11);
    double first_half = 0.0, second_half = 0.0;
    for (std::size_t i = 0; i < rep.probes.size(); ++i) {
        if (i < rep.probes.size() / 2)
            first_half = std::max(first_half, rep.probes[i].observed);
        else
            second_half = std::max(second_half, rep.probes[i].observed);
    }
    CHECK(second_half >= first_half);
}

TEST_CASE("input validation") {
    const auto xs = equispaced(10);
    CHECK_THROWS_AS(cheb_fit(xs, sample(xs, [](double x) { return x; }), 12),
                    std::invalid_argument);  // underdetermined
    std::vector<double> bad = xs;
    bad[3] = 1.5;
    CHECK_THROWS_AS(cheb_fit(bad, sample(bad, [](double x) { return x; }), 2, false),
                    std::invalid_argument);  // outside domain
    CHECK_THROWS_AS(stability_experiment([](double x) { return x; }, 2.0, 4, 0.0, 1.0, 10.0,
                                          {1.3}, 0),
                    std::invalid_argument);  // probe outside range (hi = 1.25)
    BoundInputs in;
    in.rho = 0.9;
    CHECK_THROWS_AS(error_bound(1.1, in), std::invalid_argument);
}
