#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "greclab/chebx.hpp"
#include "greclab/harness.hpp"
#include "greclab/ising.hpp"
#include "greclab/mitigate.hpp"
#include "greclab/qsim.hpp"
#include "greclab/randomize.hpp"

namespace py = pybind11;
using namespace greclab;

namespace {

Curve make_curve(const std::vector<double>& lambdas, const std::vector<double>& values,
                 const std::string& label) {
    Curve c;
    c.lambdas = lambdas;
    c.values = values;
    c.label = label;
    c.validate();
    return c;
}

double simulate_mean_z(double lam, const NoiseModel& noise, std::uint64_t shots,
                       std::uint64_t seed) {
    const Circuit circ = build_ground_state_circuit(IsingSpec::for_lambda(lam));
    const DensityMatrix rho =
        apply_circuit(DensityMatrix::zero_state(circ.width), circ, noise);
    if (shots == 0) return expect_mean_z(rho);
    return sample_expectation(rho, shots, seed, noise.readout_flip).value;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "density-matrix circuit simulation, randomized-ensemble error mitigation, and "
              "Chebyshev extrapolation bounds for the transverse-field Ising benchmark";

    py::class_<NoiseModel>(m, "NoiseModel")
        .def(py::init<>())
        .def_readwrite("p1", &NoiseModel::p1)
        .def_readwrite("p2", &NoiseModel::p2)
        .def_readwrite("gamma_ad", &NoiseModel::gamma_ad)
        .def_readwrite("coherent_eps", &NoiseModel::coherent_eps)
        .def_readwrite("readout_flip", &NoiseModel::readout_flip);

    py::class_<Circuit>(m, "Circuit")
        .def_readonly("width", &Circuit::width)
        .def_readonly("lambda_", &Circuit::lambda)
        .def("gate_count", [](const Circuit& c) { return c.gates.size(); })
        .def("single_qubit_gate_count", &Circuit::count_single_qubit_gates)
        .def("to_json", &circuit_to_json);
    m.def("circuit_from_json", &circuit_from_json);

    m.def("exact_magnetization", &exact_magnetization, py::arg("lam"),
          "closed-form mean magnetization of the benchmark chain");
    m.def(
        "oracle_magnetization",
        [](double lam, int n) { return oracle_magnetization_matrix(IsingSpec::for_lambda(lam, n)); },
        py::arg("lam"), py::arg("n") = 4,
        "dense-diagonalization cross-check of exact_magnetization");
    m.def(
        "hamiltonian",
        [](double lam, int n) {
            const MatrixC h = hamiltonian_matrix(IsingSpec::for_lambda(lam, n));
            std::vector<std::vector<std::complex<double>>> out(
                static_cast<std::size_t>(h.rows()));
            for (Eigen::Index i = 0; i < h.rows(); ++i)
                for (Eigen::Index j = 0; j < h.cols(); ++j)
                    out[static_cast<std::size_t>(i)].push_back(h(i, j));
            return out;
        },
        py::arg("lam"), py::arg("n") = 4, "dense Hamiltonian as a nested list");
    m.def(
        "ground_state_circuit",
        [](double lam) { return build_ground_state_circuit(IsingSpec::for_lambda(lam)); },
        py::arg("lam"));
    m.def("simulate_mean_z", &simulate_mean_z, py::arg("lam"), py::arg("noise") = NoiseModel{},
          py::arg("shots") = 0, py::arg("seed") = 0,
          "noisy mean-Z of the prepared benchmark state");

    py::class_<GrecFit>(m, "GrecFit")
        .def_readonly("eta0", &GrecFit::eta0)
        .def_readonly("etas", &GrecFit::etas)
        .def_readonly("constraint_residual", &GrecFit::constraint_residual)
        .def_readonly("train_rmse", &GrecFit::train_rmse)
        .def_readonly("box_violations", &GrecFit::box_violations);

    m.def(
        "grec_fit",
        [](const std::vector<double>& lambdas, const std::vector<std::vector<double>>& randomized,
           const std::vector<double>& exact, bool box) {
            std::vector<Curve> curves;
            for (std::size_t r = 0; r < randomized.size(); ++r)
                curves.push_back(
                    make_curve(lambdas, randomized[r], "randomized_" + std::to_string(r + 1)));
            return grec_fit(curves, make_curve(lambdas, exact, "exact"), box);
        },
        py::arg("lambdas"), py::arg("randomized"), py::arg("exact"), py::arg("box") = false,
        "constrained least-squares weights for an ensemble of curves");
    m.def(
        "grec_apply",
        [](const GrecFit& fit, const std::vector<double>& lambdas,
           const std::vector<std::vector<double>>& randomized) {
            std::vector<Curve> curves;
            for (std::size_t r = 0; r < randomized.size(); ++r)
                curves.push_back(
                    make_curve(lambdas, randomized[r], "randomized_" + std::to_string(r + 1)));
            return grec_apply(fit, curves).values;
        },
        py::arg("fit"), py::arg("lambdas"), py::arg("randomized"));

    py::class_<BaselineFit>(m, "BaselineFit")
        .def_readonly("eta0", &BaselineFit::eta0)
        .def_readonly("eta1", &BaselineFit::eta1)
        .def_readonly("train_rmse", &BaselineFit::train_rmse);
    m.def(
        "baseline_fit",
        [](const std::vector<double>& lambdas, const std::vector<double>& noisy,
           const std::vector<double>& exact) {
            return baseline_fit(make_curve(lambdas, noisy, "noisy"),
                                make_curve(lambdas, exact, "exact"));
        },
        py::arg("lambdas"), py::arg("noisy"), py::arg("exact"));
    m.def(
        "offset_fit",
        [](const std::vector<double>& lambdas, const std::vector<double>& noisy,
           const std::vector<double>& exact) {
            return offset_fit(make_curve(lambdas, noisy, "noisy"),
                              make_curve(lambdas, exact, "exact"));
        },
        py::arg("lambdas"), py::arg("noisy"), py::arg("exact"),
        "baseline with the slope pinned to 1");

    py::class_<FoldResult>(m, "FoldResult")
        .def_readonly("circuit", &FoldResult::circuit)
        .def_readonly("achieved_scale", &FoldResult::achieved_scale);
    m.def(
        "fold_circuit",
        [](const Circuit& c, double scale, const std::string& mode, std::uint64_t seed) {
            return fold_circuit(c, scale,
                                mode == "global" ? FoldMode::GlobalFold : FoldMode::GateFold, seed);
        },
        py::arg("circuit"), py::arg("scale"), py::arg("mode") = "gate", py::arg("seed") = 0);
    m.def(
        "zne_curve",
        [](const std::vector<double>& grid, const NoiseModel& noise, std::uint64_t seed) {
            const auto builder = [](double lam) {
                return build_ground_state_circuit(IsingSpec::for_lambda(lam));
            };
            return zne_run(builder, noise, ZneConfig::default_config(), grid, seed).values;
        },
        py::arg("grid"), py::arg("noise") = NoiseModel{}, py::arg("seed") = 0,
        "linear zero-noise extrapolation of the benchmark curve");
    m.def("zne_default_scale_factors",
          []() { return ZneConfig::default_config().scale_factors; });

    py::class_<ChebyshevExtrapolant>(m, "ChebyshevExtrapolant")
        .def_readonly("degree", &ChebyshevExtrapolant::degree)
        .def_readonly("coeffs", &ChebyshevExtrapolant::coeffs)
        .def_readonly("sample_count", &ChebyshevExtrapolant::sample_count);
    m.def("cheb_fit", &cheb_fit, py::arg("xs"), py::arg("ys"), py::arg("degree"),
          py::arg("strict") = true);
    m.def("cheb_eval", &cheb_eval, py::arg("extrapolant"), py::arg("lam"));
    m.def(
        "extrapolation_range",
        [](double rho) {
            const auto r = extrapolation_range(rho);
            return std::make_pair(r.lo, r.hi);
        },
        py::arg("rho"));
    m.def(
        "error_bound",
        [](double lam, double rho, double Q, double eps, int n_terms, double eta_max, double C) {
            BoundInputs in;
            in.rho = rho;
            in.Q = Q;
            in.eps = eps;
            in.n_terms = n_terms;
            in.eta_max = eta_max;
            in.C = C;
            const ErrorBound out = error_bound(lam, in);
            py::dict d;
            d["r"] = out.r;
            d["alpha"] = out.alpha;
            d["bound"] = out.bound;
            d["eps_bar"] = out.eps_bar;
            d["eps_hat"] = out.eps_hat;
            return d;
        },
        py::arg("lam"), py::arg("rho"), py::arg("Q") = 1.0, py::arg("eps") = 0.0,
        py::arg("n_terms") = 8, py::arg("eta_max") = 1.0, py::arg("C") = 1.0);

    m.attr("__version__") = "0.1.0";
}
