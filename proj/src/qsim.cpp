#include "greclab/qsim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "json.hpp"

#include "greclab/rng.hpp"

namespace greclab {

namespace {

using json = nlohmann::json;

constexpr Complex kI{0.0, 1.0};

void require(bool cond, const char* msg) {
    if (!cond) throw std::invalid_argument(msg);
}

void require_finite(double x, const char* msg) {
    if (!std::isfinite(x)) throw std::invalid_argument(msg);
}

Eigen::Matrix4cd cx_matrix() {
    Eigen::Matrix4cd m = Eigen::Matrix4cd::Zero();
    m(0, 0) = 1.0;
    m(1, 1) = 1.0;
    m(2, 3) = 1.0;
    m(3, 2) = 1.0;
    return m;
}

const char* kind_name(GateKind k) {
    switch (k) {
        case GateKind::H: return "h";
        case GateKind::X: return "x";
        case GateKind::U1: return "u1";
        case GateKind::CX: return "cx";
        case GateKind::GeneralU: return "generalu";
    }
    return "?";
}

GateKind kind_from_name(const std::string& s) {
    if (s == "h") return GateKind::H;
    if (s == "x") return GateKind::X;
    if (s == "u1") return GateKind::U1;
    if (s == "cx") return GateKind::CX;
    if (s == "generalu") return GateKind::GeneralU;
    throw std::invalid_argument("unknown gate kind: " + s);
}

}  // namespace

bool Gate::is_identity() const {
    if (kind == GateKind::U1) return params.at(0) == 0.0;
    if (kind == GateKind::GeneralU)
        return params.at(0) == 0.0 && params.at(1) == 0.0 && params.at(2) == 0.0;
    return false;
}

Gate Gate::adjoint() const {
    Gate g = *this;
    switch (kind) {
        case GateKind::H:
        case GateKind::X:
        case GateKind::CX:
            break;  // self-inverse
        case GateKind::U1:
            g.params[0] = -params[0];
            break;
        case GateKind::GeneralU:
            // U(a,b,g)^dagger = U(-a,-g,-b)
            g.params = {-params[0], -params[2], -params[1]};
            break;
    }
    return g;
}

Eigen::Matrix2cd single_qubit_matrix(const Gate& g, double coherent_scale) {
    Eigen::Matrix2cd m;
    switch (g.kind) {
        case GateKind::H:
            m << 1.0, 1.0, 1.0, -1.0;
            m /= std::sqrt(2.0);
            return m;
        case GateKind::X:
            m << 0.0, 1.0, 1.0, 0.0;
            return m;
        case GateKind::U1: {
            const double phi = g.params.at(0) * coherent_scale;
            require_finite(phi, "U1 phase must be finite");
            m << 1.0, 0.0, 0.0, std::exp(kI * phi);
            return m;
        }
        case GateKind::GeneralU: {
            const double a = g.params.at(0) * coherent_scale;
            const double b = g.params.at(1) * coherent_scale;
            const double c = g.params.at(2) * coherent_scale;
            require_finite(a, "GeneralU angle must be finite");
            require_finite(b, "GeneralU angle must be finite");
            require_finite(c, "GeneralU angle must be finite");
            const double ch = std::cos(a / 2.0), sh = std::sin(a / 2.0);
            m << ch, -std::exp(kI * c) * sh, std::exp(kI * b) * sh,
                std::exp(kI * (b + c)) * ch;
            return m;
        }
        case GateKind::CX:
            break;
    }
    throw std::invalid_argument("single_qubit_matrix called on a two-qubit gate");
}

void Circuit::validate() const {
    require(width >= 1, "circuit width must be >= 1");
    for (const Gate& g : gates) {
        const std::size_t want = (g.kind == GateKind::CX) ? 2 : 1;
        require(g.qubits.size() == want, "gate has wrong qubit count");
        for (int q : g.qubits) require(q >= 0 && q < width, "qubit index out of range");
        if (g.kind == GateKind::CX) require(g.qubits[0] != g.qubits[1], "CX qubits must differ");
        for (double p : g.params) require_finite(p, "gate parameter must be finite");
        switch (g.kind) {
            case GateKind::U1: require(g.params.size() == 1, "U1 takes one parameter"); break;
            case GateKind::GeneralU:
                require(g.params.size() == 3, "GeneralU takes three parameters");
                break;
            default: require(g.params.empty(), "gate takes no parameters"); break;
        }
    }
}

int Circuit::count_single_qubit_gates() const {
    int n = 0;
    for (const Gate& g : gates) n += g.is_single_qubit() ? 1 : 0;
    return n;
}

void NoiseModel::validate() const {
    for (double p : {p1, p2, gamma_ad, readout_flip})
        require(p >= 0.0 && p <= 1.0, "noise probability outside [0,1]");
    require_finite(coherent_eps, "coherent_eps must be finite");
}

DensityMatrix::DensityMatrix(int width, MatrixC entries)
    : width_(width), entries_(std::move(entries)) {
    require(width >= 1, "density matrix width must be >= 1");
    const Eigen::Index d = Eigen::Index(1) << width;
    require(entries_.rows() == d && entries_.cols() == d,
            "density matrix dimension does not match width");
}

DensityMatrix DensityMatrix::zero_state(int width) {
    const Eigen::Index d = Eigen::Index(1) << width;
    MatrixC m = MatrixC::Zero(d, d);
    m(0, 0) = 1.0;
    return DensityMatrix(width, std::move(m));
}

void DensityMatrix::validate(double tol) const {
    const MatrixC& m = entries_;
    if ((m - m.adjoint()).cwiseAbs().maxCoeff() > tol)
        throw std::runtime_error("density matrix is not Hermitian");
    if (std::abs(m.trace() - Complex(1.0, 0.0)) > tol)
        throw std::runtime_error("density matrix trace differs from 1");
    Eigen::SelfAdjointEigenSolver<MatrixC> es(m, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -tol)
        throw std::runtime_error("density matrix has a negative eigenvalue");
}

namespace {

// rho -> sum_k K rho K^dagger for 2x2 Kraus ops acting on qubit q.
void apply_kraus_1q(MatrixC& rho, const std::vector<Eigen::Matrix2cd>& kraus, int q,
                    int width) {
    const Eigen::Index d = rho.rows();
    const Eigen::Index mask = Eigen::Index(1) << (width - 1 - q);
    MatrixC out = MatrixC::Zero(d, d);
    MatrixC tmp(d, d);
    for (const auto& k : kraus) {
        // rows
        for (Eigen::Index r = 0; r < d; ++r) {
            const Eigen::Index r0 = r & ~mask;
            const Eigen::Index r1 = r0 | mask;
            if ((r & mask) == 0)
                tmp.row(r) = k(0, 0) * rho.row(r0) + k(0, 1) * rho.row(r1);
            else
                tmp.row(r) = k(1, 0) * rho.row(r0) + k(1, 1) * rho.row(r1);
        }
        // columns with K^dagger
        for (Eigen::Index c = 0; c < d; ++c) {
            const Eigen::Index c0 = c & ~mask;
            const Eigen::Index c1 = c0 | mask;
            if ((c & mask) == 0)
                out.col(c) += tmp.col(c0) * std::conj(k(0, 0)) + tmp.col(c1) * std::conj(k(0, 1));
            else
                out.col(c) += tmp.col(c0) * std::conj(k(1, 0)) + tmp.col(c1) * std::conj(k(1, 1));
        }
    }
    rho.swap(out);
}

// rho -> sum_k K rho K^dagger for 4x4 Kraus ops acting on qubits (qa, qb);
// basis order within the block is |qa qb>.
void apply_kraus_2q(MatrixC& rho, const std::vector<Eigen::Matrix4cd>& kraus, int qa,
                    int qb, int width) {
    const Eigen::Index d = rho.rows();
    const Eigen::Index ma = Eigen::Index(1) << (width - 1 - qa);
    const Eigen::Index mb = Eigen::Index(1) << (width - 1 - qb);
    auto sub = [&](Eigen::Index base, int s) {
        Eigen::Index idx = base & ~(ma | mb);
        if (s & 2) idx |= ma;
        if (s & 1) idx |= mb;
        return idx;
    };
    MatrixC out = MatrixC::Zero(d, d);
    MatrixC tmp(d, d);
    for (const auto& k : kraus) {
        for (Eigen::Index r = 0; r < d; ++r) {
            const int sr = ((r & ma) ? 2 : 0) | ((r & mb) ? 1 : 0);
            tmp.row(r).setZero();
            for (int s = 0; s < 4; ++s) {
                const Complex coef = k(sr, s);
                if (coef != 0.0) tmp.row(r) += coef * rho.row(sub(r, s));
            }
        }
        for (Eigen::Index c = 0; c < d; ++c) {
            const int sc = ((c & ma) ? 2 : 0) | ((c & mb) ? 1 : 0);
            for (int s = 0; s < 4; ++s) {
                const Complex coef = std::conj(k(sc, s));
                if (coef != 0.0) out.col(c) += tmp.col(sub(c, s)) * coef;
            }
        }
    }
    rho.swap(out);
}

void apply_unitary_1q(MatrixC& rho, const Eigen::Matrix2cd& u, int q, int width) {
    apply_kraus_1q(rho, {u}, q, width);
}

}  // namespace

std::vector<Eigen::Matrix2cd> depolarizing_kraus_1q(double p) {
    const double w0 = std::sqrt(1.0 - 3.0 * p / 4.0);
    const double w = std::sqrt(p / 4.0);
    Eigen::Matrix2cd I = Eigen::Matrix2cd::Identity();
    Eigen::Matrix2cd X, Y, Z;
    X << 0, 1, 1, 0;
    Y << 0, Complex(0, -1), Complex(0, 1), 0;
    Z << 1, 0, 0, -1;
    return {w0 * I, w * X, w * Y, w * Z};
}

std::vector<Eigen::Matrix4cd> depolarizing_kraus_2q(double p) {
    Eigen::Matrix2cd I = Eigen::Matrix2cd::Identity();
    Eigen::Matrix2cd X, Y, Z;
    X << 0, 1, 1, 0;
    Y << 0, Complex(0, -1), Complex(0, 1), 0;
    Z << 1, 0, 0, -1;
    const Eigen::Matrix2cd paulis[4] = {I, X, Y, Z};
    std::vector<Eigen::Matrix4cd> kraus;
    kraus.reserve(16);
    for (int a = 0; a < 4; ++a) {
        for (int b = 0; b < 4; ++b) {
            const double w =
                (a == 0 && b == 0) ? std::sqrt(1.0 - 15.0 * p / 16.0) : std::sqrt(p / 16.0);
            Eigen::Matrix4cd k;
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j)
                    k.block<2, 2>(2 * i, 2 * j) = paulis[a](i, j) * paulis[b];
            kraus.push_back(w * k);
        }
    }
    return kraus;
}

std::vector<Eigen::Matrix2cd> amplitude_damping_kraus(double gamma) {
    Eigen::Matrix2cd k0, k1;
    k0 << 1, 0, 0, std::sqrt(1.0 - gamma);
    k1 << 0, std::sqrt(gamma), 0, 0;
    return {k0, k1};
}

DensityMatrix apply_circuit(const DensityMatrix& rho0, const Circuit& circuit,
                            const NoiseModel& noise) {
    circuit.validate();
    noise.validate();
    require(rho0.width() == circuit.width, "circuit width does not match density matrix");

    const double scale = 1.0 + noise.coherent_eps;
    MatrixC rho = rho0.entries();
    for (const Gate& g : circuit.gates) {
        if (g.is_identity()) continue;  // transparent gate: nothing executed, no noise
        if (g.kind == GateKind::CX) {
            const int qc = g.qubits[0], qt = g.qubits[1];
            apply_kraus_2q(rho, {cx_matrix()}, qc, qt, circuit.width);
            if (noise.p2 > 0.0)
                apply_kraus_2q(rho, depolarizing_kraus_2q(noise.p2), qc, qt, circuit.width);
            if (noise.gamma_ad > 0.0) {
                const auto ad = amplitude_damping_kraus(noise.gamma_ad);
                apply_kraus_1q(rho, ad, qc, circuit.width);
                apply_kraus_1q(rho, ad, qt, circuit.width);
            }
        } else {
            const int q = g.qubits[0];
            apply_unitary_1q(rho, single_qubit_matrix(g, scale), q, circuit.width);
            if (noise.p1 > 0.0)
                apply_kraus_1q(rho, depolarizing_kraus_1q(noise.p1), q, circuit.width);
            if (noise.gamma_ad > 0.0)
                apply_kraus_1q(rho, amplitude_damping_kraus(noise.gamma_ad), q, circuit.width);
        }
    }
    DensityMatrix out(circuit.width, std::move(rho));
    // The channel algebra preserves these up to roundoff; fail loudly if not.
    const MatrixC& m = out.entries();
    if (std::abs(m.trace() - Complex(1.0, 0.0)) > 1e-10)
        throw std::runtime_error("apply_circuit: trace drifted from 1");
    if ((m - m.adjoint()).cwiseAbs().maxCoeff() > 1e-10)
        throw std::runtime_error("apply_circuit: output not Hermitian");
    return out;
}

DensityMatrix apply_global_depolarizing(const DensityMatrix& rho, double p) {
    require(p >= 0.0 && p <= 1.0, "depolarizing probability outside [0,1]");
    const Eigen::Index d = rho.dim();
    MatrixC m = (1.0 - p) * rho.entries();
    m.diagonal().array() += p / static_cast<double>(d);
    return DensityMatrix(rho.width(), std::move(m));
}

double expect_mean_z(const DensityMatrix& rho) {
    const int n = rho.width();
    const Eigen::Index d = rho.dim();
    Complex acc = 0.0;
    for (Eigen::Index b = 0; b < d; ++b) {
        const int pop = __builtin_popcountll(static_cast<unsigned long long>(b));
        acc += rho.entries()(b, b) * static_cast<double>(n - 2 * pop) / static_cast<double>(n);
    }
    if (std::abs(acc.imag()) > 1e-10)
        throw std::runtime_error("expect_mean_z: expectation has a large imaginary part");
    return acc.real();
}

SampledExpectation sample_expectation(const DensityMatrix& rho, std::uint64_t shots,
                                      std::uint64_t seed, double readout_flip) {
    require(shots >= 1, "sample_expectation requires shots >= 1");
    require(readout_flip >= 0.0 && readout_flip <= 1.0, "readout_flip outside [0,1]");
    const int n = rho.width();
    const Eigen::Index d = rho.dim();

    std::vector<double> cdf(static_cast<std::size_t>(d));
    double total = 0.0;
    for (Eigen::Index b = 0; b < d; ++b) {
        total += std::max(rho.entries()(b, b).real(), 0.0);
        cdf[static_cast<std::size_t>(b)] = total;
    }
    if (total <= 0.0) throw std::runtime_error("sample_expectation: empty distribution");

    Xoshiro256pp rng(seed);
    double mean = 0.0, m2 = 0.0;
    for (std::uint64_t s = 0; s < shots; ++s) {
        const double u = rng.uniform() * total;
        auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
        Eigen::Index b = static_cast<Eigen::Index>(it - cdf.begin());
        if (b >= d) b = d - 1;
        std::uint64_t bits = static_cast<std::uint64_t>(b);
        if (readout_flip > 0.0) {
            for (int q = 0; q < n; ++q)
                if (rng.uniform() < readout_flip) bits ^= (std::uint64_t(1) << q);
        }
        const int pop = __builtin_popcountll(bits);
        const double x = static_cast<double>(n - 2 * pop) / static_cast<double>(n);
        const double delta = x - mean;
        mean += delta / static_cast<double>(s + 1);
        m2 += delta * (x - mean);
    }
    double std_error = 0.0;
    if (shots > 1) {
        const double var = m2 / static_cast<double>(shots - 1);
        std_error = std::sqrt(var / static_cast<double>(shots));
    }
    return {mean, std_error};
}

MatrixC circuit_unitary(const Circuit& circuit) {
    circuit.validate();
    require(circuit.width <= 12, "circuit_unitary is guarded to width <= 12");
    const Eigen::Index d = Eigen::Index(1) << circuit.width;
    MatrixC u = MatrixC::Identity(d, d);
    for (const Gate& g : circuit.gates) {
        MatrixC step = MatrixC::Identity(d, d);
        if (g.kind == GateKind::CX) {
            const Eigen::Index mc = Eigen::Index(1) << (circuit.width - 1 - g.qubits[0]);
            const Eigen::Index mt = Eigen::Index(1) << (circuit.width - 1 - g.qubits[1]);
            step.setZero();
            for (Eigen::Index b = 0; b < d; ++b) step((b & mc) ? (b ^ mt) : b, b) = 1.0;
        } else {
            const Eigen::Matrix2cd m = single_qubit_matrix(g);
            const Eigen::Index mask = Eigen::Index(1) << (circuit.width - 1 - g.qubits[0]);
            step.setZero();
            for (Eigen::Index b = 0; b < d; ++b) {
                const Eigen::Index b0 = b & ~mask;
                const Eigen::Index b1 = b0 | mask;
                if ((b & mask) == 0) {
                    step(b0, b) = m(0, 0);
                    step(b1, b) = m(1, 0);
                } else {
                    step(b0, b) = m(0, 1);
                    step(b1, b) = m(1, 1);
                }
            }
        }
        u = step * u;
    }
    return u;
}

std::string circuit_to_json(const Circuit& circuit) {
    json j;
    j["width"] = circuit.width;
    j["lambda"] = circuit.lambda;
    j["gates"] = json::array();
    for (const Gate& g : circuit.gates) {
        json jg;
        jg["kind"] = kind_name(g.kind);
        jg["qubits"] = g.qubits;
        jg["params"] = g.params;
        jg["tag"] = g.tag;
        j["gates"].push_back(std::move(jg));
    }
    return j.dump(2);
}

Circuit circuit_from_json(const std::string& text) {
    const json j = json::parse(text);
    Circuit c;
    c.width = j.at("width").get<int>();
    c.lambda = j.at("lambda").get<double>();
    for (const auto& jg : j.at("gates")) {
        Gate g;
        g.kind = kind_from_name(jg.at("kind").get<std::string>());
        g.qubits = jg.at("qubits").get<std::vector<int>>();
        g.params = jg.at("params").get<std::vector<double>>();
        g.tag = jg.value("tag", std::string{});
        c.gates.push_back(std::move(g));
    }
    c.validate();
    return c;
}

}  // namespace greclab
