#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace greclab {

using Complex = std::complex<double>;
using MatrixC = Eigen::MatrixXcd;

enum class GateKind { H, X, U1, CX, GeneralU };

// One gate instance. Single-qubit kinds use qubits[0]; CX uses
// {control, target}. params: U1 -> {phase}, GeneralU -> {alpha, beta, gamma},
// all in radians.
struct Gate {
    GateKind kind = GateKind::H;
    std::vector<int> qubits;
    std::vector<double> params;
    std::string tag;  // empty, or a marker such as "aux" for randomization gates

    static Gate h(int q) { return {GateKind::H, {q}, {}, {}}; }
    static Gate x(int q) { return {GateKind::X, {q}, {}, {}}; }
    static Gate u1(double phase, int q) { return {GateKind::U1, {q}, {phase}, {}}; }
    static Gate cx(int control, int target) { return {GateKind::CX, {control, target}, {}, {}}; }
    static Gate general_u(double alpha, double beta, double gamma, int q) {
        return {GateKind::GeneralU, {q}, {alpha, beta, gamma}, {}};
    }

    bool is_single_qubit() const { return kind != GateKind::CX; }

    // True when the gate matrix is exactly the identity (zero-parameter U1 or
    // GeneralU). Such gates are transparent: nothing is executed, no noise is
    // attached. This keeps delta = 0 randomizations equal to the base circuit.
    bool is_identity() const;

    // Inverse gate within the same gate set.
    Gate adjoint() const;
};

// GeneralU(alpha, beta, gamma) =
//   [[cos(a/2),            -e^{i g} sin(a/2)  ],
//    [e^{i b} sin(a/2),     e^{i(b+g)} cos(a/2)]]
// so GeneralU(0,0,0) = I. coherent_scale multiplies every angle parameter
// before the matrix is formed (1.0 = no coherent error).
Eigen::Matrix2cd single_qubit_matrix(const Gate& g, double coherent_scale = 1.0);

struct Circuit {
    int width = 1;
    double lambda = 0.0;  // external parameter the instance was built at
    std::vector<Gate> gates;

    void validate() const;  // throws std::invalid_argument on bad indices/params
    int count_single_qubit_gates() const;
};

// Per-gate noise channels attached after each executed gate.
struct NoiseModel {
    double p1 = 0.0;            // single-qubit depolarizing probability
    double p2 = 0.0;            // two-qubit depolarizing probability
    double gamma_ad = 0.0;      // amplitude damping rate per acted qubit
    double coherent_eps = 0.0;  // fractional over-rotation of every angle
    double readout_flip = 0.0;  // classical bit-flip probability per measured qubit

    bool is_zero() const {
        return p1 == 0.0 && p2 == 0.0 && gamma_ad == 0.0 && coherent_eps == 0.0 &&
               readout_flip == 0.0;
    }
    void validate() const;  // probabilities in [0,1]
};

class DensityMatrix {
  public:
    DensityMatrix(int width, MatrixC entries);

    // |0...0><0...0| on `width` qubits.
    static DensityMatrix zero_state(int width);

    int width() const { return width_; }
    Eigen::Index dim() const { return entries_.rows(); }
    const MatrixC& entries() const { return entries_; }
    MatrixC& entries() { return entries_; }

    // Hermiticity/trace/positivity checks; throws on violation.
    void validate(double tol = 1e-10) const;

  private:
    int width_;
    MatrixC entries_;
};

// Kraus sets of the supported channels; each satisfies sum K^+ K = I.
std::vector<Eigen::Matrix2cd> depolarizing_kraus_1q(double p);
std::vector<Eigen::Matrix4cd> depolarizing_kraus_2q(double p);
std::vector<Eigen::Matrix2cd> amplitude_damping_kraus(double gamma);

// Evolves rho0 through the circuit: per gate, the ideal unitary (with angles
// scaled by 1 + coherent_eps) followed by that gate's noise channels.
DensityMatrix apply_circuit(const DensityMatrix& rho0, const Circuit& circuit,
                            const NoiseModel& noise);

// rho -> (1-p) rho + p I/d. Used by the affine-law checks and the
// depolarizing-only pipeline configurations.
DensityMatrix apply_global_depolarizing(const DensityMatrix& rho, double p);

// (1/n) sum_i tr(sigma_z^i rho); |0..0> -> +1.
double expect_mean_z(const DensityMatrix& rho);

struct SampledExpectation {
    double value = 0.0;
    double std_error = 0.0;
};

// Draws `shots` computational-basis outcomes from diag(rho), applies
// independent readout flips, and returns the sample mean of the per-shot
// mean-Z together with its standard error. Bitwise deterministic in `seed`.
SampledExpectation sample_expectation(const DensityMatrix& rho, std::uint64_t shots,
                                      std::uint64_t seed, double readout_flip);

// Dense product of the embedded gate matrices, in application order.
// Guarded to width <= 12.
MatrixC circuit_unitary(const Circuit& circuit);

// JSON round-trip: {"width", "lambda", "gates": [{"kind","qubits","params","tag"}]}.
std::string circuit_to_json(const Circuit& circuit);
Circuit circuit_from_json(const std::string& text);

}  // namespace greclab
