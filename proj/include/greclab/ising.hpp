#pragma once

#include "greclab/qsim.hpp"

namespace greclab {

// The n-spin antiferromagnetic transverse-field Ising benchmark in its
// exactly solvable form: open-chain XX bonds plus a Y Z..Z Y string bond that
// stands in for the wrap-around coupling, plus the field term,
//
//   H = sum_{i=1}^{n-1} X_i X_{i+1}  +  Y_1 Z_2 ... Z_{n-1} Y_n  +  lambda sum_i Z_i.
//
// Under the Jordan-Wigner map the string bond is exactly the clean periodic
// hopping/pairing bond, so the chain diagonalizes like an infinite one and
// the closed-form magnetization below holds at finite n.
//
// Sign convention (recorded in every run manifest): the analytic curve tends
// to +1 at large lambda while the ground state of +lambda sum Z is fully
// spin-down, so oracle_magnetization_matrix reports the negated mean-Z of the
// selected eigenstate, and build_ground_state_circuit prepares the spin-flipped
// partner state, whose ordinary mean-Z matches the analytic curve directly.

enum class Branch { BelowOne, AboveOne };

struct IsingSpec {
    int n = 4;
    double lambda = 1.0;
    Branch branch = Branch::AboveOne;

    static IsingSpec for_lambda(double lambda, int n = 4) {
        return {n, lambda, lambda >= 1.0 ? Branch::AboveOne : Branch::BelowOne};
    }
    void validate() const;
};

// Dense 2^n x 2^n Hamiltonian; Hermitian to 1e-12. Guarded to n <= 12.
MatrixC hamiltonian_matrix(const IsingSpec& spec);

// Closed-form average ground-state magnetization:
//   lambda/(2 sqrt(1+lambda^2))        for lambda < 1
//   1/2 + lambda/(2 sqrt(1+lambda^2))  for lambda >= 1.
double exact_magnetization(double lambda);

// Independent cross-check: dense-diagonalizes hamiltonian_matrix restricted
// to the fermion-parity sector matching the branch (even for AboveOne, odd
// for BelowOne) and returns the calibrated signed mean-Z of the sector ground
// state. Throws if the sector ground space is degenerate beyond 1e-9.
double oracle_magnetization_matrix(const IsingSpec& spec);

// Builds the 4-qubit state-preparation circuit for the lambda >= 1 branch.
// The noiseless circuit applied to |0000> prepares the exact (spin-flipped)
// eigenstate, so expect_mean_z equals exact_magnetization(lambda).
// The circuit carries exactly 10 single-qubit gates; these are the slots the
// randomizer equips.
Circuit build_ground_state_circuit(const IsingSpec& spec);

// Short description of the calibration above, embedded in run manifests.
const char* sign_convention_note();

}  // namespace greclab
