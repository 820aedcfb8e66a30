"""Python surface of the mitigation workbench: circuit simulation of the
transverse-field Ising benchmark, randomized-ensemble error mitigation,
zero-noise extrapolation, and Chebyshev extrapolation error bounds."""

from ._core import (
    BaselineFit,
    ChebyshevExtrapolant,
    Circuit,
    FoldResult,
    GrecFit,
    NoiseModel,
    __version__,
    baseline_fit,
    cheb_eval,
    cheb_fit,
    circuit_from_json,
    error_bound,
    exact_magnetization,
    extrapolation_range,
    fold_circuit,
    grec_apply,
    grec_fit,
    ground_state_circuit,
    hamiltonian,
    offset_fit,
    oracle_magnetization,
    simulate_mean_z,
    zne_curve,
    zne_default_scale_factors,
)

__all__ = [
    "BaselineFit",
    "ChebyshevExtrapolant",
    "Circuit",
    "FoldResult",
    "GrecFit",
    "NoiseModel",
    "__version__",
    "baseline_fit",
    "cheb_eval",
    "cheb_fit",
    "circuit_from_json",
    "error_bound",
    "exact_magnetization",
    "extrapolation_range",
    "fold_circuit",
    "grec_apply",
    "grec_fit",
    "ground_state_circuit",
    "hamiltonian",
    "offset_fit",
    "oracle_magnetization",
    "simulate_mean_z",
    "zne_curve",
    "zne_default_scale_factors",
]
