"""Markovian master equations for qubits in spatially correlated environments."""
from importlib.metadata import PackageNotFoundError, version

try:
    __version__ = version("artifact")
except PackageNotFoundError:  # pragma: no cover - source checkout without install
    __version__ = "0.1.0"

from .diagnostics import CODES, Diagnostic
from .dynamics import (ScalingPrediction, Trajectory, TwoQubitRates, extract_decay_rate,
                       ising_two_qubit_rates, propagate, scaling_experiment,
                       simulated_two_qubit_rates, two_qubit_rates)
from .lindblad import (CPVerdict, LindbladForm, ToeplitzKernel, eigenvalue_bound_check,
                       map_to_lindblad, psd_check, toeplitz_fourier_bounds)
from .redfield import (Coupling, SystemSpec, build_br_generator, build_q_matrices,
                       build_secular_generator, lamb_shift, qubit_chain, secular_decompose)

__all__ = [
    "CODES", "CPVerdict", "Coupling", "Diagnostic", "LindbladForm", "ScalingPrediction",
    "SystemSpec", "ToeplitzKernel", "Trajectory", "TwoQubitRates", "build_br_generator",
    "build_q_matrices", "build_secular_generator", "eigenvalue_bound_check", "extract_decay_rate",
    "ising_two_qubit_rates", "lamb_shift", "map_to_lindblad", "propagate", "psd_check",
    "qubit_chain", "scaling_experiment", "secular_decompose", "simulated_two_qubit_rates",
    "toeplitz_fourier_bounds", "two_qubit_rates",
]
