"""Propagation, decay-rate extraction and the qubit dephasing scenarios."""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg

from . import quantum as qc
from .diagnostics import Diagnostic
from .io import write_csv
from .redfield import build_br_generator, qubit_chain
from .spectral.ising import IsingParams
from .spectral.models import Site

TRACE_DRIFT_MAX = 1e-6
RESIDUAL_FLAG = 1e-3
DISCARD_FRACTION = 0.05
FLOOR_FRACTION = 1e-6


class PropagationError(RuntimeError):
    pass


class RateExtractionError(ValueError):
    pass


def generator_hash(superop: np.ndarray) -> str:
    a = np.ascontiguousarray(np.asarray(superop, dtype=complex))
    return hashlib.sha256(a.tobytes()).hexdigest()[:16]


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    states: np.ndarray          # (n_times, d, d)
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        t = np.array(self.times, dtype=float)
        s = np.array(self.states, dtype=complex)
        t.setflags(write=False)
        s.setflags(write=False)
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "states", s)

    def __len__(self) -> int:
        return len(self.times)

    def element(self, i: int, j: int) -> np.ndarray:
        return self.states[:, i, j]

    def min_eigenvalues(self) -> np.ndarray:
        herm = 0.5 * (self.states + np.conj(np.swapaxes(self.states, 1, 2)))
        return np.linalg.eigvalsh(herm)[:, 0]

    def to_csv(self, path, pairs: Sequence[tuple[int, int]], comments: Sequence[str] = ()):
        header = ["t"]
        for i, j in pairs:
            header += [f"re(rho_{i}_{j})", f"im(rho_{i}_{j})"]
        rows = []
        for n, t in enumerate(self.times):
            row = [t]
            for i, j in pairs:
                z = self.states[n, i, j]
                row += [z.real, z.imag]
            rows.append(row)
        return write_csv(path, header, rows, comments)


def _superop_of(gen) -> np.ndarray:
    sup = getattr(gen, "superop", gen)
    sup = np.asarray(sup, dtype=complex)
    if sup.ndim != 2 or sup.shape[0] != sup.shape[1]:
        raise ValueError(f"generator must be a square superoperator, got {sup.shape}")
    return sup


def propagate(gen, rho0, times, metadata: dict | None = None) -> Trajectory:
    """Evolve ``rho0`` (given at ``times[0]``) under a time-independent generator.

    Each step applies ``expm(L dt)``; propagators are cached per distinct
    step so uniform grids cost a single exponential. ``gen`` is a
    superoperator array or any object with a ``superop`` attribute.
    Raises `PropagationError` if the trace drifts by more than 1e-6, which
    signals a generator that is not trace preserving.
    """
    sup = _superop_of(gen)
    rho0 = np.asarray(qc.density_matrix(rho0), dtype=complex)
    d = rho0.shape[0]
    if sup.shape[0] != d * d:
        raise ValueError(f"superoperator of size {sup.shape[0]} does not act on {d}x{d} states")
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or len(times) == 0 or not np.all(np.isfinite(times)):
        raise ValueError("times must be a non-empty finite 1-D sequence")
    if np.any(np.diff(times) < 0):
        raise ValueError("times must be ascending")

    cache: dict[float, np.ndarray] = {}
    states = np.empty((len(times), d, d), dtype=complex)
    v = qc.vec(rho0)
    states[0] = rho0
    for n in range(1, len(times)):
        dt = float(times[n] - times[n - 1])
        key = float(f"{dt:.12g}")
        if key not in cache:
            cache[key] = scipy.linalg.expm(sup * dt)
        v = cache[key] @ v
        states[n] = qc.unvec(v, d)
        drift = abs(np.trace(states[n]) - 1.0)
        if not np.isfinite(drift) or drift > TRACE_DRIFT_MAX:
            raise PropagationError(
                f"trace drift {drift:.3e} at t={times[n]:.6g} exceeds {TRACE_DRIFT_MAX:g}; "
                f"generator trace error {qc.superop_trace_error(sup):.3e}")
    meta = {"generator_hash": generator_hash(sup)}
    meta.update(metadata or {})
    return Trajectory(times, states, meta)


@dataclass(frozen=True)
class DecayFit:
    rate: float
    residual: float
    n_points: int
    window: tuple[float, float]
    diagnostics: tuple[Diagnostic, ...] = ()

    @property
    def non_exponential(self) -> bool:
        return self.residual > RESIDUAL_FLAG


def fit_decay(times, values, discard: float = DISCARD_FRACTION,
              floor: float = FLOOR_FRACTION) -> DecayFit:
    """Least-squares decay rate of ``|values|`` against ``times``.

    The first ``discard`` fraction of the time span is dropped; the fit then
    runs over the following contiguous points whose magnitude stays at
    least ``floor`` times the initial one. The residual is the RMS
    deviation of ``log|values|`` from the fitted line.
    """
    t = np.asarray(times, dtype=float)
    mag = np.abs(np.asarray(values))
    if len(t) != len(mag) or len(t) < 2:
        raise RateExtractionError("need at least two samples")
    if mag[0] <= 1e-8:
        raise RateExtractionError(f"initial coherence {mag[0]:.3e} is too small to fit")
    start = t[0] + discard * (t[-1] - t[0])
    idx = np.nonzero(t >= start)[0]
    keep = []
    for i in idx:
        if mag[i] < floor * mag[0]:
            break
        keep.append(i)
    if len(keep) < 2:
        raise RateExtractionError("fewer than two usable points in the fit window")
    tw, y = t[keep], np.log(mag[keep])
    slope, intercept = np.polyfit(tw, y, 1)
    resid = float(np.sqrt(np.mean((y - (slope * tw + intercept)) ** 2)))
    diags = ()
    if resid > RESIDUAL_FLAG:
        diags = (Diagnostic("W005", f"log-linear fit residual {resid:.3e}"),)
    return DecayFit(float(-slope), resid, len(keep), (float(tw[0]), float(tw[-1])), diags)


def extract_decay_rate(traj: Trajectory, bra: int, ket: int, **kw) -> DecayFit:
    """Decay rate of the coherence ``rho[bra, ket]`` along a trajectory."""
    return fit_decay(traj.times, traj.element(bra, ket), **kw)


# --- two-qubit rates --------------------------------------------------------

@dataclass(frozen=True)
class TwoQubitRates:
    """Reduced (single-excitation), enhanced and generic dephasing rates."""

    gamma_minus: float
    gamma_plus: float
    gamma_zero: float

    def identity_error(self) -> float:
        return abs(self.gamma_minus + self.gamma_plus - 4.0 * self.gamma_zero)

    def to_dict(self) -> dict:
        return {"gamma_minus": self.gamma_minus, "gamma_plus": self.gamma_plus,
                "gamma_zero": self.gamma_zero}


def _c0(model, d: float, group: str = "bath") -> tuple[float, float]:
    origin = Site(0.0, group)
    c00 = model.evaluate(0.0, origin, origin).real
    c0d = model.evaluate(0.0, origin, Site(float(d), group)).real
    return c00, c0d


def two_qubit_rates(model, d: float, coupling_strength: float = 1.0) -> TwoQubitRates:
    """Analytic rates ``C(0,0) -/+ C(0,d)`` and ``C(0,0)/2`` for sigma_z couplings.

    ``coupling_strength`` scales both couplings, so rates scale with its square.
    """
    c00, c0d = _c0(model, d)
    s2 = coupling_strength ** 2
    return TwoQubitRates(s2 * (c00 - c0d), s2 * (c00 + c0d), s2 * c00 / 2.0)


# Coherences probed from |+>|+>: |10><01|, |11><00| and |00><01|.
TWO_QUBIT_PAIRS = {"gamma_minus": (1, 2), "gamma_plus": (0, 3), "gamma_zero": (0, 1)}


def simulated_two_qubit_rates(model, d: float, coupling_strength: float = 1.0,
                              splitting: float = 0.0, n_times: int = 201,
                              t_max: float | None = None) -> tuple[TwoQubitRates, Trajectory]:
    """Measure the three rates by propagating the full two-qubit generator."""
    system = qubit_chain(2, splitting=splitting, positions=[0.0, float(d)], coupling="z",
                         strength=coupling_strength)
    gen = build_br_generator(system, model)
    if t_max is None:
        ref = two_qubit_rates(model, d, coupling_strength)
        fastest = max(ref.gamma_minus, ref.gamma_plus, ref.gamma_zero, 1e-12)
        t_max = 5.0 / fastest
    plus = np.full(4, 0.5, dtype=complex)
    traj = propagate(gen, qc.pure_state(plus), np.linspace(0.0, t_max, n_times),
                     {"scenario": "two-qubit-rates", "d": float(d)})
    fits = {name: extract_decay_rate(traj, *pair) for name, pair in TWO_QUBIT_PAIRS.items()}
    rates = TwoQubitRates(fits["gamma_minus"].rate, fits["gamma_plus"].rate, fits["gamma_zero"].rate)
    return rates, traj


def ising_two_qubit_rates(params: IsingParams, d: int, coupling: float = 1.0) -> TwoQubitRates:
    """Closed forms ``(2 zeta/alpha)[zeta -/+ eta^d (d + zeta)]`` and ``zeta^2/alpha``."""
    if float(d) != int(d) or d < 0:
        raise ValueError(f"qubit distance must be a non-negative integer lattice step, got {d}")
    d = int(d)
    z, e, a = params.zeta, params.eta, params.alpha
    s2 = coupling ** 2
    corr = e ** d * (d + z)
    return TwoQubitRates(s2 * 2 * z / a * (z - corr), s2 * 2 * z / a * (z + corr), s2 * z * z / a)


# --- n-qubit scaling --------------------------------------------------------

@dataclass(frozen=True)
class ScalingPrediction:
    n_f: int
    n_e: int
    gamma: float
    regime: str

    @property
    def rate(self) -> float:
        if self.regime == "uncorrelated":
            return self.n_f * self.gamma
        if self.regime == "fully-correlated":
            return self.n_e ** 2 * self.gamma
        raise ValueError(f"unknown regime {self.regime!r}")

    def to_dict(self) -> dict:
        return {"n_f": self.n_f, "n_e": self.n_e, "gamma": self.gamma,
                "regime": self.regime, "predicted_rate": self.rate}


def parse_bits(bits: str, n_qubits: int) -> int:
    if len(bits) != n_qubits or set(bits) - {"0", "1"}:
        raise ValueError(f"basis label {bits!r} must be {n_qubits} characters of 0/1")
    return int(bits, 2)


def flip_counts(bra: str, ket: str) -> tuple[int, int]:
    """``(n_f, n_e)``: flipped qubits and excitation-number difference."""
    n_f = sum(a != b for a, b in zip(bra, ket))
    n_e = abs(bra.count("1") - ket.count("1"))
    return n_f, n_e


def _coherence_rate(system, model, i: int, j: int, t_max: float, n_times: int) -> DecayFit:
    d = system.dim
    psi = np.zeros(d, dtype=complex)
    psi[i] = psi[j] = 1.0 / math.sqrt(2.0)
    gen = build_br_generator(system, model)
    traj = propagate(gen, qc.pure_state(psi), np.linspace(0.0, t_max, n_times))
    return extract_decay_rate(traj, i, j)


def single_qubit_rate(model, coupling_strength: float = 1.0, n_times: int = 201) -> float:
    """Dephasing rate of one sigma_z-coupled qubit, measured by propagation."""
    system = qubit_chain(1, coupling="z", strength=coupling_strength)
    c00 = model.evaluate(0.0, Site(0.0), Site(0.0)).real * coupling_strength ** 2
    t_max = 5.0 / max(c00, 1e-12)
    return _coherence_rate(system, model, 0, 1, t_max, n_times).rate


def scaling_experiment(n_qubits: int, model, bra: str, ket: str, regime: str | None = None,
                       spacing: float = 1.0, coupling_strength: float = 1.0,
                       n_times: int = 401) -> tuple[float, ScalingPrediction]:
    """Simulated decay rate of ``|bra><ket|`` and the limiting-regime prediction.

    Qubits sit at ``0, spacing, 2 spacing, ...``; basis labels are bit
    strings read as binary indices of the product basis. ``gamma`` is the
    tool's own single-qubit rate for the same model. Without an explicit
    ``regime`` it is picked from the correlation between the outermost
    qubits: ``fully-correlated`` if ``C(0, L)/C(0, 0) > 1/2``.
    """
    if not 1 <= n_qubits <= 6:
        raise ValueError("scaling experiments are limited to 1..6 qubits")
    i, j = parse_bits(bra, n_qubits), parse_bits(ket, n_qubits)
    if i == j:
        raise ValueError("bra and ket must differ")
    gamma = single_qubit_rate(model, coupling_strength)
    n_f, n_e = flip_counts(bra, ket)
    if regime is None:
        c00, c0l = _c0(model, spacing * (n_qubits - 1))
        regime = "fully-correlated" if c0l > 0.5 * c00 else "uncorrelated"
    pred = ScalingPrediction(n_f, n_e, gamma, regime)
    system = qubit_chain(n_qubits, positions=[spacing * q for q in range(n_qubits)],
                         coupling="z", strength=coupling_strength)
    t_max = 5.0 / max(gamma, 1e-12)
    fit = _coherence_rate(system, model, i, j, t_max, n_times)
    return fit.rate, pred
