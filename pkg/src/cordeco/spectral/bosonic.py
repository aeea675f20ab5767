"""Tight-binding chain of coupled oscillators as a bath.

The bath operator at lattice site ``x`` is the local lowering operator
``a_x``. Modes are ``k_n = 2 pi n / (N w)`` for ``n`` in ``[-N/2, N/2)``
with dispersion ``omega_k = omega0 - 2 g cos(k w)``. The ``linear``
dispersion ``omega0 + 2 g (|k| w - pi/2)`` keeps only propagating
excitations; the equal-time Lorentzian profile and the ``1/tau`` tail of
the correlator hold for that linearised chain.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

CHANNELS = ("BdagB", "BBdag", "BB", "BdagBdag")


class SingularPointError(ValueError):
    """Evaluation hit the integrable band-edge singularity."""


@dataclass(frozen=True)
class BosonicChainParams:
    omega0: float
    g: float
    beta: float
    N: int = 4096
    spacing: float = 1.0
    dispersion: str = "cosine"
    occupation: str = "boltzmann"

    def __post_init__(self):
        if self.N < 2 or self.N % 2:
            raise ValueError(f"mode count N must be even and >= 2, got {self.N}")
        if self.dispersion not in ("cosine", "linear"):
            raise ValueError(f"unknown dispersion {self.dispersion!r}")
        if self.occupation not in ("boltzmann", "bose-einstein"):
            raise ValueError(f"unknown occupation model {self.occupation!r}")
        if not all(math.isfinite(v) for v in (self.omega0, self.g, self.beta)):
            raise ValueError("bosonic chain parameters must be finite")

    def k_grid(self) -> np.ndarray:
        n = np.arange(-self.N // 2, self.N // 2)
        return 2.0 * np.pi * n / (self.N * self.spacing)

    def mode_energies(self) -> np.ndarray:
        kw = self.k_grid() * self.spacing
        if self.dispersion == "cosine":
            return self.omega0 - 2.0 * self.g * np.cos(kw)
        return self.omega0 + 2.0 * self.g * (np.abs(kw) - np.pi / 2)

    def occupation_of(self, energy):
        energy = np.asarray(energy, dtype=float)
        if self.occupation == "boltzmann":
            return np.exp(-self.beta * energy)
        return 1.0 / np.expm1(self.beta * energy)


def _check_dx(dx) -> int:
    if float(dx) != int(dx):
        raise ValueError(f"chain separations are integer lattice steps, got {dx}")
    return int(dx)


def bosonic_correlation_exact(params: BosonicChainParams, dx: int, tau: float) -> dict[str, complex]:
    """Finite-chain bath correlators for all four operator orderings.

    ``BdagB`` is ``<B^+(tau, x) B(0, x')>`` and ``BBdag`` is
    ``<B(tau, x) B^+(0, x')>`` with ``dx = x - x'``; the anomalous orderings
    vanish for a state diagonal in the mode occupation basis.
    """
    dx = _check_dx(dx)
    kw = params.k_grid() * params.spacing
    wk = params.mode_energies()
    nk = params.occupation_of(wk)
    phase = np.exp(-1j * kw * dx + 1j * wk * tau)
    return {
        "BdagB": complex(np.mean(phase * nk)),
        "BBdag": complex(np.mean(np.conj(phase) * (1.0 + nk))),
        "BB": 0j,
        "BdagBdag": 0j,
    }


def bosonic_spectral(params: BosonicChainParams, omega: float, dx: int, channel: str = "BdagB") -> float:
    """Large-chain spectral function of the cosine-dispersion chain.

    For ``|omega + omega0| < 2|g|``::

        C(omega, dx) = cos[dx arccos(-(omega + omega0) / 2g)] n(|omega|)
                       / (pi sqrt(4 g^2 - (omega + omega0)^2))

    and zero outside the band. ``channel="BBdag"`` maps ``omega -> -omega``
    and ``n -> 1 + n``. The band edge itself raises `SingularPointError`.
    """
    dx = _check_dx(dx)
    if params.g == 0:
        raise ValueError("the closed-form spectral function needs g != 0")
    if channel in ("BB", "BdagBdag"):
        return 0.0
    if channel not in ("BdagB", "BBdag"):
        raise ValueError(f"unknown channel {channel!r}")
    w = omega if channel == "BdagB" else -omega
    shifted = w + params.omega0
    edge = 2.0 * abs(params.g)
    if abs(abs(shifted) - edge) <= 1e-12 * max(1.0, edge):
        raise SingularPointError(f"omega={omega} sits on the band edge |omega+omega0| = 2|g|")
    if abs(shifted) > edge:
        return 0.0
    occ = float(params.occupation_of(abs(omega)))
    if channel == "BBdag":
        occ = 1.0 + occ
    spatial = math.cos(dx * math.acos(-shifted / (2.0 * params.g)))
    return spatial * occ / (math.pi * math.sqrt(edge * edge - shifted * shifted))


def bosonic_tau0_profile(params: BosonicChainParams, dx: int) -> float:
    """Normalised equal-time correlation ``(2 beta g)^2 / ((2 beta g)^2 + dx^2)``.

    Valid for ``beta g >> 1`` and linearised dispersion; the correlation
    length is ``2 w beta g``.
    """
    dx = _check_dx(dx)
    if params.beta * abs(params.g) < 1.0:
        warnings.warn("Lorentzian equal-time profile assumes beta*g >> 1", stacklevel=2)
    xi = 2.0 * params.beta * params.g
    return xi * xi / (xi * xi + dx * dx)
