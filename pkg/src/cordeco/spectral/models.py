"""Uniform evaluation of spatially resolved spectral functions.

Every model answers ``evaluate(omega, site_j, site_k)`` with the complex
number ``C_jk(omega) + i F_jk(omega)``: ``C`` is the full Fourier transform
of the bath correlator ``<B_j(tau) B_k(0)>`` and ``F`` the imaginary part of
the one-sided transform (zero unless the model knows it). A site is any
object with ``position``, ``group`` and ``bath`` attributes; sites in
different groups see independent baths and evaluate to exactly zero.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .bosonic import BosonicChainParams, bosonic_spectral
from .ising import IsingParams, ising_one_sided, ising_spectral_zero
from .kernels import KINDS as PHENOMENOLOGICAL_KINDS
from .kernels import phenomenological_kernel
from .tabulated import SpectralTable, load_table

MODEL_KINDS = PHENOMENOLOGICAL_KINDS + ("ising", "bosonic-chain", "tabulated")


@dataclass(frozen=True)
class Site:
    position: float = 0.0
    group: str = "bath"
    bath: str = "B"


class SpectralModel:
    """Base class; subclasses implement `real` and optionally `imag`."""

    kind: str = "abstract"
    spacing: float = 1.0

    def separation(self, site_j, site_k) -> float:
        return (site_j.position - site_k.position) / self.spacing

    def lattice_separation(self, site_j, site_k) -> int:
        d = self.separation(site_j, site_k)
        m = round(d)
        if abs(d - m) > 1e-9:
            raise ValueError(f"{self.kind} model needs sites on lattice points, separation is {d} steps")
        return int(m)

    def real(self, omega: float, site_j, site_k) -> float:
        raise NotImplementedError

    def imag(self, omega: float, site_j, site_k) -> float:
        return 0.0

    def evaluate(self, omega: float, site_j, site_k) -> complex:
        if site_j.group != site_k.group:
            return 0j
        re = self.real(omega, site_j, site_k)
        if not math.isfinite(re):
            raise ValueError(f"{self.kind} model returned non-finite value at omega={omega}")
        return complex(re, self.imag(omega, site_j, site_k))

    def matrix(self, omega: float, sites) -> np.ndarray:
        n = len(sites)
        out = np.zeros((n, n), dtype=complex)
        for j in range(n):
            for k in range(n):
                out[j, k] = self.evaluate(omega, sites[j], sites[k])
        return out

    def describe(self) -> dict:
        return {"kind": self.kind}


@dataclass(frozen=True)
class PhenomenologicalModel(SpectralModel):
    """Frequency-flat (white) noise with a homogeneous spatial kernel.

    ``C(omega, dx) = strength * kernel(dx / spacing)`` and likewise for the
    optional Lamb-shift part with ``lamb_strength``.
    """

    kind: str = "exponential"
    a: float | None = 1.0
    strength: float = 1.0
    lamb_strength: float = 0.0
    spacing: float = 1.0

    def __post_init__(self):
        if self.kind not in PHENOMENOLOGICAL_KINDS:
            raise ValueError(f"unknown phenomenological kernel {self.kind!r}")
        # Validates a for the decaying kinds.
        phenomenological_kernel(self.kind, self.a, 0)

    def real(self, omega, site_j, site_k):
        return self.strength * phenomenological_kernel(self.kind, self.a, self.separation(site_j, site_k))

    def imag(self, omega, site_j, site_k):
        if self.lamb_strength == 0.0:
            return 0.0
        return self.lamb_strength * phenomenological_kernel(self.kind, self.a, self.separation(site_j, site_k))

    def describe(self):
        return {"kind": self.kind, "a": self.a, "strength": self.strength,
                "lamb_strength": self.lamb_strength, "spacing": self.spacing}


@dataclass(frozen=True)
class IsingModel(SpectralModel):
    """Dephasing by a Glauber Ising chain, ``B_j = coupling * S_(x_j)``."""

    params: IsingParams = field(default_factory=lambda: IsingParams(1.0, 1.0, 1.0))
    coupling: float = 1.0
    kind: str = "ising"

    @property
    def spacing(self) -> float:  # type: ignore[override]
        return self.params.spacing

    def real(self, omega, site_j, site_k):
        dx = self.lattice_separation(site_j, site_k)
        if omega == 0.0 and self.params.J > 0:
            return self.coupling ** 2 * ising_spectral_zero(self.params, dx)
        return self.coupling ** 2 * 2.0 * ising_one_sided(self.params, omega, dx).real

    def imag(self, omega, site_j, site_k):
        dx = self.lattice_separation(site_j, site_k)
        return self.coupling ** 2 * ising_one_sided(self.params, omega, dx).imag

    def describe(self):
        p = self.params
        return {"kind": self.kind, "J": p.J, "beta": p.beta, "alpha": p.alpha,
                "spacing": p.spacing, "coupling": self.coupling}


@dataclass(frozen=True)
class BosonicChainModel(SpectralModel):
    """Tight-binding oscillator chain.

    ``mode="BdagB"`` (or ``"BBdag"``) uses that single channel as a scalar
    kernel for every pair of sites, which is how qubit dephasing rates are
    quoted. ``mode="pairs"`` routes by the sites' ``bath`` tags: a coupling
    to ``B`` and one to ``Bdag`` form a conjugate pair, ``(Bdag, B)`` picks
    the ``BdagB`` channel, ``(B, Bdag)`` the ``BBdag`` channel and equal tags
    give zero.
    """

    params: BosonicChainParams = field(default_factory=lambda: BosonicChainParams(0.0, 1.0, 1.0))
    mode: str = "BdagB"
    coupling: float = 1.0
    kind: str = "bosonic-chain"

    def __post_init__(self):
        if self.mode not in ("BdagB", "BBdag", "pairs"):
            raise ValueError(f"unknown bosonic mode {self.mode!r}")

    @property
    def spacing(self) -> float:  # type: ignore[override]
        return self.params.spacing

    def channel(self, site_j, site_k) -> str | None:
        if self.mode != "pairs":
            return self.mode
        tags = (site_j.bath, site_k.bath)
        return {("Bdag", "B"): "BdagB", ("B", "Bdag"): "BBdag"}.get(tags)

    def real(self, omega, site_j, site_k):
        ch = self.channel(site_j, site_k)
        if ch is None:
            return 0.0
        dx = self.lattice_separation(site_j, site_k)
        return self.coupling ** 2 * bosonic_spectral(self.params, omega, dx, ch)

    def describe(self):
        p = self.params
        return {"kind": self.kind, "omega0": p.omega0, "g": p.g, "beta": p.beta, "N": p.N,
                "spacing": p.spacing, "dispersion": p.dispersion, "occupation": p.occupation,
                "mode": self.mode, "coupling": self.coupling}


@dataclass(frozen=True)
class TabulatedModel(SpectralModel):
    table: SpectralTable | None = None
    source: str = ""
    spacing: float = 1.0
    kind: str = "tabulated"

    @classmethod
    def from_csv(cls, path, spacing: float = 1.0) -> "TabulatedModel":
        return cls(table=load_table(path), source=str(path), spacing=spacing)

    def real(self, omega, site_j, site_k):
        return self.table.real(omega, self.separation(site_j, site_k))

    def imag(self, omega, site_j, site_k):
        return self.table.imag(omega, self.separation(site_j, site_k))

    def describe(self):
        return {"kind": self.kind, "source": self.source, "spacing": self.spacing}
