"""Classical Ising chain with Glauber spin-flip dynamics as a dephasing bath.

Spins sit on a lattice of spacing ``w``; all separations are integer numbers
of lattice steps. Each spin flips at rate ``alpha / 2``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

DEFAULT_TRUNCATION_TOL = 1e-9


@dataclass(frozen=True)
class IsingParams:
    J: float
    beta: float
    alpha: float
    spacing: float = 1.0

    def __post_init__(self):
        if not math.isfinite(self.J * self.beta):
            raise ValueError("J * beta must be finite")
        if not (math.isfinite(self.alpha) and self.alpha > 0):
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if self.spacing <= 0:
            raise ValueError("lattice spacing must be positive")

    @property
    def eta(self) -> float:
        """Nearest-neighbour equal-time correlation ``tanh(beta J)``."""
        return math.tanh(self.beta * self.J)

    @property
    def zeta(self) -> float:
        return math.cosh(2.0 * self.J * self.beta)

    @property
    def gamma(self) -> float:
        """Glauber coupling ``tanh(2 beta J)``."""
        return math.tanh(2.0 * self.beta * self.J)


def _check_dx(dx) -> int:
    if float(dx) != int(dx):
        raise ValueError(f"Ising separations are integer lattice steps, got {dx}")
    return int(dx)


def ising_spatial(params: IsingParams, dx: int) -> float:
    """Equal-time spin correlation ``tanh(beta J)^|dx|``."""
    dx = abs(_check_dx(dx))
    return params.eta ** dx


def _bessel_terms(x: float, damp: float, ls: np.ndarray) -> np.ndarray:
    # I_l(x) exp(-damp), computed through the scaled Bessel function.
    ax = abs(x)
    vals = special.ive(ls, ax) * math.exp(ax - damp)
    if x < 0:
        vals = vals * np.where(ls % 2 == 0, 1.0, -1.0)
    return vals


def _tail_bound(eta: float, x: float, damp: float, dx: int, l_max: int) -> float:
    """Upper bound on the terms with ``|l| > l_max`` of the Glauber sum.

    For ``|l| > |dx|`` one has ``|eta|^|dx+l| <= |eta|^(|l|-|dx|)`` and the
    term-wise series bound ``I_(m+1)(y) <= y / (2(m+1)) I_m(y)`` gives
    ``I_m <= I_(L+1) q^(m-L-1)`` with ``q = min(1, y / (2(L+2)))``.
    Both sides of the sum contribute, hence the factor 2.
    """
    if l_max < abs(dx):
        return math.inf
    y = abs(x)
    e = abs(eta)
    q = min(1.0, y / (2.0 * (l_max + 2)))
    ratio = e * q
    if ratio >= 1.0:
        return math.inf
    first = float(special.ive(l_max + 1, y)) * math.exp(y - damp)
    return 2.0 * first * e ** (l_max + 1 - abs(dx)) / (1.0 - ratio)


def ising_spatiotemporal(params: IsingParams, dx: int, tau: float, l_max: int | None = None,
                         tol: float = DEFAULT_TRUNCATION_TOL) -> tuple[float, float]:
    """Glauber space-time correlation ``<S_x(0) S_x'(tau)>`` and its truncation bound.

    Sums ``eta^|dx+l| I_l(gamma alpha |tau|) exp(-alpha |tau|)`` over
    ``|l| <= l_max``. With ``l_max=None`` the cutoff is doubled from
    ``max(|dx|, 8)`` until the reported bound drops below ``tol``.

    Returns
    -------
    value, bound
        The partial sum and an upper bound on the neglected tail.
    """
    dx = _check_dx(dx)
    if l_max is not None and l_max < 1:
        raise ValueError("l_max must be at least 1")
    eta = params.eta
    tau = abs(float(tau))
    x = params.gamma * params.alpha * tau
    damp = params.alpha * tau
    if tau == 0.0:
        return ising_spatial(params, dx), 0.0
    if l_max is None:
        l_max = max(abs(dx), 8)
        while _tail_bound(eta, x, damp, dx, l_max) >= tol:
            l_max *= 2
            if l_max > 10_000_000:
                raise RuntimeError("Glauber sum did not converge")
    ls = np.arange(-l_max, l_max + 1)
    weights = float(eta) ** np.abs(dx + ls).astype(float)
    value = float(np.sum(weights * _bessel_terms(x, damp, np.abs(ls))))
    return value, _tail_bound(eta, x, damp, dx, l_max)


def ising_spectral_zero(params: IsingParams, dx: int) -> float:
    """Zero-frequency spectral function ``2 (|dx| + zeta) zeta eta^|dx| / alpha``."""
    if params.J <= 0:
        raise ValueError("the zero-frequency closed form assumes J > 0")
    dx = abs(_check_dx(dx))
    z, e = params.zeta, params.eta
    return 2.0 * (dx + z) * z * e ** dx / params.alpha


def ising_one_sided(params: IsingParams, omega: float, dx: int) -> complex:
    """One-sided transform ``int_0^inf exp(i omega tau) <S S(tau)> dtau``.

    Each summand is a Laplace transform of a modified Bessel function,
    ``int_0^inf exp(-p t) I_l(c t) dt = r^|l| / s`` with ``p = alpha - i omega``,
    ``s = sqrt(p^2 - c^2)``, ``r = c / (p + s)``. The lattice sum over ``l``
    is then geometric. The real part is half the spectral function and the
    imaginary part drives the Lamb shift.
    """
    dx = abs(_check_dx(dx))
    c = params.gamma * params.alpha
    p = complex(params.alpha, -omega)
    s = np.sqrt(p * p - c * c)
    r = c / (p + s)
    e = params.eta
    er = e * r
    if dx == 0:
        total = 2.0 / (1.0 - er) - 1.0
    else:
        middle = sum(e ** (dx - i) * r ** i for i in range(1, dx))
        total = (e ** dx + r ** dx) / (1.0 - er) + middle
    return complex(total / s)


def ising_spectral(params: IsingParams, omega: float, dx: int) -> float:
    """Full spectral function ``C(omega, dx)`` (twice the one-sided real part)."""
    return 2.0 * ising_one_sided(params, omega, dx).real
