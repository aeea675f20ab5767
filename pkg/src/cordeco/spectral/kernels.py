"""Homogeneous phenomenological spatial kernels on an equidistant chain."""
from __future__ import annotations

import numpy as np

DECAYING_KINDS = ("exponential", "gaussian")
KINDS = DECAYING_KINDS + ("step",)


def phenomenological_kernel(kind: str, a: float | None, m):
    """Spatial correlation between sites separated by ``m`` lattice steps.

    ``exponential`` gives ``exp(-a|m|)``, ``gaussian`` gives ``exp(-a m^2)``
    and ``step`` is 1 for ``|m| < 2`` and 0 otherwise. ``a`` is the ratio of
    site spacing to correlation length and must be positive for the decaying
    kinds; it is ignored for ``step``.
    """
    m = np.abs(np.asarray(m, dtype=float))
    if kind in DECAYING_KINDS:
        if a is None or not np.isfinite(a) or a <= 0:
            raise ValueError(f"decay parameter a must be positive for {kind} kernels, got {a}")
        out = np.exp(-a * m) if kind == "exponential" else np.exp(-a * m * m)
    elif kind == "step":
        out = np.where(m < 2, 1.0, 0.0)
    else:
        raise ValueError(f"unknown kernel kind {kind!r}")
    return float(out) if out.ndim == 0 else out


def kernel_elements(kind: str, a: float | None, m_max: int) -> np.ndarray:
    """Toeplitz elements ``t_0 .. t_m_max`` of a symmetric kernel."""
    return np.asarray(phenomenological_kernel(kind, a, np.arange(m_max + 1)), dtype=float)


def kernel_matrix(kind: str, a: float | None, n: int) -> np.ndarray:
    """The ``n x n`` coefficient matrix ``C_jk = kernel(j - k)``."""
    idx = np.arange(n)
    return np.asarray(phenomenological_kernel(kind, a, idx[:, None] - idx[None, :]), dtype=float)
