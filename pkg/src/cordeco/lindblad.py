"""Complete-positivity decisions for Kossakowski-type coefficient matrices.

A dissipator ``sum_jk C_jk (s_k rho s_j^+ - 1/2 {s_j^+ s_k, rho})`` has
Lindblad form with non-negative rates iff the Hermitian matrix ``C`` is
positive semi-definite; by Sylvester's law of inertia no congruence can
remove a negative eigenvalue. For homogeneous kernels on an equidistant
chain ``C`` is Toeplitz and its spectrum is bracketed by the range of the
symbol ``f(lam) = sum_m t_m exp(-i m lam)``.
"""
from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Sequence

import numpy as np
import scipy.linalg

from . import quantum as qc
from .diagnostics import Diagnostic
from .spectral.kernels import phenomenological_kernel

log = logging.getLogger(__name__)

PSD_RTOL = 1e-10
DEFAULT_GRID = 4096
_EXACT_MINOR_MAX = 8


class MappingError(ValueError):
    pass


@dataclass(frozen=True)
class LindbladForm:
    """Diagonal form ``sum_k rate_k (L_k rho L_k^+ - 1/2 {L_k^+ L_k, rho})``.

    ``lindblad_ops[k] = sum_j w[j, k] s_j``.
    """

    rates: np.ndarray
    lindblad_ops: tuple[np.ndarray, ...]
    w: np.ndarray
    diagnostics: tuple[Diagnostic, ...] = ()
    mappable: bool = field(default=True, init=False)

    def dissipator(self) -> np.ndarray:
        return qc.dissipator(np.diag(self.rates), self.lindblad_ops)


@dataclass(frozen=True)
class CPVerdict:
    mappable: bool
    eigenvalues: np.ndarray
    negative_eigenvalues: tuple[float, ...]
    psd_tol: float
    witness: dict | None = None
    diagnostics: tuple[Diagnostic, ...] = ()

    def to_dict(self) -> dict:
        return {
            "mappable": self.mappable,
            "min_eigenvalue": float(np.min(self.eigenvalues)) if len(self.eigenvalues) else None,
            "max_eigenvalue": float(np.max(self.eigenvalues)) if len(self.eigenvalues) else None,
            "negative_eigenvalues": list(self.negative_eigenvalues),
            "psd_tol": self.psd_tol,
            "witness": self.witness,
        }


def _as_hermitian(matrix) -> np.ndarray:
    c = np.asarray(getattr(matrix, "effective", matrix), dtype=complex)
    if c.ndim != 2 or c.shape[0] != c.shape[1]:
        raise MappingError(f"coefficient matrix must be square, got shape {c.shape}")
    if not qc.is_hermitian(c):
        raise MappingError(f"coefficient matrix is not Hermitian (error {qc.hermiticity_error(c):.3e})")
    return 0.5 * (c + c.conj().T)


def default_psd_tol(eigenvalues: np.ndarray) -> float:
    scale = float(np.max(np.abs(eigenvalues))) if len(eigenvalues) else 0.0
    return PSD_RTOL * scale


def exact_determinant(m: np.ndarray) -> Fraction:
    """Determinant of a real matrix, exact in the binary values of its entries (Bareiss)."""
    a = [[Fraction(float(x)) for x in row] for row in np.real(m)]
    n = len(a)
    sign = 1
    prev = Fraction(1)
    for k in range(n - 1):
        if a[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if a[i][k] != 0), None)
            if swap is None:
                return Fraction(0)
            a[k], a[swap] = a[swap], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1] if n else Fraction(1)


def _minor_witness(c: np.ndarray) -> dict | None:
    n = c.shape[0]
    real = bool(np.all(np.abs(c.imag) == 0))
    for k in range(1, n + 1):
        sub = c[:k, :k]
        if real and k <= _EXACT_MINOR_MAX:
            det = exact_determinant(sub)
            value = float(det)
        else:
            value = float(np.real(np.linalg.det(sub)))
        if value < 0:
            return {
                "kind": "leading-principal-minor",
                "size": k,
                "det": value,
                "exact": real and k <= _EXACT_MINOR_MAX,
                "submatrix": np.real(sub).tolist() if real else [[str(x) for x in r] for r in sub],
            }
    return None


def psd_check(matrix, psd_tol: float | None = None) -> CPVerdict:
    """Eigenvalue-based positive-semidefiniteness test with a certificate.

    When the matrix is not PSD the witness holds the eigenvector of the most
    negative eigenvalue and, if one exists, the smallest leading principal
    minor that is negative.
    """
    c = _as_hermitian(matrix)
    lam, vecs = np.linalg.eigh(c)
    tol = default_psd_tol(lam) if psd_tol is None else abs(psd_tol)
    neg = tuple(float(x) for x in lam if x < -tol)
    if not neg:
        diags = ()
        clamped = [x for x in lam if -tol <= x < 0]
        if clamped:
            diags = (Diagnostic("W002", f"{len(clamped)} eigenvalue(s) >= {min(clamped):.3e} clamped to 0"),)
        return CPVerdict(True, lam, (), tol, None, diags)
    i = int(np.argmin(lam))
    witness = {"eigenvalue": float(lam[i]),
               "eigenvector_real": np.real(vecs[:, i]).tolist(),
               "eigenvector_imag": np.imag(vecs[:, i]).tolist()}
    minor = _minor_witness(c)
    diags = [Diagnostic("W003", f"{len(neg)} negative eigenvalue(s), min {lam[i]:.6g}")]
    if minor is not None:
        witness["minor"] = minor
        diags.append(Diagnostic("W007", f"leading {minor['size']}x{minor['size']} minor = {minor['det']:.17g}"))
    return CPVerdict(False, lam, neg, tol, witness, tuple(diags))


def map_to_lindblad(coeff, ops: Sequence[np.ndarray] | None = None,
                    psd_tol: float | None = None) -> LindbladForm | CPVerdict:
    """Diagonalise a coefficient matrix into Lindblad rates and operators.

    ``coeff`` is a Hermitian array or a `CoefficientMatrix` (whose
    ``effective`` values and ``ops`` are used). Returns a `LindbladForm`
    when every eigenvalue is at least ``-psd_tol`` (tiny negatives are
    clamped to zero), otherwise the failing `CPVerdict`.

    With ``C = U diag(lam) U^+`` the operators are ``L_k = sum_j conj(U_jk) s_j``;
    for real symmetric ``C`` this is the orthogonal ``W = U``.
    """
    c = _as_hermitian(coeff)
    if ops is None:
        ops = getattr(coeff, "ops", None)
        if ops is None:
            raise MappingError("operator list required")
    ops = [qc.as_operator(s) for s in ops]
    if len(ops) != c.shape[0]:
        raise MappingError(f"{len(ops)} operators for a {c.shape[0]}x{c.shape[0]} coefficient matrix")
    verdict = psd_check(c, psd_tol)
    if not verdict.mappable:
        return verdict
    lam, u = np.linalg.eigh(c)
    rates = np.clip(lam, 0.0, None)
    if verdict.diagnostics:
        log.warning("clamping eigenvalues %s to zero", lam[lam < 0])
    w = u.conj()
    lops = tuple(sum(w[j, k] * ops[j] for j in range(len(ops))) for k in range(len(ops)))
    return LindbladForm(rates=rates, lindblad_ops=lops, w=w, diagnostics=verdict.diagnostics)


# --- Toeplitz kernels --------------------------------------------------------

@dataclass(frozen=True)
class ToeplitzKernel:
    """Hermitian Toeplitz elements ``t_0 .. t_M`` with ``t_-m = conj(t_m)``.

    ``tail_bound`` bounds ``sum_{|m| > M} |t_m|``. Kernels built with
    `from_kind` can produce elements beyond ``M`` exactly.
    """

    elements: np.ndarray
    tail_bound: float = 0.0
    kind: str | None = None
    a: float | None = None

    def __post_init__(self):
        t = np.asarray(self.elements, dtype=complex)
        if t.ndim != 1 or len(t) == 0:
            raise ValueError("need at least t_0")
        if abs(t[0].imag) > 1e-14 * max(1.0, abs(t[0])):
            raise ValueError("t_0 must be real for a Hermitian Toeplitz matrix")
        object.__setattr__(self, "elements", t)

    @classmethod
    def from_kind(cls, kind: str, a: float | None = None, tail_tol: float = 1e-16) -> "ToeplitzKernel":
        if kind == "step":
            return cls(np.array([1.0, 1.0]), 0.0, kind, a)
        if a is None or a <= 0:
            raise ValueError(f"decay parameter a must be positive for {kind} kernels")
        m = 1
        while _tail(kind, a, m) > tail_tol:
            m *= 2
        lo, hi = m // 2, m
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if _tail(kind, a, mid) > tail_tol:
                lo = mid
            else:
                hi = mid
        t = np.asarray(phenomenological_kernel(kind, a, np.arange(hi + 1)), dtype=float)
        return cls(t, _tail(kind, a, hi), kind, a)

    @property
    def m_max(self) -> int:
        return len(self.elements) - 1

    @property
    def summability(self) -> float:
        t = self.elements
        return float(abs(t[0]) + 2 * np.sum(np.abs(t[1:])) + self.tail_bound)

    def element(self, m: int) -> complex:
        if m < 0:
            return np.conj(self.element(-m))
        if m <= self.m_max:
            return self.elements[m]
        if self.kind is not None:
            return complex(phenomenological_kernel(self.kind, self.a, m))
        return 0j

    def matrix(self, n: int) -> np.ndarray:
        col = np.array([self.element(m) for m in range(n)])
        mat = scipy.linalg.toeplitz(col, col.conj())
        return mat.real if np.all(col.imag == 0) else mat

    def symbol(self, lam) -> np.ndarray:
        lam = np.asarray(lam, dtype=float)
        m = np.arange(1, self.m_max + 1)
        phases = np.exp(-1j * np.multiply.outer(lam, m))
        t = self.elements
        return (t[0].real + 2.0 * np.real(phases @ t[1:])) if len(m) else np.full(lam.shape, t[0].real)


def _tail(kind: str, a: float, m: int) -> float:
    """Bound on ``sum_{|k| > m} |t_k|`` for the decaying kinds."""
    if kind == "exponential":
        return 2.0 * math.exp(-a * (m + 1)) / (-math.expm1(-a))
    if kind == "gaussian":
        # Successive ratios exp(-a(2k+1)) are at most exp(-a(2m+3)) beyond m+1.
        return 2.0 * math.exp(-a * (m + 1) ** 2) / (-math.expm1(-a * (2 * m + 3)))
    raise ValueError(kind)


def _theta_product(q: float, sign: float, terms: int = 10_000) -> float:
    # prod (1 - q^2n)(1 + sign q^(2n-1))^2; sign=+1 gives theta_3(0), -1 theta_4(0).
    out = 1.0
    for n in range(1, terms):
        q2n = q ** (2 * n)
        f = (1.0 - q2n) * (1.0 + sign * q ** (2 * n - 1)) ** 2
        out *= f
        if abs(f - 1.0) < 1e-17:
            break
    return out


def symbol_closed_form_range(kind: str, a: float | None) -> tuple[float, float] | None:
    """Exact ``(min, max)`` of the symbol for the built-in kernels.

    exponential: ``tanh(a/2)`` and ``coth(a/2)`` (at ``lam = pi`` and 0);
    gaussian: Jacobi theta values ``theta_4(0, e^-a)`` and ``theta_3(0, e^-a)``
    from the triple-product form; step: ``1 + 2 cos(lam)`` spans ``[-1, 3]``.
    """
    if kind == "step":
        return -1.0, 3.0
    if kind == "exponential":
        return math.tanh(a / 2.0), 1.0 / math.tanh(a / 2.0)
    if kind == "gaussian":
        q = math.exp(-a)
        return _theta_product(q, -1.0), _theta_product(q, +1.0)
    return None


@dataclass(frozen=True)
class FourierBounds:
    f_min: float
    f_max: float
    grid_min: float
    grid_max: float
    closed_form: tuple[float, float] | None
    tail_bound: float
    grid_size: int


def toeplitz_fourier_bounds(kernel: ToeplitzKernel, grid_size: int = DEFAULT_GRID,
                            precision: float = 1e-9) -> FourierBounds:
    """Range of the symbol ``f(lam)`` on a uniform grid over ``[0, 2 pi)``.

    The grid range is widened by the truncation tail bound. Built-in kernel
    kinds report their exact range as ``f_min``/``f_max``; otherwise the
    widened grid range is used. Raises `ValueError` when the tail bound
    exceeds ``precision``.
    """
    if kernel.tail_bound > precision:
        raise ValueError(f"kernel tail bound {kernel.tail_bound:.3e} exceeds requested precision {precision:.1e}")
    lam = 2.0 * np.pi * np.arange(grid_size) / grid_size
    vals = kernel.symbol(lam)
    gmin, gmax = float(np.min(vals)), float(np.max(vals))
    closed = symbol_closed_form_range(kernel.kind, kernel.a) if kernel.kind else None
    if closed is not None:
        f_min, f_max = closed
    else:
        f_min, f_max = gmin - kernel.tail_bound, gmax + kernel.tail_bound
    return FourierBounds(f_min, f_max, gmin, gmax, closed, kernel.tail_bound, grid_size)


def eigenvalue_bound_check(kernel: ToeplitzKernel, n: int, tol: float = 1e-9,
                           bounds: FourierBounds | None = None) -> bool:
    """True iff every eigenvalue of the ``n x n`` Toeplitz matrix lies in ``[f_min - tol, f_max + tol]``."""
    if n < 1:
        raise ValueError("n must be at least 1")
    b = toeplitz_fourier_bounds(kernel) if bounds is None else bounds
    lam = np.linalg.eigvalsh(kernel.matrix(n))
    return bool(lam.min() >= b.f_min - tol and lam.max() <= b.f_max + tol)


def audit_kernel(kind: str, a: float | None, n: int, psd_tol: float | None = None,
                 grid_size: int = DEFAULT_GRID) -> dict:
    """Positivity audit of a homogeneous kernel on ``n`` equidistant sites, as a JSON-ready dict."""
    kernel = ToeplitzKernel.from_kind(kind, a)
    mat = kernel.matrix(n)
    verdict = psd_check(mat, psd_tol)
    bounds = toeplitz_fourier_bounds(kernel, grid_size)
    return {
        "kernel": {"kind": kind, "a": a, "m_max": kernel.m_max, "summability": kernel.summability,
                   "tail_bound": kernel.tail_bound},
        "n": n,
        "eigenvalue_min": float(verdict.eigenvalues.min()),
        "eigenvalue_max": float(verdict.eigenvalues.max()),
        "f_min": bounds.f_min,
        "f_max": bounds.f_max,
        "grid_min": bounds.grid_min,
        "grid_max": bounds.grid_max,
        "within_bounds": eigenvalue_bound_check(kernel, n, bounds=bounds),
        "witness": verdict.witness,
        "decision": "mappable" if verdict.mappable else "not-mappable",
    }


def write_verdict_report(report: dict, path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    return path
