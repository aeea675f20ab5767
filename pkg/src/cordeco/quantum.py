"""Dense operator algebra shared by the rest of the package.

Operators are plain complex ``numpy`` arrays. Superoperators act on
column-stacked density matrices, i.e. ``vec(A @ X @ B) = (B.T kron A) vec(X)``
with ``vec(X) = X.flatten(order="F")``. Units are chosen so that hbar = 1.
"""
from __future__ import annotations

from functools import reduce
from typing import Sequence

import numpy as np

HERMITIAN_ATOL = 1e-12
TRACE_ATOL = 1e-10
POSITIVITY_ATOL = 1e-10

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
SIGMA_PLUS = np.array([[0, 1], [0, 0]], dtype=complex)
SIGMA_MINUS = np.array([[0, 0], [1, 0]], dtype=complex)
IDENTITY_2 = np.eye(2, dtype=complex)


class OperatorError(ValueError):
    """Raised when an operator violates a structural requirement."""


def as_operator(a) -> np.ndarray:
    """Return ``a`` as a square complex matrix, raising on bad shapes."""
    arr = np.asarray(a, dtype=complex)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] < 1:
        raise OperatorError(f"operator must be a non-empty square matrix, got shape {arr.shape}")
    return arr


def hermiticity_error(a: np.ndarray) -> float:
    a = np.asarray(a)
    return float(np.max(np.abs(a - a.conj().T))) if a.size else 0.0


def is_hermitian(a: np.ndarray, atol: float = HERMITIAN_ATOL) -> bool:
    # Absolute tolerance for entries of order one, relative above that.
    scale = max(1.0, float(np.max(np.abs(a)))) if np.size(a) else 1.0
    return hermiticity_error(a) < atol * scale


def dagger(a: np.ndarray) -> np.ndarray:
    return np.asarray(a).conj().T


def tensor(*ops: np.ndarray) -> np.ndarray:
    """Kronecker product with the first factor as the leftmost (site 0) factor."""
    if not ops:
        raise OperatorError("tensor needs at least one operator")
    return reduce(np.kron, (as_operator(op) for op in ops))


def embed_site(op: np.ndarray, site: int, n_sites: int, local_dim: int | None = None) -> np.ndarray:
    """Place ``op`` on ``site`` of an ``n_sites`` register, identities elsewhere.

    >>> embed_site(SIGMA_Z, 1, 2).real.diagonal()
    array([ 1., -1.,  1., -1.])
    """
    op = as_operator(op)
    d = op.shape[0] if local_dim is None else local_dim
    if not 0 <= site < n_sites:
        raise IndexError(f"site {site} out of range for {n_sites} sites")
    eye = np.eye(d, dtype=complex)
    return tensor(*[op if k == site else eye for k in range(n_sites)])


def basis_state(index: int, dim: int) -> np.ndarray:
    v = np.zeros(dim, dtype=complex)
    v[index] = 1.0
    return v


def _canonical_subspace_basis(q: np.ndarray, tol: float) -> np.ndarray:
    # Gram-Schmidt on the projector's columns taken in index order, so the
    # basis depends only on the subspace and not on the LAPACK output.
    proj = q @ q.conj().T
    k = q.shape[1]
    out: list[np.ndarray] = []
    for i in range(proj.shape[0]):
        v = proj[:, i].copy()
        for u in out:
            v -= (u.conj() @ v) * u
        nrm = np.linalg.norm(v)
        if nrm > tol:
            out.append(v / nrm)
        if len(out) == k:
            break
    return np.column_stack(out)


def _fix_phase(v: np.ndarray) -> np.ndarray:
    idx = int(np.argmax(np.abs(v) > 1e-8 * np.max(np.abs(v))))
    ph = v[idx] / abs(v[idx])
    return v / ph


def eigh(h: np.ndarray, degeneracy_tol: float | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Hermitian eigendecomposition with reproducible degenerate subspaces.

    Returns ascending eigenvalues ``w`` and a unitary ``v`` whose columns are
    the eigenvectors, so that ``h = v @ diag(w) @ v.conj().T``. Inside a
    degenerate cluster the basis is rebuilt canonically (Gram-Schmidt of the
    cluster projector applied to the computational basis in index order) and
    every column has its first significant entry made real positive.
    """
    h = as_operator(h)
    if not is_hermitian(h):
        raise OperatorError(f"eigh requires a Hermitian matrix (error {hermiticity_error(h):.3e})")
    h = 0.5 * (h + h.conj().T)
    w, v = np.linalg.eigh(h)
    if degeneracy_tol is None:
        degeneracy_tol = 1e-10 * max(1.0, float(np.max(np.abs(w))))
    v = v.copy()
    start = 0
    n = len(w)
    while start < n:
        stop = start + 1
        while stop < n and w[stop] - w[stop - 1] <= degeneracy_tol:
            stop += 1
        if stop - start > 1:
            mean = float(np.mean(w[start:stop]))
            w[start:stop] = mean
            v[:, start:stop] = _canonical_subspace_basis(v[:, start:stop], 1e-6)
        for c in range(start, stop):
            v[:, c] = _fix_phase(v[:, c])
        start = stop
    return w, v


def density_matrix(rho, atol: float = POSITIVITY_ATOL) -> np.ndarray:
    """Validate a density matrix and return a read-only copy.

    Raises `OperatorError` unless ``rho`` is Hermitian, has unit trace and no
    eigenvalue below ``-atol``.
    """
    rho = np.array(as_operator(rho), copy=True)
    if not is_hermitian(rho):
        raise OperatorError("density matrix is not Hermitian")
    tr = np.trace(rho)
    if abs(tr - 1.0) > TRACE_ATOL:
        raise OperatorError(f"density matrix trace is {tr.real:.12g}, expected 1")
    lo = float(np.min(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))))
    if lo < -atol:
        raise OperatorError(f"density matrix has negative eigenvalue {lo:.3e}")
    rho.flags.writeable = False
    return rho


def pure_state(psi) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex).ravel()
    psi = psi / np.linalg.norm(psi)
    return density_matrix(np.outer(psi, psi.conj()))


# --- superoperators (column stacking) -------------------------------------

def vec(x: np.ndarray) -> np.ndarray:
    return np.asarray(x).flatten(order="F")


def unvec(v: np.ndarray, dim: int | None = None) -> np.ndarray:
    v = np.asarray(v)
    if dim is None:
        dim = int(round(np.sqrt(v.size)))
    return v.reshape((dim, dim), order="F")


def spre(a: np.ndarray) -> np.ndarray:
    """Superoperator of ``X -> a @ X``."""
    a = as_operator(a)
    return np.kron(np.eye(a.shape[0]), a)


def spost(b: np.ndarray) -> np.ndarray:
    """Superoperator of ``X -> X @ b``."""
    b = as_operator(b)
    return np.kron(b.T, np.eye(b.shape[0]))


def sprepost(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Superoperator of ``X -> a @ X @ b``."""
    return np.kron(as_operator(b).T, as_operator(a))


def apply_super(sup: np.ndarray, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x)
    return unvec(sup @ vec(x), x.shape[0])


def coherent_part(h: np.ndarray) -> np.ndarray:
    """Superoperator of ``rho -> i[rho, h]`` (hbar = 1)."""
    return 1j * (spost(h) - spre(h))


def dissipator(coeffs: np.ndarray, ops: Sequence[np.ndarray]) -> np.ndarray:
    """Superoperator of ``sum_jk c_jk (s_k rho s_j^+ - 1/2 {s_j^+ s_k, rho})``."""
    coeffs = np.asarray(coeffs, dtype=complex)
    ops = [as_operator(s) for s in ops]
    if coeffs.shape != (len(ops), len(ops)):
        raise OperatorError("coefficient matrix does not match the operator list")
    d = ops[0].shape[0] if ops else 1
    out = np.zeros((d * d, d * d), dtype=complex)
    for j, sj in enumerate(ops):
        sjd = sj.conj().T
        for k, sk in enumerate(ops):
            c = coeffs[j, k]
            if c == 0:
                continue
            prod = sjd @ sk
            out += c * (sprepost(sk, sjd) - 0.5 * (spre(prod) + spost(prod)))
    return out


def superop_hermiticity_error(sup: np.ndarray, rng: np.random.Generator | None = None, n_probe: int = 3) -> float:
    """Largest anti-Hermitian residue of ``sup`` applied to random Hermitian inputs."""
    rng = np.random.default_rng(0) if rng is None else rng
    d = int(round(np.sqrt(sup.shape[0])))
    worst = 0.0
    for _ in range(n_probe):
        x = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        y = apply_super(sup, x + x.conj().T)
        worst = max(worst, hermiticity_error(y))
    return worst


def superop_trace_error(sup: np.ndarray) -> float:
    """Max |Tr(sup(X))| over the matrix-unit basis, i.e. size of vec(I)^T sup."""
    d = int(round(np.sqrt(sup.shape[0])))
    return float(np.max(np.abs(vec(np.eye(d)) @ sup)))


def trace_distance(a: np.ndarray, b: np.ndarray) -> float:
    diff = np.asarray(a) - np.asarray(b)
    diff = 0.5 * (diff + diff.conj().T)
    return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(diff))))
