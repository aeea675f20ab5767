"""Bloch-Redfield generators for spatially correlated baths.

The system couples to the bath through ``H_int = sum_j s_j B_j``. In the
eigenbasis ``{|w_n>}`` of ``H_S`` (columns of ``V``) the generator reads::

    drho/dt = i[rho, H_S] + P sum_jk ( -s_j Q_jk rho + Q_jk rho s_j
                                       - rho Qh_jk s_j + s_j rho Qh_jk )

    <w_n|Q_jk|w_m>  = <w_n|s_k|w_m> (C_jk(w_m - w_n) / 2 + i F_jk(w_m - w_n))
    <w_n|Qh_jk|w_m> = <w_n|s_k|w_m> (C_kj(w_n - w_m) / 2 - i F_kj(w_n - w_m))

``P`` is `RATE_CONVENTION`. The ``F`` terms are only included on request.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import quantum as qc
from .diagnostics import Diagnostic

log = logging.getLogger(__name__)

#: Global normalisation of all bath-induced terms. With it, two sigma_z-coupled
#: qubits dephase at exactly C(0,0) -+ C(0,d) in the single/double excitation
#: sectors and a single flip at C(0,0)/2; it is the same as using spin-1/2
#: coupling operators sigma/2 with unit prefactor.
RATE_CONVENTION = 0.25

_ZERO_OP_TOL = 1e-13


class RedfieldError(RuntimeError):
    pass


class SecularError(ValueError):
    pass


@dataclass(frozen=True)
class Coupling:
    """One system operator ``s_j`` with its bath attachment point.

    ``partner`` marks a non-Hermitian operator whose Hermitian conjugate is
    coupling number ``partner`` (the ``s B + s^+ B^+`` structure of a bosonic
    bath). ``bath`` is the bath-operator tag used by pair-aware models.
    """

    op: np.ndarray
    position: float = 0.0
    group: str = "bath"
    bath: str = "B"
    partner: int | None = None
    label: str = ""


@dataclass(frozen=True)
class SystemSpec:
    h_s: np.ndarray
    couplings: tuple[Coupling, ...]
    labels: tuple[str, ...] = ()

    def __post_init__(self):
        h = qc.as_operator(self.h_s)
        if not qc.is_hermitian(h):
            raise qc.OperatorError("system Hamiltonian must be Hermitian")
        object.__setattr__(self, "h_s", h)
        object.__setattr__(self, "couplings", tuple(self.couplings))
        d = h.shape[0]
        for j, c in enumerate(self.couplings):
            op = qc.as_operator(c.op)
            if op.shape != (d, d):
                raise qc.OperatorError(f"coupling {j} has shape {op.shape}, expected {(d, d)}")
            if c.partner is None:
                if not qc.is_hermitian(op):
                    raise qc.OperatorError(
                        f"coupling {j} is not Hermitian; declare its conjugate partner explicitly")
            else:
                p = c.partner
                if not 0 <= p < len(self.couplings) or self.couplings[p].partner != j:
                    raise qc.OperatorError(f"coupling {j}: partner {p} is not a mutual pair")
                if np.max(np.abs(qc.as_operator(self.couplings[p].op) - op.conj().T)) > 1e-12:
                    raise qc.OperatorError(f"coupling {j}: partner {p} is not its Hermitian conjugate")

    @property
    def dim(self) -> int:
        return self.h_s.shape[0]

    def partner_of(self, j: int) -> int:
        p = self.couplings[j].partner
        return j if p is None else p

    @property
    def ops(self) -> list[np.ndarray]:
        return [qc.as_operator(c.op) for c in self.couplings]


# --- q matrices and the full generator -------------------------------------

@dataclass(frozen=True)
class QMatrices:
    """Per-(j, k) q and q-hat matrices in the Hamiltonian eigenbasis."""

    q: np.ndarray       # (n, n, d, d)
    q_hat: np.ndarray   # (n, n, d, d)
    v: np.ndarray
    omegas: np.ndarray
    diagnostics: tuple[Diagnostic, ...] = ()


def _unique_frequencies(bohr: np.ndarray, scale: float):
    # Group numerically identical Bohr frequencies so each is evaluated once.
    flat = bohr.ravel()
    key = np.round(flat / (1e-12 * scale)).astype(np.int64)
    uniq, inverse = np.unique(key, return_inverse=True)
    reps = np.array([flat[inverse == i][0] for i in range(len(uniq))])
    return reps, inverse.reshape(bohr.shape)


def _evaluate(model, omega, cj, ck, j, k) -> complex:
    try:
        return model.evaluate(omega, cj, ck)
    except Exception as exc:  # noqa: BLE001 - re-raised with context
        raise RedfieldError(f"spectral model failed for (j={j}, k={k}, omega={omega:.17g}): {exc}") from exc


def _coefficient_tables(system: SystemSpec, model, freqs: np.ndarray) -> np.ndarray:
    """``table[j, k, f] = C_jk + i F_jk`` at every frequency in ``freqs``."""
    n = len(system.couplings)
    table = np.zeros((n, n, len(freqs)), dtype=complex)
    for j, cj in enumerate(system.couplings):
        for k, ck in enumerate(system.couplings):
            for f, w in enumerate(freqs):
                table[j, k, f] = _evaluate(model, float(w), cj, ck, j, k)
    return table


def build_q_matrices(system: SystemSpec, model, include_imag: bool = False) -> QMatrices:
    """Element-wise q and q-hat matrices for every coupling pair.

    ``q[j, k]`` has elements ``<w_n|s_k|w_m> C_jk(w_m - w_n) / 2`` and
    ``q_hat[j, k]`` has ``<w_n|s_k|w_m> C_kj(w_n - w_m) / 2`` (plus
    ``+-i F`` when ``include_imag``). Both are expressed in the eigenbasis;
    ``v @ q @ v^+`` maps them back.
    """
    omegas, v = qc.eigh(system.h_s)
    d = system.dim
    n = len(system.couplings)
    bohr = omegas[None, :] - omegas[:, None]  # [n, m] -> w_m - w_n
    scale = max(1.0, float(np.max(np.abs(omegas))))
    freqs, idx = _unique_frequencies(np.concatenate([bohr, -bohr]), scale)
    idx_pos, idx_neg = idx[:d], idx[d:]
    table = _coefficient_tables(system, model, freqs)
    if not include_imag:
        table = table.real.astype(complex)
    s_eig = np.array([v.conj().T @ s @ v for s in system.ops])
    q = np.zeros((n, n, d, d), dtype=complex)
    q_hat = np.zeros_like(q)
    diags: list[Diagnostic] = []
    asym = 0.0
    for j in range(n):
        for k in range(n):
            cjk = table[j, k][idx_pos]
            ckj_neg = table[k, j][idx_neg]
            q[j, k] = s_eig[k] * (0.5 * cjk.real + 1j * cjk.imag)
            q_hat[j, k] = s_eig[k] * (0.5 * ckj_neg.real - 1j * ckj_neg.imag)
            if system.couplings[j].partner is None and system.couplings[k].partner is None:
                # The alternative form uses conj(C_jk(w_n - w_m)) in place of C_kj.
                asym = max(asym, float(np.max(np.abs(ckj_neg.real - table[j, k][idx_neg].real))))
    ref = max(1e-300, float(np.max(np.abs(table.real)))) if table.size else 1.0
    if asym > 1e-12 * ref:
        diags.append(Diagnostic("W004", f"max |C_kj - conj(C_jk)| = {asym:.3e}"))
    diags.extend(_markov_diagnostic(table, freqs))
    return QMatrices(q=q, q_hat=q_hat, v=v, omegas=omegas, diagnostics=tuple(diags))


def _markov_diagnostic(table: np.ndarray, freqs: np.ndarray) -> list[Diagnostic]:
    if table.size == 0 or len(freqs) < 2:
        return []
    re = table.real
    ref = float(np.max(np.abs(re)))
    if ref == 0:
        return []
    spread = float(np.max(np.max(re, axis=2) - np.min(re, axis=2))) / ref
    if spread > 0.1:
        return [Diagnostic("W001", f"relative spectral variation across Bohr frequencies {spread:.3g}")]
    return []


@dataclass(frozen=True)
class RedfieldGenerator:
    superop: np.ndarray
    dissipator: np.ndarray
    hamiltonian: np.ndarray
    q: np.ndarray
    q_hat: np.ndarray
    v: np.ndarray
    omegas: np.ndarray
    prefactor: float = RATE_CONVENTION
    diagnostics: tuple[Diagnostic, ...] = ()


def build_br_generator(system: SystemSpec, model, include_lamb_shift: bool = False,
                       prefactor: float = RATE_CONVENTION) -> RedfieldGenerator:
    """Full (non-secular) Bloch-Redfield superoperator.

    With ``include_lamb_shift`` the secular correction Hamiltonian from
    `lamb_shift` is added to ``H_S`` in the coherent part.
    """
    qm = build_q_matrices(system, model)
    v, vd = qm.v, qm.v.conj().T
    d = system.dim
    diss = np.zeros((d * d, d * d), dtype=complex)
    for j, sj in enumerate(system.ops):
        a = v @ qm.q[j].sum(axis=0) @ vd
        ah = v @ qm.q_hat[j].sum(axis=0) @ vd
        diss += (-qc.spre(sj @ a) + qc.sprepost(a, sj)
                 - qc.spost(ah @ sj) + qc.sprepost(sj, ah))
    diss *= prefactor
    h = system.h_s
    if include_lamb_shift:
        h = h + lamb_shift(system, model, prefactor=prefactor)
    sup = qc.coherent_part(h) + diss
    return RedfieldGenerator(superop=sup, dissipator=diss, hamiltonian=h, q=qm.q, q_hat=qm.q_hat,
                             v=qm.v, omegas=qm.omegas, prefactor=prefactor,
                             diagnostics=qm.diagnostics)


# --- secular decomposition --------------------------------------------------

@dataclass(frozen=True)
class SecularDecomposition:
    """Operators ``s_j(eps)`` for each clustered Bohr frequency ``eps``."""

    eps: np.ndarray
    ops: tuple[tuple[np.ndarray, ...], ...]   # ops[e][j]
    masks: np.ndarray                          # (n_eps, d, d) eigenbasis supports
    eps_tol: float
    v: np.ndarray
    omegas: np.ndarray

    def index_of(self, eps: float) -> int:
        hit = np.flatnonzero(np.abs(self.eps - eps) <= max(self.eps_tol, 1e-15))
        if not len(hit):
            raise KeyError(eps)
        return int(hit[0])

    def component(self, j: int, eps: float) -> np.ndarray:
        return self.ops[self.index_of(eps)][j]

    def reconstruct(self, j: int) -> np.ndarray:
        return sum(block[j] for block in self.ops)


def default_eps_tol(omegas: np.ndarray) -> float:
    span = float(np.max(omegas) - np.min(omegas)) if len(omegas) else 0.0
    return 1e-9 * (span if span > 0 else 1.0)


def _cluster(values: np.ndarray, tol: float) -> list[np.ndarray]:
    order = np.argsort(values, kind="stable")
    sv = values[order]
    groups = []
    start = 0
    for i in range(1, len(sv) + 1):
        if i == len(sv) or sv[i] - sv[i - 1] > tol:
            groups.append(sv[start:i])
            start = i
    return groups


def secular_decompose(system: SystemSpec, eps_tol: float | None = None) -> SecularDecomposition:
    """Split every coupling operator by Bohr frequency.

    ``s_j(eps) = sum_{w_m - w_n = eps} |w_n><w_n| s_j |w_m><w_m|`` where
    frequencies closer than ``eps_tol`` count as equal. A tolerance that is
    not smaller than the smallest nonzero level spacing, or that chains
    distinct Bohr frequencies together, is rejected.
    """
    omegas, v = qc.eigh(system.h_s)
    if eps_tol is None:
        eps_tol = default_eps_tol(omegas)
    if eps_tol <= 0:
        raise SecularError("eps_tol must be positive")
    noise = 1e-12 * max(1.0, float(np.max(np.abs(omegas))))
    gaps = np.diff(np.sort(omegas))
    nonzero = gaps[gaps > noise]
    if len(nonzero) and eps_tol >= float(np.min(nonzero)):
        raise SecularError(f"eps_tol={eps_tol:g} is not below the smallest level spacing {np.min(nonzero):g}")
    bohr = omegas[None, :] - omegas[:, None]
    clusters = _cluster(bohr.ravel(), eps_tol)
    eps_list = []
    for c in clusters:
        if c[-1] - c[0] > eps_tol:
            raise SecularError(f"eps_tol={eps_tol:g} merges distinct Bohr frequencies "
                               f"{c[0]:.6g} .. {c[-1]:.6g}")
        eps_list.append(float(np.mean(c)))
    eps = np.array(eps_list)
    eps[np.abs(eps) <= eps_tol] = 0.0
    vd = v.conj().T
    s_eig = [vd @ s @ v for s in system.ops]
    masks = np.zeros((len(eps), system.dim, system.dim), dtype=bool)
    blocks = []
    for e_idx, e in enumerate(eps):
        mask = np.abs(bohr - e) <= eps_tol
        masks[e_idx] = mask
        blocks.append(tuple(v @ (s * mask) @ vd for s in s_eig))
    return SecularDecomposition(eps=eps, ops=tuple(blocks), masks=masks, eps_tol=eps_tol,
                                v=v, omegas=omegas)


@dataclass(frozen=True)
class CoefficientMatrix:
    """Coefficients ``K_jk(eps)`` of ``sum_jk K_jk (s_k rho s_j^+ - 1/2 {s_j^+ s_k, rho})``.

    ``values`` holds raw spectral-function entries; the dissipator uses
    ``prefactor * values``. Entries whose operators vanish at this
    frequency are stored as exact zeros.
    """

    epsilon: float
    values: np.ndarray
    ops: tuple[np.ndarray, ...]
    active: np.ndarray
    prefactor: float = RATE_CONVENTION

    @property
    def effective(self) -> np.ndarray:
        return self.prefactor * self.values

    def dissipator(self) -> np.ndarray:
        return qc.dissipator(self.effective, self.ops)


@dataclass(frozen=True)
class SecularGenerator:
    superop: np.ndarray
    dissipator: np.ndarray
    hamiltonian: np.ndarray
    coefficients: tuple[CoefficientMatrix, ...]
    decomposition: SecularDecomposition
    timescale_ratio: float
    diagnostics: tuple[Diagnostic, ...] = ()


def _op_is_zero(op: np.ndarray, ref: float) -> bool:
    return float(np.max(np.abs(op))) <= _ZERO_OP_TOL * max(1.0, ref)


def _secular_tables(system: SystemSpec, model, dec: SecularDecomposition, imag: bool):
    n = len(system.couplings)
    refs = [float(np.max(np.abs(s))) for s in system.ops]
    out = []
    for e_idx, e in enumerate(dec.eps):
        ops = dec.ops[e_idx]
        active = np.array([not _op_is_zero(ops[j], refs[j]) for j in range(n)])
        if not active.any():
            continue
        vals = np.zeros((n, n), dtype=complex)
        for j in range(n):
            if not active[j]:
                continue
            jp = system.partner_of(j)
            for k in range(n):
                if not active[k]:
                    continue
                c = _evaluate(model, float(e), system.couplings[jp], system.couplings[k], jp, k)
                vals[j, k] = c.imag if imag else c.real
        out.append((float(e), vals, ops, active))
    return out


def build_secular_generator(system: SystemSpec, model, eps_tol: float | None = None,
                            include_lamb_shift: bool = False,
                            prefactor: float = RATE_CONVENTION) -> SecularGenerator:
    """Secular Bloch-Redfield generator and its per-frequency coefficient matrices.

    Generates ``sum_eps sum_jk K_jk(eps)/2 (2 s_k(eps) rho s_j(eps)^+ -
    {s_j(eps)^+ s_k(eps), rho})`` with ``K_jk(eps) = C_(j*)k(eps)``, where
    ``j*`` is the conjugate partner of coupling ``j`` (``j`` itself for
    Hermitian couplings).
    """
    dec = secular_decompose(system, eps_tol)
    tables = _secular_tables(system, model, dec, imag=False)
    coeffs = tuple(CoefficientMatrix(epsilon=e, values=vals, ops=ops, active=act, prefactor=prefactor)
                   for e, vals, ops, act in tables)
    d = system.dim
    diss = np.zeros((d * d, d * d), dtype=complex)
    for cm in coeffs:
        diss += cm.dissipator()
    h = system.h_s
    if include_lamb_shift:
        h = h + lamb_shift(system, model, eps_tol, prefactor=prefactor, decomposition=dec)
    sup = qc.coherent_part(h) + diss

    diags: list[Diagnostic] = []
    ratio = _timescale_ratio(coeffs, dec)
    if ratio < 10:
        diags.append(Diagnostic("W006", f"min Bohr separation / max rate = {ratio:.3g}"))
    for cm in coeffs:
        if not qc.is_hermitian(cm.values):
            continue
        lo = float(np.min(np.linalg.eigvalsh(0.5 * (cm.values + cm.values.conj().T))))
        hi = float(np.max(np.abs(np.linalg.eigvalsh(0.5 * (cm.values + cm.values.conj().T)))))
        if lo < -1e-10 * max(hi, 1e-300):
            diags.append(Diagnostic("W003", f"coefficient matrix at eps={cm.epsilon:.6g} has eigenvalue {lo:.3e}"))
    return SecularGenerator(superop=sup, dissipator=diss, hamiltonian=h, coefficients=coeffs,
                            decomposition=dec, timescale_ratio=ratio, diagnostics=tuple(diags))


def _timescale_ratio(coeffs, dec: SecularDecomposition) -> float:
    present = sorted({cm.epsilon for cm in coeffs})
    if len(present) < 2:
        return float("inf")
    sep = float(np.min(np.diff(present)))
    rate = 0.0
    for cm in coeffs:
        eig = np.abs(np.linalg.eigvals(cm.effective)).max() if cm.values.size else 0.0
        norm = max((float(np.linalg.norm(op, 2)) for op in cm.ops), default=0.0)
        rate = max(rate, float(eig) * norm ** 2)
    return float("inf") if rate == 0 else sep / rate


def lamb_shift(system: SystemSpec, model, eps_tol: float | None = None,
               prefactor: float = RATE_CONVENTION,
               decomposition: SecularDecomposition | None = None) -> np.ndarray:
    """Correction Hamiltonian ``P sum_eps sum_jk F_(j*)k(eps) s_j(eps)^+ s_k(eps)``.

    ``F`` is the imaginary part reported by the model. Raises `RedfieldError`
    if the assembled operator is not Hermitian, which signals an
    inconsistent ``F``.
    """
    dec = secular_decompose(system, eps_tol) if decomposition is None else decomposition
    d = system.dim
    h = np.zeros((d, d), dtype=complex)
    for e, vals, ops, _ in _secular_tables(system, model, dec, imag=True):
        for j, sj in enumerate(ops):
            sjd = sj.conj().T
            for k, sk in enumerate(ops):
                if vals[j, k] != 0:
                    h += vals[j, k] * (sjd @ sk)
    h *= prefactor
    if not qc.is_hermitian(h):
        raise RedfieldError(f"Lamb-shift Hamiltonian is not Hermitian (error {qc.hermiticity_error(h):.3e})")
    return 0.5 * (h + h.conj().T)


# --- convenience constructors ----------------------------------------------

def qubit_chain(n_qubits: int, splitting: float | Sequence[float] = 0.0,
                positions: Sequence[float] | None = None, coupling: str = "z",
                strength: float = 1.0, group: str = "bath") -> SystemSpec:
    """Uncoupled qubits ``H_S = sum_j w_j sigma_z^(j)`` with local couplings.

    ``coupling`` is a string of Pauli letters; each letter adds one coupling
    per qubit, all attached to the same bath group (``"zx"`` couples every
    qubit both longitudinally and transversally).
    """
    if n_qubits < 1:
        raise ValueError("need at least one qubit")
    splittings = np.broadcast_to(np.asarray(splitting, dtype=float), (n_qubits,))
    positions = list(range(n_qubits)) if positions is None else list(positions)
    if len(positions) != n_qubits:
        raise ValueError("one position per qubit is required")
    paulis = {"x": qc.SIGMA_X, "y": qc.SIGMA_Y, "z": qc.SIGMA_Z}
    h = sum(w * qc.embed_site(qc.SIGMA_Z, j, n_qubits) for j, w in enumerate(splittings))
    couplings = []
    for letter in coupling:
        for j in range(n_qubits):
            couplings.append(Coupling(op=strength * qc.embed_site(paulis[letter], j, n_qubits),
                                      position=float(positions[j]), group=group, label=f"{letter}{j}"))
    return SystemSpec(h_s=np.asarray(h, dtype=complex), couplings=tuple(couplings))
