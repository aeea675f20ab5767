import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cordeco import quantum as qc
from cordeco.lindblad import (CPVerdict, LindbladForm, MappingError, ToeplitzKernel, audit_kernel,
                              eigenvalue_bound_check, exact_determinant, map_to_lindblad, psd_check,
                              symbol_closed_form_range, toeplitz_fourier_bounds, write_verdict_report)

STEP3 = np.array([[1.0, 1.0, 0.0], [1.0, 1.0, 1.0], [0.0, 1.0, 1.0]])


def random_psd(rng, n, rank=None, complex_=True):
    rank = n if rank is None else rank
    a = rng.normal(size=(n, rank)) + (1j * rng.normal(size=(n, rank)) if complex_ else 0)
    return a @ a.conj().T


def random_ops(rng, n, d):
    return [rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)) for _ in range(n)]


# --- map_to_lindblad ----------------------------------------------------------

def test_identity_maps_to_unit_rates():
    ops = [qc.SIGMA_X, qc.SIGMA_Y, qc.SIGMA_Z]
    form = map_to_lindblad(np.eye(3), ops)
    assert isinstance(form, LindbladForm)
    assert np.array_equal(form.rates, np.ones(3))
    # Degenerate spectrum: any unitary W is valid; the dissipator must be unchanged.
    assert np.max(np.abs(form.dissipator() - qc.dissipator(np.eye(3), ops))) < 1e-14


def test_step_matrix_not_mappable():
    verdict = map_to_lindblad(STEP3, [qc.SIGMA_Z] * 3)
    assert isinstance(verdict, CPVerdict) and not verdict.mappable
    assert verdict.witness["minor"]["det"] == -1.0
    assert verdict.witness["minor"]["exact"]
    assert min(verdict.negative_eigenvalues) == pytest.approx(1 - math.sqrt(2))


def test_exponential_ln2_three_positive_rates():
    c = np.array([[1, .5, .25], [.5, 1, .5], [.25, .5, 1]])
    ops = [qc.embed_site(qc.SIGMA_Z, j, 3) for j in range(3)]
    form = map_to_lindblad(c, ops)
    assert isinstance(form, LindbladForm)
    oracle = np.sort(np.linalg.eigvalsh(c))
    assert np.all(oracle > 0)
    assert np.max(np.abs(np.sort(form.rates) - oracle)) < 1e-14


def test_non_hermitian_rejected():
    with pytest.raises(MappingError):
        map_to_lindblad(np.array([[1.0, 0.5], [0.0, 1.0]]), [qc.SIGMA_Z, qc.SIGMA_X])
    with pytest.raises(MappingError):
        map_to_lindblad(np.eye(2), [qc.SIGMA_Z])


def test_tiny_negative_eigenvalue_clamped():
    rng = np.random.default_rng(3)
    u = np.linalg.qr(rng.normal(size=(3, 3)))[0]
    c = u @ np.diag([1.0, 0.5, -1e-13]) @ u.T
    form = map_to_lindblad(c, [qc.SIGMA_X, qc.SIGMA_Y, qc.SIGMA_Z])
    assert isinstance(form, LindbladForm)
    assert np.all(form.rates >= 0)
    assert "W002" in {d.code for d in form.diagnostics}


def test_complex_hermitian_round_trip():
    rng = np.random.default_rng(4)
    c = random_psd(rng, 3)
    ops = random_ops(rng, 3, 4)
    form = map_to_lindblad(c, ops)
    assert np.max(np.abs(form.dissipator() - qc.dissipator(c, ops))) < 1e-12
    assert np.max(np.abs(form.w.conj().T @ form.w - np.eye(3))) < 1e-12


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 4), st.integers(1, 3), st.integers(0, 2**31 - 1), st.booleans())
def test_round_trip_property(n_ops, n_qubits, seed, complex_):
    rng = np.random.default_rng(seed)
    d = 2 ** n_qubits
    c = random_psd(rng, n_ops, rank=int(rng.integers(1, n_ops + 1)), complex_=complex_)
    ops = random_ops(rng, n_ops, d)
    form = map_to_lindblad(c, ops)
    assert isinstance(form, LindbladForm)
    want = qc.dissipator(c, ops)
    scale = max(1.0, np.max(np.abs(want)))
    assert np.max(np.abs(form.dissipator() - want)) < 1e-12 * scale
    rho = random_psd(rng, d)
    rho /= np.trace(rho)
    got = qc.apply_super(form.dissipator(), rho)
    assert np.max(np.abs(got - qc.apply_super(want, rho))) < 1e-12 * scale


def test_sylvester_inertia():
    rng = np.random.default_rng(9)
    u = np.linalg.qr(rng.normal(size=(5, 5)))[0]
    c = u @ np.diag([2.0, 1.0, 0.5, -0.3, -1.2]) @ u.T
    verdict = psd_check(c)
    assert not verdict.mappable and len(verdict.negative_eigenvalues) == 2
    for _ in range(100):
        w = rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5))
        t = w.conj().T @ c @ w
        t = 0.5 * (t + t.conj().T)
        lam = np.linalg.eigvalsh(t)
        assert int(np.sum(lam < -1e-10 * np.max(np.abs(lam)))) == 2
    step_verdict = psd_check(STEP3)
    for _ in range(100):
        w = rng.normal(size=(3, 3))
        lam = np.linalg.eigvalsh(w.T @ STEP3 @ w)
        assert int(np.sum(lam < -1e-10 * np.max(np.abs(lam)))) == len(step_verdict.negative_eigenvalues) == 1


# --- psd_check -------------------------------------------------------------------

def test_psd_identity():
    assert psd_check(np.eye(8)).mappable


def test_psd_step_witness():
    verdict = psd_check(STEP3)
    assert not verdict.mappable
    minor = verdict.witness["minor"]
    assert minor["size"] == 3 and minor["det"] == -1.0
    assert minor["submatrix"] == STEP3.tolist()
    v = np.array(verdict.witness["eigenvector_real"]) + 1j * np.array(verdict.witness["eigenvector_imag"])
    assert np.vdot(v, STEP3 @ v).real == pytest.approx(verdict.witness["eigenvalue"])
    codes = {d.code for d in verdict.diagnostics}
    assert codes == {"W003", "W007"}
    d = verdict.to_dict()
    assert json.loads(json.dumps(d))["mappable"] is False


def test_psd_exponential_toeplitz():
    mat = ToeplitzKernel.from_kind("exponential", 0.1).matrix(64)
    verdict = psd_check(mat)
    assert verdict.mappable
    assert np.min(verdict.eigenvalues) > 0


def test_exact_determinant():
    assert exact_determinant(STEP3) == -1
    assert exact_determinant(np.array([[0.0, 1.0], [1.0, 0.0]])) == -1
    assert exact_determinant(np.array([[0.5, 0.25], [0.25, 0.5]])) * 16 == 3
    assert exact_determinant(np.zeros((3, 3))) == 0


@pytest.mark.parametrize("kind", ["exponential", "gaussian"])
@pytest.mark.parametrize("a", [0.05, 0.1, 0.5, 1.0, 2.0, 10.0])
def test_decaying_kernels_positive(kind, a):
    kernel = ToeplitzKernel.from_kind(kind, a)
    for n in range(2, 65):
        lam = np.linalg.eigvalsh(kernel.matrix(n))
        assert lam.min() > -1e-10 * np.abs(lam).max()


def test_step_kernel_rejected_for_all_sizes():
    kernel = ToeplitzKernel.from_kind("step")
    assert psd_check(kernel.matrix(2)).mappable
    for n in range(3, 65):
        verdict = psd_check(kernel.matrix(n))
        assert not verdict.mappable
        assert verdict.witness["minor"]["size"] == 3
        assert verdict.witness["minor"]["det"] == -1.0


# --- Toeplitz kernels and Fourier bounds --------------------------------------------

def test_toeplitz_kernel_elements():
    k = ToeplitzKernel.from_kind("exponential", 1.0)
    assert k.tail_bound <= 1e-16
    assert k.element(-3) == k.element(3) == pytest.approx(math.exp(-3))
    assert k.summability == pytest.approx(1 / math.tanh(0.5), rel=1e-12)
    c = ToeplitzKernel(np.array([1.0, 0.3 + 0.2j]))
    m = c.matrix(3)
    assert np.array_equal(m, m.conj().T)
    assert m[1, 0] == 0.3 + 0.2j
    with pytest.raises(ValueError):
        ToeplitzKernel(np.array([1j]))
    with pytest.raises(ValueError):
        ToeplitzKernel.from_kind("gaussian", -1.0)


def test_symbol_matches_direct_sum():
    k = ToeplitzKernel.from_kind("gaussian", 0.3)
    lam = np.linspace(0, 2 * np.pi, 17)
    m = np.arange(-40, 41)
    direct = np.real(np.exp(-0.3 * m[None, :] ** 2) @ np.exp(-1j * np.outer(m, lam)))
    assert np.max(np.abs(k.symbol(lam) - direct)) < 1e-13


def test_exponential_symbol_minimum():
    a = math.log(2)
    b = toeplitz_fourier_bounds(ToeplitzKernel.from_kind("exponential", a))
    assert b.f_min == pytest.approx(1 / 3, abs=1e-15)
    assert abs(b.grid_min - 1 / 3) < 1e-9
    for a in (0.05, 0.5, 1.0, 3.0):
        b = toeplitz_fourier_bounds(ToeplitzKernel.from_kind("exponential", a))
        assert abs(b.grid_min - math.tanh(a / 2)) < 1e-9
        assert abs(b.grid_max - 1 / math.tanh(a / 2)) < 1e-9 * b.grid_max


def test_step_symbol_minimum():
    b = toeplitz_fourier_bounds(ToeplitzKernel.from_kind("step"))
    assert (b.f_min, b.f_max) == (-1.0, 3.0)
    assert b.grid_min == pytest.approx(-1.0, abs=1e-15)


def test_gaussian_symbol_positive():
    import mpmath
    b = toeplitz_fourier_bounds(ToeplitzKernel.from_kind("gaussian", 1.0))
    assert b.f_min > 0
    q = math.exp(-1.0)
    assert b.f_min == pytest.approx(float(mpmath.jtheta(4, 0, q)), rel=1e-14)
    assert b.f_max == pytest.approx(float(mpmath.jtheta(3, 0, q)), rel=1e-14)
    assert abs(b.grid_min - b.f_min) < 1e-9


def test_closed_form_range_unknown_kind():
    assert symbol_closed_form_range("custom", 1.0) is None
    b = toeplitz_fourier_bounds(ToeplitzKernel(np.array([2.0, 0.5, 0.25]), tail_bound=1e-12), grid_size=1024)
    assert b.closed_form is None
    # f = 2 + cos(l) + cos(2l)/2 has its minimum 5/4 at cos(l) = -1/2.
    assert b.f_min == pytest.approx(1.25, abs=1e-5)


def test_tail_bound_exceeding_precision():
    k = ToeplitzKernel(np.array([1.0, 0.5]), tail_bound=1e-6)
    with pytest.raises(ValueError, match="precision"):
        toeplitz_fourier_bounds(k)
    assert toeplitz_fourier_bounds(k, precision=1e-5).f_min == pytest.approx(-1e-6)


@pytest.mark.parametrize("n", [2, 8, 32, 64])
def test_eigenvalue_bounds_exponential(n):
    assert eigenvalue_bound_check(ToeplitzKernel.from_kind("exponential", 1.0), n)


def test_eigenvalue_bounds_gaussian_and_step():
    assert eigenvalue_bound_check(ToeplitzKernel.from_kind("gaussian", 0.5), 64)
    step = ToeplitzKernel.from_kind("step")
    assert eigenvalue_bound_check(step, 3)
    lam = np.linalg.eigvalsh(step.matrix(3))
    assert lam.min() >= -1 and lam.max() <= 3
    with pytest.raises(ValueError):
        eigenvalue_bound_check(step, 0)


def test_eigenvalue_bounds_violation_detected():
    k = ToeplitzKernel(np.array([1.0, 0.5]))
    tight = toeplitz_fourier_bounds(k)
    narrowed = type(tight)(0.5, 1.5, tight.grid_min, tight.grid_max, None, 0.0, tight.grid_size)
    assert eigenvalue_bound_check(k, 8, bounds=tight)
    assert not eigenvalue_bound_check(k, 8, bounds=narrowed)


# --- audit report ---------------------------------------------------------------------

def test_audit_report_round_trips(tmp_path):
    rep = audit_kernel("step", None, 4)
    assert rep["decision"] == "not-mappable"
    assert rep["witness"]["minor"]["det"] == -1.0
    assert rep["within_bounds"]
    path = write_verdict_report(rep, tmp_path / "audit.json")
    back = json.loads(path.read_text())
    assert back["kernel"]["kind"] == "step" and back["n"] == 4
    ok = audit_kernel("exponential", 0.5, 16)
    assert ok["decision"] == "mappable" and ok["witness"] is None
    assert ok["eigenvalue_min"] >= ok["f_min"] - 1e-9
