import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from proctensor.linalg import (
    herm_eig,
    kron,
    mat_log_psd,
    mat_sqrt_psd,
    partial_trace,
    project_psd,
    unvec,
    vec,
)

I2 = np.eye(2)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SZ = np.diag([1, -1]).astype(complex)

finite = st.floats(-2, 2, allow_nan=False, allow_infinity=False)


def c2x2(draw_vals):
    vals = np.array(draw_vals, dtype=float)
    return (vals[:4] + 1j * vals[4:]).reshape(2, 2)


matrices_2x2 = st.lists(finite, min_size=8, max_size=8).map(c2x2)


def hermitian_2x2(m):
    return (m + m.conj().T) / 2


# ---------------------------------------------------------------- kron

def test_kron_identity():
    assert np.allclose(kron(I2, I2), np.eye(4))


def test_kron_diagonal():
    assert np.allclose(kron(SZ, SZ), np.diag([1, -1, -1, 1]))


def test_kron_projector_block():
    p0 = np.diag([1, 0]).astype(complex)
    out = kron(p0, SX)
    expected = np.zeros((4, 4), dtype=complex)
    expected[:2, :2] = SX
    assert np.allclose(out, expected)


@settings(max_examples=40, deadline=None)
@given(matrices_2x2, matrices_2x2, matrices_2x2)
def test_kron_associative(a, b, c):
    left = kron(kron(a, b), c)
    right = kron(a, kron(b, c))
    assert np.abs(left - right).max() < 1e-12


def test_kron_rejects_nonfinite():
    bad = np.array([[np.nan, 0], [0, 1]])
    with pytest.raises(ValueError, match="non-finite"):
        kron(bad, I2)


# ------------------------------------------------------- partial trace

def test_partial_trace_product_state():
    rho = np.zeros((4, 4), dtype=complex)
    rho[0, 0] = 1.0
    assert np.allclose(partial_trace(rho, 2, 2, keep="a"), np.diag([1, 0]))


def test_partial_trace_entangled_marginal():
    phi = np.array([1, 0, 0, -1j]) / math.sqrt(2)
    rho = np.outer(phi, phi.conj())
    assert np.abs(partial_trace(rho, 2, 2, keep="a") - I2 / 2).max() < 1e-12


@settings(max_examples=40, deadline=None)
@given(matrices_2x2, matrices_2x2)
def test_partial_trace_factorizes(a, b):
    joint = kron(a, b)
    assert np.abs(partial_trace(joint, 2, 2, keep="a") - a * np.trace(b)).max() < 1e-12
    assert np.abs(partial_trace(joint, 2, 2, keep="b") - b * np.trace(a)).max() < 1e-12


@settings(max_examples=30, deadline=None)
@given(matrices_2x2, matrices_2x2)
def test_partial_trace_preserves_trace(a, b):
    joint = kron(a, b)
    assert abs(np.trace(partial_trace(joint, 2, 2, keep="a")) - np.trace(joint)) < 1e-12


def test_partial_trace_bad_dims():
    with pytest.raises(ValueError, match="bad-dims"):
        partial_trace(np.eye(6), 2, 2, keep="a")
    with pytest.raises(ValueError, match="bad-dims"):
        partial_trace(np.eye(4), 2, 2, keep="c")


# ------------------------------------------------------------ herm_eig

def test_herm_eig_identity():
    e = herm_eig(I2)
    assert np.allclose(e.eigenvalues, [1, 1])


def test_herm_eig_sigma_x():
    e = herm_eig(SX)
    assert np.allclose(e.eigenvalues, [1, -1])
    plus = e.eigenvectors[:, 0]
    assert abs(abs(plus @ np.array([1, 1]) / math.sqrt(2)) - 1) < 1e-12


def test_herm_eig_sort_descending():
    e = herm_eig(np.diag([3.0, 1.0, 2.0]))
    assert np.allclose(e.eigenvalues, [3, 2, 1])


@settings(max_examples=40, deadline=None)
@given(matrices_2x2)
def test_herm_eig_reconstruction_and_unitarity(m):
    h = hermitian_2x2(m)
    e = herm_eig(h)
    assert np.abs(e.reconstruct() - h).max() < 1e-10
    v = e.eigenvectors
    assert np.abs(v.conj().T @ v - I2).max() < 1e-10


def test_herm_eig_rejects_nonhermitian():
    with pytest.raises(ValueError, match="not-hermitian"):
        herm_eig(np.array([[0, 1], [0, 0]], dtype=complex))


def test_herm_eig_rejects_nonsquare():
    with pytest.raises(ValueError, match="bad-dims"):
        herm_eig(np.ones((2, 3)))


# --------------------------------------------------------- mat_sqrt_psd

def test_sqrt_identity():
    assert np.allclose(mat_sqrt_psd(I2), I2)


def test_sqrt_diagonal():
    assert np.allclose(mat_sqrt_psd(np.diag([4.0, 9.0])), np.diag([2.0, 3.0]))


def test_sqrt_projector_idempotent():
    plus = np.array([[0.5, 0.5], [0.5, 0.5]], dtype=complex)
    assert np.abs(mat_sqrt_psd(plus) - plus).max() < 1e-12


@settings(max_examples=40, deadline=None)
@given(matrices_2x2)
def test_sqrt_squares_to_projection(m):
    h = hermitian_2x2(m)
    s = mat_sqrt_psd(h)
    assert np.abs(s @ s - project_psd(h)).max() < 1e-8


# ---------------------------------------------------------- mat_log_psd

def test_log_identity():
    assert np.abs(mat_log_psd(I2)).max() < 1e-12


def test_log_diagonal():
    m = np.diag([math.e, math.e**2])
    assert np.abs(mat_log_psd(m) - np.diag([1.0, 2.0])).max() < 1e-12


def test_log_floor():
    out = mat_log_psd(np.diag([1.0, 0.0]))
    assert np.allclose(out, np.diag([0.0, math.log(1e-12)]))


def test_log_requires_positive_floor():
    with pytest.raises(ValueError, match="bad-floor"):
        mat_log_psd(I2, floor=0.0)


@settings(max_examples=40, deadline=None)
@given(matrices_2x2)
def test_exp_log_round_trip(m):
    h = hermitian_2x2(m)
    psd = h @ h.conj().T + 1e-3 * I2
    e = herm_eig(mat_log_psd(psd))
    back = (e.eigenvectors * np.exp(e.eigenvalues)) @ e.eigenvectors.conj().T
    assert np.abs(back - psd).max() < 1e-8


# ---------------------------------------------------------- project_psd

def test_project_identity():
    assert np.allclose(project_psd(I2), I2)


def test_project_clips():
    assert np.allclose(project_psd(np.diag([1.0, -0.5])), np.diag([1.0, 0.0]))


def test_project_sigma_z():
    assert np.allclose(project_psd(SZ), np.diag([1.0, 0.0]))


@settings(max_examples=40, deadline=None)
@given(matrices_2x2)
def test_project_idempotent(m):
    h = hermitian_2x2(m)
    once = project_psd(h)
    assert np.abs(project_psd(once) - once).max() < 1e-12
    assert np.linalg.eigvalsh(once).min() > -1e-13


# ------------------------------------------------------------ vec/unvec

def test_vec_identity():
    assert np.allclose(vec(I2), [1, 0, 0, 1])


def test_vec_diag_order():
    assert np.allclose(vec(np.diag([2.0, 3.0])), [2, 0, 0, 3])


def test_vec_unvec_round_trip():
    assert np.allclose(unvec(vec(SX), 2, 2), SX)


def test_unvec_bad_length():
    with pytest.raises(ValueError, match="bad-dims"):
        unvec(np.ones(5), 2, 2)
