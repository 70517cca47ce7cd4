"""Scalar helpers, matrix primitives, MatrixTuple container."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ncinterp import (
    INF,
    InputError,
    MatrixTuple,
    ShapeError,
    SingularMatrixError,
    conjugate_exponent,
    schatten_norm,
    trace_pairing,
)
from ncinterp.core import as_matrix, check_exponent, herm, inv_exponent, polar, psd_power


def rng(seed=0):
    return np.random.default_rng(seed)


def random_matrix(d, seed=0):
    g = rng(seed)
    return g.standard_normal((d, d)) + 1j * g.standard_normal((d, d))


# ---------------------------------------------------------------- exponents


def test_check_exponent_accepts_range():
    assert check_exponent(1) == 1.0
    assert check_exponent(INF) == INF
    with pytest.raises(InputError):
        check_exponent("not a number")
    with pytest.raises(InputError):
        check_exponent(0.5)
    with pytest.raises(InputError):
        check_exponent(0)
    with pytest.raises(InputError):
        check_exponent(float("nan"))


def test_conjugate_exponent_exact_pairs():
    # reciprocal form keeps the dyadic pairs exact in binary
    assert conjugate_exponent(4 / 3) == 4.0
    assert conjugate_exponent(4.0) == 4 / 3
    assert conjugate_exponent(2.0) == 2.0
    assert conjugate_exponent(1.0) == INF
    assert conjugate_exponent(INF) == 1.0


@given(st.floats(min_value=1.0 + 1e-9, max_value=1e6))
@settings(max_examples=60, deadline=None)
def test_conjugate_exponent_holder_identity(p):
    q = conjugate_exponent(p)
    assert abs(1.0 / p + 1.0 / q - 1.0) < 1e-12


def test_inv_exponent():
    assert inv_exponent(INF) == 0.0
    assert inv_exponent(2.0) == 0.5


# ---------------------------------------------------------------- matrices


def test_as_matrix_rejects_nonsquare():
    with pytest.raises(ShapeError):
        as_matrix(np.zeros((2, 3)))
    with pytest.raises(InputError):
        as_matrix(np.array([[1.0, np.inf], [0.0, 1.0]]))


def test_herm_is_projection():
    m = random_matrix(4, seed=1)
    h = herm(m)
    assert np.allclose(h, h.conj().T)
    assert np.allclose(herm(h), h)


def test_schatten_norm_against_singular_values():
    m = random_matrix(5, seed=2)
    s = np.linalg.svd(m, compute_uv=False)
    for p in (1.0, 1.5, 2.0, 3.0, INF):
        want = s.max() if p == INF else float(np.sum(s**p) ** (1.0 / p))
        assert schatten_norm(m, p) == pytest.approx(want, rel=1e-12)


def test_schatten_norm_frozen_values():
    m = np.diag([3.0, -4.0])
    assert schatten_norm(m, 1) == pytest.approx(7.0, abs=1e-12)
    assert schatten_norm(m, 2) == pytest.approx(5.0, abs=1e-12)
    assert schatten_norm(m, INF) == pytest.approx(4.0, abs=1e-12)
    # nilpotent block: single singular value 2 regardless of p
    n = np.array([[0.0, 2.0], [0.0, 0.0]])
    assert schatten_norm(n, 1.5) == pytest.approx(2.0, abs=1e-12)


@given(st.integers(min_value=0, max_value=10_000))
@settings(max_examples=40, deadline=None)
def test_schatten_norm_scaling(seed):
    m = random_matrix(3, seed=seed)
    assert schatten_norm(2.5 * m, 3.0) == pytest.approx(
        2.5 * schatten_norm(m, 3.0), rel=1e-12
    )


def test_psd_power_diagonal():
    r = psd_power(np.diag([4.0, 9.0]), 0.5)
    assert np.allclose(r, np.diag([2.0, 3.0]))


def test_psd_power_negative_on_singular_raises():
    with pytest.raises(SingularMatrixError):
        psd_power(np.diag([1.0, 0.0]), -1.0)


def test_psd_power_rejects_nonpsd():
    with pytest.raises(InputError):
        psd_power(np.diag([1.0, -1.0]), 0.5)


def test_polar_reconstructs_and_truncates_rank():
    m = np.diag([-2.0, 0.0])
    u, h = polar(m)
    assert np.allclose(u @ h, m)
    assert np.allclose(h, np.diag([2.0, 0.0]))
    # partial isometry only on the support
    assert np.allclose(u, np.diag([-1.0, 0.0]))

    g = random_matrix(4, seed=7)
    u, h = polar(g)
    assert np.allclose(u @ h, g)
    assert np.allclose(h, h.conj().T)
    assert np.all(np.linalg.eigvalsh(h) > 0)


# ---------------------------------------------------------------- tuples


def test_matrix_tuple_validation():
    with pytest.raises(ShapeError):
        MatrixTuple(np.zeros((2, 2)))
    with pytest.raises(ShapeError):
        MatrixTuple(np.zeros((2, 2, 3)))
    with pytest.raises(InputError):
        MatrixTuple(np.full((1, 2, 2), np.nan))


def test_matrix_tuple_is_immutable():
    x = MatrixTuple(np.zeros((2, 2, 2)))
    with pytest.raises((ValueError, RuntimeError)):
        x.mats[0, 0, 0] = 1.0


def test_matrix_tuple_copies_input():
    a = np.zeros((1, 2, 2))
    x = MatrixTuple(a)
    a[0, 0, 0] = 5.0
    assert x.mats[0, 0, 0] == 0.0


def test_matrix_tuple_accessors():
    x = MatrixTuple.from_matrices([np.eye(3), 2 * np.eye(3)])
    assert (x.n, x.d, len(x)) == (2, 3, 2)
    assert np.allclose(x[1], 2 * np.eye(3))
    assert np.allclose(sum(m.trace() for m in x), 9.0)


def test_adjoint_and_scaling():
    g = rng(3)
    x = MatrixTuple(g.standard_normal((3, 2, 2)) + 1j * g.standard_normal((3, 2, 2)))
    assert np.allclose(x.adjoint().mats, x.mats.conj().transpose(0, 2, 1))
    assert x.scaled(2j).l2() == pytest.approx(2.0 * x.l2(), rel=1e-14)


def test_trace_pairing_oracle():
    # <x, y> = sum_k tr(y_k* x_k), checked entry by entry
    g = rng(4)
    xm = g.standard_normal((2, 3, 3)) + 1j * g.standard_normal((2, 3, 3))
    ym = g.standard_normal((2, 3, 3)) + 1j * g.standard_normal((2, 3, 3))
    want = sum(np.trace(ym[k].conj().T @ xm[k]) for k in range(2))
    got = trace_pairing(MatrixTuple(xm), MatrixTuple(ym))
    assert got == pytest.approx(want, rel=1e-14)
    # sesquilinearity
    got_scaled = trace_pairing(MatrixTuple(xm).scaled(1j), MatrixTuple(ym))
    assert got_scaled == pytest.approx(1j * want, rel=1e-14)


def test_trace_pairing_shape_mismatch():
    x = MatrixTuple(np.zeros((1, 2, 2)))
    y = MatrixTuple(np.zeros((2, 2, 2)))
    with pytest.raises(ShapeError):
        trace_pairing(x, y)
