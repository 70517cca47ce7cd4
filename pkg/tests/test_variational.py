"""Variational routes to the interpolated tuple norm."""

import math

import numpy as np
import pytest

from ncinterp import (
    INF,
    InputError,
    MatrixTuple,
    SolverConfig,
    alpha,
    alpha_inf,
    alpha_sup,
    column_norm,
    conjugate_exponent,
    derive_exponents,
    dual_norm_estimate,
    row_norm,
    trace_pairing,
)
from ncinterp.variational import Factorization, UnitBallPair

E11 = np.array([[1.0, 0.0], [0.0, 0.0]])
E21 = np.array([[0.0, 0.0], [1.0, 0.0]])
PAIR = MatrixTuple.from_matrices([E11, E21])


def random_tuple(n, d, seed):
    g = np.random.default_rng(seed)
    return MatrixTuple(g.standard_normal((n, d, d)) + 1j * g.standard_normal((n, d, d)))


# ------------------------------------------------------------- exponents


def test_exponent_bundle_frozen_triples():
    ex = derive_exponents(INF, 0.5)
    assert (ex.r, ex.r0, ex.r1) == (1.0, 4.0, 4.0)
    ex = derive_exponents(1.0, 1 / 3)
    assert ex.r == 1.0
    assert ex.r0 == pytest.approx(6.0, abs=1e-12)
    assert ex.r1 == pytest.approx(3.0, abs=1e-12)


@pytest.mark.parametrize("p", [1.0, 4 / 3, 1.9, 2.0, 2.5, 4.0, INF])
@pytest.mark.parametrize("theta", [0.1, 0.5, 0.9])
def test_exponent_bundle_identities(p, theta):
    ex = derive_exponents(p, theta)
    inv = lambda v: 0.0 if v == INF else 1.0 / v
    lhs = inv(ex.r0) + inv(ex.r1)
    if p <= 2.0:
        # 1/r0 + 1/2 + 1/r1 = 1/p
        assert lhs + 0.5 == pytest.approx(1.0 / p, abs=1e-12)
    if p >= 2.0:
        # 1/r0 + 1/p + 1/r1 = 1/2
        assert lhs + inv(p) == pytest.approx(0.5, abs=1e-12)


def test_exponent_bundle_rejects_bad_theta():
    with pytest.raises(InputError):
        derive_exponents(4.0, -0.1)
    with pytest.raises(InputError):
        derive_exponents(4.0, 1.5)
    with pytest.raises(InputError):
        derive_exponents(4.0, float("nan"))


# ------------------------------------------------------------- frozen values


def test_sup_route_frozen_value():
    # alpha for the pair (E11, E21) at p = inf, theta = 1/2 is 2^(1/4):
    # the column Gram has the single eigenvalue 2, the row Gram is the
    # identity, and the geometric mean of the endpoint norms is attained.
    est = alpha_sup(PAIR, INF, 0.5)
    assert est.kind == "lower"
    assert est.converged
    assert est.value == pytest.approx(2.0**0.25, rel=1e-12)
    # witness pair reproduces the value exactly
    w = est.witness
    assert isinstance(w, UnitBallPair)
    assert np.linalg.norm(w.a @ PAIR.mats @ w.b) == pytest.approx(est.value, rel=1e-12)


def test_inf_route_frozen_value():
    # same pair at the conjugate point p = 1, theta = 1/2: the true value
    # is 2^(3/4); the factorization route approaches it from above with a
    # small regularization bias.
    est = alpha_inf(PAIR, 1.0, 0.5)
    assert est.kind == "upper"
    dev = est.value / 2.0**0.75 - 1.0
    assert -1e-9 < dev < 1e-4
    f = est.witness
    assert isinstance(f, Factorization)
    assert f.max_defect(PAIR) < 1e-10
    assert f.objective == pytest.approx(est.value, rel=1e-12)
    recon = f.reconstruct()
    assert np.allclose(recon.mats, PAIR.mats, atol=1e-10)


def test_dual_route_pinches_frozen_value():
    # the dual lower bound lands on 2^(3/4) to machine precision, which
    # pins the factorization upper bound from below
    est = dual_norm_estimate(PAIR, 1.0, 0.5)
    assert est.kind == "lower"
    assert est.value == pytest.approx(2.0**0.75, rel=1e-10)


def test_p2_is_exact_hilbert_schmidt():
    for seed in range(6):
        x = random_tuple(3, 3, seed=seed)
        est = alpha(x, 2.0, 0.7)
        assert est.kind == "exact"
        assert est.value == pytest.approx(x.l2(), rel=1e-13)


def test_single_matrix_reduces_to_schatten_norm():
    from ncinterp.core import schatten_norm

    g = np.random.default_rng(5)
    m = g.standard_normal((1, 3, 3)) + 1j * g.standard_normal((1, 3, 3))
    y = MatrixTuple(m)
    for p in (1.0, 4 / 3, 4.0, INF):
        est = alpha(y, p, 0.3)
        assert est.value == pytest.approx(schatten_norm(m[0], p), rel=1e-9)


def test_endpoint_thetas_give_gram_norms():
    for seed in range(4):
        z = random_tuple(2, 2, seed=seed)
        for p in (4.0, 4 / 3, INF, 1.0):
            assert alpha(z, p, 0.0).value == pytest.approx(
                column_norm(z, p), rel=1e-10
            )
            assert alpha(z, p, 1.0).value == pytest.approx(row_norm(z, p), rel=1e-10)


# ------------------------------------------------------------- structure


def test_homogeneity_and_unitary_invariance():
    x = random_tuple(2, 3, seed=11)
    g = np.random.default_rng(12)
    q, _ = np.linalg.qr(g.standard_normal((3, 3)) + 1j * g.standard_normal((3, 3)))
    for p, th in ((4.0, 0.4), (1.5, 0.4)):
        base = alpha(x, p, th).value
        assert alpha(x.scaled(2.5), p, th).value == pytest.approx(2.5 * base, rel=1e-7)
        rot = MatrixTuple(q @ x.mats @ q.conj().T)
        assert alpha(rot, p, th).value == pytest.approx(base, rel=1e-7)


def test_sup_iterates_ascend():
    runs = {}
    x = random_tuple(2, 2, seed=3)
    alpha_sup(x, 4.0, 0.5, on_iterate=lambda r, i, v: runs.setdefault(r, []).append(v))
    assert len(runs) >= 2  # several restarts report
    for vals in runs.values():
        assert all(b >= a - 1e-11 * max(1.0, a) for a, b in zip(vals, vals[1:]))


def test_weak_duality_on_random_pairs():
    for seed in range(8):
        g = np.random.default_rng(100 + seed)
        x = MatrixTuple(g.standard_normal((2, 2, 2)) + 1j * g.standard_normal((2, 2, 2)))
        y = MatrixTuple(g.standard_normal((2, 2, 2)) + 1j * g.standard_normal((2, 2, 2)))
        for p, th in ((4.0, 0.3), (1.5, 0.6)):
            bound = alpha(x, p, th).value * alpha(y, conjugate_exponent(p), th).value
            assert abs(trace_pairing(x, y)) <= bound * (1.0 + 1e-9)


def test_dual_estimate_tracks_alpha():
    cfg = SolverConfig(restarts=4, dual_steps=8)
    for seed in range(3):
        x = random_tuple(2, 2, seed=seed)
        for p in (4.0, 1.5):
            av = alpha(x, p, 0.5, cfg).value
            dv = dual_norm_estimate(x, p, 0.5, cfg).value
            assert abs(dv / av - 1.0) < 1e-2


def test_config_round_trip():
    cfg = SolverConfig(tol=1e-10, restarts=3)
    d = cfg.to_dict()
    assert d["tol"] == 1e-10 and d["restarts"] == 3
    cfg2 = cfg.replace(seed=9)
    assert cfg2.seed == 9 and cfg2.tol == 1e-10
    assert cfg.seed != 9  # original untouched
