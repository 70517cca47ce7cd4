"""Analytic-candidate oracle on the interpolation strip."""

import numpy as np
import pytest

from ncinterp import (
    INF,
    InputError,
    MatrixTuple,
    SolverConfig,
    column_norm,
    oracle_lower,
    oracle_upper,
    optimize_candidate,
    row_norm,
    sandwich,
    strip_disk_map,
)
from ncinterp.interp_oracle import AnalyticCandidate


def random_tuple(n, d, seed):
    g = np.random.default_rng(seed)
    return MatrixTuple(g.standard_normal((n, d, d)) + 1j * g.standard_normal((n, d, d)))


SMALL = SolverConfig(degree=6, samples=128, restarts=3, dual_steps=6)


# ------------------------------------------------------------- the map


def test_strip_map_roundtrip():
    sm = strip_disk_map(0.37, 128)
    for z in (0.3 + 0.6j, 0.9 - 0.2j, 0.05 + 0.95j):
        w = sm.to_disk(z)
        assert abs(w) < 1.0
        assert abs(sm.to_strip(w) - z) < 1e-12


def test_strip_map_harmonic_measure_is_theta():
    # the boundary weights realize harmonic measure at the interior point,
    # so the side-1 mass must equal theta
    for theta in (0.25, 0.5, 0.75):
        sm = strip_disk_map(theta, 256)
        assert sm.weights[sm.sides == 1].sum() == pytest.approx(theta, abs=1e-15)
        assert sm.weights.sum() == pytest.approx(1.0, abs=1e-13)
        assert sm.weights.min() > 0.0


def test_strip_map_boundary_points_sit_on_lines():
    sm = strip_disk_map(0.4, 64)
    re = sm.strip_points.real
    assert np.allclose(re[sm.sides == 0], 0.0, atol=1e-12)
    assert np.allclose(re[sm.sides == 1], 1.0, atol=1e-12)


def test_strip_map_input_validation():
    with pytest.raises(InputError):
        strip_disk_map(0.0)
    with pytest.raises(InputError):
        strip_disk_map(1.0)
    with pytest.raises(InputError):
        strip_disk_map(0.5, n_samples=4)


# ------------------------------------------------------------- candidates


def test_candidate_eval_matches_power_series():
    g = np.random.default_rng(2)
    coeffs = g.standard_normal((4, 2, 3, 3)) + 1j * g.standard_normal((4, 2, 3, 3))
    cand = AnalyticCandidate(coeffs)
    assert cand.degree == 3
    w = 0.3 - 0.4j
    naive = sum(coeffs[m] * w**m for m in range(4))
    assert np.allclose(cand.eval(w), naive, atol=1e-13)
    assert np.allclose(cand.at_zero().mats, coeffs[0])
    # circle evaluation agrees with pointwise Horner
    angles = np.array([0.0, 1.1, 2.2])
    circle = cand.eval_circle(angles)
    for j, ang in enumerate(angles):
        assert np.allclose(circle[j], cand.eval(np.exp(1j * ang)), atol=1e-12)


def test_optimizer_pins_center_value_exactly():
    x = random_tuple(2, 2, seed=0)
    cand, est = optimize_candidate(x, 4 / 3, 0.5, SMALL)
    assert np.array_equal(cand.at_zero(), x.mats)
    assert est.kind == "upper"
    assert est.value > 0.0


def test_upper_bound_beats_constant_candidate():
    # the constant candidate w -> x is feasible, so the optimized bound can
    # never exceed max(column, row) norms
    for seed in range(4):
        x = random_tuple(2, 2, seed=seed)
        for p in (4 / 3, 4.0):
            cap = max(column_norm(x, p), row_norm(x, p))
            assert oracle_upper(x, p, 0.5, SMALL).value <= cap * (1.0 + 1e-9)


def test_more_degrees_never_hurt():
    x = random_tuple(2, 2, seed=0)
    v4 = optimize_candidate(x, 4 / 3, 0.5, SolverConfig(degree=4, samples=128))[1].value
    v8 = optimize_candidate(x, 4 / 3, 0.5, SolverConfig(degree=8, samples=128))[1].value
    assert v8 <= v4 * (1.0 + 1e-9)


def test_reflection_swaps_sides():
    # conjugating the data and flipping theta exchanges the two boundary
    # roles; the optimized bounds agree up to solver noise
    x = random_tuple(2, 2, seed=0)
    for p in (4 / 3, 4.0):
        u1 = oracle_upper(x, p, 0.25, SMALL).value
        u2 = oracle_upper(x.adjoint(), p, 0.75, SMALL).value
        assert u1 == pytest.approx(u2, rel=2e-3)


# ------------------------------------------------------------- sandwich


def test_sandwich_orders_and_reports():
    x = random_tuple(2, 2, seed=0)
    rep = sandwich(x, 4 / 3, 0.5, SMALL)
    assert rep.lower.value <= rep.upper.value * (1.0 + 1e-9)
    assert rep.alpha_within
    assert rep.relative_gap < 0.05
    text = rep.summary()
    assert "gap" in text and "alpha" in text


def test_sandwich_tight_on_hilbert_schmidt_point():
    x = random_tuple(2, 2, seed=1)
    rep = sandwich(x, 2.0, 0.5, SolverConfig(degree=2, samples=64, restarts=2))
    assert rep.alpha.value == pytest.approx(x.l2(), rel=1e-12)
    assert rep.lower.value <= x.l2() * (1.0 + 1e-9)
    assert rep.upper.value >= x.l2() * (1.0 - 1e-9)


def test_lower_is_dual_based():
    x = random_tuple(2, 2, seed=3)
    est = oracle_lower(x, 4.0, 0.5, SMALL)
    assert est.kind == "lower"
    assert est.value > 0.0
