"""Minimax oracle over analytic matrix tuples on the disk.

The interpolated norm has a second description: the infimum over
tuple-valued functions G, analytic on the unit disk with G(0) = x, of
the larger of two boundary quantities, the column norm on the arc that
represents one end of the interpolation and the row norm on the other.
The disk picture arises from the vertical strip 0 <= Re z <= 1 through
zeta = exp(i pi z) followed by a Moebius map sending the evaluation
point theta to the origin; harmonic measure on the two strip edges then
turns into arc length split at angle 2 pi theta.

oracle_upper minimizes the sampled boundary maximum over polynomial
candidates pinned to x at the origin, giving upper bounds that decrease
with polynomial degree.  oracle_lower wraps the trace-pairing dual
bound.  sandwich runs both plus the variational estimate and checks
consistency of the bracket.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .core import INF, MatrixTuple, check_exponent
from .errors import InconsistencyError, InputError
from .tuple_norms import column_norm, row_norm
from .variational import NormEstimate, SolverConfig, alpha, derive_exponents, dual_norm_estimate

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# conformal geometry


@dataclass(frozen=True)
class StripMap:
    """Boundary sampling of the strip-to-disk change of variables.

    angles are disk boundary angles in (0, 2 pi), ascending; sides marks
    each sample with 1 when its preimage lies on Re z = 1 and 0 for
    Re z = 0; weights are the harmonic measure (at the disk center) of
    the boundary chunk each sample represents, so that the weights of
    side 1 add up to theta exactly and all weights to one.
    """

    theta: float
    angles: np.ndarray
    sides: np.ndarray
    weights: np.ndarray
    strip_points: np.ndarray

    def to_disk(self, z):
        """Map strip points (0 <= Re z <= 1) to the unit disk."""
        zeta0 = np.exp(1j * math.pi * self.theta)
        zeta = np.exp(1j * math.pi * np.asarray(z))
        return (zeta - zeta0) / (zeta - np.conj(zeta0))

    def to_strip(self, w):
        """Inverse map; the evaluation point w = 0 returns theta."""
        return _strip_coords(self.theta, w)


def _strip_coords(theta: float, w):
    """Pull disk points back to strip coordinates x + iy, 0 <= x <= 1."""
    w = np.asarray(w)
    zeta0 = np.exp(1j * math.pi * theta)
    denom = 1.0 - w
    if np.any(np.abs(denom) < 1e-14):
        raise InputError("w = 1 is the strip's point at infinity")
    zeta = (zeta0 - np.conj(zeta0) * w) / denom
    re, im = zeta.real, zeta.imag
    # snap hairline imaginary parts so boundary points land on the edges
    im = np.where(np.abs(im) <= 1e-13 * np.abs(re), 0.0, im)
    zeta = re + 1j * im
    return np.angle(zeta) / math.pi - 1j * np.log(np.abs(zeta)) / math.pi


def strip_disk_map(theta: float, n_samples: int = 256) -> StripMap:
    """Build the sampled boundary correspondence for a given theta.

    Samples are arc midpoints, n1 = round(theta * n) of them on the
    side-1 arc (0, 2 pi theta) and the rest on (2 pi theta, 2 pi), each
    weighted by its arc fraction of harmonic measure.
    """
    theta = float(theta)
    if not 0.0 < theta < 1.0:
        raise InputError(f"the disk picture needs 0 < theta < 1, got {theta!r}")
    if n_samples < 16:
        raise InputError(f"n_samples must be at least 16, got {n_samples}")
    n1 = int(round(theta * n_samples))
    n1 = min(max(n1, 1), n_samples - 1)
    n0 = n_samples - n1
    ang1 = 2.0 * math.pi * theta * (np.arange(n1) + 0.5) / n1
    ang0 = 2.0 * math.pi * (theta + (1.0 - theta) * (np.arange(n0) + 0.5) / n0)
    angles = np.concatenate([ang1, ang0])
    sides = np.concatenate([np.ones(n1, dtype=int), np.zeros(n0, dtype=int)])
    weights = np.concatenate([np.full(n1, theta / n1), np.full(n0, (1.0 - theta) / n0)])
    strip_points = _strip_coords(theta, np.exp(1j * angles))
    return StripMap(theta, angles, sides, weights, strip_points)


# ---------------------------------------------------------------------------
# candidates


@dataclass(frozen=True)
class AnalyticCandidate:
    """Tuple-valued polynomial G(w) = sum_m coeffs[m] w^m on the disk.

    coeffs has shape (degree + 1, n, d, d); coeffs[0] is the pinned
    value at the origin.
    """

    coeffs: np.ndarray

    @property
    def degree(self) -> int:
        return self.coeffs.shape[0] - 1

    def at_zero(self) -> MatrixTuple:
        return MatrixTuple(self.coeffs[0])

    def eval(self, w: complex) -> np.ndarray:
        """Value at one disk point by Horner's scheme (exact at w = 0)."""
        out = self.coeffs[-1].copy()
        for c in self.coeffs[-2::-1]:
            out = out * w + c
        return out

    def eval_circle(self, angles: np.ndarray) -> np.ndarray:
        """Values on boundary points exp(i angles), shape (J, n, d, d)."""
        ws = np.exp(1j * np.asarray(angles))
        powers = ws[:, None] ** np.arange(self.coeffs.shape[0])[None, :]
        return np.einsum("jm,mkab->jkab", powers, self.coeffs)


def _boundary_values(vals: np.ndarray, sides: np.ndarray, p: float):
    """Per-sample norms and ascent directions of the boundary objective.

    For side 0 the column norm of the sample tuple is used, for side 1
    the row norm.  Returns (norms (J,), grads (J, n, d, d)) where each
    grad satisfies d(norm) = Re tr(grad* dY) to first order.
    """
    j_all, n, d, _ = vals.shape
    norms = np.empty(j_all)
    grads = np.empty_like(vals)
    for side in (0, 1):
        idx = np.nonzero(sides == side)[0]
        if idx.size == 0:
            continue
        v = vals[idx]
        if side == 0:
            gram = np.einsum("jkla,jklb->jab", v.conj(), v)
        else:
            gram = np.einsum("jkal,jkbl->jab", v, v.conj())
        gram = 0.5 * (gram + np.conj(np.swapaxes(gram, 1, 2)))
        w, vecs = np.linalg.eigh(gram)
        w = np.clip(w, 0.0, None)
        if p == INF:
            nrm = np.sqrt(w[:, -1])
            top = vecs[:, :, -1]
            proj = np.einsum("ja,jb->jab", top, top.conj())
            denom = np.maximum(nrm, 1e-300)[:, None, None, None]
            if side == 0:
                g = np.einsum("jkab,jbc->jkac", v, proj) / denom
            else:
                g = np.einsum("jab,jkbc->jkac", proj, v) / denom
        else:
            half = 0.5 * p
            nrm = np.sum(w**half, axis=1) ** (1.0 / p)
            floor = np.maximum(w[:, -1], 1e-300) * 1e-14
            wc = np.maximum(w, floor[:, None]) if half < 1.0 else w
            pw = np.einsum("jab,jb,jcb->jac", vecs, wc ** (half - 1.0), vecs.conj())
            denom = np.maximum(nrm, 1e-300) ** (p - 1.0)
            if side == 0:
                g = np.einsum("jkab,jbc->jkac", v, pw) / denom[:, None, None, None]
            else:
                g = np.einsum("jab,jkbc->jkac", pw, v) / denom[:, None, None, None]
        norms[idx] = nrm
        grads[idx] = g
    return norms, grads


# ---------------------------------------------------------------------------
# upper oracle


def _pack(free: np.ndarray) -> np.ndarray:
    return np.ascontiguousarray(free).view(np.float64).ravel()


def _unpack(v: np.ndarray, shape) -> np.ndarray:
    return np.ascontiguousarray(v).view(np.complex128).reshape(shape)


def optimize_candidate(x: MatrixTuple, p, theta, cfg: SolverConfig | None = None):
    """Minimize the sampled boundary maximum over pinned polynomials.

    Runs a cascade over degrees 0..cfg.degree.  Each stage smooths the
    maximum by a softmax with decreasing temperature, descends with
    L-BFGS on the smoothed objective, then polishes the true maximum
    with Polyak subgradient steps (ties averaged).  Later stages start
    from the zero-padded best point of earlier ones, so the reported
    value never increases with the degree.  Returns the best candidate
    and its NormEstimate (kind "upper").
    """
    cfg = cfg or SolverConfig()
    p = check_exponent(p)
    n, d = x.n, x.d
    scale = x.l2()
    if scale == 0.0:
        cand = AnalyticCandidate(x.mats[None].copy())
        return cand, NormEstimate(0.0, "exact", None, 0, True)
    if theta in (0.0, 1.0):
        value = row_norm(x, p) if theta == 1.0 else column_norm(x, p)
        cand = AnalyticCandidate(x.mats[None].copy())
        return cand, NormEstimate(value, "exact", None, 0, True)

    sm = strip_disk_map(theta, cfg.samples)
    ws = np.exp(1j * sm.angles)
    max_deg = max(0, cfg.degree)
    powers = ws[:, None] ** np.arange(max_deg + 1)[None, :]
    conj_powers = powers.conj()
    xn = x.mats / scale

    def true_max_and_subgrad(free: np.ndarray):
        coeffs = np.concatenate([xn[None], free], axis=0) if free.size else xn[None]
        deg1 = coeffs.shape[0]
        vals = np.einsum("jm,mkab->jkab", powers[:, :deg1], coeffs)
        norms, grads = _boundary_values(vals, sm.sides, p)
        m = float(norms.max())
        active = np.nonzero(norms >= m * (1.0 - 1e-9))[0]
        rho = np.zeros(len(norms))
        rho[active] = 1.0 / active.size
        gc = np.einsum("j,jm,jkab->mkab", rho, conj_powers[:, :deg1], grads)
        return m, gc[1:]

    def smoothed(v: np.ndarray, deg: int, mu: float):
        free = _unpack(v, (deg, n, d, d)) if deg else np.zeros((0, n, d, d), complex)
        coeffs = np.concatenate([xn[None], free], axis=0)
        vals = np.einsum("jm,mkab->jkab", powers[: , : deg + 1], coeffs)
        norms, grads = _boundary_values(vals, sm.sides, p)
        m = float(norms.max())
        e = np.exp((norms - m) / mu)
        sum_e = float(e.sum())
        phi = m + mu * math.log(sum_e)
        rho = e / sum_e
        gc = np.einsum("j,jm,jkab->mkab", rho, conj_powers[:, : deg + 1], grads)
        return phi, _pack(gc[1:])

    # stage list is a prefix of the list for any larger cfg.degree, so
    # the reported value cannot increase when the degree cap grows
    stages = [s for s in (0, 1, 2) if s <= max_deg]
    stages += list(range(4, max_deg + 1, 2))
    if max_deg > 2 and max_deg % 2 == 1:
        stages.append(max_deg)

    best_val = math.inf
    best_free = np.zeros((0, n, d, d), dtype=complex)
    total_iters = 0
    last_block_start = math.inf
    for deg in stages:
        free = np.zeros((deg, n, d, d), dtype=complex)
        free[: best_free.shape[0]] = best_free[:deg]
        if deg == 0:
            val, _ = true_max_and_subgrad(free)
            if val < best_val:
                best_val, best_free = val, free
            last_block_start = val
            continue
        last_block_start = best_val
        for mu in (3e-2, 3e-3, 1e-3):
            res = minimize(
                smoothed,
                _pack(free),
                args=(deg, mu),
                jac=True,
                method="L-BFGS-B",
                options={"maxiter": 50, "ftol": 1e-15, "gtol": 1e-13},
            )
            total_iters += int(res.nit)
            free = _unpack(res.x, (deg, n, d, d))
            val, _ = true_max_and_subgrad(free)
            if val < best_val:
                best_val, best_free = val, free.copy()
        # Polyak polish of the genuine maximum, from the stage's best
        point = np.zeros((deg, n, d, d), dtype=complex)
        point[: best_free.shape[0]] = best_free[:deg]
        for delta in (3e-3, 3e-4):
            for _ in range(30):
                val, g = true_max_and_subgrad(point)
                total_iters += 1
                if val < best_val:
                    best_val, best_free = val, point.copy()
                gn2 = float(np.vdot(g, g).real)
                if gn2 <= 1e-30:
                    break
                step = (val - best_val * (1.0 - delta)) / gn2
                point = point - step * g

    improvement = last_block_start - best_val
    converged = improvement <= max(cfg.tol, 1e-10) * max(best_val, 1e-300)
    coeffs = np.concatenate([xn[None], best_free], axis=0) * scale
    coeffs[0] = x.mats
    cand = AnalyticCandidate(coeffs)
    est = NormEstimate(best_val * scale, "upper", None, total_iters, converged)
    return cand, est


def oracle_upper(x: MatrixTuple, p, theta, cfg: SolverConfig | None = None) -> NormEstimate:
    """Upper bound on alpha(x, p, theta) from analytic candidates.

    The boundary maximum of any pinned candidate dominates the norm;
    this returns the best value found by optimize_candidate at
    cfg.degree and cfg.samples.
    """
    _, est = optimize_candidate(x, p, theta, cfg)
    return est


def oracle_lower(x: MatrixTuple, p, theta, cfg: SolverConfig | None = None) -> NormEstimate:
    """Lower bound on alpha(x, p, theta) through the dual pairing."""
    return dual_norm_estimate(x, p, theta, cfg)


# ---------------------------------------------------------------------------
# three-way comparison


@dataclass(frozen=True)
class SandwichReport:
    """Bracket lower <= alpha <= upper with its relative width."""

    lower: NormEstimate
    alpha: NormEstimate
    upper: NormEstimate
    relative_gap: float
    alpha_within: bool

    def summary(self) -> str:
        return (
            f"lower={self.lower.value:.10g} alpha={self.alpha.value:.10g} "
            f"upper={self.upper.value:.10g} gap={self.relative_gap:.3e}"
        )


def sandwich(x: MatrixTuple, p, theta, cfg: SolverConfig | None = None) -> SandwichReport:
    """Run lower bound, variational estimate and upper oracle together.

    Raises InconsistencyError when the certified bounds cross by more
    than a 1e-6 relative margin; alpha_within records whether the
    variational value sits inside the (slightly inflated) bracket.
    """
    cfg = cfg or SolverConfig()
    p = check_exponent(p)
    derive_exponents(p, theta)
    est_alpha = alpha(x, p, theta, cfg)
    est_lower = oracle_lower(x, p, theta, cfg)
    est_upper = oracle_upper(x, p, theta, cfg)
    if est_lower.value > est_upper.value * (1.0 + 1e-6):
        raise InconsistencyError(
            f"certified bounds crossed: lower={est_lower.value!r} "
            f"upper={est_upper.value!r}"
        )
    denom = max(est_alpha.value, 1e-300)
    gap = (est_upper.value - est_lower.value) / denom
    within = (
        est_alpha.value >= est_lower.value * (1.0 - 1e-6)
        and est_alpha.value <= est_upper.value * (1.0 + 1e-6)
    )
    if gap > cfg.gap_tol:
        logger.info("sandwich gap %.3e above gap_tol %.1e", gap, cfg.gap_tol)
    return SandwichReport(est_lower, est_alpha, est_upper, gap, within)
