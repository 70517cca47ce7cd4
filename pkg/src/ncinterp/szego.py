"""Matrix spectral factorization and factorization certificates.

Given a positive definite matrix function f on the unit circle, Wilson's
Newton-type iteration produces an outer (analytic, invertible inside)
factor Phi with Phi Phi* = f on the boundary.  The laboratory uses this
twice per certificate: boundary weights built from an analytic candidate
are factorized into outer a- and b-sides, whose values at the origin
give a concrete factorization x_k = a y_k b whose objective can be
compared against the variational value.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .core import MatrixTuple, check_exponent, schatten_norm
from .errors import ConvergenceError, InputError
from .interp_oracle import AnalyticCandidate
from .tuple_norms import column_norm, row_norm
from .variational import Factorization, SolverConfig, derive_exponents

logger = logging.getLogger(__name__)

RESID_OK = 1e-6


def _is_pow2(n: int) -> bool:
    return n >= 4 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class BoundaryFunction:
    """Positive definite matrix samples on an equispaced circle grid.

    angles must be 2 pi j / N for j = 0..N-1 with N a power of two (the
    lag bookkeeping assumes it); values must be Hermitian positive
    definite at every sample.
    """

    angles: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        angles = np.asarray(self.angles, dtype=float)
        values = np.asarray(self.values, dtype=complex)
        n = angles.shape[0]
        if not _is_pow2(n):
            raise InputError(f"grid size must be a power of two >= 4, got {n}")
        ref = 2.0 * math.pi * np.arange(n) / n
        if angles.shape != (n,) or not np.allclose(angles, ref, atol=1e-12):
            raise InputError("angles must be the equispaced grid 2 pi j / N")
        if values.ndim != 3 or values.shape[0] != n or values.shape[1] != values.shape[2]:
            raise InputError(f"values must have shape (N, d, d), got {values.shape}")
        if not np.all(np.isfinite(values)):
            raise InputError("boundary values must be finite")
        sym = np.conj(np.swapaxes(values, 1, 2))
        scale = max(float(np.max(np.abs(values))), 1e-300)
        if float(np.max(np.abs(values - sym))) > 1e-8 * scale:
            raise InputError("boundary values must be Hermitian")
        values = 0.5 * (values + sym)
        wmin = float(np.min(np.linalg.eigvalsh(values)))
        if wmin <= 0.0:
            raise InputError(f"boundary values must be positive definite (min eig {wmin:.3e})")
        object.__setattr__(self, "angles", angles)
        object.__setattr__(self, "values", values)

    @property
    def grid_size(self) -> int:
        return self.angles.shape[0]

    @property
    def d(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class OuterFactor:
    """Analytic factor Phi(w) = sum_m coeffs[m] w^m with Phi Phi* = f.

    residual is the relative boundary error of the truncated series and
    converged records whether the iteration met its tolerance and the
    truncation is below 1e-6.
    """

    coeffs: np.ndarray
    residual: float
    converged: bool

    @property
    def degree(self) -> int:
        return self.coeffs.shape[0] - 1

    def at_zero(self) -> np.ndarray:
        return self.coeffs[0]

    def eval_circle(self, angles: np.ndarray) -> np.ndarray:
        ws = np.exp(1j * np.asarray(angles))
        powers = ws[:, None] ** np.arange(self.coeffs.shape[0])[None, :]
        return np.einsum("jm,mab->jab", powers, self.coeffs)


def _plus_operator(g: np.ndarray):
    """Analytic projection on the grid: keep lags 0..N/2, halve lag 0.

    Returns the projected samples and the halved zeroth lag.
    """
    n = g.shape[0]
    lags = np.fft.fft(g, axis=0) / n
    lags[0] = 0.5 * lags[0]
    lag0 = lags[0].copy()
    lags[n // 2 + 1 :] = 0.0
    gp = n * np.fft.ifft(lags, axis=0)
    return gp, lag0


def wilson_factorize(f: BoundaryFunction, cutoff: int = 64,
                     cfg: SolverConfig | None = None) -> OuterFactor:
    """Outer spectral factor of a positive definite boundary function.

    Wilson's iteration psi <- psi ((psi^-1 f psi^-*  + I)_+ + S), with S
    the skew part of the constant lag, converges quadratically for
    smooth f.  Steps that lose invertibility are damped by halving.  The
    returned coefficients are truncated at `cutoff` lags, doubled (up to
    min(512, N/2)) while the truncated series misses the boundary data
    by more than the tolerance.
    """
    cfg = cfg or SolverConfig()
    vals = f.values
    n, d = f.grid_size, f.d
    eye = np.eye(d, dtype=complex)
    fscale = max(float(np.max(np.linalg.norm(vals, axis=(1, 2)))), 1e-300)

    psi = np.broadcast_to(np.linalg.cholesky(vals.mean(axis=0)), (n, d, d)).copy()
    rtol = max(cfg.tol, 1e-11)
    iter_conv = False
    res_prev = math.inf
    best_res, best_psi = math.inf, psi
    stalled = 0
    for it in range(cfg.max_iters):
        psi_inv = np.linalg.inv(psi)
        g = psi_inv @ vals @ np.conj(np.swapaxes(psi_inv, 1, 2))
        gp, lag0 = _plus_operator(g + eye)
        skew = np.triu(lag0, 1)
        skew = skew - skew.conj().T
        update = gp + skew
        lvl = 1.0
        for _ in range(7):
            cand = psi @ (lvl * update + (1.0 - lvl) * eye)
            svals = np.linalg.svd(cand, compute_uv=False)
            if float(svals.min()) > 1e-13 * float(svals.max()):
                break
            lvl *= 0.5
        psi = cand
        rec = psi @ np.conj(np.swapaxes(psi, 1, 2))
        res = float(np.max(np.linalg.norm(rec - vals, axis=(1, 2)))) / fscale
        if res < best_res:
            best_res, best_psi = res, psi
        if res <= rtol:
            iter_conv = True
            break
        # data whose factor is not band limited leaves a residual floor;
        # a stalled residual means the fixed point was reached
        stalled = stalled + 1 if res > res_prev * (1.0 - 1e-3) else 0
        if it >= 3 and stalled >= 2:
            iter_conv = True
            break
        res_prev = res
    psi = best_psi

    lags = np.fft.fft(psi, axis=0) / n
    k = min(max(1, cutoff), n // 2)
    cap = min(512, n // 2)
    while True:
        coeffs = lags[: k + 1]
        grid_pows = np.exp(1j * f.angles)[:, None] ** np.arange(k + 1)[None, :]
        phi = np.einsum("jm,mab->jab", grid_pows, coeffs)
        rec = phi @ np.conj(np.swapaxes(phi, 1, 2))
        resid = float(np.max(np.linalg.norm(rec - vals, axis=(1, 2)))) / fscale
        if resid <= max(cfg.tol, 1e-9) or k >= cap:
            break
        k = min(2 * k, cap)
    converged = iter_conv and resid <= RESID_OK
    if not iter_conv:
        logger.warning(
            "wilson_factorize: iteration budget exhausted, residual %.3e", resid,
        )
    elif not converged:
        # fixed point reached; the data's factor is not band limited
        logger.info(
            "wilson_factorize: truncation residual floor %.3e at %d lags", resid, k,
        )
    return OuterFactor(np.ascontiguousarray(coeffs), resid, converged)


# ---------------------------------------------------------------------------
# outerness diagnostics


def det_winding(outer: OuterFactor, n_grid: int = 2048) -> int:
    """Winding number of det Phi around the circle; zero for outer Phi."""
    angles = 2.0 * math.pi * np.arange(n_grid) / n_grid
    dets = np.linalg.det(outer.eval_circle(angles))
    if float(np.min(np.abs(dets))) <= 0.0:
        raise InputError("det Phi vanishes on the sampling grid")
    ph = np.angle(dets)
    dph = np.diff(np.concatenate([ph, ph[:1]]))
    dph = (dph + math.pi) % (2.0 * math.pi) - math.pi
    return int(round(float(dph.sum()) / (2.0 * math.pi)))


def det_polynomial_roots(outer: OuterFactor) -> np.ndarray:
    """Roots of det Phi as a polynomial in w (empty for constants).

    The determinant is interpolated exactly on a power-of-two grid
    larger than its degree, converted to coefficients, trimmed, and
    passed to the companion-matrix root finder.  Outer factors have all
    roots on or outside the unit circle.
    """
    d = outer.coeffs.shape[1]
    deg = d * outer.degree
    if deg == 0:
        return np.zeros(0, dtype=complex)
    k = 1
    while k < 2 * deg + 2:
        k *= 2
    angles = 2.0 * math.pi * np.arange(k) / k
    dets = np.linalg.det(outer.eval_circle(angles))
    poly = np.fft.fft(dets) / k
    poly = poly[: deg + 1]
    mags = np.abs(poly)
    keep = deg
    while keep > 0 and mags[keep] <= 1e-12 * mags.max():
        keep -= 1
    if keep == 0:
        return np.zeros(0, dtype=complex)
    return np.roots(poly[: keep + 1][::-1])


# ---------------------------------------------------------------------------
# certificates


def _batch_psd_power(arr: np.ndarray, expnt: float) -> np.ndarray:
    w, v = np.linalg.eigh(0.5 * (arr + np.conj(np.swapaxes(arr, 1, 2))))
    w = np.clip(w, 0.0, None)
    out = np.einsum("jab,jb,jcb->jac", v, w**expnt, v.conj())
    return 0.5 * (out + np.conj(np.swapaxes(out, 1, 2)))


def _smooth_junctions(arr: np.ndarray, sides: np.ndarray, width: int = 2) -> np.ndarray:
    """Convex [1/4, 1/2, 1/4] averaging near the two arc junctions.

    Positive definiteness survives convex combinations, while the local
    averaging knocks the leading Fourier tail of the jump down enough
    for the factorization to track it.
    """
    n = arr.shape[0]
    flips = [i for i in range(n) if sides[i] != sides[i - 1]]
    touched = sorted({(i + off) % n for i in flips for off in range(-width, width)})
    out = arr.copy()
    for i in touched:
        out[i] = 0.25 * arr[(i - 1) % n] + 0.5 * arr[i] + 0.25 * arr[(i + 1) % n]
    return out


def _certificate_grid(theta: float, n_samples: int):
    angles = 2.0 * math.pi * np.arange(n_samples) / n_samples
    sides = ((angles > 0.0) & (angles < 2.0 * math.pi * theta)).astype(int)
    return angles, sides


def candidate_boundary_max(candidate: AnalyticCandidate, p, theta,
                           n_samples: int = 256) -> float:
    """Largest boundary norm of a candidate: column on the side-0 arc,
    row on the side-1 arc.  This is what the candidate certifies."""
    p = check_exponent(p)
    angles, sides = _certificate_grid(float(theta), n_samples)
    vals = candidate.eval_circle(angles)
    best = 0.0
    for j in range(n_samples):
        yj = MatrixTuple(vals[j])
        nrm = row_norm(yj, p) if sides[j] else column_norm(yj, p)
        best = max(best, nrm)
    return best


def build_certificate(x: MatrixTuple, p, theta, candidate: AnalyticCandidate,
                      *, eps: float = 1e-6, n_samples: int = 256,
                      cfg: SolverConfig | None = None) -> Factorization:
    """Near-optimal factorization x = a y b from an analytic candidate.

    The candidate's boundary Grams define weights A^2 (identity on the
    column arc, a power of the row Gram on the other) and B^2 (mirror
    image); after a relative epsilon floor and junction smoothing, outer
    factors are extracted with wilson_factorize.  The left-sided factor
    comes from the transposed data: if Xi Xi* = transpose(B^2) then
    Psi = transpose(Xi) satisfies Psi* Psi = B^2.  Evaluating both outer
    factors at the origin gives a and b; the middle tuple is recovered
    by linear solves, so the factorization reproduces x exactly up to
    roundoff independently of how well the factorization converged.

    The objective ||a||_r0 ||b||_r1 (sum ||y_k||_2^2)^(1/2) is computed
    from the witness.  Tightness against the candidate's boundary
    maximum is logged; it degrades gracefully with the epsilon floor and
    the junction smoothing.
    """
    cfg = cfg or SolverConfig()
    p = check_exponent(p)
    if p > 2.0:
        raise InputError("certificates require p <= 2")
    ex = derive_exponents(p, theta)
    theta = float(theta)
    if not 0.0 < theta < 1.0:
        raise InputError(f"certificates need 0 < theta < 1, got {theta!r}")
    pin_err = float(np.linalg.norm(candidate.coeffs[0] - x.mats))
    if pin_err > 1e-8 * max(x.l2(), 1e-300):
        raise InputError("candidate is not pinned to x at the origin")
    if x.l2() == 0.0:
        eye = np.eye(x.d, dtype=complex)
        return Factorization(eye, MatrixTuple(np.zeros_like(x.mats)), eye, 0.0)

    n_cur = n_samples
    attempt = 0
    while True:
        angles, sides = _certificate_grid(theta, n_cur)
        vals = candidate.eval_circle(angles)
        idx0 = np.nonzero(sides == 0)[0]
        idx1 = np.nonzero(sides == 1)[0]
        gram = np.empty((n_cur, x.d, x.d), dtype=complex)
        gram[idx0] = np.einsum("jkla,jklb->jab", vals[idx0].conj(), vals[idx0])
        gram[idx1] = np.einsum("jkal,jkbl->jab", vals[idx1], vals[idx1].conj())
        lam_peak = float(np.max(np.linalg.eigvalsh(
            0.5 * (gram + np.conj(np.swapaxes(gram, 1, 2))))))
        eps_abs = eps * max(lam_peak, 1e-300)
        eye = np.eye(x.d, dtype=complex)
        x2 = gram + eps_abs * eye
        pw = 0.5 * (2.0 - p)
        a2 = np.tile(eye, (n_cur, 1, 1))
        a2[idx1] = _batch_psd_power(x2[idx1], pw)
        b2 = np.tile(eye, (n_cur, 1, 1))
        b2[idx0] = _batch_psd_power(x2[idx0], pw)
        a2 = _smooth_junctions(a2, sides)
        b2 = _smooth_junctions(b2, sides)

        phi = wilson_factorize(BoundaryFunction(angles, a2), cfg=cfg)
        xi = wilson_factorize(
            BoundaryFunction(angles, np.swapaxes(b2, 1, 2)), cfg=cfg
        )
        if (
            max(phi.residual, xi.residual) <= RESID_OK
            or n_cur >= 512
            or attempt >= 2
        ):
            break
        n_cur *= 2
        attempt += 1
        logger.info("build_certificate: refining grid to %d samples", n_cur)

    a = phi.at_zero()
    b = xi.at_zero().T
    ys = np.linalg.solve(a, x.mats)
    ys = np.linalg.solve(b.T, np.swapaxes(ys, 1, 2)).swapaxes(1, 2)
    ys = MatrixTuple(ys)
    objective = schatten_norm(a, ex.r0) * schatten_norm(b, ex.r1) * ys.l2()
    fact = Factorization(a, ys, b, objective)
    defect = fact.max_defect(x)
    if defect > 1e-8:
        raise ConvergenceError(
            f"certificate reconstruction defect {defect:.3e}; "
            "the outer factors are too ill-conditioned at this epsilon"
        )
    bmax = candidate_boundary_max(candidate, p, theta, n_cur)
    if bmax > 0.0:
        logger.info(
            "certificate objective %.10g vs candidate boundary max %.10g "
            "(excess %.3e)", objective, bmax, objective / bmax - 1.0,
        )
    return fact
