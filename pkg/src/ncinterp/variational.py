"""Variational norms on the interpolated column/row scale.

For a tuple x and parameters (p, theta) the package estimates a norm
alpha(x, p, theta) that interpolates between the column norm (theta = 0)
and the row norm (theta = 1).  Two variational expressions are used:

* p <= 2: an infimum over factorizations x_k = a y_k b of
  ||a||_r0 * ||b||_r1 * (sum_k ||y_k||_2^2)^(1/2), minimized by
  closed-form block descent over positive a, b (an upper bound).
* p >= 2: a supremum of (sum_k ||a x_k b||_2^2)^(1/2) over ||a||_r0 <= 1,
  ||b||_r1 <= 1, maximized by alternating closed-form updates over the
  positive cone (a lower bound).

The auxiliary exponents r, r0, r1 are derived from (p, theta) through
1/r = 1 - 2/max(p, p'), 1/r0 = theta/(2r), 1/r1 = (1 - theta)/(2r), with
infinity treated exactly.  A duality pairing against the conjugate
exponent gives independent lower bounds.
"""

from __future__ import annotations

import dataclasses
import logging
import math
from dataclasses import dataclass

import numpy as np

from .core import (
    INF,
    MatrixTuple,
    check_exponent,
    conjugate_exponent,
    herm,
    inv_exponent,
    psd_power,
    schatten_norm,
    trace_pairing,
    TOL_FACT,
)
from .errors import InconsistencyError, InputError

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# exponent bookkeeping


@dataclass(frozen=True)
class Exponents:
    """Exponent bundle for one (p, theta) instance.

    Satisfies 1/r0 + 1/2 + 1/r1 = 1/p when p <= 2 and
    1/r0 + 1/p + 1/r1 = 1/2 when p >= 2 (reciprocal of inf is 0).
    """

    p: float
    p_conj: float
    theta: float
    r: float
    r0: float
    r1: float


def derive_exponents(p, theta) -> Exponents:
    """Derive (p', r, r0, r1) from p in [1, inf] and theta in [0, 1]."""
    p = check_exponent(p)
    theta = float(theta)
    if math.isnan(theta) or not 0.0 <= theta <= 1.0:
        raise InputError(f"theta must lie in [0, 1], got {theta!r}")
    q = conjugate_exponent(p)
    inv_r = 1.0 - 2.0 * inv_exponent(max(p, q))
    r = INF if inv_r <= 0.0 else 1.0 / inv_r
    inv_r0 = 0.5 * theta * inv_r
    inv_r1 = 0.5 * (1.0 - theta) * inv_r
    r0 = INF if inv_r0 == 0.0 else 1.0 / inv_r0
    r1 = INF if inv_r1 == 0.0 else 1.0 / inv_r1
    return Exponents(p, q, theta, r, r0, r1)


def _half(r: float) -> float:
    return INF if r == INF else 0.5 * r


# ---------------------------------------------------------------------------
# result containers


@dataclass(frozen=True)
class SolverConfig:
    """Shared knobs for the iterative estimators.

    tol is a relative tolerance on objective values, max_iters caps each
    start (each epsilon stage for the factorization descent), restarts is
    the number of seeded starts with the best kept, gap_tol the duality
    gap accepted by self checks, eps_rel the relative Gram regularization,
    degree and samples parameterize boundary candidates, dual_steps the
    ascent budget of dual estimates.
    """

    tol: float = 1e-8
    max_iters: int = 500
    restarts: int = 8
    gap_tol: float = 5e-2
    seed: int = 0
    eps_rel: float = 1e-6
    cond_max: float = 1e14
    degree: int = 8
    samples: int = 256
    dual_steps: int = 12

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def replace(self, **kw) -> "SolverConfig":
        return dataclasses.replace(self, **kw)


@dataclass(frozen=True)
class Factorization:
    """Witness x_k = a y_k b together with the objective it certifies."""

    a: np.ndarray
    ys: MatrixTuple
    b: np.ndarray
    objective: float

    def reconstruct(self) -> MatrixTuple:
        return MatrixTuple(np.matmul(np.matmul(self.a, self.ys.mats), self.b))

    def max_defect(self, x: MatrixTuple) -> float:
        """Largest entry reconstruction error relative to the tuple length."""
        scale = max(x.l2(), 1e-300)
        diff = self.reconstruct().mats - x.mats
        per_entry = np.linalg.norm(diff.reshape(len(x), -1), axis=1)
        return float(np.max(per_entry)) / scale


@dataclass(frozen=True)
class UnitBallPair:
    """Feasible pair (a, b) for the unit-ball supremum."""

    a: np.ndarray
    b: np.ndarray


@dataclass(frozen=True)
class NormEstimate:
    """A norm value with its certification direction and solve metadata.

    kind is one of "exact", "upper", "lower".  The witness, when present,
    reproduces the value by direct evaluation: a Factorization for upper
    bounds, a UnitBallPair for lower bounds from the supremum form.
    """

    value: float
    kind: str
    witness: object = None
    iterations: int = 0
    converged: bool = True


# ---------------------------------------------------------------------------
# closed-form inner problems


def _dual_power_opt(g: np.ndarray, s: float):
    """Maximize tr(h g) over PSD h with ||h||_s <= 1, g PSD.

    Returns the maximizer and the attained value.  The optimizer is a
    normalized spectral power of g: the identity at s = inf, the uniform
    projection onto the top eigenspace at s = 1 (degenerate eigenvalues
    share weight equally), otherwise g**(s' - 1) scaled into the sphere.
    """
    d = g.shape[0]
    if s == INF:
        return np.eye(d, dtype=complex), float(np.real(np.trace(g)))
    w, v = np.linalg.eigh(herm(g))
    w = np.clip(w, 0.0, None)
    wmax = float(w[-1])
    if wmax <= 0.0:
        h = np.eye(d, dtype=complex) / d ** (1.0 / s)
        return h, 0.0
    if s <= 1.0 + 1e-12:
        sel = w >= wmax * (1.0 - 1e-12)
        lam = sel.astype(float) / float(sel.sum())
        h = herm((v * lam) @ v.conj().T)
        return h, wmax
    sp = s / (s - 1.0)
    lam = (w / wmax) ** (sp - 1.0)
    lam = lam / float(np.sum(lam**s)) ** (1.0 / s)
    h = herm((v * lam) @ v.conj().T)
    return h, float(np.sum(lam * w))


def _inverse_weight_opt(w_mat: np.ndarray, s: float) -> np.ndarray:
    """Minimize tr(h^(-1) w_mat) over PD h with ||h||_s = 1, w_mat PD.

    Stationarity of this convex problem forces h proportional to
    w_mat**(1/(s+1)); s = inf returns the identity.
    """
    d = w_mat.shape[0]
    if s == INF:
        return np.eye(d, dtype=complex)
    w, v = np.linalg.eigh(herm(w_mat))
    w = np.clip(w, 1e-300, None)
    lam = w ** (1.0 / (s + 1.0))
    lam = lam / float(np.sum(lam**s)) ** (1.0 / s)
    return herm((v * lam) @ v.conj().T)


def _spectral_fn(h: np.ndarray, fn) -> np.ndarray:
    """Apply fn to the (clamped) eigenvalues of a Hermitian matrix."""
    w, v = np.linalg.eigh(herm(h))
    w = np.clip(w, 0.0, None)
    return herm((v * fn(w)) @ v.conj().T)


def _ball_normalize(h: np.ndarray, s: float) -> np.ndarray:
    """Scale a PSD matrix onto the Schatten-s unit sphere."""
    w = np.clip(np.linalg.eigvalsh(herm(h)), 0.0, None)
    if s == INF:
        nrm = float(w[-1])
    else:
        nrm = float(np.sum(w**s)) ** (1.0 / s)
    if nrm <= 0.0:
        d = h.shape[0]
        return _ball_normalize(np.eye(d, dtype=complex), s)
    return h / nrm


# ---------------------------------------------------------------------------
# supremum regime (p >= 2)


def _sup_start(gram: np.ndarray, p: float, r_side: float, s_side: float,
               restart: int, rng: np.random.Generator) -> np.ndarray:
    """Starting point for one restart of the alternating ascent."""
    d = gram.shape[0]
    if restart == 0:
        # power of the Gram; reproduces the tight single-entry optimizer
        t = min(p, 8.0 * d) * inv_exponent(r_side)
        w, v = np.linalg.eigh(herm(gram))
        w = np.clip(w, 0.0, None)
        wmax = float(w[-1])
        if wmax <= 0.0:
            return _ball_normalize(np.eye(d, dtype=complex), s_side)
        lam = (w / wmax) ** t
        return _ball_normalize(herm((v * lam) @ v.conj().T), s_side)
    if restart == 1:
        return _ball_normalize(np.eye(d, dtype=complex), s_side)
    z = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return _ball_normalize(herm(z @ z.conj().T), s_side)


def alpha_sup(x: MatrixTuple, p, theta, cfg: SolverConfig | None = None,
              on_iterate=None) -> NormEstimate:
    """Unit-ball supremum estimate of alpha for p >= 2 (a lower bound).

    Alternates closed-form updates: with b fixed, the optimal h_a = a*a
    maximizes tr(h_a G) over the Schatten-(r0/2) ball for the PSD matrix
    G = sum_k x_k (b b*) x_k*, solved by a normalized dual power of G;
    then symmetrically in b.  Each half step solves its block exactly so
    the objective never decreases; this is checked every iteration.  The
    best of cfg.restarts seeded starts is returned with the feasible pair
    (a, b) as witness.

    on_iterate, when given, is called as on_iterate(restart, iteration,
    current_value) after every full sweep.
    """
    cfg = cfg or SolverConfig()
    p = check_exponent(p)
    if p < 2.0:
        raise InputError("alpha_sup requires p >= 2")
    ex = derive_exponents(p, theta)
    s_a, s_b = _half(ex.r0), _half(ex.r1)
    d = x.d
    scale = x.l2()
    eye = np.eye(d, dtype=complex)
    if scale == 0.0:
        return NormEstimate(0.0, "exact", UnitBallPair(eye, eye), 0, True)

    xn = x.mats / scale
    xnc = xn.conj()
    gram_col = herm(np.einsum("kli,klj->ij", xnc, xn))
    slack = 1e-11

    rng = np.random.default_rng(cfg.seed)
    best_f, best_pair, best_iters, best_conv = -1.0, (eye, eye), 0, False
    for restart in range(max(1, cfg.restarts)):
        h_b = _sup_start(gram_col, p, ex.r1, s_b, restart, rng)
        h_a = eye
        f_prev = -1.0
        iters, conv = 0, False
        for it in range(cfg.max_iters):
            g_a = herm(np.einsum("kil,lm,kjm->ij", xn, h_b, xnc))
            h_a, f_a = _dual_power_opt(g_a, s_a)
            if f_a < f_prev - slack * max(f_prev, 1.0):
                raise InconsistencyError("alternating ascent decreased on the a step")
            g_b = herm(np.einsum("kli,lm,kmj->ij", xnc, h_a, xn))
            h_b, f_b = _dual_power_opt(g_b, s_b)
            if f_b < f_a - slack * max(f_a, 1.0):
                raise InconsistencyError("alternating ascent decreased on the b step")
            iters = it + 1
            if on_iterate is not None:
                on_iterate(restart, it, math.sqrt(max(f_b, 0.0)) * scale)
            if f_prev >= 0.0 and abs(f_b - f_prev) <= cfg.tol * max(f_b, 1e-300):
                conv = True
                f_prev = f_b
                break
            f_prev = f_b
        if f_prev > best_f:
            best_f = f_prev
            best_pair = (h_a, h_b)
            best_iters, best_conv = iters, conv

    h_a, h_b = best_pair
    a = _spectral_fn(h_a, np.sqrt)
    b = _spectral_fn(h_b, np.sqrt)
    value = float(np.linalg.norm(np.matmul(np.matmul(a, x.mats), b)))
    if not best_conv:
        logger.warning(
            "alpha_sup hit max_iters=%d before tol (p=%s, theta=%s)",
            cfg.max_iters, p, theta,
        )
    return NormEstimate(value, "lower", UnitBallPair(a, b), best_iters, best_conv)


# ---------------------------------------------------------------------------
# infimum regime (p <= 2)


def _inf_start(gram_row: np.ndarray, gram_col: np.ndarray, t_a: float, t_b: float,
               s_a: float, s_b: float, eps: float, restart: int,
               rng: np.random.Generator):
    """Starting pair (h_a, h_b) for one restart of the block descent."""
    d = gram_row.shape[0]
    eye = np.eye(d, dtype=complex)
    h_a = _spectral_fn(gram_row + eps * eye, lambda w: w**t_a)
    h_b = _spectral_fn(gram_col + eps * eye, lambda w: w**t_b)
    if restart == 1:
        h_a, h_b = eye, eye
    elif restart >= 2:
        za = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        zb = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        wa = herm(za @ za.conj().T)
        wb = herm(zb @ zb.conj().T)
        h_a = 0.5 * h_a / max(np.trace(h_a).real, 1e-300) + 0.5 * wa / max(np.trace(wa).real, 1e-300)
        h_b = 0.5 * h_b / max(np.trace(h_b).real, 1e-300) + 0.5 * wb / max(np.trace(wb).real, 1e-300)
    return _ball_normalize(h_a, s_a), _ball_normalize(h_b, s_b)


def alpha_inf(x: MatrixTuple, p, theta, cfg: SolverConfig | None = None) -> NormEstimate:
    """Factorization infimum estimate of alpha for p <= 2 (an upper bound).

    Restricts to positive definite a, b (polar parts can always be
    absorbed into the middle factors), which forces y_k = a^(-1) x_k
    b^(-1).  With b fixed the optimal h_a = a^2 minimizes
    tr(h^(-1) W) over the Schatten-(r0/2) sphere, W = sum_k w_k w_k* with
    w_k = x_k b^(-1); the minimizer is a normalized power W**(1/(s+1)).
    Blocks alternate to a fixed point.  Positivity is kept by a relative
    epsilon floor on the Gram matrices, halved twice with warm restarts.
    Returns the witness factorization; the reported value is re-evaluated
    from the witness and certifies alpha from above.
    """
    cfg = cfg or SolverConfig()
    p = check_exponent(p)
    if p > 2.0:
        raise InputError("alpha_inf requires p <= 2")
    ex = derive_exponents(p, theta)
    s_a, s_b = _half(ex.r0), _half(ex.r1)
    d = x.d
    eye = np.eye(d, dtype=complex)
    scale = x.l2()
    if scale == 0.0:
        zeros = MatrixTuple(np.zeros_like(x.mats))
        return NormEstimate(0.0, "exact", Factorization(eye, zeros, eye, 0.0), 0, True)

    xn = x.mats / scale
    xnc = xn.conj()
    gram_col = herm(np.einsum("kli,klj->ij", xnc, xn))
    gram_row = herm(np.einsum("kil,kjl->ij", xn, xnc))
    lam = max(float(np.linalg.eigvalsh(gram_col)[-1]),
              float(np.linalg.eigvalsh(gram_row)[-1]))
    eps0 = cfg.eps_rel * lam
    t_a = p * inv_exponent(ex.r0)
    t_b = p * inv_exponent(ex.r1)

    rng = np.random.default_rng(cfg.seed)
    best = (math.inf, eye, eye, 0, False)
    for restart in range(max(1, cfg.restarts)):
        h_a, h_b = _inf_start(gram_row, gram_col, t_a, t_b, s_a, s_b, eps0, restart, rng)
        iters, conv = 0, False
        obj = math.inf
        for eps in (eps0, 0.5 * eps0, 0.25 * eps0):
            obj_prev = math.inf
            conv = False
            for _ in range(cfg.max_iters):
                b_is = _spectral_fn(h_b, lambda w: np.clip(w, 1e-300, None) ** -0.5)
                w_k = np.matmul(xn, b_is)
                w_gram = herm(np.einsum("kil,kjl->ij", w_k, w_k.conj())) + eps * eye
                h_a = _inverse_weight_opt(w_gram, s_a)
                a_is = _spectral_fn(h_a, lambda w: np.clip(w, 1e-300, None) ** -0.5)
                v_k = np.matmul(a_is, xn)
                v_gram = herm(np.einsum("kli,klj->ij", v_k.conj(), v_k)) + eps * eye
                h_b = _inverse_weight_opt(v_gram, s_b)
                b_is = _spectral_fn(h_b, lambda w: np.clip(w, 1e-300, None) ** -0.5)
                obj = float(np.linalg.norm(np.matmul(v_k, b_is)))
                iters += 1
                if math.isfinite(obj_prev) and abs(obj - obj_prev) <= cfg.tol * max(obj, 1e-300):
                    conv = True
                    break
                obj_prev = obj
        if obj < best[0]:
            best = (obj, h_a, h_b, iters, conv)

    _, h_a, h_b, iters, conv = best
    a = _spectral_fn(h_a, np.sqrt)
    b = _spectral_fn(h_b, np.sqrt)
    a_is = _spectral_fn(h_a, lambda w: np.clip(w, 1e-300, None) ** -0.5)
    b_is = _spectral_fn(h_b, lambda w: np.clip(w, 1e-300, None) ** -0.5)
    ys = MatrixTuple(scale * np.matmul(np.matmul(a_is, xn), b_is))
    objective = schatten_norm(a, ex.r0) * schatten_norm(b, ex.r1) * ys.l2()
    fact = Factorization(a, ys, b, objective)
    defect = fact.max_defect(x)
    if defect > TOL_FACT:
        # inversion degraded; rebuild once on a stiffer floor
        logger.warning("alpha_inf witness defect %.2e, re-regularizing", defect)
        floor = 100.0 * eps0
        h_a = _ball_normalize(h_a + floor * eye, s_a)
        h_b = _ball_normalize(h_b + floor * eye, s_b)
        a = _spectral_fn(h_a, np.sqrt)
        b = _spectral_fn(h_b, np.sqrt)
        a_is = _spectral_fn(h_a, lambda w: w**-0.5)
        b_is = _spectral_fn(h_b, lambda w: w**-0.5)
        ys = MatrixTuple(scale * np.matmul(np.matmul(a_is, xn), b_is))
        objective = schatten_norm(a, ex.r0) * schatten_norm(b, ex.r1) * ys.l2()
        fact = Factorization(a, ys, b, objective)
    if not conv:
        logger.warning(
            "alpha_inf hit max_iters=%d before tol (p=%s, theta=%s)",
            cfg.max_iters, p, theta,
        )
    return NormEstimate(objective, "upper", fact, iters, conv)


# ---------------------------------------------------------------------------
# dispatch and duality


def alpha(x: MatrixTuple, p, theta, cfg: SolverConfig | None = None) -> NormEstimate:
    """Variational estimate of the interpolated tuple norm.

    Dispatches on the exponent: the factorization infimum below p = 2,
    the unit-ball supremum above, and the exact Hilbert-Schmidt value
    (sum_k ||x_k||_2^2)^(1/2) at p = 2 where both expressions collapse.
    """
    p = check_exponent(p)
    derive_exponents(p, theta)  # validates theta
    if p == 2.0:
        eye = np.eye(x.d, dtype=complex)
        return NormEstimate(x.l2(), "exact", UnitBallPair(eye, eye), 0, True)
    if p < 2.0:
        return alpha_inf(x, p, theta, cfg)
    return alpha_sup(x, p, theta, cfg)


def _right_solve(num: np.ndarray, den: np.ndarray) -> np.ndarray:
    """num @ den^(-1) via a transposed linear solve (batched in num)."""
    return np.linalg.solve(den.T, num.swapaxes(-1, -2)).swapaxes(-1, -2)


def _dual_candidates(x: MatrixTuple, primal: NormEstimate, p: float) -> list[MatrixTuple]:
    """Candidate dual tuples seeded from the primal witness."""
    cands = [x.scaled(1.0 / max(x.l2(), 1e-300))]
    w = primal.witness
    if primal.value <= 0.0:
        return cands
    if p > 2.0 and isinstance(w, UnitBallPair):
        h_a, h_b = w.a @ w.a, w.b @ w.b
        z = np.matmul(np.matmul(h_a, x.mats), h_b) / primal.value
        cands.append(MatrixTuple(z))
    elif p < 2.0 and isinstance(w, Factorization):
        h_a, h_b = w.a @ w.a, w.b @ w.b
        try:
            z = _right_solve(np.linalg.solve(h_a, x.mats), h_b)
            cands.append(MatrixTuple(z))
        except np.linalg.LinAlgError:
            pass
    return cands


def _alpha_gradient(z: MatrixTuple, est: NormEstimate) -> np.ndarray | None:
    """Envelope gradient of alpha at z from the returned witness."""
    w = est.witness
    if est.value <= 0.0 or w is None:
        return None
    if isinstance(w, UnitBallPair):
        azb = np.matmul(np.matmul(w.a, z.mats), w.b)
        return np.matmul(np.matmul(w.a, azb), w.b) / est.value
    if isinstance(w, Factorization):
        ylen = max(w.ys.l2(), 1e-300)
        try:
            g = _right_solve(np.linalg.solve(w.a, w.ys.mats), w.b)
        except np.linalg.LinAlgError:
            return None
        # objective = |a| |b| ylen with y = a^(-1) z b^(-1); differentiating
        # the middle length gives (value / ylen^2) * a^(-1) y b^(-1)
        return est.value / (ylen * ylen) * g
    return None


def dual_norm_estimate(x: MatrixTuple, p, theta, cfg: SolverConfig | None = None) -> NormEstimate:
    """Lower bound on alpha(x, p, theta) through the trace pairing.

    The dual norm of alpha at exponent p is alpha at the conjugate
    exponent, so every tuple z gives the certified bound
    |sum_k tr(z_k* x_k)| / alpha(z, p', theta).  Candidates transported
    from the primal witness start at the tight pairing; a short projected
    ascent with envelope gradients then polishes the ratio.
    """
    cfg = cfg or SolverConfig()
    p = check_exponent(p)
    derive_exponents(p, theta)
    q = conjugate_exponent(p)
    scale = x.l2()
    if scale == 0.0:
        return NormEstimate(0.0, "exact", None, 0, True)

    primal = alpha(x, p, theta, cfg)
    best_ratio, best_z, best_est = -1.0, None, None
    for z in _dual_candidates(x, primal, p):
        est = alpha(z, q, theta, cfg)
        if est.value <= 0.0:
            continue
        ratio = abs(trace_pairing(x, z)) / est.value
        if ratio > best_ratio:
            best_ratio, best_z, best_est = ratio, z, est

    if best_z is None:
        return NormEstimate(0.0, "lower", None, 0, False)

    step = 0.5
    evals = 0
    for _ in range(max(0, cfg.dual_steps)):
        pairing = trace_pairing(x, best_z)
        if abs(pairing) <= 0.0:
            break
        phase = np.conj(pairing) / abs(pairing)
        g_num = x.mats * phase
        g_den = _alpha_gradient(best_z, best_est)
        if g_den is None:
            break
        grad = (g_num * best_est.value - abs(pairing) * g_den) / best_est.value**2
        gnorm = float(np.linalg.norm(grad))
        if gnorm <= 1e-14 * best_ratio:
            break
        direction = grad / gnorm * float(np.linalg.norm(best_z.mats))
        improved = False
        for _ in range(3):
            z_try = MatrixTuple(best_z.mats + step * direction)
            est_try = alpha(z_try, q, theta, cfg)
            evals += 1
            if est_try.value > 0.0:
                ratio_try = abs(trace_pairing(x, z_try)) / est_try.value
                if ratio_try > best_ratio * (1.0 + 1e-12):
                    best_ratio, best_z, best_est = ratio_try, z_try, est_try
                    improved = True
                    break
            step *= 0.5
        if not improved and step < 1e-6:
            break
    return NormEstimate(best_ratio, "lower", None, evals, True)
