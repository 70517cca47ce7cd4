"""Matrix calculus primitives on d-by-d complex matrices.

Everything downstream works on the algebra of d-by-d complex matrices with
the unnormalized trace (trace of the identity is d).  This module provides
the shared vocabulary: Schatten norms with the exponent infinity handled
exactly, powers of positive semidefinite matrices, polar splittings, the
trace pairing, and the immutable tuple container.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InputError, ShapeError, SingularMatrixError

INF = math.inf

#: relative tolerance for Hermiticity checks and eigenvalue clamping
TOL_PSD = 1e-10
#: relative eigenvalue threshold below which negative powers are refused
PINV_RTHRESH = 1e-12
#: relative tolerance for witness reconstruction checks
TOL_FACT = 1e-8


def check_exponent(p) -> float:
    """Validate a Schatten exponent; returns it as float with inf allowed."""
    try:
        p = float(p)
    except (TypeError, ValueError) as exc:
        raise InputError(f"exponent must be a number, got {p!r}") from exc
    if math.isnan(p) or p < 1.0:
        raise InputError(f"exponent must lie in [1, inf], got {p!r}")
    return p


def conjugate_exponent(p) -> float:
    """Conjugate exponent p' with 1/p + 1/p' = 1, exchanging 1 and inf.

    Computed through reciprocals so that nice rationals round-trip exactly
    (conjugate_exponent(4/3) == 4.0).
    """
    p = check_exponent(p)
    if p == 1.0:
        return INF
    if p == INF:
        return 1.0
    return 1.0 / (1.0 - 1.0 / p)


def inv_exponent(p) -> float:
    """Reciprocal with the convention 1/inf = 0."""
    p = check_exponent(p)
    return 0.0 if p == INF else 1.0 / p


def as_matrix(m) -> np.ndarray:
    """Coerce to a finite square complex128 array."""
    a = np.asarray(m, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ShapeError(f"expected a square matrix, got shape {a.shape}")
    if not np.isfinite(a).all():
        raise InputError("matrix entries must be finite")
    return a


def herm(m: np.ndarray) -> np.ndarray:
    """Hermitian part (m + m*)/2; used to scrub roundoff before eigh."""
    return 0.5 * (m + m.conj().T)


def schatten_norm(m, p) -> float:
    """Schatten p-norm: the vector p-norm of the singular values.

    p = inf gives the operator norm, p = 1 the trace norm, p = 2 the
    Frobenius norm.  The sum is factored through the largest singular
    value so large exponents do not overflow.
    """
    p = check_exponent(p)
    a = as_matrix(m)
    s = np.linalg.svd(a, compute_uv=False)
    smax = float(s[0]) if s.size else 0.0
    if smax == 0.0:
        return 0.0
    if p == INF:
        return smax
    return smax * float(np.sum((s / smax) ** p)) ** (1.0 / p)


def _checked_eigh(m, tol_psd: float):
    """Eigendecomposition of a nominally Hermitian PSD matrix.

    Returns clamped nonnegative eigenvalues (ascending) and eigenvectors.
    Raises InputError when the input is not Hermitian PSD within the
    relative tolerance.
    """
    a = as_matrix(m)
    scale = float(np.linalg.norm(a, ord=2)) if a.size else 0.0
    if scale > 0.0 and float(np.linalg.norm(a - a.conj().T, ord=2)) > tol_psd * scale:
        raise InputError("matrix is not Hermitian within tolerance")
    w, v = np.linalg.eigh(herm(a))
    wmax = float(w[-1]) if w.size else 0.0
    floor = -tol_psd * max(abs(wmax), 1e-300)
    if w.size and float(w[0]) < floor:
        raise InputError(
            f"matrix is not PSD within tolerance (min eigenvalue {w[0]:.3e})"
        )
    return np.clip(w, 0.0, None), v


def psd_power(m, s, *, tol_psd: float = TOL_PSD) -> np.ndarray:
    """Spectral power m**s of a Hermitian PSD matrix.

    Eigenvalues in [-tol_psd, 0] (relative) are clamped to zero first.
    Negative powers raise SingularMatrixError when any eigenvalue falls
    below the pseudo-inverse threshold relative to the largest.
    """
    s = float(s)
    w, v = _checked_eigh(m, tol_psd)
    wmax = float(w[-1]) if w.size else 0.0
    if s < 0.0:
        if wmax <= 0.0 or float(w[0]) <= PINV_RTHRESH * wmax:
            raise SingularMatrixError(
                "negative power of a singular PSD matrix requested"
            )
    ws = w**s
    return herm((v * ws) @ v.conj().T)


def polar(m):
    """Polar splitting m = u h with h = (m* m)^(1/2) PSD.

    The partial isometry u is supported on the range of h: u* u acts as
    the identity there and vanishes on the orthogonal complement, so for
    singular m the isometric factor has matching rank.
    """
    a = as_matrix(m)
    u_full, s, vh = np.linalg.svd(a)
    h = herm((vh.conj().T * s) @ vh)
    smax = float(s[0]) if s.size else 0.0
    keep = s > PINV_RTHRESH * smax if smax > 0.0 else np.zeros(s.shape, dtype=bool)
    u = u_full[:, keep] @ vh[keep, :]
    return u, h


@dataclass(frozen=True)
class MatrixTuple:
    """Immutable finite tuple of same-sized square complex matrices.

    The backing array has shape (n, d, d) with n >= 1 and is frozen after
    validation, so tuples can be shared between threads safely.
    """

    mats: np.ndarray

    def __post_init__(self):
        a = np.array(self.mats, dtype=np.complex128, copy=True)
        if a.ndim != 3 or a.shape[1] != a.shape[2]:
            raise ShapeError(f"expected shape (n, d, d), got {a.shape}")
        if a.shape[0] < 1 or a.shape[1] < 1:
            raise ShapeError("tuple needs n >= 1 entries of dimension d >= 1")
        if not np.isfinite(a).all():
            raise InputError("tuple entries must be finite")
        a.setflags(write=False)
        object.__setattr__(self, "mats", a)

    @classmethod
    def from_matrices(cls, matrices) -> "MatrixTuple":
        return cls(np.stack([as_matrix(m) for m in matrices]))

    @property
    def n(self) -> int:
        return self.mats.shape[0]

    @property
    def d(self) -> int:
        return self.mats.shape[1]

    def __len__(self) -> int:
        return self.n

    def __iter__(self):
        return iter(self.mats)

    def __getitem__(self, k) -> np.ndarray:
        return self.mats[k]

    def adjoint(self) -> "MatrixTuple":
        """Entrywise adjoint (x_1*, ..., x_n*)."""
        return MatrixTuple(self.mats.conj().transpose(0, 2, 1))

    def scaled(self, lam) -> "MatrixTuple":
        return MatrixTuple(complex(lam) * self.mats)

    def l2(self) -> float:
        """Hilbert-Schmidt length (sum_k ||x_k||_2^2)^(1/2)."""
        return float(np.linalg.norm(self.mats))


def trace_pairing(x: MatrixTuple, y: MatrixTuple) -> complex:
    """Sesquilinear pairing sum_k tr(y_k* x_k), linear in x."""
    if not isinstance(x, MatrixTuple) or not isinstance(y, MatrixTuple):
        raise InputError("trace_pairing expects two MatrixTuple arguments")
    if x.mats.shape != y.mats.shape:
        raise ShapeError(
            f"tuple shapes differ: {x.mats.shape} vs {y.mats.shape}"
        )
    return complex(np.einsum("kij,kij->", x.mats, y.mats.conj()))
