"""Column and row norms of matrix tuples.

A tuple x = (x_1, ..., x_n) is measured two natural ways: through the
column Gram sum_k x_k* x_k or the row Gram sum_k x_k x_k*.  The norm is
the Schatten p-norm of the PSD square root of the respective Gram.
"""

from __future__ import annotations

import numpy as np

from .core import MatrixTuple, herm, psd_power, schatten_norm


def column_gram(x: MatrixTuple) -> np.ndarray:
    """sum_k x_k* x_k, symmetrized against roundoff."""
    g = np.einsum("kli,klj->ij", x.mats.conj(), x.mats)
    return herm(g)


def row_gram(x: MatrixTuple) -> np.ndarray:
    """sum_k x_k x_k*, symmetrized against roundoff."""
    g = np.einsum("kil,kjl->ij", x.mats, x.mats.conj())
    return herm(g)


def column_norm(x: MatrixTuple, p) -> float:
    """Schatten p-norm of (sum_k x_k* x_k)^(1/2)."""
    return schatten_norm(psd_power(column_gram(x), 0.5), p)


def row_norm(x: MatrixTuple, p) -> float:
    """Schatten p-norm of (sum_k x_k x_k*)^(1/2)."""
    return schatten_norm(psd_power(row_gram(x), 0.5), p)
