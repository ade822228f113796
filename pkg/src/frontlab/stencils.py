"""Fourth-order finite-difference stencils on uniform grids.

Single source of truth for every discretized derivative in the package:
the boundary-value solver, the spectral assembly, and the slow-manifold
grid evaluations all build their derivative matrices here, so no two
modules can disagree about the discretization.

Interior rows use centered stencils; rows too close to an edge fall back
to offset (one-sided) stencils wide enough to keep fourth-order accuracy.
Weights are generated from the Taylor/Vandermonde system rather than
transcribed tables.
"""

from functools import lru_cache
from math import factorial

import numpy as np
import scipy.sparse as sp

__all__ = ["fd_weights", "derivative_matrix", "apply_derivative"]


def fd_weights(offsets, order):
    """Finite-difference weights for the ``order``-th derivative.

    Parameters
    ----------
    offsets : sequence of int or float
        Node positions relative to the evaluation point, in grid-spacing
        units (e.g. ``[-2, -1, 0, 1, 2]``).
    order : int
        Derivative order (0 allowed).

    Returns
    -------
    ndarray
        Weights w such that  f^(order)(x0) ~ sum_j w_j f(x0 + offsets_j h) / h**order.
    """
    z = np.asarray(offsets, dtype=float)
    p = len(z)
    if order >= p:
        raise ValueError("need more nodes than derivative order")
    # Row k of the system enforces exactness on the monomial x**k.
    A = np.vander(z, p, increasing=True).T
    rhs = np.zeros(p)
    rhs[order] = factorial(order)
    return np.linalg.solve(A, rhs)


def _stencil_nodes(i, n, order, acc=4):
    """Node indices for the row at ``i`` on an ``n``-point grid.

    Centered stencils of 2*half+1 points where they fit (half chosen for
    the requested accuracy, with the parity bonus), one-sided stencils of
    ``acc + order`` points at the edges.
    """
    width = acc + order
    half = (acc + order - 1) // 2
    if i - half >= 0 and i + half <= n - 1:
        return np.arange(i - half, i + half + 1)
    lo = min(max(i - (width - 1), 0), n - width)
    if i - half < 0:
        lo = 0
    return np.arange(lo, lo + width)


@lru_cache(maxsize=64)
def derivative_matrix(n, dx, order, acc=4):
    """Sparse n-by-n matrix applying the ``order``-th derivative.

    Fourth-order accurate at every row, including the offset rows next to
    each boundary.
    """
    rows, cols, vals = [], [], []
    for i in range(n):
        nodes = _stencil_nodes(i, n, order, acc)
        w = fd_weights(nodes - i, order) / dx**order
        rows.extend([i] * len(nodes))
        cols.extend(nodes.tolist())
        vals.extend(w.tolist())
    return sp.csr_matrix((vals, (rows, cols)), shape=(n, n))


def apply_derivative(values, dx, order, acc=4):
    """Differentiate grid data with the shared stencils."""
    values = np.asarray(values, dtype=float)
    D = derivative_matrix(len(values), float(dx), order, acc)
    return D @ values
