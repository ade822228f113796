"""Desk-scale spectral verification of front marginal stability.

The linearization of the traveling-wave system about a front (U, V) is the
block operator

    A = [ d1 dxx + c dx + (V'' + V' dx + 1 - 2U)    U dxx + U' dx ]
        [ 1                                          delta^2 dxx - 1 ],

paired with the selector K = diag(1, 0): temporal eigenvalues solve
(A - lambda K) psi = 0.  Exponential two-sided weights move the essential
spectrum; conjugating by omega(x) with rates (eta_minus, eta_plus) replaces
d/dx by d/dx - theta'(x).

Point spectrum is extracted by shift-invert on the singular pencil:
eigenvalues of (A - s K)^{-1} K are 1/(lambda - s), with the chemical
block's infinite eigenvalues landing at zero and discarded.  On a finite
domain, essential spectrum shows up as clusters of spurious eigenvalues
that move when the domain grows; candidates are classified by re-solving
on a longer domain and measuring the drift.
"""

from dataclasses import dataclass, field
from math import sqrt
from typing import Optional

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .continuation import FrontSolution, Grid, solve_pulled, solve_pushed
from .errors import DomainError, EigSolverFailure
from .stencils import derivative_matrix

__all__ = [
    "WeightedLinearization",
    "assemble",
    "point_spectrum_window",
    "scan_point_spectrum",
    "translation_mode_residual",
]

#: Discretization-trust ceiling for |lambda|; larger moduli are excluded
#: analytically (large-eigenvalue sector), not scanned.
LAMBDA_CEILING = 10.0

#: Candidates moving by more than this under domain growth are classified
#: as essential-spectrum artifacts.
DRIFT_TOL = 1e-4


def _weight_exponent(x, eta_minus, eta_plus):
    """C^2 exponent theta with theta' = eta_minus for x <= -1, eta_plus for
    x >= 1, smoothly blended between.  Returns (theta', theta'', theta)."""
    x = np.asarray(x, dtype=float)
    s = np.clip((x + 1.0) / 2.0, 0.0, 1.0)
    blend = s**3 * (10.0 + s * (-15.0 + 6.0 * s))
    dblend = np.where((s > 0) & (s < 1), 30.0 * s**2 * (1.0 - s) ** 2 / 2.0, 0.0)
    th1 = eta_minus + (eta_plus - eta_minus) * blend
    th2 = (eta_plus - eta_minus) * dblend
    # integral of the blend: 2 * int_0^s S = 2 s^4 (2.5 - 3 s + s^2),
    # extended linearly past the blend window
    phi_mid = 2.0 * s**4 * (2.5 + s * (-3.0 + s))
    phi = np.where(x <= -1.0, 0.0, np.where(x >= 1.0, x, phi_mid))
    theta = eta_minus * x + (eta_plus - eta_minus) * phi
    return th1, th2, theta


@dataclass
class WeightedLinearization:
    """Banded discretization of the weighted front linearization."""

    front: Optional[FrontSolution]
    eta_minus: float
    eta_plus: float
    A: sp.csr_matrix = field(repr=False)
    K: sp.csr_matrix = field(repr=False)
    grid: Grid = None

    @property
    def n(self):
        return self.A.shape[0] // 2


def _conjugated_blocks(x, dx, coeffs, theta):
    """Assemble omega [a2 dxx + a1 dx + a0] omega^{-1} as a discrete
    sandwich: entries pick up e^{theta_i - theta_j}, bounded by the stencil
    width, and the truncation stays that of the unweighted smooth data."""
    n = len(x)
    D1 = derivative_matrix(n, dx, 1)
    D2 = derivative_matrix(n, dx, 2)
    a0, a1, a2 = coeffs
    W = sp.diags(np.exp(theta - theta.mean()))
    Wi = sp.diags(np.exp(-(theta - theta.mean())))
    op = W @ (sp.diags(a2) @ D2 + sp.diags(a1) @ D1) @ Wi + sp.diags(a0)
    return op.tocsr()


def assemble(front, eta_minus=0.0, eta_plus=None, grid=None, profiles=None,
             params=None):
    """Weighted linearization about a front.

    Parameters
    ----------
    front : FrontSolution or None
        Converged front; ``None`` assembles a constant-coefficient operator
        from ``profiles`` (used for the leading-edge/wake checks).
    eta_minus, eta_plus : float
        Weight rates on the left and right; ``eta_plus`` defaults to the
        double-root rate 1/sqrt(d1).
    """
    if front is not None:
        grid = front.grid
        params = front.params
        u, du, _d2u, v, dv, d2v = front.profiles()
        if params.delta > 0:
            # second equation: chemical curvature is slaved exactly
            d2v = (v - u) / params.delta**2
        else:
            d2v = _d2u
    else:
        u, du, v, dv, d2v = profiles
        u = np.full(grid.n, float(u))
        du = np.full(grid.n, float(du))
        dv = np.full(grid.n, float(dv))
        d2v = np.full(grid.n, float(d2v))
    if eta_plus is None:
        eta_plus = 1.0 / sqrt(params.d1)
    x = grid.x
    _th1, _th2, theta = _weight_exponent(x, eta_minus, eta_plus)
    ones = np.ones(grid.n)
    zeros = np.zeros(grid.n)
    A11 = _conjugated_blocks(x, grid.dx, (d2v + 1.0 - 2.0 * u, params.c + dv,
                                          params.d1 * ones), theta)
    A12 = _conjugated_blocks(x, grid.dx, (zeros, du, u), theta)
    A21 = sp.identity(grid.n, format="csr")
    A22 = _conjugated_blocks(x, grid.dx, (-ones, zeros,
                                          params.delta**2 * ones), theta)
    A = sp.bmat([[A11, A12], [A21, A22]], format="lil")
    K = sp.bmat([[sp.identity(grid.n), None],
                 [None, sp.csr_matrix((grid.n, grid.n))]], format="lil")
    # Dirichlet closure at the two outermost nodes per side and block:
    # candidate eigenfunctions decay in the weighted norm, and without the
    # closure the finite section admits spurious boundary-layer modes with
    # small |lambda|.  The closed rows are lambda-independent, so they land
    # on the pencil's infinite part and drop out of the shift-invert scan.
    n = grid.n
    for base in (0, n):
        for i in (0, 1, n - 2, n - 1):
            j = base + i
            A.rows[j] = [j]
            A.data[j] = [1.0]
            K.rows[j] = []
            K.data[j] = []
    A = A.tocsr()
    K = K.tocsr()
    return WeightedLinearization(front=front, eta_minus=eta_minus,
                                 eta_plus=eta_plus, A=A, K=K, grid=grid)


def point_spectrum_window(lin, re_margin=1.0, lam_ceiling=LAMBDA_CEILING,
                          shift=1.0 + 0.0j, lin_drift=None):
    """Eigenvalues of the pencil (A, K) inside the scan window.

    Shift-invert around ``shift``: eigenvalues mu of (A - s K)^{-1} K give
    lambda = s + 1/mu; the structurally infinite eigenvalues of the
    chemical block arrive at mu = 0 and are dropped.  With ``lin_drift``
    (the same front re-solved on a longer domain) candidates are classified
    ``point`` or ``essential`` by their drift.

    Returns
    -------
    list of dict with keys lam, vector, classification.
    """
    lam, vecs = _pencil_eigs(lin, shift)
    keep = ((lam.real >= -re_margin) & (np.abs(lam) <= lam_ceiling)
            & (np.abs(lam - shift) > 1e-3 * (1.0 + abs(shift))))
    lam, vecs = lam[keep], vecs[:, keep]
    drift_lams = None
    if lin_drift is not None:
        drift_lams, _ = _pencil_eigs(lin_drift, shift)
    t_mode = None
    if lin.front is not None:
        t_mode = _translation_mode(lin)
        t_mode = t_mode / np.linalg.norm(t_mode)
    out = []
    order = np.argsort(-lam.real)
    for j in order:
        entry = {"lam": complex(lam[j]), "vector": vecs[:, j], "classification": "point"}
        if t_mode is not None:
            vec = vecs[:, j] / np.linalg.norm(vecs[:, j])
            entry["mode_cosine"] = float(abs(np.vdot(vec, t_mode)))
            if entry["mode_cosine"] > 0.99:
                entry["classification"] = "translation"
        if drift_lams is not None and entry["classification"] != "translation":
            dist = np.min(np.abs(drift_lams - lam[j])) if len(drift_lams) else np.inf
            entry["drift"] = float(dist)
            entry["classification"] = "point" if dist <= DRIFT_TOL else "essential"
        out.append(entry)
    return out


def _translation_mode(lin):
    """Weighted translation mode omega (U', V') on the grid."""
    x = lin.grid.x
    _th1, _th2, theta = _weight_exponent(x, lin.eta_minus, lin.eta_plus)
    omega = np.exp(theta - theta[0])
    _u, du, _d2u, _v, dv, _d2v = lin.front.profiles()
    return np.concatenate([omega * du, omega * dv])


def _pencil_eigs(lin, shift):
    n2 = lin.A.shape[0]
    try:
        lu = spla.splu((lin.A - shift * lin.K).tocsc())
        B = lu.solve(lin.K.toarray())
        mu, vecs = scipy.linalg.eig(B)
    except Exception as exc:
        raise EigSolverFailure(f"shift-invert eigen solve failed: {exc}") from exc
    # mu ~ 0: the chemical block's structurally infinite eigenvalues;
    # |mu| huge: numerical artifacts pinned at the shift itself.
    finite = (np.abs(mu) > 1e-9) & (np.abs(mu) < 1e9)
    lam = np.full(mu.shape, np.inf + 0j)
    lam[finite] = shift + 1.0 / mu[finite]
    return lam[finite], vecs[:, finite]


def scan_point_spectrum(d1, delta, kind, eta_plus=None, grid=None,
                        re_margin=1e-2, drift_factor=1.25):
    """Solve the front, assemble at two domain sizes, classify candidates.

    The drift run re-solves the front on a domain ``drift_factor`` times
    longer at the same spacing.
    """
    grid = grid or Grid()
    solve = solve_pushed if kind == "pushed" else solve_pulled
    front = solve(d1, delta, grid)
    grid2 = Grid(L=round(grid.L * drift_factor, 6), dx=grid.dx, collar=grid.collar)
    front2 = solve(d1, delta, grid2)
    if eta_plus is None:
        eta_lin = 1.0 / sqrt(d1)
        if kind == "pushed":
            # midpoint of the admissible window (eta_lin, eta_ps):
            # balances the mode's and the adjoint mode's boundary decay,
            # which is what controls the finite-domain eigenvalue bias
            eta_plus = 0.5 * (eta_lin + front.eta_ps)
        else:
            eta_plus = eta_lin
    lin = assemble(front, 0.0, eta_plus)
    lin2 = assemble(front2, 0.0, eta_plus)
    cands = point_spectrum_window(lin, re_margin=re_margin, lin_drift=lin2)
    return front, lin, cands


def constant_symbol_lambda(params, state, eta, k):
    """Continuum symbol of the assembled constant-coefficient operator.

    Solves det(A_hat(ik - eta) - lambda K_hat) = 0 for the block structure
    used by :func:`assemble`; agrees with the model-core essential-spectrum
    curves to machine precision (cross-module consistency).
    """
    k = np.asarray(k, dtype=float)
    nu = 1j * k - eta
    if state == "leading_edge":
        u = 0.0
    elif state == "wake":
        u = 1.0
    else:
        raise DomainError(f"unknown state {state!r}")
    a11 = params.d1 * nu**2 + params.c * nu + 1.0 - 2.0 * u
    a12 = u * nu**2
    a22 = params.delta**2 * nu**2 - 1.0
    return a11 - a12 / a22


def translation_mode_residual(lin):
    """|| A (omega (U', V')) || / || mode ||: the discrete zero-mode defect.

    The translation mode solves the unweighted problem exactly, so its
    weighted image under A measures pure discretization error; it decreases
    at fourth order under refinement.
    """
    if lin.front is None:
        raise DomainError("translation mode needs a front-based linearization")
    mode = _translation_mode(lin)
    r = lin.A @ mode
    # exclude the Dirichlet closure rows: they read the mode's (exponentially
    # small but nonzero) boundary values, which is a truncation of the
    # domain, not of the stencils
    n = lin.grid.n
    mask = np.ones(2 * n, dtype=bool)
    for base in (0, n):
        for i in (0, 1, n - 2, n - 1):
            mask[base + i] = False
    return float(np.linalg.norm(r[mask]) / np.linalg.norm(mode))
