"""Slow-manifold bookkeeping for the singularly perturbed traveling-wave flow.

For small delta all bounded traveling-wave trajectories lie on an invariant
graph H = psi_H(U, W; delta), Z = psi_Z(U, W; delta) over the (U, W) plane.
Along delta = 0 trajectories the graph expansions collapse to profile
derivatives:

    psi_H^0 = U'',   psi_H^1 = 0,   psi_Z^1 = U''',
    psi_H^2 = (U'''' - U' U'''/d1) / (1 + U/d1),

which is all the downstream perturbation formulas consume; no global graph
transform is constructed.  The reduced planar vector field at delta = 0 is

    U' = W,   W' = -(c W + W^2 + U (1 - U)) / (d1 + U).
"""

from math import sqrt

import numpy as np
from scipy.integrate import solve_ivp

from .errors import ConvergenceError, DomainError
from .stencils import apply_derivative

__all__ = [
    "reduced_rhs",
    "eval_psi_expansions",
    "reconstruct_V",
    "integrate_reduced_front",
]


def reduced_rhs(U, W, c, d1):
    """Planar porous-medium traveling-wave vector field (delta = 0).

    Fixed points are exactly (0, 0) and (1, 0).  Requires U > -d1 so the
    degenerate-diffusion denominator stays positive.
    """
    U = np.asarray(U, dtype=float)
    W = np.asarray(W, dtype=float)
    if np.any(U <= -d1):
        raise DomainError("reduced_rhs requires U > -d1")
    dU = W
    dW = -(c * W + W**2 + U * (1.0 - U)) / (d1 + U)
    if U.ndim == 0:
        return float(dU), float(dW)
    return dU, dW


def eval_psi_expansions(profile_derivs, d1):
    """Evaluate (psi_H^0, psi_Z^1, psi_H^2) along a profile.

    Parameters
    ----------
    profile_derivs : tuple
        (u, u', u'', u''', u'''') evaluated at common points.
    d1 : float

    The first-order-in-delta correction psi_H^1 vanishes identically along
    delta = 0 trajectories and is deliberately absent from the return value.
    """
    u, _du, d2u, d3u, d4u = (np.asarray(v, dtype=float) for v in profile_derivs)
    du = np.asarray(profile_derivs[1], dtype=float)
    if np.any(u <= -d1):
        raise DomainError("psi expansions require u > -d1")
    psi_h0 = d2u
    psi_z1 = d3u
    psi_h2 = (d4u - du * d3u / d1) / (1.0 + u / d1)
    return psi_h0, psi_z1, psi_h2


def reconstruct_V(u_values, delta, dx=None, d2u=None):
    """Chemical profile from the population profile: V = U + delta^2 U''.

    This is the slow-manifold graph truncated at the leading expansion
    order; the omitted terms enter at O(delta^4).  Second derivatives are
    formed with the shared fourth-order stencils unless supplied.
    """
    u_values = np.asarray(u_values, dtype=float)
    if delta < 0:
        raise DomainError("delta must be nonnegative")
    if delta == 0.0:
        return u_values.copy()
    if d2u is None:
        if dx is None:
            raise DomainError("reconstruct_V needs dx when d2u is not supplied")
        d2u = apply_derivative(u_values, dx, 2)
    return u_values + delta**2 * np.asarray(d2u, dtype=float)


def integrate_reduced_front(d1, c, x_span=(-40.0, 40.0), eps=1e-10, rtol=1e-12,
                            n_out=4001, x_out=None):
    """Heteroclinic of the reduced planar field by shooting off (1, 0).

    Integrates from the unstable manifold of (1, 0) (eigenvector (1, mu+),
    mu+ the positive root of (d1+1) mu^2 + c mu - 1 = 0) until U drops
    below machine-meaningful size, then shifts x so U(0) = 1/2.

    Returns (x, U, W) arrays: a uniform sampling by default, or the dense
    solution evaluated at ``x_out`` (in the shifted frame) when given.
    """
    mu_plus = (-c + sqrt(c**2 + 4.0 * (d1 + 1.0))) / (2.0 * (d1 + 1.0))
    vec = np.array([1.0, mu_plus])
    vec /= np.linalg.norm(vec)
    y0 = np.array([1.0, 0.0]) - eps * vec

    def rhs(x, y):
        return reduced_rhs(y[0], y[1], c, d1)

    def hit_floor(x, y):
        return y[0] - 1e-13

    hit_floor.terminal = True
    hit_floor.direction = -1

    span = (0.0, (x_span[1] - x_span[0]) * 4.0)
    sol = solve_ivp(rhs, span, y0, method="DOP853", rtol=rtol, atol=1e-14,
                    events=hit_floor, dense_output=True, max_step=0.5)
    if not sol.success:
        raise ConvergenceError(f"reduced front integration failed: {sol.message}")
    s = np.linspace(0.0, sol.t[-1], n_out)
    U = sol.sol(s)[0]
    # locate the half-height crossing with the dense output
    from scipy.optimize import brentq

    i = int(np.argmin(np.abs(U - 0.5)))
    lo, hi = max(0.0, s[i] - 0.2), min(sol.t[-1], s[i] + 0.2)
    x_half = brentq(lambda t: sol.sol(t)[0] - 0.5, lo, hi, xtol=1e-13)
    if x_out is not None:
        t_eval = np.clip(np.asarray(x_out, dtype=float) + x_half, 0.0, sol.t[-1])
        U_e, W_e = sol.sol(t_eval)
        return np.asarray(x_out, dtype=float), U_e, W_e
    U, W = sol.sol(s)
    return s - x_half, U, W
