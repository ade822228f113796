"""Closed forms in the porous-medium limit (delta = 0) and their oracles.

With the chemical slaved to the population (v = u), traveling fronts solve

    0 = d1 U'' + c U' + (U U')' + U - U^2.

For d1 <= 1/2 the selected front is explicit: its inverse is

    psi(u) = sqrt(2) ((1 + d1) log(1 - u) - d1 log(u)),

and the profile obeys the first-order closure u' = g(u) with

    g(u) = -u (1 - u) / (sqrt(2) (d1 + u)),

so every x-derivative of the profile is a rational function of u.  That
closure powers everything here: exact profile derivatives, the cokernel
weight of the front linearization, and u-substitution quadrature oracles
for the closed-form inner products behind the second-order speed
correction and the transition-curve slope.

Selected speeds (the pushed/pulled dichotomy):

    c_pm(d1) = 1/sqrt(2) + sqrt(2) d1   (d1 < 1/2, pushed)
             = 2 sqrt(d1)               (d1 >= 1/2, pulled).
"""

from dataclasses import dataclass, field
from math import log, pi, sqrt
from typing import Callable

import numpy as np
from scipy.integrate import solve_ivp

from ._rational import RationalFn
from .errors import ConvergenceError, DomainError, WindowError
from .quadrature import adaptive, tanh_sinh

__all__ = [
    "PmeFront",
    "CokernelWeight",
    "c_pm",
    "front_inverse_psi",
    "front_profile",
    "front_derivatives_in_u",
    "cokernel",
    "inner_product_dxu_phi",
    "inner_product_flux_phi",
    "transition_flux_value",
    "transition_marginal_value",
    "farfield_cokernel_limit",
    "c_ps2",
    "pushed_speed_expansion",
    "d12",
    "transition_expansion",
    "nagumo_invariance_check",
    "pulled_front_profile",
    "pulled_tail_asymptotics",
]

SQRT2 = sqrt(2.0)

#: x-coordinate of the half-height point of the explicit front, psi(1/2).
X_HALF = -SQRT2 * log(2.0)


def c_pm(d1):
    """Selected porous-medium front speed (continuous at d1 = 1/2)."""
    if d1 <= 0:
        raise DomainError("d1 must be positive")
    if d1 < 0.5:
        return 1.0 / SQRT2 + SQRT2 * d1
    return 2.0 * sqrt(d1)


def front_kind(d1):
    if d1 < 0.5:
        return "pushed"
    if d1 > 0.5:
        return "pulled"
    return "transition"


def front_inverse_psi(u, d1):
    """Explicit inverse x = psi(u) of the selected front for d1 <= 1/2.

    Strictly decreasing on (0, 1), with psi(1/2) = -sqrt(2) log 2
    independently of d1.
    """
    u = np.asarray(u, dtype=float)
    if np.any(u <= 0.0) or np.any(u >= 1.0):
        raise DomainError("front_inverse_psi requires 0 < u < 1")
    val = SQRT2 * ((1.0 + d1) * np.log1p(-u) - d1 * np.log(u))
    return float(val) if val.ndim == 0 else val


def _psi_prime(u, d1):
    return -SQRT2 * (d1 + u) / (u * (1.0 - u))


def front_profile(x, d1, tol=1e-14, max_iter=200):
    """Invert psi numerically: the explicit front profile u(x), d1 <= 1/2.

    Safeguarded Newton in t = log(u); psi is monotone so the bracketed
    iteration cannot fail for representable outputs.
    """
    scalar = np.isscalar(x)
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.empty_like(xs)
    for j, xv in enumerate(xs):
        t_lo, t_hi = log(1e-300), log(1.0 - 1e-16)
        # psi(e^t) is decreasing in t: f(t_lo) > x > f(t_hi) for interior x.
        t = log(0.5) if abs(xv) < 1.0 else (
            -xv / (SQRT2 * d1) if xv > 0 else log(1.0 - min(0.5, np.exp(xv / SQRT2)))
        )
        t = min(max(t, t_lo + 1.0), t_hi - 1e-18)
        f = lambda tt: front_inverse_psi(np.exp(tt), d1) - xv
        flo, fhi = f(t_lo), f(t_hi)
        if not (flo > 0 > fhi):
            raise ConvergenceError(f"cannot bracket front inverse at x={xv}")
        converged = False
        for _ in range(max_iter):
            ft = f(t)
            if abs(ft) < tol * max(1.0, abs(xv)):
                converged = True
                break
            if ft > 0:
                t_lo = t
            else:
                t_hi = t
            u = np.exp(t)
            dfdt = _psi_prime(u, d1) * u
            t_new = t - ft / dfdt
            if not (t_lo < t_new < t_hi):
                t_new = 0.5 * (t_lo + t_hi)
            if abs(t_new - t) < 1e-16 * max(1.0, abs(t)):
                t = t_new
                converged = True
                break
            t = t_new
        if not converged:
            raise ConvergenceError(f"front inverse did not converge at x={xv}")
        out[j] = np.exp(t)
    return float(out[0]) if scalar else out


def _g(d1):
    """u' = g(u) for the explicit front, as a RationalFn."""
    num = np.array([0.0, -1.0, 1.0]) / SQRT2  # (-u + u^2)/sqrt(2)
    den = np.array([d1, 1.0])
    return RationalFn(num, den)


def _derivative_chain(d1, max_order):
    """x-derivatives of the profile as rational functions of u, orders 1..max_order."""
    g = _g(d1)
    chain = [g]
    for _ in range(max_order - 1):
        chain.append(chain[-1].deriv() * g)
    return chain


def front_derivatives_in_u(u, d1, order):
    """k-th x-derivative of the explicit front at the point where it equals u.

    Chain-rule recursion on u' = g(u): D_1 = g, D_{k+1} = D_k' g, carried
    out on polynomial coefficients so the result is exact up to rounding.
    """
    if order not in (1, 2, 3, 4):
        raise DomainError("order must be in 1..4")
    u_arr = np.asarray(u, dtype=float)
    if np.any(u_arr <= 0.0) or np.any(u_arr >= 1.0):
        raise DomainError("front derivatives require 0 < u < 1")
    val = _derivative_chain(d1, order)[order - 1](u_arr)
    return float(val) if np.isscalar(u) else val


# ---------------------------------------------------------------------------
# Cokernel of the front linearization
# ---------------------------------------------------------------------------

def _m_integrand_u(d1, c):
    """(2 u' + c) / (2 (d1 + u)) * dx/du as a plain callable of u."""
    g = _g(d1)

    def J(s):
        return (2.0 * g(s) + c) / (2.0 * (d1 + s)) * _psi_prime(s, d1)

    return J


def _m_closed(u, d1, c):
    """Antiderivative of the cokernel exponent integral, base point u = 1/2.

    Closed form of m(u) = -int_{1/2}^{u} (2 u' + c)/(2 (d1 + u)) dx used by
    the quadrature oracles; independently verified against the adaptive
    quadrature route (see cokernel()).
    """
    u = np.asarray(u, dtype=float)
    return (c / SQRT2) * (np.log(u) - np.log1p(-u)) - np.log((d1 + u) / (d1 + 0.5))


def m_tilde_closed(u):
    """Transition-point (d1 = 1/2) closed form of the exponent m as a
    function of u, written exactly as it arises from the rational-function
    integral."""
    u = np.asarray(u, dtype=float)
    val = (
        -0.5 * np.log(2.0 - 2.0 * u)
        + 0.5 * np.log(2.0 * u)
        + 0.5 * np.log(u / (1.0 - u))
        - np.log(u + 0.5)
    )
    return float(val) if val.ndim == 0 else val


@dataclass
class CokernelWeight:
    """Cokernel density phi = rho^2 u' / (d1 + u) of the front linearization.

    ``m`` integrates (2u' + c)/(2(d1 + u)) from the half-height point x0,
    rho = exp(-m), and phi spans the one-dimensional cokernel in the
    weighted space where the linearization is Fredholm.
    """

    d1: float
    m: Callable[[float], float]
    rho: Callable[[float], float]
    phi: Callable[[float], float]
    m_of_u: Callable[[float], float] = field(repr=False, default=None)
    x0: float = X_HALF


def cokernel(d1):
    """Cokernel weight functions for the explicit front (d1 <= 1/2).

    The exponent m is computed by converting the x-integral to a u-integral
    of a rational function and integrating adaptively; at d1 = 1/2 the
    closed form ``m_tilde_closed`` must agree to 1e-10 (tested).
    """
    if d1 > 0.5:
        raise DomainError("cokernel requires the explicit branch d1 <= 1/2")
    c = c_pm(d1)
    J = _m_integrand_u(d1, c)
    g = _g(d1)

    def m_of_u(u):
        if not (0.0 < u < 1.0):
            raise DomainError("m requires 0 < u < 1")
        return -adaptive(J, 0.5, u)

    def m(x):
        return m_of_u(front_profile(x, d1))

    def rho(x):
        return np.exp(-m(x))

    def phi(x):
        u = front_profile(x, d1)
        return np.exp(-2.0 * m_of_u(u)) * g(u) / (d1 + u)

    return CokernelWeight(d1=d1, m=m, rho=rho, phi=phi, m_of_u=m_of_u)


def _oracle_weight(d1):
    """rho^2 (u')^2 (-psi') / (d1 + u) collapsed to u**(-2 d1) (1-u)**(2+2 d1)
    over sqrt(2) (d1 + 1/2)^2; the common factor of every inner-product
    oracle after substituting x -> u."""
    norm = 1.0 / (SQRT2 * (d1 + 0.5) ** 2)

    def w(u):
        return norm * u ** (-2.0 * d1) * (1.0 - u) ** (2.0 + 2.0 * d1)

    return w


def inner_product_dxu_phi(d1, oracle=False):
    """<d_x u, phi> for the explicit pushed front, 0 < d1 < 1/2.

    Closed form 4 sqrt(2) pi d1 (d1+1) csc(2 pi d1) / (6 d1 + 3); with
    ``oracle=True`` the value is recomputed by tanh-sinh quadrature of
    rho^2 (u')^2 / (d1 + u) as a u-integral instead.
    """
    if not 0.0 < d1 < 0.5:
        raise DomainError("inner_product_dxu_phi requires 0 < d1 < 1/2 (csc pole at 1/2)")
    if oracle:
        w = _oracle_weight(d1)
        return tanh_sinh(w, 0.0, 1.0)
    return 4.0 * SQRT2 * pi * d1 * (d1 + 1.0) / np.sin(2.0 * pi * d1) / (6.0 * d1 + 3.0)


def _flux_bracket(d1):
    """The polynomial-plus-power bracket shared by the flux inner product
    and the second-order speed coefficient; vanishes at d1 = 1/2."""
    return (
        -18.0 * (d1 + 1.0) ** (2.0 * d1 + 3.0) * d1 ** (-2.0 * d1)
        + (2.0 * d1 * (71.0 * d1 + 134.0) + 149.0) * d1
        + 23.0
    )


def inner_product_flux_phi(d1, oracle=False):
    """<d_x(u d_x^3 u), phi> for the explicit pushed front, 0 < d1 < 1/2.

    With ``oracle=True``: tanh-sinh quadrature of the u-substituted
    integrand d/du (u D3(u)) * rho^2 (u')^2 (-psi') / (d1 + u).
    """
    if not 0.0 < d1 < 0.5:
        raise DomainError("inner_product_flux_phi requires 0 < d1 < 1/2 (csc pole at 1/2)")
    if oracle:
        return _flux_oracle(d1)
    return (
        pi
        * d1
        * _flux_bracket(d1)
        / np.sin(2.0 * pi * d1)
        / (3.0 * (2.0 * d1 + 1.0) ** 2)
    )


def _flux_oracle(d1):
    D3 = _derivative_chain(d1, 3)[2]
    u_times_D3 = RationalFn.identity() * D3
    integrand_core = u_times_D3.deriv()
    w = _oracle_weight(d1)

    def f(u):
        return integrand_core(u) * w(u)

    return tanh_sinh(f, 0.0, 1.0)


def transition_flux_value(oracle=False):
    """<d_x(u d_x^3 u), phi> at the transition d1 = 1/2.

    Closed form (1/12)(-201/2 - (729/8)(-log(3/2) - log 2)) ~ -0.0324129,
    the first ingredient of the transition-curve slope.
    """
    if oracle:
        return _flux_oracle(0.5)
    return (-201.0 / 2.0 - (729.0 / 8.0) * (-log(1.5) - log(2.0))) / 12.0


def transition_marginal_value(oracle=False):
    """<d_x^2 u + (d/d d1 c_lin)(1/2) d_x u, phi> at d1 = 1/2; equals 1.

    The second ingredient of the transition-curve slope.  The speed
    derivative of c_lin = 2 sqrt(d1) at 1/2 is sqrt(2).
    """
    if not oracle:
        return 1.0
    d1 = 0.5
    chain = _derivative_chain(d1, 2)
    comb = chain[1] + SQRT2 * chain[0]
    g = _g(d1)
    norm = 1.0 / (SQRT2 * (d1 + 0.5) ** 2)

    def f(u):
        # comb * phi * (-psi'): the (d1+u) of psi' cancels the cokernel
        # denominator, leaving rho^2 g sqrt(2)/(u(1-u)).
        rho2 = ((1.0 - u) / u) ** (1.0 + 2.0 * d1) * (d1 + u) ** 2 * (d1 + 0.5) ** -2.0
        return comb(u) * rho2 * g(u) * SQRT2 / (u * (1.0 - u))

    return tanh_sinh(f, 0.0, 1.0)


def farfield_tilde_phi(u):
    """Conjugated cokernel density of the transition front expressed in u.

    tilde_Phi(u) = exp(-sqrt(2) psi(u)) exp(-2 m(u)) / (psi'(u) (u + 1/2))
    at d1 = 1/2; its u -> 0 limit, -1/sqrt(2), is the far-field ingredient
    of the transition-curve slope.
    """
    u = np.asarray(u, dtype=float)
    if np.any(u <= 0) or np.any(u >= 1):
        raise DomainError("farfield_tilde_phi requires 0 < u < 1")
    d1 = 0.5
    psi = front_inverse_psi(u, d1)
    m = m_tilde_closed(u)
    val = np.exp(-SQRT2 * psi) * np.exp(-2.0 * m) / (_psi_prime(u, d1) * (u + 0.5))
    return float(val) if val.ndim == 0 else val


def farfield_cokernel_limit(samples=None):
    """Numerical limit of farfield_tilde_phi as u -> 0+ (exact value -1/sqrt2)."""
    if samples is None:
        samples = np.geomspace(1e-10, 1e-4, 13)
    vals = farfield_tilde_phi(np.asarray(samples))
    return float(np.mean(vals))


def c_ps2(d1):
    """Second-order pushed-speed coefficient.

    Evaluates the csc-cancelled ratio of the two closed-form inner
    products, so the removable singularity at d1 = 1/2 never appears:
    c_ps2(1/2) = 0 exactly by the vanishing bracket.
    """
    if not 0.0 < d1 <= 0.5:
        raise DomainError("c_ps2 is defined on 0 < d1 <= 1/2")
    return (
        -(6.0 * d1 + 3.0)
        * _flux_bracket(d1)
        / (12.0 * SQRT2 * (d1 + 1.0) * (2.0 * d1 + 1.0) ** 2)
    )


def pushed_speed_expansion(d1, delta):
    """c_pm(d1) + c_ps2(d1) delta^2, valid for d1 < 1/2 and small delta."""
    if not 0.0 < d1 < 0.5:
        raise DomainError("pushed_speed_expansion requires d1 < 1/2")
    if delta < 0:
        raise DomainError("delta must be nonnegative")
    return c_pm(d1) + c_ps2(d1) * delta**2


def d12(from_ingredients=False):
    """Quadratic coefficient of the transition curve d1*(delta).

    Closed form (268 - 243 log 3)/16 ~ 0.0648259.  With
    ``from_ingredients=True`` it is reassembled as -M1 / (M2 + F) from the
    transition flux inner product M1, the marginal inner product M2 = 1,
    and the far-field contribution F = sqrt(2) * (1/2) * lim tilde_phi = -1/2.
    """
    if from_ingredients:
        m1 = transition_flux_value()
        m2 = transition_marginal_value()
        nu_lin_prime = SQRT2  # d/d d1 of -1/sqrt(d1) at 1/2
        farfield = nu_lin_prime * 0.5 * (-1.0 / SQRT2)
        return -m1 / (m2 + farfield)
    return (268.0 - 243.0 * log(3.0)) / 16.0


def transition_expansion(delta):
    """Leading-order transition location 1/2 + d12 delta^2."""
    if delta < 0:
        raise DomainError("delta must be nonnegative")
    return 0.5 + d12() * delta**2


def nagumo_invariance_check(alpha, c, d1):
    """Residual coefficients of the invariant-parabola substitution.

    Substituting the curve W = -alpha U (1 - U) into the Nagumo form of
    the traveling-wave system leaves (alpha^2 - alpha c + d1)
    + (1 - 2 alpha^2) U = 0; both coefficients vanish exactly when
    alpha = 1/sqrt(2) and c = alpha + d1/alpha = 1/sqrt(2) + sqrt(2) d1.

    Returns
    -------
    (constant_coefficient, linear_coefficient)
    """
    return (alpha**2 - alpha * c + d1, 1.0 - 2.0 * alpha**2)


# ---------------------------------------------------------------------------
# Pulled fronts (d1 > 1/2): projective-coordinate integration and tail fits
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PmeFront:
    """A porous-medium front profile at the selected speed."""

    d1: float
    kind: str
    speed: float
    x0: float
    x: np.ndarray = None
    u: np.ndarray = None

    def profile(self, x):
        if self.kind in ("pushed", "transition"):
            return front_profile(x, self.d1)
        if self.x is None:
            raise DomainError("pulled PmeFront carries no sampled profile")
        return np.interp(x, self.x, self.u)

    @classmethod
    def explicit(cls, d1):
        if d1 > 0.5:
            raise DomainError("explicit branch requires d1 <= 1/2")
        return cls(d1=d1, kind=front_kind(d1), speed=c_pm(d1), x0=X_HALF)

    @classmethod
    def pulled(cls, d1, **kw):
        x, u = pulled_front_profile(d1, **kw)
        return cls(d1=d1, kind="pulled", speed=c_pm(d1), x0=X_HALF, x=x, u=u)


def pulled_front_profile(d1, u_floor=1e-12, eps=1e-8, s_max=400.0, rtol=1e-12):
    """Pulled front (d1 > 1/2) by integrating the projective tail system.

    The traveling-wave flow in projective coordinates (U, z = U'/(sqrt(d1) U)
    after rescaling the independent variable) is

        U' = z U,
        z' = -(z + 1)^2 + U - U (1 - U)/d1,

    integrated from the unstable manifold of (1, 0), initialized along the
    eigenvector (-1, 1 - sqrt(2 + 1/d1)) at distance ``eps``.  The physical
    coordinate is recovered from dx/ds = (d1 + U)/sqrt(d1) and shifted so
    u(0) = 1/2.

    Returns
    -------
    (x, u) arrays with u strictly decreasing from ~1 to ``u_floor``.
    """
    if d1 <= 0.5:
        raise DomainError("pulled_front_profile requires d1 > 1/2")
    sq = sqrt(2.0 + 1.0 / d1)
    vec = np.array([-1.0, 1.0 - sq])
    vec /= np.linalg.norm(vec)
    y0 = np.array([1.0, 0.0]) + eps * vec
    sqd1 = sqrt(d1)

    def rhs(s, y):
        U, z, _x = y
        return [z * U, -((z + 1.0) ** 2) + U - U * (1.0 - U) / d1, (d1 + U) / sqd1]

    def hit_floor(s, y):
        return y[0] - u_floor

    hit_floor.terminal = True
    hit_floor.direction = -1

    sol = solve_ivp(
        rhs,
        (0.0, s_max),
        np.append(y0, 0.0),
        method="DOP853",
        rtol=rtol,
        atol=1e-14,
        events=hit_floor,
        dense_output=True,
        max_step=1.0,
    )
    if not sol.success:
        raise ConvergenceError(f"projective tail integration failed: {sol.message}")
    s = np.linspace(0.0, sol.t[-1], max(2000, 4 * len(sol.t)))
    U, _z, x = sol.sol(s)
    keep = U > 0
    U, x = U[keep], x[keep]
    # Normalize the translate: u(0) = 1/2.
    i_half = int(np.argmin(np.abs(U - 0.5)))
    x_half = np.interp(0.5, U[::-1], x[::-1]) if U[0] > 0.5 > U[-1] else x[i_half]
    return x - x_half, U


def pulled_tail_asymptotics(front, d1=None, u_window=(1e-10, 1e-6)):
    """Fit the leading-edge tail u(x) ~ (a x + b) exp(-eta_lin x).

    Accepts a PmeFront (explicit branch or sampled pulled profile) or a
    plain (x, u) pair.  Least squares of u exp(eta_lin x) against (x, 1)
    over the window where u falls inside ``u_window``.

    Returns
    -------
    (a, b)
    """
    if isinstance(front, PmeFront):
        d1 = front.d1
        if front.x is not None:
            x, u = front.x, front.u
        else:
            # Explicit branch: sample the far field directly from psi.
            uu = np.geomspace(u_window[0], u_window[1], 60)
            x, u = front_inverse_psi(uu, d1)[::-1], uu[::-1]
    else:
        x, u = np.asarray(front[0]), np.asarray(front[1])
        if d1 is None:
            raise DomainError("d1 required with raw (x, u) input")
    eta_lin = 1.0 / sqrt(d1)
    mask = (u > u_window[0]) & (u < u_window[1])
    if np.count_nonzero(mask) < 8:
        raise WindowError("far-field window contains too few samples")
    xw, uw = x[mask], u[mask]
    span = xw.max() - xw.min()
    if span * eta_lin < log(10.0):
        raise WindowError("far-field window spans less than one decade of decay")
    y = uw * np.exp(eta_lin * xw)
    A = np.column_stack([xw, np.ones_like(xw)])
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    return float(coef[0]), float(coef[1])
