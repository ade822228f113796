"""Far-field/core boundary-value solver for invasion fronts.

Fronts are sought in the ansatz

    u(x) = chi_-(x) + w_u(x) + chi_+(x) T_u(x),
    v(x) = chi_-(x) + w_v(x) + chi_+(x) T_v(x),

where chi_- is a cutoff onto the invaded state, T_u is the explicit
far-field tail -- (a x + b) e^{nu x} with nu = -1/sqrt(d1) for pulled
fronts and transition hunting, or b e^{-eta x} with the decay rate eta a
free unknown for pushed fronts -- and the core corrections w decay faster
than the tail.  The chemical's tail is slaved to the population's through
the second equation: a mode e^{nu x} forces T_v = T_u / (1 - delta^2 nu^2)
(with the matching linear-in-x correction), which is the unique consistent
closure.  The vanishing of that denominator is the spatial-eigenvalue
resonance where continuation stops (delta^2 = d1, hit near delta^2 ~ 0.53
along the transition curve).

Discretization: fourth-order stencils applied to the core on a uniform
grid over [-L, L]; cutoff and tail derivatives assembled analytically.
The core is pinned to zero at the left boundary node and on the collar
x >= L - 2.  The system is closed by far-field matching rows (the PDE
imposed at the first collar node(s), which transmit the interior solution
into the pure-tail region) and one phase-condition row
<u - u_ref, d_x u_ref> = 0 against a stored reference profile.

At delta = 0 the coupled system degenerates and the solver switches to
the reduced scalar porous-medium equation.
"""

from dataclasses import dataclass, field, replace
from math import log, sqrt
from typing import Optional

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import pme
from .errors import (
    DegenerateDecay,
    DomainError,
    IllConditioned,
    NewtonDiverged,
    NoBracket,
    ResonanceDetected,
    SingularJacobian,
)
from .model import ModelParams
from .stencils import derivative_matrix

__all__ = [
    "Grid",
    "FrontSolution",
    "TransitionPoint",
    "SweepPlan",
    "solve_pulled",
    "solve_pushed",
    "find_transition",
    "sweep",
    "quadratic_fit",
]

NEWTON_TOL = 1e-10
NEWTON_MAX_ITER = 25
CONDITION_LIMIT = 1e12
#: |1 - delta^2 nu^2| below this is treated as the spatial resonance.
RESONANCE_MARGIN = 1e-2


@dataclass(frozen=True)
class Grid:
    """Uniform symmetric grid on [-L, L]."""

    L: float = 20.0
    dx: float = 0.1
    n: int = field(init=False)
    collar: float = 2.0  # width of the pure-tail collar at the right edge

    def __post_init__(self):
        n = int(round(2.0 * self.L / self.dx)) + 1
        if n < 41:
            raise DomainError(f"grid too coarse: n = {n} < 41")
        if abs(self.dx * (n - 1) - 2.0 * self.L) > 1e-12 * max(1.0, 2.0 * self.L):
            raise DomainError("dx must divide 2L")
        object.__setattr__(self, "n", n)

    @property
    def x(self):
        return -self.L + self.dx * np.arange(self.n)

    @property
    def collar_start(self):
        """First index with x >= L - collar."""
        return int(np.ceil((2.0 * self.L - self.collar) / self.dx - 1e-9))


def _smoothstep_coeffs(N=6):
    """Coefficients of the C^N smoothstep polynomial of degree 2N+1.

    The core correction w inherits the complementary kinks of the cutoff
    (w = u - chi_- - chi_+ T with u smooth), so the cutoff must be at
    least C^6 for the fourth-order stencils applied to w to keep their
    order; a merely C^2 cutoff costs several digits in the far-field
    coefficients.
    """
    from math import comb

    c = np.zeros(2 * N + 2)
    for k in range(N + 1):
        c[N + 1 + k] = comb(N + k, k) * comb(2 * N + 1, N - k) * (-1.0) ** k
    return c


_SS = _smoothstep_coeffs()
_SS_D1 = np.polynomial.polynomial.polyder(_SS)
_SS_D2 = np.polynomial.polynomial.polyder(_SS, 2)
_SS_INT = np.polynomial.polynomial.polyint(_SS)  # integral; value 1/2 at s = 1


def _smoothstep(s):
    s = np.clip(s, 0.0, 1.0)
    return np.polynomial.polynomial.polyval(s, _SS)


def _smoothstep_d1(s):
    inside = (s > 0.0) & (s < 1.0)
    s = np.clip(s, 0.0, 1.0)
    return np.where(inside, np.polynomial.polynomial.polyval(s, _SS_D1), 0.0)


def _smoothstep_d2(s):
    inside = (s > 0.0) & (s < 1.0)
    s = np.clip(s, 0.0, 1.0)
    return np.where(inside, np.polynomial.polynomial.polyval(s, _SS_D2), 0.0)


def chi_minus(x):
    """Wake cutoff: 1 for x <= -3, 0 for x >= -2, quintic in between.

    Returns (chi, chi', chi'').
    """
    x = np.asarray(x, dtype=float)
    s = x + 3.0
    return 1.0 - _smoothstep(s), -_smoothstep_d1(s), -_smoothstep_d2(s)


def chi_plus(x):
    """Leading-edge cutoff chi_+(x) = chi_-(-x): 0 for x <= 2, 1 for x >= 3."""
    c, d1c, d2c = chi_minus(-np.asarray(x, dtype=float))
    return c, -d1c, d2c


def _exp_poly(x, c0, c1, nu):
    """(c0 + c1 x) e^{nu x} and its first two x-derivatives."""
    E = np.exp(nu * x)
    P = c0 + c1 * x
    return P * E, (c1 + nu * P) * E, (2.0 * nu * c1 + nu**2 * P) * E


def _weight_ramp(x):
    """C^7 ramp: 0 for x <= 0, x - 1/2 for x >= 1 (integrated smoothstep).

    Returns (ramp, ramp', ramp'').  The high smoothness keeps the weighted
    core as regular as the cutoffs do, preserving fourth-order truncation.
    """
    x = np.asarray(x, dtype=float)
    s = np.clip(x, 0.0, 1.0)
    pv = np.polynomial.polynomial.polyval
    r_mid = pv(s, _SS_INT)
    d1_mid = pv(s, _SS)
    d2_mid = pv(s, _SS_D1)
    r = np.where(x <= 0.0, 0.0, np.where(x >= 1.0, x - 0.5, r_mid))
    d1r = np.where(x <= 0.0, 0.0, np.where(x >= 1.0, 1.0, d1_mid))
    d2r = np.where((x <= 0.0) | (x >= 1.0), 0.0, d2_mid)
    return r, d1r, d2r


def _poly2_exp(x, c, s):
    """(c0 + c1 x + c2 x^2) e^{s x} and its first two x-derivatives."""
    E = np.exp(s * x)
    P = c[0] + x * (c[1] + x * c[2])
    dP = c[1] + 2.0 * c[2] * x
    return P * E, (dP + s * P) * E, (2.0 * c[2] + 2.0 * s * dP + s**2 * P) * E


class _Tail:
    """Analytic far-field tail and its parameter derivatives.

    mode "pulled": T_u = (a x + b) e^{nu x}, parameters (a, b), nu fixed.
    mode "pushed": T_u = b e^{-eta x},       parameters (eta, b).

    The chemical's tail is slaved through q = 1 - delta^2 nu^2.  On top of
    the linear tail the quadratic-interaction correction u2 = e^{2 nu x} P(x)
    (P of degree two) is carried analytically: it solves the leading-edge
    linearization against the tail's self-interaction, so the core is left
    with O(e^{3 nu x}) content only and its finite-difference defect drops
    below the transition tolerances.  The correction is dropped (flagged in
    ``enriched``) near its own small denominators: kappa = d1 (2 nu)^2
    + 2 c nu + 1 and the chemical's second-harmonic factor 1 - 4 delta^2
    nu^2.
    """

    def __init__(self, mode, delta, nu=None, a=0.0, b=1.0, eta=None,
                 d1=None, c=None, enrich=True):
        self.mode = mode
        self.delta = delta
        if mode == "pulled":
            self.nu = nu
            self.a, self.b = a, b
        else:
            self.eta = eta
            self.b = b
            self.nu = -eta
        q = 1.0 - delta**2 * self.nu**2
        if abs(q) < RESONANCE_MARGIN:
            raise ResonanceDetected(
                f"far-field slaving factor 1 - delta^2 nu^2 = {q:.3e} degenerate",
                delta2=delta**2,
            )
        self.q = q
        self.d1, self.c = d1, c
        self.enriched = False
        self.p_u = np.zeros(3)
        self.p_v = np.zeros(3)
        if enrich and d1 is not None and c is not None:
            self._build_enrichment()

    # -- linear tail coefficient pairs --------------------------------------
    def _uv_coeffs(self):
        d2, nu, q = self.delta**2, self.nu, self.q
        a = self.a if self.mode == "pulled" else 0.0
        alpha = a / q
        beta = (self.b + 2.0 * d2 * nu * alpha) / q
        return (self.b, a), (beta, alpha)

    def _build_enrichment(self):
        d1, c, nu, q, d2 = self.d1, self.c, self.nu, self.q, self.delta**2
        kappa = 4.0 * d1 * nu**2 + 2.0 * c * nu + 1.0
        r = 1.0 - 4.0 * d2 * nu**2
        if abs(kappa) < 0.05 or abs(r) < 0.1:
            return
        (b, a), (beta, alpha) = self._uv_coeffs()
        # Quadratic forcing of the u-equation on the tail,
        # Q(x) e^{2 nu x} with Q = Tu' Tv' + Tu (Tv - Tu)/delta^2 - Tu^2;
        # the slaving difference divided by delta^2 stays regular:
        # (alpha - a)/delta^2 = a nu^2 / q, (beta - b)/delta^2 = nu (b nu
        # + 2 alpha)/q.
        g1 = a * nu**2 / q
        g0 = nu * (b * nu + 2.0 * alpha) / q
        # Tu' = (a + nu(ax+b)) e, Tv' = (alpha + nu(alpha x + beta)) e
        t1 = np.array([a + nu * b, nu * a, 0.0])
        s1 = np.array([alpha + nu * beta, nu * alpha, 0.0])
        A = np.array([b, a, 0.0])
        G = np.array([g0, g1, 0.0])
        Q = (_poly_mul(t1, s1) + _poly_mul(A, G) - _poly_mul(A, A))[:3]
        mu = 4.0 * d1 * nu + c
        p2 = -Q[2] / kappa
        p1 = (-Q[1] - 2.0 * mu * p2) / kappa
        p0 = (-Q[0] - mu * p1 - 2.0 * d1 * p2) / kappa
        self.p_u = np.array([p0, p1, p2])
        v2 = p2 / r
        v1 = (p1 + 8.0 * d2 * nu * v2) / r
        v0 = (p0 + d2 * (2.0 * v2 + 4.0 * nu * v1)) / r
        self.p_v = np.array([v0, v1, v2])
        self.enriched = True

    # -- composite tails ---------------------------------------------------
    # Tails are only ever used under chi_+ (zero for x <= 2), so evaluation
    # is clipped to x >= 0: this keeps the growing exponentials from
    # overflowing at the far-left grid without changing any used value.
    def u_tail(self, x):
        x = np.maximum(np.asarray(x, dtype=float), 0.0)
        (b, a), _ = self._uv_coeffs()
        lin = _exp_poly(x, b, a, self.nu)
        if not self.enriched:
            return lin
        enr = _poly2_exp(x, self.p_u, 2.0 * self.nu)
        return tuple(l + e for l, e in zip(lin, enr))

    def v_tail(self, x):
        x = np.maximum(np.asarray(x, dtype=float), 0.0)
        _, (beta, alpha) = self._uv_coeffs()
        lin = _exp_poly(x, beta, alpha, self.nu)
        if not self.enriched:
            return lin
        enr = _poly2_exp(x, self.p_v, 2.0 * self.nu)
        return tuple(l + e for l, e in zip(lin, enr))

    # -- parameter derivatives: dict name -> (Tu, Tu', Tu'', Tv, Tv', Tv'')
    def param_derivs(self, x, include_c=False):
        x = np.maximum(np.asarray(x, dtype=float), 0.0)
        d2, nu, q = self.delta**2, self.nu, self.q
        out = {}
        if self.mode == "pulled":
            out["a"] = (*_exp_poly(x, 0.0, 1.0, nu),
                        *_exp_poly(x, 2.0 * d2 * nu / q**2, 1.0 / q, nu))
            out["b"] = (*_exp_poly(x, 1.0, 0.0, nu),
                        *_exp_poly(x, 1.0 / q, 0.0, nu))
        else:
            out["b"] = (*_exp_poly(x, 1.0, 0.0, nu),
                        *_exp_poly(x, 1.0 / q, 0.0, nu))
            # q = 1 - delta^2 eta^2, dq/deta = -2 delta^2 eta.
            eta = self.eta
            dq = -2.0 * d2 * eta
            out["eta"] = (*_exp_poly(x, 0.0, -self.b, nu),
                          *_exp_poly(x, -self.b * dq / q**2, -self.b / q, nu))
        if include_c:
            out["c"] = tuple(np.zeros_like(np.asarray(x, dtype=float)) for _ in range(6))
        if self.enriched:
            for name in out:
                out[name] = tuple(np.asarray(v, dtype=float) for v in out[name])
                delta_plus = self._enrich_shift(name, +1e-6)
                delta_minus = self._enrich_shift(name, -1e-6)
                diff = [(p - m) / 2e-6 for p, m in
                        zip(delta_plus.enrich_parts(x), delta_minus.enrich_parts(x))]
                out[name] = tuple(v + d for v, d in zip(out[name], diff))
        return out

    def enrich_parts(self, x):
        """(u2, u2', u2'', v2, v2', v2'') of the quadratic correction."""
        x = np.maximum(np.asarray(x, dtype=float), 0.0)
        if not self.enriched:
            return (np.zeros_like(x),) * 6
        return (*_poly2_exp(x, self.p_u, 2.0 * self.nu),
                *_poly2_exp(x, self.p_v, 2.0 * self.nu))

    def _enrich_shift(self, name, h):
        kw = self.params()
        if name == "c":
            return _Tail(self.mode, self.delta, nu=self.nu, d1=self.d1,
                         c=self.c + h, enrich=True, **kw)
        kw[name] = kw[name] + h
        return _Tail(self.mode, self.delta, nu=self.nu, d1=self.d1,
                     c=self.c, enrich=True, **kw)

    def params(self):
        if self.mode == "pulled":
            return {"a": self.a, "b": self.b}
        return {"eta": self.eta, "b": self.b}

    def with_params(self, c=None, **kw):
        base = dict(d1=self.d1, c=self.c if c is None else c,
                    enrich=self.enriched or self.d1 is not None)
        if self.mode == "pulled":
            return _Tail("pulled", self.delta, nu=self.nu,
                         a=kw.get("a", self.a), b=kw.get("b", self.b), **base)
        return _Tail("pushed", self.delta, eta=kw.get("eta", self.eta),
                     b=kw.get("b", self.b), **base)


def _poly_mul(p, q):
    out = np.zeros(len(p) + len(q) - 1)
    for i, pi in enumerate(p):
        if pi != 0.0:
            out[i:i + len(q)] += pi * np.asarray(q)
    return out


@dataclass
class FrontSolution:
    """A converged front of the boundary-value solver."""

    grid: Grid
    kind: str  # pulled | pushed | transition
    params: ModelParams
    c: float
    w_u: np.ndarray
    w_v: Optional[np.ndarray]
    a: Optional[float]
    b: float
    nu_farfield: float
    eta_ps: Optional[float]
    residual_norm: float
    newton_iterations: int
    phase_ref: tuple = field(repr=False, default=None)
    condition_estimate: float = field(repr=False, default=np.nan)

    def _tail(self):
        d = self.params.delta
        if self.eta_ps is not None:
            return _Tail("pushed", d, eta=self.eta_ps, b=self.b,
                         d1=self.params.d1, c=self.c)
        return _Tail("pulled", d, nu=self.nu_farfield, a=self.a, b=self.b,
                     d1=self.params.d1, c=self.c)

    def profiles(self):
        """Composite (u, u', u'', v, v', v'') arrays on the grid.

        Derivatives come from the shared stencils applied to the smooth
        composite, matching the solver's discretization; differentiating
        the core alone would expose the cutoffs' kink compensation.
        """
        x = self.grid.x
        tail = self._tail()
        cm = chi_minus(x)[0]
        cp = chi_plus(x)[0]
        D1 = derivative_matrix(self.grid.n, self.grid.dx, 1, acc=6)
        D2 = derivative_matrix(self.grid.n, self.grid.dx, 2, acc=4)
        u = cm + cp * tail.u_tail(x)[0] + self.w_u
        du = D1 @ u
        d2u = D2 @ u
        if self.w_v is None:  # delta = 0: chemical slaved exactly
            return u, du, d2u, u.copy(), du.copy(), d2u.copy()
        v = cm + cp * tail.v_tail(x)[0] + self.w_v
        dv = D1 @ v
        d2v = D2 @ v
        return u, du, d2u, v, dv, d2v

    @property
    def min_u(self):
        return float(np.min(self.profiles()[0]))

    @property
    def min_v(self):
        return float(np.min(self.profiles()[3]))


@dataclass(frozen=True)
class TransitionPoint:
    """Root of a(d1, delta) = 0 along with the local slope in d1."""

    delta2: float
    d1_star: float
    a_slope: float
    probes: int = 0


# ---------------------------------------------------------------------------
# Nonlinear system assembly
# ---------------------------------------------------------------------------

class _FrontBVP:
    """Square nonlinear system for one (d1, delta, mode) solve.

    Unknown vector X = [hw_u (n), (hw_v (n) if delta > 0), scalars...] with
    scalars (a, b) for pulled mode and (eta, b, c) for pushed mode.

    The core is represented in exponentially weighted variables
    hw = e^{theta} w with theta a C^4 ramp of rate ``eta_w`` on x > 0, and
    the core equations are conjugated by the same weight.  Without the
    weight the free core could imitate the far-field tail up to the
    collar's underflow floor, leaving the Jacobian numerically singular
    (condition ~ e^{eta_lin L}); with it, tail-shaped content in the core
    is order-one visible at the collar pins.
    """

    def __init__(self, grid, d1, delta, mode, c, phase_ref, tail_template, eta_w):
        eta_w_u, eta_w_v = eta_w if isinstance(eta_w, tuple) else (eta_w, eta_w)
        self.grid, self.d1, self.delta, self.mode = grid, d1, delta, mode
        self.c = c  # fixed for pulled; ignored for pushed (unknown)
        self.coupled = delta > 0.0
        self.x = grid.x
        self.n = grid.n
        self.ic = grid.collar_start
        # The paper pins the Laplacian to fourth order; the advective
        # derivative is taken at sixth so its larger truncation constant
        # stays below the transition-location tolerance.
        D1 = derivative_matrix(self.n, grid.dx, 1, acc=6)
        D2 = derivative_matrix(self.n, grid.dx, 2, acc=4)
        self.cm = chi_minus(self.x)
        self.cp = chi_plus(self.x)
        self.u_ref, self.du_ref = phase_ref
        self.tail_template = tail_template
        self.scalar_names = ["a", "b"] if mode == "pulled" else ["eta", "b", "c"]
        self.n_match = 1 if mode == "pulled" else 2
        # Discretization strategy, driven by two error sources that pull in
        # opposite directions:
        #  * Stencils must act on the smooth composite profile, never on
        #    the core alone: the core carries the complementary kinks of
        #    the cutoffs, whose high derivatives (~2e5 for a unit-width C^6
        #    step) would multiply the dx^4 truncation.
        #  * Far-field rows must vanish identically on the tail: the
        #    discrete operator's double root differs from the continuum one
        #    by O(dx^4), and letting that defect stand accumulates an error
        #    that grows with L.  On rows whose stencils see only the chi_+
        #    plateau, the tail's finite-difference defect is subtracted and
        #    replaced by its analytic value (zero for the pulled tail at the
        #    double root; the dispersion mismatch for the pushed tail).
        # The core unknowns are weighted, hw = e^{theta} w, and core rows
        # premultiplied by e^{theta}: a pure reparametrization that makes
        # tail-shaped content in the core order-one visible at the collar
        # pins (unweighted, the Jacobian is numerically singular, with
        # condition ~ e^{eta_lin L}).
        # Separate weight rates for the two cores: the population core
        # must out-rate the tail for pin visibility, while the chemical
        # core also carries its own slow mode e^{-x/delta} and its weight
        # must stay below that rate or the weighted core blows up at the
        # collar and its float noise floors the residual.
        self.eta_w = eta_w_u
        r, _dr, _d2r = _weight_ramp(self.x)
        self.omega = np.exp(eta_w_u * r)
        self.e_minus = np.exp(-eta_w_u * r)
        self.omega_v = np.exp(eta_w_v * r)
        self.e_minus_v = np.exp(-eta_w_v * r)
        self.D1 = D1
        self.D2 = D2
        W = sp.diags(self.omega)
        Wi = sp.diags(self.e_minus)
        self.C1 = (W @ D1 @ Wi).tocsr()
        self.C2 = (W @ D2 @ Wi).tocsr()
        if self.coupled:
            Wv = sp.diags(self.omega_v)
            Wvi = sp.diags(self.e_minus_v)
            self.C1_uv = (W @ D1 @ Wvi).tocsr()
            self.C2_v = (Wv @ D2 @ Wvi).tocsr()
            self.s_uv = self.omega * self.e_minus_v
            self.s_vu = self.omega_v * self.e_minus
        # Far-field defect-correction mask: rows whose stencils see only
        # the chi_+ = 1 plateau (widest stencil reaches 3 nodes).
        self.far_mask = (self.x >= 3.0 + 3.0 * grid.dx - 1e-12).astype(float)
        # Row masks for the w blocks: True where the grid row is a PDE row.
        pde = np.ones(self.n, dtype=bool)
        pde[0] = False
        pde[self.ic:] = False
        self.pde_mask = pde
        self.match_rows = list(range(self.ic, self.ic + self.n_match))
        self.size = (2 * self.n if self.coupled else self.n) + len(self.scalar_names)

    def trust_caps(self, X):
        """Per-unknown step caps: the tail scalars move in small steps so a
        large-residual start cannot fling the decay rate off its branch."""
        caps = np.full(self.size, np.inf)
        scal = dict(zip(self.scalar_names, X[-len(self.scalar_names):]))
        for k, name in enumerate(self.scalar_names):
            j = self.size - len(self.scalar_names) + k
            if name == "eta":
                caps[j] = 0.2 * max(abs(scal["eta"]), 1.0)
            elif name == "b":
                caps[j] = 0.5 * (1.0 + abs(scal["b"]))
            elif name == "c":
                caps[j] = 0.1
            elif name == "a":
                caps[j] = 1.0 + abs(scal["a"])
        return caps

    # -- packing -----------------------------------------------------------
    def pack(self, w_u, w_v, tail, c):
        parts = [w_u] + ([w_v] if self.coupled else [])
        scal = []
        for name in self.scalar_names:
            if name == "c":
                scal.append(c)
            else:
                scal.append(tail.params()[name])
        return np.concatenate(parts + [np.array(scal)])

    def unpack(self, X):
        n = self.n
        w_u = X[:n]
        w_v = X[n:2 * n] if self.coupled else None
        scal = X[-len(self.scalar_names):]
        kw = dict(zip(self.scalar_names, scal))
        c = kw.pop("c", self.c)
        tail = self.tail_template.with_params(c=c, **kw)
        return w_u, w_v, tail, c

    # -- composite profile pieces -------------------------------------------
    @staticmethod
    def _assemble(chis, T):
        """(f, f', f'') of chi * T from analytic pieces."""
        c, dc, d2c = chis
        Tv, dTv, d2Tv = T
        return (c * Tv, dc * Tv + c * dTv, d2c * Tv + 2.0 * dc * dTv + c * d2Tv)

    def _background(self, tail):
        cm = self.cm
        Bu = self._assemble(self.cp, tail.u_tail(self.x))
        Bu = (cm[0] + Bu[0], cm[1] + Bu[1], cm[2] + Bu[2])
        if not self.coupled:
            return Bu, None
        Bv = self._assemble(self.cp, tail.v_tail(self.x))
        Bv = (cm[0] + Bv[0], cm[1] + Bv[1], cm[2] + Bv[2])
        return Bu, Bv

    def _param_backgrounds(self, tail):
        """chi_+-assembled tail parameter derivatives, per scalar.

        The speed enters the quadratic tail correction, so pushed solves
        carry a "c" entry alongside the tail's own parameters.
        """
        out = {}
        derivs = tail.param_derivs(self.x, include_c=(self.mode == "pushed"))
        for name, d in derivs.items():
            out[name] = (self._assemble(self.cp, d[:3]), self._assemble(self.cp, d[3:]))
        return out

    def fields(self, X):
        """Composite profiles: values from the ansatz, derivatives from the
        stencils applied to the (smooth) composite."""
        hw_u, hw_v, tail, c = self.unpack(X)
        Bu, Bv = self._background(tail)
        u = Bu[0] + self.e_minus * hw_u
        du = self.D1 @ u
        d2u = self.D2 @ u
        if self.coupled:
            v = Bv[0] + self.e_minus_v * hw_v
            dv = self.D1 @ v
            d2v = self.D2 @ v
        else:
            v = dv = d2v = None
        return hw_u, hw_v, tail, c, (u, du, d2u), (v, dv, d2v)

    def _tail_defects(self, pieces):
        """Finite-difference defects (D1 f - f', D2 f - f'') of an
        analytically known background piece f, masked to the far field."""
        f, df, d2f = pieces
        return self.far_mask * (self.D1 @ f - df), self.far_mask * (self.D2 @ f - d2f)

    # -- residual ------------------------------------------------------------
    def residual(self, X):
        hw_u, hw_v, tail, c, (u, du, d2u), (v, dv, d2v) = self.fields(X)
        Bu, Bv = self._background(tail)
        def1_u, def2_u = self._tail_defects(Bu)
        if self.coupled:
            d2 = self.delta**2
            Ru = (self.d1 * d2u + c * du + du * dv + u * (v - u) / d2 + u - u**2
                  - self.d1 * def2_u - c * def1_u)
            _def1_v, def2_v = self._tail_defects(Bv)
            Rv = d2 * d2v + u - v - d2 * def2_v
        else:
            Ru = (self.d1 * d2u + c * du + u * d2u + du**2 + u - u**2
                  - self.d1 * def2_u - c * def1_u)
            Rv = None
        Ru_s = self.omega * Ru
        rows_u = np.where(self.pde_mask, Ru_s, hw_u)
        match = Ru_s[self.match_rows]
        phase = self.grid.dx * np.dot(u - self.u_ref, self.du_ref)
        if self.coupled:
            rows_v = np.where(self.pde_mask, self.omega_v * Rv, hw_v)
            return np.concatenate([rows_u, rows_v, match, [phase]])
        return np.concatenate([rows_u, match, [phase]])

    # -- Jacobian ------------------------------------------------------------
    def jacobian(self, X):
        _hw_u, _hw_v, tail, c, (u, du, d2u), (v, dv, d2v) = self.fields(X)
        n = self.n
        pde = sp.diags(self.pde_mask.astype(float))
        pin = sp.diags((~self.pde_mask).astype(float))
        pb = self._param_backgrounds(tail)

        # Scaled core blocks: since all coefficient matrices are diagonal
        # they commute with the weights, so diag(omega) dR/du D diag(1/omega)
        # collapses to coefficient diagonals around the sandwich conjugates
        # C1, C2.  The defect correction is core-independent.
        Bu, Bv_full = self._background(tail)
        def1_B, def2_B = self._tail_defects(Bu)

        def eff_derivs(pieces):
            """Effective (d/dparam of) first/second derivatives: finite
            differences with the far-field defect replaced analytically."""
            vals, dvals, d2vals = pieces
            d1v = self.D1 @ vals
            d2v = self.D2 @ vals
            d1v_eff = d1v - self.far_mask * (d1v - dvals)
            d2v_eff = d2v - self.far_mask * (d2v - d2vals)
            return d1v, d1v_eff, d2v_eff

        if self.coupled:
            d2 = self.delta**2
            Ju_wu = (self.d1 * self.C2 + c * self.C1 + sp.diags(dv) @ self.C1
                     + sp.diags((v - 2.0 * u) / d2 + 1.0 - 2.0 * u))
            Ju_wv = sp.diags(du) @ self.C1_uv + sp.diags(u / d2 * self.s_uv)
            Jv_wu = sp.diags(self.s_vu).tocsr()
            Jv_wv = d2 * self.C2_v - sp.identity(n, format="csr")

            def du_cols(name):
                base = self.omega * (du - def1_B) if name == "c" else 0.0
                (Ba, dBa, d2Ba), (Bva, dBva, _d2Bva) = pb[name]
                dBa_raw, dBa_eff, d2Ba_eff = eff_derivs((Ba, dBa, d2Ba))
                dBva_raw = self.D1 @ Bva
                return base + self.omega * (
                    self.d1 * d2Ba_eff + c * dBa_eff + dv * dBa_raw + du * dBva_raw
                    + (v - 2.0 * u) / d2 * Ba + u / d2 * Bva
                    + (1.0 - 2.0 * u) * Ba
                )

            def dv_cols(name):
                (Ba, _dBa, _d2Ba), (Bva, dBva, d2Bva) = pb[name]
                _raw, _eff1, d2Bva_eff = eff_derivs((Bva, dBva, d2Bva))
                return self.omega_v * (d2 * d2Bva_eff + Ba - Bva)
        else:
            Ju_wu = (sp.diags(self.d1 + u) @ self.C2
                     + sp.diags(c + 2.0 * du) @ self.C1
                     + sp.diags(d2u + 1.0 - 2.0 * u))

            def du_cols(name):
                base = self.omega * (du - def1_B) if name == "c" else 0.0
                (Ba, dBa, d2Ba), _bv = pb[name]
                dBa_raw, dBa_eff, d2Ba_eff = eff_derivs((Ba, dBa, d2Ba))
                return base + self.omega * (self.d1 * d2Ba_eff + c * dBa_eff
                                            + u * (self.D2 @ Ba) + 2.0 * du * dBa_raw
                                            + (d2u + 1.0 - 2.0 * u) * Ba)

        cols_u = {name: du_cols(name) for name in self.scalar_names}
        # phase row: d/d(hw_u) = dx du_ref e^{-theta}; d/dparam = dx <dBu_param, du_ref>
        phase_w = self.grid.dx * self.du_ref * self.e_minus
        phase_cols = {}
        for name in self.scalar_names:
            if name in pb:
                phase_cols[name] = self.grid.dx * np.dot(pb[name][0][0], self.du_ref)
            else:
                phase_cols[name] = 0.0

        A_uu = pde @ Ju_wu + pin
        col_block_u = np.column_stack([np.where(self.pde_mask, cols_u[nm], 0.0)
                                       for nm in self.scalar_names])
        match_wu = Ju_wu[self.match_rows, :]
        match_cols = np.array([[cols_u[nm][i] for nm in self.scalar_names]
                               for i in self.match_rows])

        if self.coupled:
            cols_v = {name: dv_cols(name) for name in self.scalar_names}
            A_uv = pde @ Ju_wv
            A_vu = pde @ Jv_wu
            A_vv = pde @ Jv_wv + pin
            col_block_v = np.column_stack([np.where(self.pde_mask, cols_v[nm], 0.0)
                                           for nm in self.scalar_names])
            match_wv = Ju_wv[self.match_rows, :]
            match_cols_full = np.hstack([match_wu.toarray(), match_wv.toarray(), match_cols])
            phase_row = np.concatenate([phase_w, np.zeros(n),
                                        [phase_cols[nm] for nm in self.scalar_names]])
            J = sp.vstack([
                sp.hstack([A_uu, A_uv, sp.csr_matrix(col_block_u)]),
                sp.hstack([A_vu, A_vv, sp.csr_matrix(col_block_v)]),
                sp.csr_matrix(match_cols_full),
                sp.csr_matrix(phase_row[None, :]),
            ]).tocsc()
        else:
            match_cols_full = np.hstack([match_wu.toarray(), match_cols])
            phase_row = np.concatenate([phase_w,
                                        [phase_cols[nm] for nm in self.scalar_names]])
            J = sp.vstack([
                sp.hstack([A_uu, sp.csr_matrix(col_block_u)]),
                sp.csr_matrix(match_cols_full),
                sp.csr_matrix(phase_row[None, :]),
            ]).tocsc()
        return J


def _condition_estimate(J, lu):
    try:
        inv = spla.LinearOperator(J.shape, matvec=lu.solve,
                                  rmatvec=lambda z: lu.solve(z, trans="T"))
        return float(spla.onenormest(J) * spla.onenormest(inv))
    except Exception:
        return np.nan


def _newton(bvp, X0, tol=NEWTON_TOL, max_iter=NEWTON_MAX_ITER, d1=None):
    X = X0.copy()
    R = bvp.residual(X)
    rn = float(np.linalg.norm(R))
    cond = np.nan
    for it in range(1, max_iter + 1):
        if rn <= tol:
            return X, rn, it - 1, cond
        J = bvp.jacobian(X)
        try:
            lu = spla.splu(J)
        except RuntimeError as exc:
            raise SingularJacobian(f"LU factorization failed: {exc}") from exc
        if it == 1:
            cond = _condition_estimate(J, lu)
            if cond > CONDITION_LIMIT:
                raise ResonanceDetected(
                    f"Jacobian condition estimate {cond:.3e} beyond {CONDITION_LIMIT:.1e}",
                    condition_estimate=cond, delta2=bvp.delta**2, d1=d1,
                )
        step = lu.solve(-R)
        if not np.all(np.isfinite(step)):
            raise NewtonDiverged("non-finite Newton step", residual_norm=rn, iterations=it)
        # Damped update: start inside the scalar trust region, then
        # backtrack while the residual norm fails to decrease.
        caps = bvp.trust_caps(X)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratios = np.abs(step) / caps
        t = min(1.0, 1.0 / max(np.max(ratios[np.isfinite(ratios)]), 1.0))
        t_floor = t / 256.0
        while True:
            X_new = X + t * step
            R_new = bvp.residual(X_new)
            rn_new = float(np.linalg.norm(R_new))
            if rn_new < rn * (1.0 - 1e-4 * t) or rn_new <= tol:
                break
            if t <= t_floor:
                if rn_new >= rn and rn > 100.0 * tol:
                    raise NewtonDiverged(
                        f"no descent direction at |R| = {rn:.3e}",
                        residual_norm=rn, iterations=it)
                break
            t *= 0.5
        X, R, rn = X_new, R_new, rn_new
    if rn <= tol:
        return X, rn, max_iter, cond
    raise NewtonDiverged(
        f"Newton stalled at |R| = {rn:.3e} after {max_iter} iterations",
        residual_norm=rn, iterations=max_iter,
    )


# ---------------------------------------------------------------------------
# Initialization helpers
# ---------------------------------------------------------------------------

def _delta0_profile(d1, grid):
    """Porous-medium front sampled on the grid (explicit or shooting)."""
    x = grid.x
    if d1 <= 0.5:
        return pme.front_profile(x, d1)
    xs, us = pme.pulled_front_profile(d1)
    u = np.interp(x, xs, us, left=1.0, right=0.0)
    # np.interp needs increasing xs; pulled_front_profile returns increasing x.
    return u


def _tail_fit(x, u, nu, window=(1e-7, 1e-3)):
    """Least-squares (a, b) for u ~ (a x + b) e^{nu x} on a far-field window."""
    mask = (u > window[0]) & (u < window[1]) & (x > 0)
    if np.count_nonzero(mask) < 4:
        return 0.0, max(float(u[len(u) // 2]), 1e-3)
    y = u[mask] * np.exp(-nu * x[mask])
    A = np.column_stack([x[mask], np.ones_like(x[mask])])
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    return float(coef[0]), float(coef[1])


def _phase_ref_from(u_init, grid):
    du = derivative_matrix(grid.n, grid.dx, 1) @ u_init
    return u_init.copy(), du


def _initial_state(mode, d1, grid, c):
    """Background-consistent initial unknowns from the delta = 0 profile.

    Always tailed at delta = 0: continuation starts there, and a target-
    delta tail near the slaving resonance would poison the core seed.
    """
    x = grid.x
    u0 = _delta0_profile(min(d1, 0.5) if mode == "pushed" else d1, grid)
    if mode == "pulled":
        nu = -1.0 / sqrt(d1)
        if d1 > 0.5:
            a0, b0 = _tail_fit(x, u0, nu)
        else:
            # transition neighborhood: pure-exponential seed
            a0, b0 = 0.0, 1.0
        tail = _Tail("pulled", 0.0, nu=nu, a=a0, b=b0, d1=d1, c=c)
    else:
        eta0 = _strong_decay_rate(d1, c)
        tail = _Tail("pushed", 0.0, eta=eta0, b=1.0, d1=d1, c=c)
    cm = chi_minus(x)[0]
    cp = chi_plus(x)[0]
    Bu = cm + cp * tail.u_tail(x)[0]
    w = u0 - Bu
    w[0] = 0.0
    w[grid.collar_start:] = 0.0
    return u0, w, tail


def _strong_decay_rate(d1, c):
    disc = c**2 - 4.0 * d1
    if disc <= 0:
        return c / (2.0 * d1)
    return (c + sqrt(disc)) / (2.0 * d1)


# ---------------------------------------------------------------------------
# Public solves
# ---------------------------------------------------------------------------

def _core_weight_rate(mode, d1, c):
    """Weight rate for the conjugated core: above the tail rate it must
    flag, below the rate at which the true core decays.

    The margin over the tail rate is kept small (a tenth of the double-root
    rate): the pins only need order-ten visibility of tail-shaped content,
    while a large margin amplifies the collar rows until float noise in the
    dispersion terms becomes a residual floor."""
    eta_lin = 1.0 / sqrt(d1)
    if mode == "pulled":
        return 1.1 * eta_lin
    return _strong_decay_rate(d1, c) + 0.1 * eta_lin


def _solve_once(mode, d1, delta, grid, phase_ref, w_u, w_v, tail, c,
                tol=NEWTON_TOL, max_iter=NEWTON_MAX_ITER):
    """One Newton solve; core passed and returned in physical variables."""
    eta_w_u = _core_weight_rate(mode, d1, c)
    eta_w_v = min(eta_w_u, 0.9 / delta) if delta > 0 else eta_w_u
    bvp = _FrontBVP(grid, d1, delta, mode, c, phase_ref, tail, (eta_w_u, eta_w_v))
    hw_u = bvp.omega * w_u
    hw_v = bvp.omega_v * w_v if (bvp.coupled and w_v is not None) else None
    X0 = bvp.pack(hw_u, hw_v, tail, c)
    X, rn, iters, cond = _newton(bvp, X0, tol=tol, max_iter=max_iter, d1=d1)
    hw_u_s, hw_v_s, tail_s, c_s = bvp.unpack(X)
    w_u_s = bvp.e_minus * hw_u_s
    w_v_s = bvp.e_minus_v * hw_v_s if bvp.coupled else None
    return bvp, w_u_s, w_v_s, tail_s, c_s, rn, iters, cond


def _elliptic_v_init(grid, d1, delta, mode, c, ref, tail, hw_u):
    """Exact discrete solve of the (linear) chemical equation for a given
    population core: the only reliable way to (re)initialize the chemical
    across the slaving resonance, where its tail factor flips sign."""
    eta_w_u = _core_weight_rate(mode, d1, c)
    eta_w_v = min(eta_w_u, 0.9 / delta)
    bvp = _FrontBVP(grid, d1, delta, mode, c, ref, tail, (eta_w_u, eta_w_v))
    n = grid.n
    X = bvp.pack(hw_u, np.zeros(n), tail, c)
    rows_v = bvp.residual(X)[n:2 * n]
    pde = sp.diags(bvp.pde_mask.astype(float))
    pin = sp.diags((~bvp.pde_mask).astype(float))
    A_vv = (pde @ (delta**2 * bvp.C2_v - sp.identity(n)) + pin).tocsc()
    hw_v = spla.splu(A_vv).solve(-rows_v)
    return bvp.e_minus_v * hw_v


#: |1 - delta^2 nu^2| below which a continuation step refuses to land.
_BAND = 0.05
#: Newton budget for resonance hops and other hard restart solves.
_HARD_MAX_ITER = 60


def solve_pulled(d1, delta, grid=None, init=None, *, phase_ref=None,
                 tol=NEWTON_TOL, max_iter=NEWTON_MAX_ITER, delta_step2=0.05):
    """Pulled-front solve with the speed pinned to c_lin = 2 sqrt(d1).

    The far-field coefficients (a, b) are unknowns; a(d1, delta) is the
    transition-locating output.  Without ``init`` the solver starts from
    the porous-medium profile and continues in delta^2.
    """
    grid = grid or Grid()
    c = 2.0 * sqrt(d1)
    nu = -1.0 / sqrt(d1)
    if init is not None and init.grid == grid:
        w_u = init.w_u.copy()
        w_v = None if init.w_v is None else init.w_v.copy()
        tail = _Tail("pulled", delta, nu=nu, d1=d1, c=c,
                     a=init.a if init.a is not None else 0.0, b=init.b)
        ref = phase_ref or init.phase_ref
        if w_v is None and delta > 0.0:
            w_v = w_u.copy()
        if init.params.delta != delta and abs(init.params.delta**2 - delta**2) > delta_step2:
            return _continue_in_delta("pulled", d1, delta, grid, ref, w_u, w_v, tail, c,
                                      tol, max_iter, delta_step2,
                                      start_delta=init.params.delta)
        bvp, w_u, w_v, tail, c, rn, iters, cond = _solve_once(
            "pulled", d1, delta, grid, ref, w_u, w_v, tail, c, tol, max_iter)
        return _pack_pulled(grid, d1, delta, c, w_u, w_v, tail, rn, iters, ref, cond)

    u0, w0, tail = _initial_state("pulled", d1, grid, c)
    ref = phase_ref or _phase_ref_from(u0, grid)
    bvp, w_u, w_v, tail, c, rn, iters, cond = _solve_once(
        "pulled", d1, 0.0, grid, ref, w0, None,
        _Tail("pulled", 0.0, nu=nu, a=tail.a, b=tail.b, d1=d1, c=c),
        c, tol, max_iter)
    if delta == 0.0:
        return _pack_pulled(grid, d1, 0.0, c, w_u, w_v, tail, rn, iters, ref, cond)
    return _continue_in_delta("pulled", d1, delta, grid, ref, w_u, None, tail, c,
                              tol, max_iter, delta_step2, start_delta=0.0)


def _rebuild_tail(mode, dk, tail, d1, c):
    if mode == "pulled":
        return _Tail("pulled", dk, nu=tail.nu, a=tail.a, b=tail.b, d1=d1, c=c)
    return _Tail("pushed", dk, eta=tail.eta, b=tail.b, d1=d1, c=c)


def _continue_in_delta(mode, d1, delta, grid, ref, w_u, w_v, tail, c,
                       tol, max_iter, delta_step2, start_delta=0.0,
                       min_step2=4e-3):
    """Natural-parameter march in delta^2 with adaptive step control.

    The chemical's tail slaving factor q = 1 - delta^2 nu^2 vanishes on the
    resonance surface; a step that would cross or land inside the band
    |q| < _BAND instead hops to the far side of the band (q = -0.25 * sign),
    re-initializing the chemical there by an exact linear solve.  Failed
    steps are halved down to ``min_step2`` before giving up.
    """
    d2 = start_delta**2
    d2_target = delta**2
    step = delta_step2
    rn, iters, cond = np.nan, 0, np.nan
    while abs(d2_target - d2) > 1e-14:
        direction = 1.0 if d2_target >= d2 else -1.0
        step = min(step, abs(d2_target - d2))
        d2_try = d2 + direction * step
        hop = False
        nu2 = tail.nu**2
        q_now = 1.0 - d2 * nu2
        q_try = 1.0 - d2_try * nu2
        q_target = 1.0 - d2_target * nu2
        if q_now * q_try < 0.0 or abs(q_try) < _BAND:
            if abs(q_target) < _BAND and q_now * q_target <= 0.0:
                raise ResonanceDetected(
                    f"continuation target delta^2 = {d2_target:.4f} lies at the "
                    f"slaving resonance (1 - delta^2 nu^2 = {q_target:.3f})",
                    delta2=d2_target, d1=d1)
            if q_now * q_target < 0.0:
                # hop across the band, landing well clear of the pole even
                # if that overshoots the target (the march then turns back)
                d2_try = (1.0 - np.sign(q_target) * 0.25) / nu2
                hop = True
            else:
                # same side as the target: clamp to the band edge
                d2_try = (1.0 - np.sign(q_now) * _BAND) / nu2
                if (d2_try - d2) * direction <= 0:
                    raise ResonanceDetected(
                        f"cannot step past the slaving resonance toward "
                        f"delta^2 = {d2_target:.4f}", delta2=d2_target, d1=d1)
        dk = sqrt(d2_try)
        if w_v is None:
            w_v = w_u.copy()
        tail_k = _rebuild_tail(mode, dk, tail, d1, c)
        try:
            if hop:
                # deepen the landing until the crossing solve converges
                last_exc = None
                for q_depth in (0.25, 0.5, 1.0, 2.0):
                    d2_try = (1.0 - np.sign(q_target) * q_depth) / nu2
                    dk = sqrt(d2_try)
                    tail_k = _rebuild_tail(mode, dk, tail, d1, c)
                    try:
                        w_v_init = _elliptic_v_init(
                            grid, d1, dk, mode, c, ref, tail_k,
                            _core_omega(grid, mode, d1, c) * w_u)
                        bvp, w_u, w_v, tail, c, rn, iters, cond = _solve_once(
                            mode, d1, dk, grid, ref, w_u, w_v_init, tail_k, c,
                            tol, _HARD_MAX_ITER)
                        last_exc = None
                        break
                    except (NewtonDiverged, SingularJacobian) as exc:
                        last_exc = exc
                if last_exc is not None:
                    raise last_exc
            else:
                # near the slaving resonance the Newton path crawls through
                # a soft-mode valley before contracting; allow the hard
                # budget there
                budget = _HARD_MAX_ITER if abs(q_try) < 0.35 else max_iter
                bvp, w_u, w_v, tail, c, rn, iters, cond = _solve_once(
                    mode, d1, dk, grid, ref, w_u, w_v, tail_k, c, tol, budget)
        except (NewtonDiverged, SingularJacobian):
            if hop or step / 2.0 < min_step2:
                raise
            step /= 2.0
            continue
        d2 = d2_try
        step = min(delta_step2, step * 2.0)
    if mode == "pulled":
        return _pack_pulled(grid, d1, delta, c, w_u, w_v, tail, rn, iters, ref, cond)
    return _pack_pushed(grid, d1, delta, c, w_u, w_v, tail, rn, iters, ref, cond)


def _core_omega(grid, mode, d1, c):
    eta_w = _core_weight_rate(mode, d1, c)
    r, _dr, _d2r = _weight_ramp(grid.x)
    return np.exp(eta_w * r)


def _pack_pulled(grid, d1, delta, c, w_u, w_v, tail, rn, iters, ref, cond):
    kind = "transition" if abs(tail.a) <= 1e-9 else "pulled"
    return FrontSolution(
        grid=grid, kind=kind, params=ModelParams(d1, delta, c), c=c,
        w_u=w_u, w_v=w_v, a=tail.a, b=tail.b, nu_farfield=tail.nu,
        eta_ps=None, residual_norm=rn, newton_iterations=iters,
        phase_ref=ref, condition_estimate=cond,
    )


def _pack_pushed(grid, d1, delta, c, w_u, w_v, tail, rn, iters, ref, cond):
    eta_lin = 1.0 / sqrt(d1)
    if tail.eta < c / (2.0 * d1) - 1e-6:
        raise DegenerateDecay(
            f"pushed decay rate {tail.eta:.6f} fell onto the weak branch "
            f"(double-root rate {c / (2.0 * d1):.6f}, eta_lin {eta_lin:.6f})"
        )
    return FrontSolution(
        grid=grid, kind="pushed", params=ModelParams(d1, delta, c), c=c,
        w_u=w_u, w_v=w_v, a=0.0, b=tail.b, nu_farfield=-tail.eta,
        eta_ps=tail.eta, residual_norm=rn, newton_iterations=iters,
        phase_ref=ref, condition_estimate=cond,
    )


def solve_pushed(d1, delta, grid=None, init=None, *, phase_ref=None,
                 tol=NEWTON_TOL, max_iter=NEWTON_MAX_ITER, delta_step2=0.05):
    """Pushed-front solve: speed c and decay rate eta are free unknowns.

    The far field is a pure exponential b e^{-eta x} (linear coefficient
    pinned to zero); the matching rows at the collar force (c, eta) onto
    the strong dispersion branch, which is exactly what distinguishes the
    pushed front.
    """
    grid = grid or Grid()
    c0 = pme.c_pm(d1) + (pme.c_ps2(d1) * delta**2 if d1 <= 0.5 else 0.0)
    if init is not None and init.grid == grid:
        w_u = init.w_u.copy()
        w_v = None if init.w_v is None else init.w_v.copy()
        # transport the speed and decay rate along the branch before solving
        c0 = init.c + (pme.c_pm(d1) - pme.c_pm(init.params.d1))
        eta0 = init.eta_ps + (_strong_decay_rate(d1, c0)
                              - _strong_decay_rate(init.params.d1, init.c))
        tail = _Tail("pushed", delta, eta=eta0, b=init.b, d1=d1, c=c0)
        ref = phase_ref or init.phase_ref
        if w_v is None and delta > 0.0:
            w_v = w_u.copy()
        if init.params.delta != delta and abs(init.params.delta**2 - delta**2) > delta_step2:
            return _continue_in_delta("pushed", d1, delta, grid, ref, w_u, w_v, tail, c0,
                                      tol, max_iter, delta_step2,
                                      start_delta=init.params.delta)
        bvp, w_u, w_v, tail, c, rn, iters, cond = _solve_once(
            "pushed", d1, delta, grid, ref, w_u, w_v, tail, c0, tol, max_iter)
        return _pack_pushed(grid, d1, delta, c, w_u, w_v, tail, rn, iters, ref, cond)

    if d1 >= 0.5 + 1e-12 and delta == 0.0:
        raise DomainError("pushed fronts at delta = 0 require d1 < 1/2")
    # For d1 beyond the porous-medium transition (possible at delta > 0,
    # where the transition sits at d1*(delta) > 1/2) anchor below it and
    # march d1 upward after the delta continuation.
    d1_anchor = min(d1, 0.48)
    u0, w0, tail = _initial_state("pushed", d1_anchor, grid, pme.c_pm(d1_anchor))
    ref = phase_ref or _phase_ref_from(u0, grid)
    bvp, w_u, w_v, tail, c, rn, iters, cond = _solve_once(
        "pushed", d1_anchor, 0.0, grid, ref, w0, None,
        _Tail("pushed", 0.0, eta=tail.eta, b=tail.b, d1=d1_anchor, c=pme.c_pm(d1_anchor)),
        pme.c_pm(d1_anchor), tol, max_iter)
    if delta == 0.0 and d1_anchor == d1:
        return _pack_pushed(grid, d1, 0.0, c, w_u, w_v, tail, rn, iters, ref, cond)
    sol = _continue_in_delta("pushed", d1_anchor, delta, grid, ref, w_u, None, tail, c,
                             tol, max_iter, delta_step2, start_delta=0.0)
    if d1_anchor == d1:
        return sol
    # march d1 upward with adaptive steps
    d1_cur = d1_anchor
    step = 0.01
    while d1_cur < d1 - 1e-14:
        d1_try = min(d1, d1_cur + step)
        try:
            sol = solve_pushed(d1_try, delta, grid, init=sol, phase_ref=ref,
                               tol=tol, max_iter=_HARD_MAX_ITER)
        except (NewtonDiverged, SingularJacobian, DegenerateDecay):
            if step / 2.0 < 1e-4:
                raise
            step /= 2.0
            continue
        d1_cur = d1_try
        step = min(0.01, step * 2.0)
    return sol


def find_transition(delta, grid=None, bracket=None, *, tol_a=1e-9,
                    max_probes=60, phase_ref=None):
    """Locate d1*(delta): the root of the pulled far-field coefficient a.

    Secant iteration with a bisection safeguard on d1 -> a(d1, delta),
    warm-starting each probe from the previous one.  Returns the root, the
    local slope of a in d1, and the probe count.
    """
    grid = grid or Grid()
    if bracket is None:
        pred = pme.transition_expansion(delta)
        for half in (0.02, 0.05, 0.1):
            lo, hi = _clamp_bracket(pred - half, pred + half, delta)
            try:
                return _find_transition_bracketed(delta, grid, (lo, hi), tol_a,
                                                  max_probes, phase_ref)
            except NoBracket:
                continue
        raise NoBracket(f"no sign change of a around predicted d1* = {pred:.4f}")
    return _find_transition_bracketed(delta, grid, bracket, tol_a, max_probes, phase_ref)


def _clamp_bracket(lo, hi, delta):
    """Keep transition probes clear of the slaving-resonance band in d1.

    For a pulled probe the tail rate is pinned at 1/sqrt(d1), so the band
    |1 - delta^2/d1| < _BAND excludes d1 in (delta^2/(1+_BAND),
    delta^2/(1-_BAND)); probe endpoints falling inside are moved to its
    edge.  If that empties the bracket the search itself sits on the
    resonance and the caller sees the sign-change failure.
    """
    d2 = delta**2
    if d2 == 0.0:
        return lo, hi
    ex_lo, ex_hi = d2 / (1.0 + _BAND), d2 / (1.0 - _BAND)
    if ex_lo < lo < ex_hi:
        lo = ex_hi if hi > ex_hi else lo
    if ex_lo < hi < ex_hi:
        hi = ex_lo if lo < ex_lo else hi
    return lo, hi


def _probe_pulled(d1, delta, grid, init, ref):
    """Warm probe with a cold-start fallback: near the resonance a warm
    Newton can stall where the full march (adaptive steps, band hop) still
    gets through."""
    if init is not None:
        try:
            return solve_pulled(d1, delta, grid, init=init, phase_ref=ref)
        except (NewtonDiverged, SingularJacobian):
            pass
    return solve_pulled(d1, delta, grid, phase_ref=ref)


def _find_transition_bracketed(delta, grid, bracket, tol_a, max_probes, phase_ref):
    d_lo, d_hi = bracket
    sol_lo = solve_pulled(d_lo, delta, grid, phase_ref=phase_ref)
    ref = phase_ref or sol_lo.phase_ref
    sol_hi = _probe_pulled(d_hi, delta, grid, sol_lo, ref)
    a_lo, a_hi = sol_lo.a, sol_hi.a
    if np.sign(a_lo) == np.sign(a_hi):
        raise NoBracket(
            f"a({d_lo:.4f}) = {a_lo:.3e} and a({d_hi:.4f}) = {a_hi:.3e} have equal sign"
        )
    probes = 2
    last = sol_hi
    d_prev, a_prev = d_lo, a_lo
    d_cur, a_cur = d_hi, a_hi
    while probes < max_probes:
        # secant step, safeguarded by the bracket
        d_new = d_cur - a_cur * (d_cur - d_prev) / (a_cur - a_prev)
        if not (d_lo < d_new < d_hi):
            d_new = 0.5 * (d_lo + d_hi)
        sol = _probe_pulled(d_new, delta, grid, last, ref)
        probes += 1
        last = sol
        a_new = sol.a
        if np.sign(a_new) == np.sign(a_lo):
            d_lo = d_new
        else:
            d_hi = d_new
        d_prev, a_prev = d_cur, a_cur
        d_cur, a_cur = d_new, a_new
        if abs(a_new) <= tol_a:
            slope = (a_cur - a_prev) / (d_cur - d_prev) if d_cur != d_prev else np.nan
            return TransitionPoint(delta2=delta**2, d1_star=d_new,
                                   a_slope=float(slope), probes=probes)
    raise NewtonDiverged(f"transition search used {probes} probes without |a| <= {tol_a}")


@dataclass(frozen=True)
class SweepPlan:
    """A monotone one-parameter sweep."""

    vary: str              # "d1" | "delta2"
    start: float
    stop: float
    step: float
    solve: str              # "pushed" | "pulled" | "transition"
    fixed: float = 0.0      # the non-varying parameter (delta2 or d1)

    def values(self):
        if self.step <= 0 or self.stop < self.start:
            return np.array([])
        k = int(np.floor((self.stop - self.start) / self.step + 1e-9)) + 1
        return self.start + self.step * np.arange(k)


def sweep(plan, grid=None, progress=None):
    """Natural-parameter continuation over a sweep plan.

    Each row reuses the previous solution as its initial guess; rows that
    hit the spatial resonance are recorded as gap rows and the sweep
    resumes past them with a fresh initial guess.  Errors never abort the
    sweep; they are recorded per row.
    """
    grid = grid or Grid()
    rows = []
    prev = None
    ref = None
    for val in plan.values():
        if plan.vary == "d1":
            d1, delta2 = float(val), plan.fixed
        else:
            d1, delta2 = plan.fixed, float(val)
        delta = sqrt(delta2)
        row = {"d1": d1, "delta2": delta2, "error": ""}
        try:
            if plan.solve == "transition":
                tp = find_transition(delta, grid, phase_ref=ref)
                row.update(d1_star=tp.d1_star, a_slope=tp.a_slope)
            elif plan.solve == "pushed":
                try:
                    sol = solve_pushed(d1, delta, grid, init=prev)
                except (NewtonDiverged, SingularJacobian):
                    if prev is None:
                        raise
                    sol = solve_pushed(d1, delta, grid)
                prev = sol
                ref = ref or sol.phase_ref
                row.update(c_numeric=sol.c, eta_ps=sol.eta_ps, b=sol.b,
                           residual=sol.residual_norm)
            else:
                try:
                    sol = solve_pulled(d1, delta, grid, init=prev)
                except (NewtonDiverged, SingularJacobian):
                    if prev is None:
                        raise
                    sol = solve_pulled(d1, delta, grid)
                prev = sol
                ref = ref or sol.phase_ref
                row.update(a=sol.a, b=sol.b, residual=sol.residual_norm)
        except ResonanceDetected as exc:
            row["error"] = "resonance"
            row["detail"] = str(exc)
            prev = None  # fresh start past the gap
        except (NewtonDiverged, SingularJacobian, NoBracket, DegenerateDecay,
                DomainError) as exc:
            row["error"] = type(exc).__name__
            row["detail"] = str(exc)
            prev = None
        rows.append(row)
        if progress:
            progress(row)
    return rows


def quadratic_fit(points):
    """Least-squares fit d1*(delta^2) ~ c0 + c1 delta^2 + c2 delta^4.

    Returns ((c0, c1, c2), diagnostics).
    """
    pts = [(float(t), float(d)) for t, d in points]
    if len(pts) < 5:
        raise DomainError("quadratic_fit needs at least 5 points")
    t = np.array([p[0] for p in pts])
    d = np.array([p[1] for p in pts])
    A = np.column_stack([np.ones_like(t), t, t**2])
    # scale columns for a meaningful condition number
    scale = np.linalg.norm(A, axis=0)
    if np.any(scale == 0.0):
        raise IllConditioned("degenerate design matrix (constant column zero)")
    coef_s, res, rank, sv = np.linalg.lstsq(A / scale, d, rcond=None)
    if rank < 3 or sv[0] / sv[-1] > 1e10:
        raise IllConditioned(f"design matrix condition {sv[0]/sv[-1]:.3e}")
    coef = coef_s / scale
    resid = float(np.sqrt(np.mean((A @ coef - d) ** 2)))
    diag = {"rms_residual": resid, "condition": float(sv[0] / sv[-1]), "n": len(pts)}
    return tuple(coef.tolist()), diag
